#include "cantor/diagram.hpp"

#include <algorithm>
#include <sstream>

namespace cantor {

std::string render_diagram(const PartialTransformation& t, DiagramFormat format) {
    LoopDecomposition dec = decompose_loops(t);
    std::vector<const OpenLoop*> loops;
    for (const auto& l : dec.loops) loops.push_back(&l);
    std::sort(loops.begin(), loops.end(),
              [](const OpenLoop* a, const OpenLoop* b) { return a->head() < b->head(); });

    std::ostringstream os;
    if (format == DiagramFormat::Dot) {
        os << "digraph towers {\n  rankdir=BT;\n";
        for (const OpenLoop* l : loops) {
            for (const Word& b : l->blocks) {
                os << "  \"" << b.text() << "\"";
                if (b == l->head()) os << " [peripheries=2]";
                os << ";\n";
            }
            for (const Word& b : l->blocks)
                os << "  \"" << b.text() << "\" -> \"" << t.eval(b).text() << "\";\n";
        }
        os << "}\n";
        return os.str();
    }

    // Ascii: towers side by side, read upwards.
    size_t rows = 0;
    for (const OpenLoop* l : loops) rows = std::max(rows, l->length());
    std::vector<std::vector<std::string>> cols;
    for (const OpenLoop* l : loops) {
        std::vector<std::string> col;
        size_t w = 1;
        for (const Word& b : l->blocks) w = std::max(w, b.text().size());
        w = std::max(w, t.eval(l->exit()).text().size());
        std::string border = "+" + std::string(w + 2, '-') + "+";
        auto boxed = [&](const std::string& s) {
            return "| " + s + std::string(w - s.size(), ' ') + " |";
        };
        // Bottom-to-top: head at the bottom; emit top-first for printing.
        col.push_back(std::string(w + 4, ' '));  // annotation row placeholder
        col[0] = " " + t.eval(l->exit()).text() + std::string(w + 3 - t.eval(l->exit()).text().size(), ' ');
        col.push_back(border);
        for (size_t i = l->length(); i-- > 0;) {
            col.push_back(boxed(l->blocks[i].text()));
            col.push_back(border);
        }
        col.push_back(" width 2^-" + std::to_string(l->head().size()) +
                      std::string(w + 4 > 10 + std::to_string(l->head().size()).size()
                                      ? w + 4 - 10 - std::to_string(l->head().size()).size()
                                      : 0,
                                  ' '));
        cols.push_back(std::move(col));
    }
    size_t height = 0;
    for (const auto& c : cols) height = std::max(height, c.size());
    for (auto& c : cols) {
        size_t w = c[1].size();
        while (c.size() < height) c.insert(c.begin(), std::string(w, ' '));
        for (auto& row : c) row.resize(w, ' ');
    }
    for (size_t r = 0; r < height; ++r) {
        std::string line;
        for (size_t ci = 0; ci < cols.size(); ++ci) {
            if (ci) line += "  ";
            line += cols[ci][r];
        }
        while (!line.empty() && line.back() == ' ') line.pop_back();
        os << line << "\n";
    }
    return os.str();
}

}  // namespace cantor
