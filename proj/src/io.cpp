#include "cantor/io.hpp"

#include <fstream>
#include <sstream>

namespace cantor {

namespace {

std::vector<std::string> split_ws(const std::string& line) {
    std::vector<std::string> out;
    std::istringstream is(line);
    std::string tok;
    while (is >> tok) out.push_back(tok);
    return out;
}

}  // namespace

std::string serialize_pt(const PartialTransformation& t) {
    std::ostringstream os;
    os << "PT v1\n";
    std::vector<std::pair<Word, std::pair<bool, Word>>> rows;
    for (const auto& [w, img] : t.minus()) rows.push_back({w, {true, img}});
    for (const auto& [w, img] : t.plus()) rows.push_back({w, {false, img}});
    std::sort(rows.begin(), rows.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    for (const auto& [w, entry] : rows)
        os << (entry.first ? "- " : "+ ") << w.text() << " " << entry.second.text() << "\n";
    return os.str();
}

PartialTransformation parse_pt(const std::string& text) {
    std::istringstream is(text);
    std::string line;
    if (!std::getline(is, line) || line != "PT v1")
        fail(ErrorKind::ParseError, "transformation file must start with 'PT v1'");
    std::map<Word, Word> minus, plus;
    size_t lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty()) continue;
        auto toks = split_ws(line);
        if (toks.size() != 3 || (toks[0] != "-" && toks[0] != "+"))
            fail(ErrorKind::ParseError, "bad block line " + std::to_string(lineno));
        Word src = Word::parse(toks[1]);
        Word img = Word::parse(toks[2]);
        if (minus.count(src) || plus.count(src))
            fail(ErrorKind::ParseError, "duplicate source word " + src.text());
        if (toks[0] == "-")
            minus[src] = img;
        else
            plus[src] = img;
    }
    return PartialTransformation(std::move(minus), std::move(plus));
}

std::string serialize_mlt(const TestEnumeration& e) {
    std::ostringstream os;
    os << "MLT v1\n";
    for (const TestEvent& ev : e.events)
        os << ev.stage << " " << ev.level << " " << ev.word.text() << "\n";
    return os.str();
}

TestEnumeration parse_mlt(const std::string& text) {
    std::istringstream is(text);
    std::string line;
    if (!std::getline(is, line) || line != "MLT v1")
        fail(ErrorKind::ParseError, "enumeration file must start with 'MLT v1'");
    TestEnumeration e;
    size_t lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty()) continue;
        auto toks = split_ws(line);
        if (toks.size() != 3) fail(ErrorKind::ParseError, "bad event line " + std::to_string(lineno));
        TestEvent ev;
        ev.stage = std::stoull(toks[0]);
        ev.level = std::stoull(toks[1]);
        ev.word = Word::parse(toks[2]);
        e.events.push_back(ev);
    }
    return e;
}

std::string serialize_checkpoint(const ConstructionState& st) {
    std::ostringstream os;
    os << serialize_pt(st.transformation);
    os << "LEDGER v1\n";
    os << "stage " << st.stage << "\n";
    os << "seedbit " << st.seed_bit << "\n";
    os << "escdepth " << st.escape_depth_bound << "\n";
    auto emit_parts = [&](const char* tag, const std::map<uint64_t, CylinderSet>& parts) {
        for (const auto& [k, set] : parts)
            for (const Word& w : set.generators()) os << tag << " " << k << " " << w.text() << "\n";
    };
    emit_parts("W", st.ledger.w_parts);
    emit_parts("A", st.ledger.a_parts);
    emit_parts("B", st.ledger.b_parts);
    for (const auto& [k, d] : st.ledger.a_budget) os << "abud " << k << " " << d.text() << "\n";
    for (const auto& [k, d] : st.ledger.b_budget) os << "bbud " << k << " " << d.text() << "\n";
    for (const auto& [region, level] : st.ledger.watch)
        for (const Word& w : region.generators()) os << "watch " << w.text() << " " << level << "\n";
    return os.str();
}

ConstructionState parse_checkpoint(const std::string& text) {
    auto split_at = text.find("LEDGER v1\n");
    if (split_at == std::string::npos)
        fail(ErrorKind::ParseError, "checkpoint lacks a 'LEDGER v1' section");
    ConstructionState st;
    st.transformation = parse_pt(text.substr(0, split_at));

    std::istringstream is(text.substr(split_at));
    std::string line;
    std::getline(is, line);  // header
    std::map<uint64_t, std::vector<Word>> w_words, a_words, b_words;
    std::map<uint64_t, std::vector<Word>> watch_words;
    size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty()) continue;
        auto toks = split_ws(line);
        auto need = [&](size_t n) {
            if (toks.size() != n) fail(ErrorKind::ParseError, "bad ledger line: " + line);
        };
        if (toks[0] == "stage") {
            need(2);
            st.stage = std::stoull(toks[1]);
        } else if (toks[0] == "seedbit") {
            need(2);
            st.seed_bit = std::stoi(toks[1]);
        } else if (toks[0] == "escdepth") {
            need(2);
            st.escape_depth_bound = std::stoull(toks[1]);
        } else if (toks[0] == "W" || toks[0] == "A" || toks[0] == "B") {
            need(3);
            uint64_t k = std::stoull(toks[1]);
            Word w = Word::parse(toks[2]);
            (toks[0] == "W" ? w_words : toks[0] == "A" ? a_words : b_words)[k].push_back(w);
        } else if (toks[0] == "abud") {
            need(3);
            st.ledger.a_budget[std::stoull(toks[1])] = Dyadic::parse(toks[2]);
        } else if (toks[0] == "bbud") {
            need(3);
            st.ledger.b_budget[std::stoull(toks[1])] = Dyadic::parse(toks[2]);
        } else if (toks[0] == "watch") {
            need(3);
            watch_words[std::stoull(toks[2])].push_back(Word::parse(toks[1]));
        } else {
            fail(ErrorKind::ParseError, "unknown ledger line: " + line);
        }
    }
    for (auto& [k, ws] : w_words) st.ledger.w_parts[k] = CylinderSet(ws);
    for (auto& [k, ws] : a_words) st.ledger.a_parts[k] = CylinderSet(ws);
    for (auto& [k, ws] : b_words) st.ledger.b_parts[k] = CylinderSet(ws);
    for (auto& [level, ws] : watch_words) st.ledger.watch.push_back({CylinderSet(ws), level});

    std::vector<Word> target;
    for (uint64_t k = 0; k < 16; ++k) target.push_back(component_a_address(st.seed_bit, k));
    st.target_set = ClopenSet(std::move(target));
    return st;
}

std::string trace_csv(const AverageTrace& trace) {
    std::ostringstream os;
    os << "step,average_num,average_den2exp,in_set\n";
    for (uint64_t i = 0; i < trace.size(); ++i) {
        uint64_t c = trace.count_through(i);
        os << i << "," << c << ",0," << (trace.step_bit(i) ? 1 : 0) << "\n";
    }
    return os.str();
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorKind::ParseError, "cannot read " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorKind::ParseError, "cannot write " + path);
    out << content;
}

}  // namespace cantor
