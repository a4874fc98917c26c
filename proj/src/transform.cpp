#include "cantor/transform.hpp"

#include <algorithm>

namespace cantor {

// Trie over blocks and images; built once per transformation and shared.
struct PartialTransformation::Index {
    struct Node {
        int32_t child[2] = {-1, -1};
        int8_t block = 0;        // 0 none, 1 minus, 2 plus
        bool plus_image = false; // some plus image ends here
        bool image = false;      // some image (minus or plus) ends here
        int32_t images_below = 0;  // images strictly below this node
    };
    std::vector<Node> nodes;

    int walk_insert(const Word& w) {
        int cur = 0;
        for (size_t i = 0; i < w.size(); ++i) {
            int b = w.bit(i);
            if (nodes[cur].child[b] < 0) {
                nodes[cur].child[b] = static_cast<int32_t>(nodes.size());
                nodes.emplace_back();
            }
            cur = nodes[cur].child[b];
        }
        return cur;
    }

    void add_images_below(const Word& w) {
        int cur = 0;
        for (size_t i = 0; i < w.size(); ++i) {
            nodes[cur].images_below++;
            cur = nodes[cur].child[w.bit(i)];
        }
    }

    explicit Index(const std::map<Word, Word>& minus, const std::map<Word, Word>& plus) {
        nodes.emplace_back();
        for (const auto& [w, img] : minus) nodes[walk_insert(w)].block = 1;
        for (const auto& [w, img] : plus) nodes[walk_insert(w)].block = 2;
        for (const auto& [w, img] : minus) {
            int n = walk_insert(img);
            nodes[n].image = true;
        }
        for (const auto& [w, img] : plus) {
            int n = walk_insert(img);
            nodes[n].image = true;
            nodes[n].plus_image = true;
        }
        for (const auto& [w, img] : minus) add_images_below(img);
        for (const auto& [w, img] : plus) add_images_below(img);
    }
};

const PartialTransformation::Index& PartialTransformation::index() const {
    if (!index_) index_ = std::make_shared<Index>(minus_, plus_);
    return *index_;
}

size_t PartialTransformation::max_block_len() const {
    size_t m = 0;
    for (const auto& [w, img] : minus_) m = std::max(m, w.size());
    for (const auto& [w, img] : plus_) m = std::max(m, w.size());
    return m;
}

std::optional<Word> PartialTransformation::block_of(const Word& w) const {
    const Index& ix = index();
    int cur = 0;
    size_t i = 0;
    while (true) {
        if (ix.nodes[cur].block != 0) return w.prefix(i);
        if (i == w.size()) return std::nullopt;
        int nxt = ix.nodes[cur].child[w.bit(i)];
        if (nxt < 0) return std::nullopt;
        cur = nxt;
        ++i;
    }
}

Word PartialTransformation::eval(const Word& w) const {
    if (auto b = block_of(w)) {
        auto mit = minus_.find(*b);
        if (mit != minus_.end()) return mit->second;
        return plus_.at(*b).concat(w.suffix_from(b->size()));
    }
    // Above all blocks: the meet of the children's values.
    return Word::meet(eval(w.append(0)), eval(w.append(1)));
}

bool PartialTransformation::is_blocked(const Word& w) const {
    const Index& ix = index();
    int cur = 0;
    for (size_t i = 0; i <= w.size(); ++i) {
        if (ix.nodes[cur].plus_image) return true;  // plus image <= w: extensions map above w
        if (i == w.size()) break;
        int nxt = ix.nodes[cur].child[w.bit(i)];
        if (nxt < 0) return false;
        cur = nxt;
    }
    return ix.nodes[cur].images_below > 0;  // some image strictly extends w
}

std::vector<AuditFinding> PartialTransformation::audit_proper() const {
    std::vector<AuditFinding> report;
    std::vector<Word> blocks;
    blocks.reserve(minus_.size() + plus_.size());
    for (const auto& [w, img] : minus_) blocks.push_back(w);
    for (const auto& [w, img] : plus_) blocks.push_back(w);

    // In bitwise-lexicographic order a word precedes all of its extensions,
    // and the shortest extension sits adjacent to it.
    std::vector<Word> sorted = blocks;
    std::sort(sorted.begin(), sorted.end(),
              [](const Word& a, const Word& b) { return a.bits() < b.bits(); });
    for (size_t i = 0; i + 1 < sorted.size(); ++i)
        if (sorted[i].is_prefix_of(sorted[i + 1]))
            report.push_back({"prefix-free", {sorted[i], sorted[i + 1]},
                              "block is a prefix of another"});

    {
        Dyadic total;
        for (const Word& w : blocks) total += cylinder_measure(w);
        if (report.empty() && total != Dyadic::one())
            report.push_back({"cover", {}, "total block measure " + total.text() + " != 1"});
    }

    for (const auto& [w, img] : minus_)
        if (img.size() >= w.size())
            report.push_back({"minus-shorter", {w, img}, "minus image not strictly shorter"});
    for (const auto& [w, img] : plus_)
        if (img.size() != w.size())
            report.push_back({"plus-equal-length", {w, img}, "plus image length differs"});

    // For sigma in T_+ and any other block tau: T(tau) must not extend
    // T(sigma).  Walking sorted image lists keeps this near-linear: every
    // image extending P forms a contiguous lex range starting at P.
    std::vector<std::pair<Word, Word>> plus_images, all_images;  // (image, source)
    for (const auto& [w, img] : plus_) plus_images.push_back({img, w});
    all_images = plus_images;
    for (const auto& [w, img] : minus_) all_images.push_back({img, w});
    auto lex = [](const std::pair<Word, Word>& a, const std::pair<Word, Word>& b) {
        if (a.first.bits() != b.first.bits()) return a.first.bits() < b.first.bits();
        return a.second < b.second;
    };
    std::sort(plus_images.begin(), plus_images.end(), lex);
    std::sort(all_images.begin(), all_images.end(), lex);
    for (const auto& [pimg, p] : plus_images) {
        auto lo = std::lower_bound(all_images.begin(), all_images.end(),
                                   std::make_pair(pimg, Word()), lex);
        for (auto it = lo; it != all_images.end() && pimg.is_prefix_of(it->first); ++it) {
            if (it->second == p && it->first == pimg) continue;
            report.push_back({"image-nesting", {it->second, p},
                              "image of " + it->second.text() + " extends plus image of " +
                                  p.text()});
            if (report.size() > 64) return report;
        }
    }

    // Derived consequence: distinct plus images name disjoint cylinders.
    for (size_t i = 0; i + 1 < plus_images.size(); ++i)
        if (plus_images[i].first.is_prefix_of(plus_images[i + 1].first))
            report.push_back({"plus-image-disjoint",
                              {plus_images[i].second, plus_images[i + 1].second},
                              "plus images share a cylinder"});

    return report;
}

PartialTransformation seed_transformation() {
    std::map<Word, Word> minus;
    minus[Word("0")] = Word::empty();
    minus[Word("1")] = Word::empty();
    return PartialTransformation(std::move(minus), {});
}

}  // namespace cantor
