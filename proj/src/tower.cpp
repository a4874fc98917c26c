#include "cantor/tower.hpp"

#include <algorithm>
#include <set>

namespace cantor {

namespace {

uint64_t pack_word(const Word& w) {
    uint64_t v = 0;
    for (size_t i = 0; i < w.size(); ++i) v = (v << 1) | static_cast<uint64_t>(w.bit(i));
    return v;
}

Word unpack_word(uint64_t v, int len) {
    std::string bits(static_cast<size_t>(len), '0');
    for (int i = 0; i < len; ++i)
        if (v & (1ull << (len - 1 - i))) bits[static_cast<size_t>(i)] = '1';
    return Word(bits);
}

struct BlockRow {
    uint64_t lo, hi;
    Word word;
    bool is_minus;
    Word image;
};

struct Interval {
    uint64_t lo, hi;
};

// [lo, hi) minus the sorted disjoint intervals in `cut`.
std::vector<Interval> subtract_intervals(uint64_t lo, uint64_t hi, const std::vector<Interval>& cut) {
    std::vector<Interval> out;
    uint64_t cur = lo;
    auto it = std::lower_bound(cut.begin(), cut.end(), lo,
                               [](const Interval& c, uint64_t v) { return c.hi <= v; });
    for (; it != cut.end(); ++it) {
        if (it->lo >= hi) break;
        uint64_t a = std::max(it->lo, lo);
        if (a > cur) out.push_back({cur, a});
        cur = std::max(cur, std::min(it->hi, hi));
    }
    if (cur < hi) out.push_back({cur, hi});
    return out;
}

}  // namespace

std::string check_open_loop(const PartialTransformation& t, const OpenLoop& loop) {
    if (loop.blocks.empty()) return "loop has no blocks";
    size_t len = loop.blocks.front().size();
    for (const Word& b : loop.blocks)
        if (b.size() != len) return "loop blocks have unequal lengths";
    std::set<Word> seen(loop.blocks.begin(), loop.blocks.end());
    if (seen.size() != loop.blocks.size()) return "loop blocks not pairwise distinct";
    for (size_t i = 0; i + 1 < loop.blocks.size(); ++i)
        if (t.eval(loop.blocks[i]) != loop.blocks[i + 1])
            return "loop link broken at " + loop.blocks[i].text();
    Word exit = t.eval(loop.blocks.back());
    if (!exit.is_strict_prefix_of(loop.blocks.front()))
        return "loop exit " + exit.text() + " is not a strict prefix of head " +
               loop.blocks.front().text();
    return "";
}

TowerIndex TowerIndex::build(const PartialTransformation& t, uint64_t explicit_cell_cap) {
    TowerIndex ix;
    int depth = static_cast<int>(std::max<size_t>(1, t.max_block_len()));
    if (depth > 62) fail(ErrorKind::Unsupported, "refinement depth exceeds 62 bits");
    ix.depth_ = depth;

    std::vector<BlockRow> rows;
    auto add_rows = [&](const std::map<Word, Word>& m, bool is_minus) {
        for (const auto& [w, img] : m) {
            uint64_t lo = pack_word(w) << (depth - w.size());
            uint64_t hi = lo + (1ull << (depth - w.size()));
            rows.push_back({lo, hi, w, is_minus, img});
        }
    };
    add_rows(t.minus(), true);
    add_rows(t.plus(), false);
    std::sort(rows.begin(), rows.end(), [](const BlockRow& a, const BlockRow& b) { return a.lo < b.lo; });

    auto block_at = [&](uint64_t cell) -> const BlockRow& {
        size_t lo = 0, hi = rows.size();
        while (lo + 1 < hi) {
            size_t mid = (lo + hi) / 2;
            if (rows[mid].lo <= cell)
                lo = mid;
            else
                hi = mid;
        }
        if (cell < rows[lo].lo || cell >= rows[lo].hi)
            fail(ErrorKind::NotPartitioned, "blocks do not cover the space");
        return rows[lo];
    };

    // Image cones of plus blocks, as cell intervals.  These are exactly the
    // cells some other cell maps onto.
    std::vector<Interval> marked;
    for (const auto& [p, img] : t.plus()) {
        uint64_t lo = pack_word(img) << (depth - img.size());
        marked.push_back({lo, lo + (1ull << (depth - img.size()))});
    }
    std::sort(marked.begin(), marked.end(), [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
    for (size_t i = 0; i + 1 < marked.size(); ++i)
        if (marked[i].hi > marked[i + 1].lo)
            fail(ErrorKind::NotPartitioned, "plus images overlap");

    uint64_t explicit_total = 0;
    uint64_t family_total = 0;

    for (const BlockRow& row : rows) {
        std::vector<Interval> free = subtract_intervals(row.lo, row.hi, marked);
        if (row.is_minus) {
            for (const Interval& iv : free) {
                if (iv.lo >= iv.hi) continue;
                if (!(row.image.size() < row.word.size() && row.image.is_prefix_of(row.word)))
                    fail(ErrorKind::NotPartitioned,
                         "minus block " + row.word.text() + " exits to " + row.image.text() +
                             " which is not a strict prefix of itself");
                ix.families_.push_back({iv.lo, iv.hi, row.word});
                family_total += iv.hi - iv.lo;
            }
            continue;
        }
        for (const Interval& iv : free) {
            for (uint64_t start = iv.lo; start < iv.hi; ++start) {
                std::vector<uint64_t> chain;
                uint64_t cur = start;
                while (true) {
                    chain.push_back(cur);
                    if (chain.size() > ix.total_cells())
                        fail(ErrorKind::NotPartitioned, "closed loop detected (chain never exits)");
                    const BlockRow& b = block_at(cur);
                    if (b.is_minus) break;
                    uint64_t suffix = cur & ((1ull << (depth - b.word.size())) - 1);
                    cur = (pack_word(b.image) << (depth - b.image.size())) | suffix;
                }
                const BlockRow& endb = block_at(chain.back());
                uint64_t head = chain.front();
                if (!(endb.image.size() < static_cast<size_t>(depth) &&
                      (head >> (depth - endb.image.size())) == pack_word(endb.image)))
                    fail(ErrorKind::NotPartitioned,
                         "loop exit " + endb.image.text() + " is not a strict prefix of its head");
                explicit_total += chain.size();
                if (explicit_total > explicit_cell_cap)
                    fail(ErrorKind::Unsupported, "tower index exceeds the explicit cell cap");
                int32_t id = static_cast<int32_t>(ix.loops_.size());
                for (size_t i = 0; i < chain.size(); ++i)
                    ix.locate_[chain[i]] = Position{id, i, chain[i]};
                ix.loops_.push_back(std::move(chain));
            }
        }
    }

    std::sort(ix.families_.begin(), ix.families_.end(),
              [](const Family& a, const Family& b) { return a.lo < b.lo; });

    if (explicit_total + family_total != ix.total_cells())
        fail(ErrorKind::NotPartitioned,
             "cells not partitioned into open loops (closed loop or uncovered cell)");
    return ix;
}

Word TowerIndex::cell_word(uint64_t cell) const { return unpack_word(cell, depth_); }

uint64_t TowerIndex::pack(const Word& w) const {
    if (w.size() != static_cast<size_t>(depth_))
        fail(ErrorKind::PreconditionViolated, "cell word must have the index depth");
    return pack_word(w);
}

TowerIndex::Position TowerIndex::locate_cell(uint64_t cell) const {
    auto it = locate_.find(cell);
    if (it != locate_.end()) return it->second;
    // Binary search the families.
    size_t lo = 0, hi = families_.size();
    while (lo < hi) {
        size_t mid = (lo + hi) / 2;
        if (families_[mid].hi <= cell)
            lo = mid + 1;
        else
            hi = mid;
    }
    if (lo < families_.size() && families_[lo].lo <= cell && cell < families_[lo].hi)
        return Position{-1, 0, cell};
    fail(ErrorKind::NotPartitioned, "cell not located in any loop");
}

TowerIndex::Position TowerIndex::locate(const Word& cell_word) const {
    return locate_cell(pack(cell_word));
}

uint64_t TowerIndex::loop_length(const Position& p) const {
    return p.loop >= 0 ? loops_[p.loop].size() : 1;
}

Word TowerIndex::loop_block(const Position& p, uint64_t i) const {
    return cell_word(p.loop >= 0 ? loops_[p.loop][i] : p.cell);
}

Word TowerIndex::loop_head(const Position& p) const { return loop_block(p, 0); }

LoopDecomposition decompose_loops(const PartialTransformation& t, uint64_t cell_cap) {
    auto report = t.audit_proper();
    if (!report.empty())
        fail(ErrorKind::PreconditionViolated,
             "decompose_loops requires a proper transformation (" + report.front().clause + ")");
    TowerIndex ix = TowerIndex::build(t, cell_cap);
    if (ix.total_cells() > cell_cap)
        fail(ErrorKind::Unsupported, "transformation too deep to materialize loops");

    LoopDecomposition out;
    for (const auto& chain : ix.explicit_loops()) {
        OpenLoop loop;
        for (uint64_t c : chain) loop.blocks.push_back(ix.cell_word(c));
        out.loops.push_back(std::move(loop));
    }
    for (const auto& fam : ix.families())
        for (uint64_t c = fam.lo; c < fam.hi; ++c)
            out.loops.push_back(OpenLoop{{ix.cell_word(c)}});
    for (size_t i = 0; i < out.loops.size(); ++i)
        for (size_t j = 0; j < out.loops[i].blocks.size(); ++j)
            out.locate[out.loops[i].blocks[j]] = {i, j};
    return out;
}

namespace {

// The unique same-length predecessor of u under eval, if any.
std::optional<Word> predecessor(const PartialTransformation& t, const Word& u) {
    std::vector<Word> cands;
    for (const auto& [p, img] : t.plus()) {
        if (img.is_prefix_of(u) && p.size() <= u.size()) {
            Word v = p.concat(u.suffix_from(img.size()));
            if (v.size() == u.size() && t.eval(v) == u) cands.push_back(v);
        }
    }
    // Words above every block: strict prefixes of blocks at this length.
    std::set<Word> above;
    auto collect = [&](const std::map<Word, Word>& m) {
        for (const auto& [b, img] : m)
            if (b.size() > u.size()) above.insert(b.prefix(u.size()));
    };
    collect(t.minus());
    collect(t.plus());
    for (const Word& v : above)
        if (!t.is_determined(v) && t.eval(v) == u) cands.push_back(v);

    std::sort(cands.begin(), cands.end());
    cands.erase(std::unique(cands.begin(), cands.end()), cands.end());
    if (cands.size() > 1)
        fail(ErrorKind::NotPartitioned, "word " + u.text() + " has several predecessors");
    if (cands.empty()) return std::nullopt;
    return cands.front();
}

}  // namespace

OpenLoop loop_of_element(const PartialTransformation& t, const Word& w) {
    uint64_t cap = (w.size() >= 62) ? (1ull << 62) : (1ull << w.size());
    std::vector<Word> fwd{w};
    Word cur = w;
    while (true) {
        Word nxt = t.eval(cur);
        if (nxt.size() != cur.size()) break;
        if (nxt == w) fail(ErrorKind::NotPartitioned, "closed loop through " + w.text());
        fwd.push_back(nxt);
        cur = nxt;
        if (fwd.size() > cap) fail(ErrorKind::NotPartitioned, "chain through " + w.text() + " never exits");
    }
    std::vector<Word> back;
    cur = w;
    while (auto pred = predecessor(t, cur)) {
        if (*pred == w) fail(ErrorKind::NotPartitioned, "closed loop through " + w.text());
        back.push_back(*pred);
        cur = *pred;
        if (back.size() > cap) fail(ErrorKind::NotPartitioned, "chain into " + w.text() + " never starts");
    }
    OpenLoop loop;
    for (auto it = back.rbegin(); it != back.rend(); ++it) loop.blocks.push_back(*it);
    loop.blocks.insert(loop.blocks.end(), fwd.begin(), fwd.end());
    std::string err = check_open_loop(t, loop);
    if (!err.empty()) fail(ErrorKind::NotPartitioned, err);
    return loop;
}

Dyadic burden(const PartialTransformation& t, const Word& w) {
    if (!t.is_determined(w) && t.eval(w).size() >= w.size())
        fail(ErrorKind::PreconditionViolated, "burden requires a word inside the loop structure");
    return loop_of_element(t, w).burden();
}

}  // namespace cantor
