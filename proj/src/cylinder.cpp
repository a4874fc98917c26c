#include "cantor/cylinder.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace cantor {

namespace {

// Recursive set algebra on the binary tree.  Operand sets are antichains;
// results are emitted as (possibly denormalizable) word lists.
void subtract_rec(const Word& cyl, const std::vector<Word>& minus, std::vector<Word>& out) {
    bool covered = false;
    std::vector<Word> below;
    for (const Word& m : minus) {
        if (m.is_prefix_of(cyl)) {
            covered = true;
            break;
        }
        if (cyl.is_strict_prefix_of(m)) below.push_back(m);
    }
    if (covered) return;
    if (below.empty()) {
        out.push_back(cyl);
        return;
    }
    subtract_rec(cyl.append(0), below, out);
    subtract_rec(cyl.append(1), below, out);
}

}  // namespace

void CylinderSet::assign(std::vector<Word> gens) {
    // Drop words covered by a (weak) prefix already present.
    std::sort(gens.begin(), gens.end());
    std::vector<Word> keep;
    for (const Word& w : gens) {
        bool covered = false;
        for (const Word& k : keep)
            if (k.is_prefix_of(w)) {
                covered = true;
                break;
            }
        if (!covered) keep.push_back(w);
    }
    // Merge complete sibling pairs until stable.
    std::set<Word> s(keep.begin(), keep.end());
    bool changed = true;
    while (changed) {
        changed = false;
        for (auto it = s.begin(); it != s.end(); ++it) {
            const Word& w = *it;
            if (w.is_empty() || w.bit(w.size() - 1) != 0) continue;
            Word sib = w.prefix(w.size() - 1).append(1);
            if (s.count(sib)) {
                Word parent = w.prefix(w.size() - 1);
                s.erase(sib);
                s.erase(w);
                s.insert(parent);
                changed = true;
                break;
            }
        }
    }
    gens_.assign(s.begin(), s.end());
    std::sort(gens_.begin(), gens_.end());
}

Dyadic CylinderSet::measure() const {
    Dyadic total;
    for (const Word& w : gens_) total += cylinder_measure(w);
    return total;
}

bool CylinderSet::contains_point_prefix(const Word& w) const {
    for (const Word& g : gens_)
        if (g.is_prefix_of(w)) return true;
    return false;
}

bool CylinderSet::contains_cylinder(const Word& w) const {
    if (contains_point_prefix(w)) return true;
    // [w] could be covered by several longer generators.
    CylinderSet rest = CylinderSet({w}).subtract(*this);
    return rest.empty();
}

bool CylinderSet::intersects(const Word& w) const {
    for (const Word& g : gens_)
        if (g.comparable(w)) return true;
    return false;
}

CylinderSet CylinderSet::unite(const CylinderSet& o) const {
    std::vector<Word> all = gens_;
    all.insert(all.end(), o.gens_.begin(), o.gens_.end());
    return CylinderSet(std::move(all));
}

CylinderSet CylinderSet::subtract(const CylinderSet& o) const {
    std::vector<Word> out;
    for (const Word& g : gens_) subtract_rec(g, o.gens_, out);
    return CylinderSet(std::move(out));
}

CylinderSet CylinderSet::intersect(const CylinderSet& o) const {
    std::vector<Word> out;
    for (const Word& a : gens_)
        for (const Word& b : o.gens_) {
            if (a.is_prefix_of(b))
                out.push_back(b);
            else if (b.is_prefix_of(a))
                out.push_back(a);
        }
    return CylinderSet(std::move(out));
}

}  // namespace cantor
