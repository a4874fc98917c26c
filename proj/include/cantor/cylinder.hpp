#pragma once

#include <vector>

#include "cantor/word.hpp"

namespace cantor {

// A clopen subset of Cantor space stored as a normalized antichain of
// generator words: no generator is a prefix of another, complete sibling
// pairs are merged, generators sorted shortlex.  Equal sets have equal
// representations.
class CylinderSet {
public:
    CylinderSet() = default;
    explicit CylinderSet(std::vector<Word> gens) { assign(std::move(gens)); }
    static CylinderSet whole_space() { return CylinderSet({Word::empty()}); }

    const std::vector<Word>& generators() const { return gens_; }
    bool empty() const { return gens_.empty(); }
    Dyadic measure() const;

    bool contains_point_prefix(const Word& w) const;  // some generator is a prefix of w
    bool contains_cylinder(const Word& w) const;      // [w] subseteq set
    bool intersects(const Word& w) const;             // [w] meets set

    CylinderSet unite(const CylinderSet& o) const;
    CylinderSet subtract(const CylinderSet& o) const;
    CylinderSet intersect(const CylinderSet& o) const;
    CylinderSet subtract_word(const Word& w) const { return subtract(CylinderSet({w})); }
    bool disjoint(const CylinderSet& o) const { return intersect(o).empty(); }

    bool operator==(const CylinderSet& o) const { return gens_ == o.gens_; }
    bool operator!=(const CylinderSet& o) const { return gens_ != o.gens_; }

private:
    void assign(std::vector<Word> gens);

    std::vector<Word> gens_;
};

}  // namespace cantor
