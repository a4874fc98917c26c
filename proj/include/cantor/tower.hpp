#pragma once

#include <cstdint>
#include <unordered_map>
#include <vector>

#include "cantor/transform.hpp"

namespace cantor {

// An open loop: equal-length blocks chained by the transformation, with the
// exit image a strict prefix of the first block.
struct OpenLoop {
    std::vector<Word> blocks;

    size_t length() const { return blocks.size(); }
    const Word& head() const { return blocks.front(); }
    const Word& exit() const { return blocks.back(); }
    Dyadic width() const { return cylinder_measure(blocks.front()); }
    Dyadic burden() const { return Dyadic(BigInt(blocks.size()), 0) * width(); }
    CylinderSet cylinder_union() const { return CylinderSet(blocks); }
};

// Checks the open-loop clauses for `loop` against T; returns an explanation
// for the first violated clause, empty string if valid.
std::string check_open_loop(const PartialTransformation& t, const OpenLoop& loop);

// Scalable loop structure of a proper transformation at the common refinement
// depth (max block length).  Cells are packed depth-bit integers.  Loops that
// pass through some plus block are materialized ("explicit"); the rest of the
// space consists of single-cell loops inside minus blocks, stored as interval
// families.  Throws NotPartitioned when T is not partitioned into open loops.
class TowerIndex {
public:
    struct Family {
        uint64_t lo, hi;  // cell interval [lo, hi)
        Word block;       // containing minus block
    };

    struct Position {
        int32_t loop = -1;  // explicit loop id, or -1 for a singleton cell
        uint64_t index = 0; // position within the loop
        uint64_t cell = 0;  // packed cell
    };

    TowerIndex() = default;
    static TowerIndex build(const PartialTransformation& t, uint64_t explicit_cell_cap = (1ull << 24));

    int depth() const { return depth_; }
    uint64_t total_cells() const { return depth_ >= 0 ? (1ull << depth_) : 0; }
    const std::vector<std::vector<uint64_t>>& explicit_loops() const { return loops_; }
    const std::vector<Family>& families() const { return families_; }

    Word cell_word(uint64_t cell) const;
    uint64_t pack(const Word& w) const;  // w must have length <= depth; padded with 0s? no: exact length required

    Position locate(const Word& cell_word) const;
    Position locate_cell(uint64_t cell) const;

    // Loop view for a position: number of blocks and the block at offset i.
    uint64_t loop_length(const Position& p) const;
    Word loop_block(const Position& p, uint64_t i) const;
    Word loop_head(const Position& p) const;
    uint64_t loop_cell(const Position& p, uint64_t i) const {
        return p.loop >= 0 ? loops_[p.loop][i] : p.cell;
    }

private:
    int depth_ = -1;
    std::vector<std::vector<uint64_t>> loops_;
    std::unordered_map<uint64_t, Position> locate_;
    std::vector<Family> families_;  // sorted by lo
};

struct LoopDecomposition {
    std::vector<OpenLoop> loops;
    // word (a loop block) -> (loop id, index)
    std::unordered_map<Word, std::pair<size_t, size_t>, WordHash> locate;
};

// Refines to the common depth and materializes every loop.  Intended for
// desk-size transformations; throws Unsupported past `cell_cap` cells.
LoopDecomposition decompose_loops(const PartialTransformation& t, uint64_t cell_cap = (1ull << 20));

// The open loop containing w as an element (at w's own length), per the
// partition-into-open-loops structure.  Requires w determined.
OpenLoop loop_of_element(const PartialTransformation& t, const Word& w);

// Burden of w: (block count of the loop containing w) x (loop width) — the
// measure of the loop's cylinder union.
Dyadic burden(const PartialTransformation& t, const Word& w);

}  // namespace cantor
