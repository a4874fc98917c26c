#pragma once

#include <optional>

#include "cantor/tower.hpp"

namespace cantor {

// An escape route sigma_0, ..., sigma_n: each element extends the previous
// image (exactly, when the element is blocked), all elements after sigma_0
// share one length, and the final image is empty.
struct EscapeSequence {
    std::vector<Word> elements;
    bool reduced = false;

    const Word& start() const { return elements.front(); }
    const Word& last() const { return elements.back(); }
    size_t height() const { return elements.size(); }
};

// Empty string when `e` satisfies every escape-sequence clause for t.
std::string check_escape(const PartialTransformation& t, const EscapeSequence& e);
bool is_reduced_escape(const PartialTransformation& t, const EscapeSequence& e);

// Breadth-first search for an escape sequence for w, elements of length at
// most depth_bound.  Smallest element length first, then shortest sequence,
// ties broken lexicographically.  nullopt means none within the bound.
std::optional<EscapeSequence> find_escape(const PartialTransformation& t, const Word& w,
                                          size_t depth_bound);

// Deletes elements per the two reduction rules until a reduced subsequence
// for the same sigma_0 remains.
EscapeSequence reduce_escape(const PartialTransformation& t, const EscapeSequence& e);

// Appends rho to every element except sigma_0.
EscapeSequence widen_escape(const PartialTransformation& t, const EscapeSequence& e, const Word& rho);

struct ThinOutcome {
    PartialTransformation t;
    Word head;                  // first block of the thinned loop
    Word exit;                  // last block (carries the exit image)
    size_t cell_len = 0;        // new block length n (width 2^-n)
    uint64_t block_count = 0;
    std::vector<Word> leftover; // untouched strips (with-leftover variant)
};

// Refines `loop` to width eps = 2^-n by interleaved restacking; the loop's
// cylinder union is unchanged.
ThinOutcome thin_loop(const PartialTransformation& t, const OpenLoop& loop, const Dyadic& eps,
                      bool deep_audit = true);

// Same, but the all-ones strip of each block stays outside the new loop.
ThinOutcome thin_loop_with_leftover(const PartialTransformation& t, const OpenLoop& loop,
                                    const Dyadic& eps, bool deep_audit = true);

struct LockstepOutcome {
    PartialTransformation t;
    Word chain_end;  // the final minus cell (empty image) after the splice
};

// Extends the tower through a reduced escape sequence with |sigma_0| =
// |sigma_1| + 1: sigma_0 maps to sigma_1^0 and each sigma_i^0 to
// sigma_{i+1}^0, consuming the 0-half strip of every element.
LockstepOutcome lockstep_escape(const PartialTransformation& t, const EscapeSequence& e,
                                bool deep_audit = true);

// One totalization step: every minus block splits; the 0-child keeps its
// image, the 1-child's image grows one bit toward its loop head.
PartialTransformation even_stage(const PartialTransformation& t);

// Measure of the region whose image is still empty (the words eval maps to
// the empty word), as a cylinder set.
Dyadic empty_image_measure(const PartialTransformation& t);

// Block-map editing helper shared by the surgery operations.
class Editor {
public:
    explicit Editor(const PartialTransformation& t) : minus_(t.minus()), plus_(t.plus()) {}

    // Refines blocks so `cell` becomes a block itself, inheriting behavior.
    void expose(const Word& cell);
    // Removes every block at or below `region` (caller re-covers the region).
    // Returns the removed blocks with their entry kind.
    std::vector<std::pair<Word, bool>> clear_region(const Word& region);  // (block, is_minus)

    bool has_block(const Word& w) const { return minus_.count(w) || plus_.count(w); }
    void set_minus(const Word& w, const Word& img) { minus_[w] = img; }
    void set_plus(const Word& w, const Word& img) { plus_[w] = img; }
    void erase_block(const Word& w) {
        minus_.erase(w);
        plus_.erase(w);
    }
    Word eval_current(const Word& w) const { return freeze().eval(w); }

    PartialTransformation freeze() const { return PartialTransformation(minus_, plus_); }

private:
    std::map<Word, Word> minus_, plus_;
};

// Internal: validated freeze — audits propriety and the loop partition,
// failing StateCorrupt on violation.  Surgery outputs all pass through this.
PartialTransformation freeze_checked(const Editor& ed, const std::string& op,
                                     bool deep_audit = true);

}  // namespace cantor
