#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "cantor/cylinder.hpp"
#include "cantor/word.hpp"

namespace cantor {

struct AuditFinding {
    std::string clause;
    std::vector<Word> words;
    std::string detail;
};

// A proper partial transformation given by the finite block sets T_- and T_+
// with their images.  T_- blocks are tower tops (strictly shorter images),
// T_+ blocks map rigidly (equal-length images).  Immutable after
// construction; surgery builds new values.
class PartialTransformation {
public:
    PartialTransformation() = default;
    PartialTransformation(std::map<Word, Word> minus, std::map<Word, Word> plus)
        : minus_(std::move(minus)), plus_(std::move(plus)) {}

    const std::map<Word, Word>& minus() const { return minus_; }
    const std::map<Word, Word>& plus() const { return plus_; }
    size_t block_count() const { return minus_.size() + plus_.size(); }
    size_t max_block_len() const;

    // The unique block (element of T_- u T_+) that is a prefix of w, if any.
    std::optional<Word> block_of(const Word& w) const;
    bool is_determined(const Word& w) const { return block_of(w).has_value(); }

    // Monotone evaluation, total on all words: determined words evaluate via
    // their block; words above every block evaluate to the meet of their
    // children's values.
    Word eval(const Word& w) const;

    // w is blocked iff some evaluable word's image strictly extends w.
    bool is_blocked(const Word& w) const;

    std::vector<AuditFinding> audit_proper() const;

    bool operator==(const PartialTransformation& o) const {
        return minus_ == o.minus_ && plus_ == o.plus_;
    }

private:
    struct Index;
    const Index& index() const;

    std::map<Word, Word> minus_;
    std::map<Word, Word> plus_;
    mutable std::shared_ptr<Index> index_;
};

// The standard seed: minus = {0 -> e, 1 -> e}, plus empty.
PartialTransformation seed_transformation();

}  // namespace cantor
