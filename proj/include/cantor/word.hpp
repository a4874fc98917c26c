#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "cantor/dyadic.hpp"
#include "cantor/errors.hpp"

namespace cantor {

// A finite binary word, most-significant-bit first.  Names the cylinder
// [w] of measure 2^-|w|.  Text form uses '0'/'1' characters with "e" for
// the empty word.
class Word {
public:
    Word() = default;
    explicit Word(std::string bits) : bits_(std::move(bits)) { validate(); }

    static Word empty() { return Word(); }
    static Word parse(const std::string& text);

    size_t size() const { return bits_.size(); }
    bool is_empty() const { return bits_.empty(); }
    int bit(size_t i) const { return bits_[i] - '0'; }
    const std::string& bits() const { return bits_; }

    Word concat(const Word& o) const { return Word(bits_ + o.bits_); }
    Word append(int b) const { return Word(bits_ + static_cast<char>('0' + b)); }
    Word prefix(size_t len) const { return Word(bits_.substr(0, len)); }
    Word suffix_from(size_t pos) const { return Word(bits_.substr(pos)); }

    bool is_prefix_of(const Word& o) const {
        return size() <= o.size() && o.bits_.compare(0, size(), bits_) == 0;
    }
    bool is_strict_prefix_of(const Word& o) const {
        return size() < o.size() && is_prefix_of(o);
    }
    bool comparable(const Word& o) const {
        return is_prefix_of(o) || o.is_prefix_of(*this);
    }

    static Word meet(const Word& a, const Word& b);

    // +1 on the bit pattern, most-significant-bit-first, with carry discarded
    // past the top (the all-ones word wraps to all zeros).
    Word increment() const;
    bool all_ones() const;
    bool all_zeros() const;

    std::string text() const { return bits_.empty() ? "e" : bits_; }

    bool operator==(const Word& o) const { return bits_ == o.bits_; }
    bool operator!=(const Word& o) const { return bits_ != o.bits_; }
    // Shortlex: sane deterministic ordering for fixtures and serialization.
    bool operator<(const Word& o) const {
        if (size() != o.size()) return size() < o.size();
        return bits_ < o.bits_;
    }

private:
    void validate() const {
        for (char c : bits_)
            if (c != '0' && c != '1') fail(ErrorKind::ParseError, "bad word bit: " + bits_);
    }

    std::string bits_;
};

enum class PrefixRelation {
    AStrictPrefixOfB,
    Equal,
    BStrictPrefixOfA,
    Incomparable,
};

PrefixRelation prefix_relation(const Word& a, const Word& b);

// lambda([w]) = 2^-|w|
inline Dyadic cylinder_measure(const Word& w) {
    return Dyadic::pow2(-static_cast<int>(w.size()));
}

bool is_prefix_free(const std::vector<Word>& words);
bool is_prefix_free_cover(const std::vector<Word>& words);

struct WordHash {
    size_t operator()(const Word& w) const { return std::hash<std::string>()(w.bits()); }
};

}  // namespace cantor
