#include "cantor/word.hpp"

#include <algorithm>

namespace cantor {

Word Word::parse(const std::string& text) {
    if (text == "e") return Word();
    return Word(text);
}

Word Word::meet(const Word& a, const Word& b) {
    size_t n = std::min(a.size(), b.size());
    size_t i = 0;
    while (i < n && a.bits_[i] == b.bits_[i]) ++i;
    return a.prefix(i);
}

Word Word::increment() const {
    std::string out = bits_;
    for (size_t i = out.size(); i-- > 0;) {
        if (out[i] == '0') {
            out[i] = '1';
            return Word(out);
        }
        out[i] = '0';
    }
    return Word(out);
}

bool Word::all_ones() const {
    return !bits_.empty() && bits_.find('0') == std::string::npos;
}

bool Word::all_zeros() const {
    return !bits_.empty() && bits_.find('1') == std::string::npos;
}

PrefixRelation prefix_relation(const Word& a, const Word& b) {
    if (a == b) return PrefixRelation::Equal;
    if (a.is_prefix_of(b)) return PrefixRelation::AStrictPrefixOfB;
    if (b.is_prefix_of(a)) return PrefixRelation::BStrictPrefixOfA;
    return PrefixRelation::Incomparable;
}

bool is_prefix_free(const std::vector<Word>& words) {
    for (size_t i = 0; i < words.size(); ++i)
        for (size_t j = 0; j < words.size(); ++j)
            if (i != j && words[i].is_prefix_of(words[j])) return false;
    return true;
}

bool is_prefix_free_cover(const std::vector<Word>& words) {
    if (!is_prefix_free(words)) return false;
    Dyadic total;
    for (const Word& w : words) total += cylinder_measure(w);
    return total == Dyadic::one();
}

}  // namespace cantor
