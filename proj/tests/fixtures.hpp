#pragma once

#include <random>

#include "cantor/surgery.hpp"

namespace cantor::testing {

// The running two-block example: plus {0 -> 1}, minus {1 -> e}.
inline PartialTransformation make_ta() {
    std::map<Word, Word> minus, plus;
    plus[Word("0")] = Word("1");
    minus[Word("1")] = Word::empty();
    return PartialTransformation(std::move(minus), std::move(plus));
}

inline PartialTransformation from_entries(
    std::initializer_list<std::pair<const char*, const char*>> minus_entries,
    std::initializer_list<std::pair<const char*, const char*>> plus_entries = {}) {
    std::map<Word, Word> minus, plus;
    for (auto& [w, img] : minus_entries) minus[Word::parse(w)] = Word::parse(img);
    for (auto& [w, img] : plus_entries) plus[Word::parse(w)] = Word::parse(img);
    return PartialTransformation(std::move(minus), std::move(plus));
}

struct SurgeryStep {
    std::string op;
    PartialTransformation before;
    PartialTransformation after;
    OpenLoop loop;    // thin variants
    Dyadic eps;
    std::vector<Word> leftover;
};

// One random surgery program from the seed: a mix of even stages, thinning
// (both variants), and lockstep escapes, keeping the depth desk-sized.
// Records each step so invariants can be replayed.
inline std::vector<SurgeryStep> random_surgery_program(std::mt19937_64& rng, size_t max_depth,
                                                       size_t ops) {
    std::vector<SurgeryStep> steps;
    PartialTransformation t = seed_transformation();
    for (size_t i = 0; i < ops; ++i) {
        int pick = static_cast<int>(rng() % 4);
        SurgeryStep step;
        step.before = t;
        try {
            if (pick == 0) {
                if (t.max_block_len() + 1 > max_depth) continue;
                step.op = "even_stage";
                t = even_stage(t);
            } else {
                LoopDecomposition dec = decompose_loops(t);
                const OpenLoop& loop = dec.loops[rng() % dec.loops.size()];
                if (pick == 1 || pick == 2) {
                    size_t m = loop.head().size();
                    size_t extra = 1 + rng() % 2;
                    if (m + extra > max_depth) continue;
                    step.loop = loop;
                    step.eps = Dyadic::pow2(-static_cast<int>(m + extra));
                    if (pick == 1) {
                        step.op = "thin_loop";
                        ThinOutcome out = thin_loop(t, loop, step.eps);
                        t = out.t;
                    } else {
                        step.op = "thin_loop_with_leftover";
                        ThinOutcome out = thin_loop_with_leftover(t, loop, step.eps);
                        step.leftover = out.leftover;
                        t = out.t;
                    }
                } else {
                    // Lockstep a random tower top whose escape fits the shape.
                    const Word& top = loop.exit();
                    if (top.size() < 2 || top.size() > max_depth) continue;
                    auto esc = find_escape(t, top, top.size() - 1);
                    if (!esc) continue;
                    EscapeSequence red = reduce_escape(t, *esc);
                    if (red.elements.size() < 2 ||
                        red.elements[0].size() != red.elements[1].size() + 1)
                        continue;
                    step.op = "lockstep_escape";
                    t = lockstep_escape(t, red).t;
                }
            }
        } catch (const Error& e) {
            if (e.kind() == ErrorKind::PreconditionViolated) continue;  // unlucky pick
            throw;
        }
        step.after = t;
        steps.push_back(std::move(step));
    }
    return steps;
}

// Per-level loop structure: burden of every word at the given length,
// computed by direct chain-following (the independent oracle for burden and
// decompose_loops).
inline std::map<Word, Dyadic> burden_table(const PartialTransformation& t, size_t level) {
    std::map<Word, Word> succ;
    std::map<Word, Word> pred;
    std::vector<Word> words;
    for (uint64_t v = 0; v < (1ull << level); ++v) {
        std::string bits(level, '0');
        for (size_t i = 0; i < level; ++i)
            if (v & (1ull << (level - 1 - i))) bits[i] = '1';
        words.push_back(Word(bits));
    }
    for (const Word& w : words) {
        Word img = t.eval(w);
        if (img.size() == level) {
            succ[w] = img;
            pred[img] = w;
        }
    }
    std::map<Word, Dyadic> out;
    for (const Word& w : words) {
        if (out.count(w)) continue;
        // Walk to the chain start, then sweep the whole chain.
        Word start = w;
        size_t guard = 0;
        while (pred.count(start)) {
            start = pred.at(start);
            if (++guard > (1ull << level)) throw Error(ErrorKind::NotPartitioned, "closed loop");
        }
        std::vector<Word> chain{start};
        while (succ.count(chain.back())) chain.push_back(succ.at(chain.back()));
        Dyadic b = Dyadic(static_cast<long>(chain.size())) * Dyadic::pow2(-static_cast<int>(level));
        for (const Word& c : chain) out[c] = b;
    }
    return out;
}

}  // namespace cantor::testing
