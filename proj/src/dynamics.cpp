#include "cantor/dynamics.hpp"

#include <algorithm>
#include <atomic>
#include <thread>

namespace cantor {

namespace {

uint64_t splitmix64(uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

}  // namespace

Word OrbitPoint::stream_prefix(size_t len) const {
    std::string bits;
    bits.reserve(len);
    for (size_t i = 0; i < len; ++i) bits.push_back(static_cast<char>('0' + stream_bit(i)));
    return Word(bits);
}

OrbitPoint parse_point(const std::string& text) {
    auto colon = text.find(':');
    if (colon == std::string::npos)
        fail(ErrorKind::ParseError, "point must be <prefix>:<period>, got " + text);
    OrbitPoint p{Word::parse(text.substr(0, colon)), Word::parse(text.substr(colon + 1))};
    if (p.period.is_empty()) fail(ErrorKind::ParseError, "point period must be nonempty");
    return p;
}

bool point_in(const ClopenSet& f, const OrbitPoint& p) {
    for (const Word& g : f.generators()) {
        bool match = true;
        for (size_t i = 0; i < g.size() && match; ++i) match = (g.bit(i) == p.stream_bit(i));
        if (match) return true;
    }
    return false;
}

OrbitPoint step(const PartialTransformation& t, const OrbitPoint& p) {
    size_t need = std::max(t.max_block_len(), p.prefix.size());
    Word w = p.stream_prefix(need);
    auto b = t.block_of(w);
    if (!b)
        fail(ErrorKind::OrbitUndefined,
             "point " + w.text() + "... is not determined at depth " + std::to_string(need));
    auto mit = t.minus().find(*b);
    if (mit != t.minus().end())
        fail(ErrorKind::OrbitUndefined, "image stays finite: block " + b->text() +
                                            " maps to " + mit->second.text());
    Word img = t.plus().at(*b).concat(w.suffix_from(b->size()));
    size_t consumed = need > p.prefix.size() ? need - p.prefix.size() : 0;
    size_t c = consumed % p.period.size();
    Word rotated = p.period.suffix_from(c).concat(p.period.prefix(c));
    return OrbitPoint{img, rotated};
}

AverageTrace AverageTrace::from_values(std::vector<Rational> values) {
    AverageTrace tr;
    tr.values_ = std::move(values);
    tr.size_ = tr.values_.size();
    return tr;
}

void AverageTrace::push_run(bool in_set, uint64_t n) {
    if (n == 0) return;
    if (!values_.empty()) fail(ErrorKind::Unsupported, "cannot append bits to a value trace");
    if (!runs_.empty() && runs_.back().bit == in_set) {
        runs_.back().len += n;
    } else {
        runs_.push_back({in_set, size_, n, ones_});
    }
    size_ += n;
    if (in_set) ones_ += n;
}

uint64_t AverageTrace::count_through(uint64_t i) const {
    size_t lo = 0, hi = runs_.size();
    while (lo + 1 < hi) {
        size_t mid = (lo + hi) / 2;
        if (runs_[mid].start <= i)
            lo = mid;
        else
            hi = mid;
    }
    const Run& r = runs_[lo];
    return r.count_before + (r.bit ? (i - r.start + 1) : 0);
}

Rational AverageTrace::value(uint64_t i) const {
    if (i >= size_) fail(ErrorKind::PreconditionViolated, "trace index out of range");
    if (!values_.empty()) return values_[i];
    return Rational(BigInt(count_through(i)), BigInt(i + 1));
}

bool AverageTrace::step_bit(uint64_t i) const {
    if (values_.empty()) {
        size_t lo = 0, hi = runs_.size();
        while (lo + 1 < hi) {
            size_t mid = (lo + hi) / 2;
            if (runs_[mid].start <= i)
                lo = mid;
            else
                hi = mid;
        }
        return runs_[lo].bit;
    }
    fail(ErrorKind::Unsupported, "value trace has no membership bits");
}

namespace {

constexpr uint64_t kNone = ~0ull;

// value(i) < alpha within an indicator run is monotone, so each run needs at
// most one binary search.
uint64_t seek_indicator(const AverageTrace& tr, uint64_t from, const Rational& bound, bool below) {
    auto pred = [&](uint64_t i) {
        Rational v = tr.value(i);
        return below ? (v < bound) : (v > bound);
    };
    const auto& runs = tr.runs();
    if (from >= tr.size()) return kNone;
    size_t ri = 0;
    {
        size_t lo = 0, hi = runs.size();
        while (lo + 1 < hi) {
            size_t mid = (lo + hi) / 2;
            if (runs[mid].start <= from)
                lo = mid;
            else
                hi = mid;
        }
        ri = lo;
    }
    for (; ri < runs.size(); ++ri) {
        uint64_t s = std::max(from, runs[ri].start);
        uint64_t e = runs[ri].start + runs[ri].len - 1;
        if (s > e) continue;
        if (pred(s)) return s;
        // Within the run the average tends toward the bit value; only one
        // direction of predicate can newly become true.
        bool can_flip = below ? !runs[ri].bit : runs[ri].bit;
        if (can_flip && pred(e)) {
            uint64_t lo = s, hi = e;  // pred(lo) false, pred(hi) true
            while (lo + 1 < hi) {
                uint64_t mid = lo + (hi - lo) / 2;
                if (pred(mid))
                    hi = mid;
                else
                    lo = mid;
            }
            return hi;
        }
    }
    return kNone;
}

uint64_t seek_values(const AverageTrace& tr, uint64_t from, const Rational& bound, bool below) {
    for (uint64_t i = from; i < tr.size(); ++i) {
        Rational v = tr.value(i);
        if (below ? (v < bound) : (v > bound)) return i;
    }
    return kNone;
}

uint64_t seek(const AverageTrace& tr, uint64_t from, const Rational& bound, bool below) {
    if (tr.size() == 0 || from >= tr.size()) return kNone;
    return tr.indicator_backed() ? seek_indicator(tr, from, bound, below)
                                 : seek_values(tr, from, bound, below);
}

uint64_t greedy_upcrossings(const AverageTrace& down, const AverageTrace& up, const Rational& alpha,
                            const Rational& beta, uint64_t start) {
    uint64_t count = 0;
    uint64_t pos = start;
    while (true) {
        uint64_t u = seek(down, pos, alpha, true);
        if (u == kNone) break;
        uint64_t v = seek(up, u + 1, beta, false);
        if (v == kNone) break;
        ++count;
        pos = v + 1;
    }
    return count;
}

}  // namespace

uint64_t count_upcrossings(const AverageTrace& trace, const Rational& alpha, const Rational& beta) {
    if (!(alpha < beta)) fail(ErrorKind::BadThresholds, "upcrossings need alpha < beta");
    return greedy_upcrossings(trace, trace, alpha, beta, 0);
}

uint64_t count_loose_upcrossings(const AverageTrace& f_trace, const AverageTrace& fh_trace,
                                 const Rational& alpha, const Rational& beta) {
    if (!(alpha < beta)) fail(ErrorKind::BadThresholds, "upcrossings need alpha < beta");
    if (f_trace.size() != fh_trace.size())
        fail(ErrorKind::TraceMismatch, "trace lengths differ");
    for (uint64_t i = 0; i < f_trace.size(); ++i)
        if (fh_trace.value(i) < f_trace.value(i))
            fail(ErrorKind::TraceMismatch, "perturbed averages fall below the base averages");
    return greedy_upcrossings(f_trace, fh_trace, alpha, beta, 0);
}

bool loose_to_strict_check(const AverageTrace& f_trace, const AverageTrace& h_trace,
                           const Rational& alpha, const Rational& beta, const Rational& delta,
                           uint64_t n) {
    if (!(alpha < beta)) fail(ErrorKind::BadThresholds, "upcrossings need alpha < beta");
    if (!(delta < beta - alpha)) fail(ErrorKind::BadThresholds, "delta must be below beta - alpha");
    if (f_trace.size() != h_trace.size()) fail(ErrorKind::TraceMismatch, "trace lengths differ");

    for (uint64_t m = n; m < h_trace.size(); ++m)
        if (h_trace.value(m) > delta) return true;  // hypothesis fails, nothing to show

    std::vector<Rational> fh;
    fh.reserve(f_trace.size());
    for (uint64_t i = 0; i < f_trace.size(); ++i) fh.push_back(f_trace.value(i) + h_trace.value(i));
    AverageTrace fh_trace = AverageTrace::from_values(std::move(fh));

    Rational shifted = beta - delta;
    for (uint64_t m = n; m < f_trace.size(); ++m)
        if (fh_trace.value(m) > beta && !(f_trace.value(m) > shifted)) return false;

    uint64_t loose = greedy_upcrossings(f_trace, fh_trace, alpha, beta, n);
    uint64_t strict = greedy_upcrossings(f_trace, f_trace, alpha, shifted, n);
    return loose <= strict;
}

OrbitResult orbit_averages(const PartialTransformation& t, const TowerIndex* index,
                           const OrbitPoint& p, const ClopenSet& f, uint64_t horizon,
                           bool strict) {
    if (index == nullptr) {
        OrbitResult res = orbit_averages_naive(t, p, f, horizon);
        if (strict && res.hit_undefined)
            fail(ErrorKind::OrbitUndefined,
                 "orbit undefined at step " + std::to_string(res.defined_steps));
        return res;
    }
    OrbitResult res;
    if (horizon == 0) return res;
    size_t depth = static_cast<size_t>(index->depth());
    Word cell = p.stream_prefix(depth);
    TowerIndex::Position pos = index->locate(cell);
    uint64_t len = index->loop_length(pos);

    // Packed generator prefixes make the per-block membership read cheap.
    struct PackedGen {
        uint64_t value;
        unsigned shift;   // depth - |g| when |g| <= depth
        const Word* g;    // long generators fall back to tail bits
    };
    std::vector<PackedGen> gens;
    for (const Word& g : f.generators()) {
        uint64_t v = 0;
        for (size_t i = 0; i < std::min(g.size(), depth); ++i)
            v = (v << 1) | static_cast<uint64_t>(g.bit(i));
        gens.push_back({v, g.size() <= depth ? static_cast<unsigned>(depth - g.size()) : 0u,
                        g.size() > depth ? &g : nullptr});
    }
    for (uint64_t j = pos.index; j < len && res.defined_steps < horizon; ++j) {
        uint64_t c = index->loop_cell(pos, j);
        bool in = false;
        for (const auto& pg : gens) {
            if (pg.g == nullptr) {
                if ((c >> pg.shift) == pg.value) {
                    in = true;
                    break;
                }
            } else if (c == pg.value) {  // cell extends to the long generator via the tail
                bool match = true;
                for (size_t i = depth; i < pg.g->size() && match; ++i)
                    match = (pg.g->bit(i) == p.stream_bit(i));
                if (match) {
                    in = true;
                    break;
                }
            }
        }
        res.trace.push(in);
        res.defined_steps++;
    }
    if (res.defined_steps < horizon) {
        res.hit_undefined = true;
        if (strict)
            fail(ErrorKind::OrbitUndefined,
                 "orbit undefined at step " + std::to_string(res.defined_steps));
    }
    return res;
}

OrbitResult orbit_averages_naive(const PartialTransformation& t, const OrbitPoint& p,
                                 const ClopenSet& f, uint64_t horizon) {
    OrbitResult res;
    OrbitPoint cur = p;
    while (res.defined_steps < horizon) {
        res.trace.push(point_in(f, cur));
        res.defined_steps++;
        if (res.defined_steps == horizon) break;
        try {
            cur = step(t, cur);
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::OrbitUndefined) throw;
            res.hit_undefined = true;
            break;
        }
    }
    return res;
}

BishopReport bishop_check(const PartialTransformation& t, const TowerIndex* index,
                          const ClopenSet& f, const Rational& alpha, const Rational& beta,
                          uint64_t sample_count, uint64_t horizon, uint64_t seed) {
    if (!(alpha < beta)) fail(ErrorKind::BadThresholds, "bishop_check needs alpha < beta");
    BishopReport rep;
    rep.rhs_bound = (Rational(1) - alpha) * f.measure().to_rational() / (beta - alpha);

    size_t depth = std::max<size_t>(t.max_block_len() + 4, 16);
    unsigned workers = std::min<unsigned>(std::max(1u, std::thread::hardware_concurrency()), 8u);
    std::vector<uint64_t> partial(workers, 0);
    auto run_range = [&](unsigned wi, uint64_t lo, uint64_t hi) {
        uint64_t local = 0;
        for (uint64_t i = lo; i < hi; ++i) {
            uint64_t s = splitmix64(seed ^ (i * 0xD1B54A32D192ED03ull));
            std::string bits(depth, '0');
            for (size_t k = 0; k < depth; ++k) {
                s = splitmix64(s);
                if (s & 1) bits[k] = '1';
            }
            OrbitPoint x{Word(bits), Word("01")};
            OrbitResult orb = orbit_averages(t, index, x, f, horizon);
            local += count_upcrossings(orb.trace, alpha, beta);
        }
        partial[wi] = local;
    };
    std::vector<std::thread> pool;
    uint64_t chunk = (sample_count + workers - 1) / workers;
    for (unsigned wi = 0; wi < workers; ++wi) {
        uint64_t lo = wi * chunk, hi = std::min(sample_count, (wi + 1) * chunk);
        if (lo >= hi) break;
        pool.emplace_back(run_range, wi, lo, hi);
    }
    for (auto& th : pool) th.join();
    uint64_t total = 0;
    for (uint64_t c : partial) total += c;

    rep.samples_used = sample_count;
    rep.lhs_estimate = sample_count ? Rational(BigInt(total), BigInt(sample_count)) : Rational(0);
    rep.holds = rep.lhs_estimate <= rep.rhs_bound;
    return rep;
}

Dyadic deficiency_set_estimate(const PartialTransformation& t, const ClopenSet& f,
                               const Rational& alpha, const Rational& beta, uint64_t n,
                               size_t depth) {
    if (!(alpha < beta)) fail(ErrorKind::BadThresholds, "deficiency estimate needs alpha < beta");
    if (depth > 24) fail(ErrorKind::Unsupported, "deficiency estimate depth too large");
    Dyadic total;
    const uint64_t step_cap = 1ull << 26;
    for (uint64_t v = 0; v < (1ull << depth); ++v) {
        std::string bits(depth, '0');
        for (size_t i = 0; i < depth; ++i)
            if (v & (1ull << (depth - 1 - i))) bits[i] = '1';
        Word w(bits);
        // Certified trace: every point of [w] shares it.
        AverageTrace trace;
        uint64_t steps = 0;
        while (steps < step_cap) {
            bool in, decidable = true;
            in = f.contains_point_prefix(w);
            if (!in) {
                for (const Word& g : f.generators())
                    if (w.is_strict_prefix_of(g)) {
                        decidable = false;
                        break;
                    }
            }
            if (!decidable) break;
            trace.push(in);
            ++steps;
            auto b = t.block_of(w);
            if (!b || t.minus().count(*b)) break;
            w = t.plus().at(*b).concat(w.suffix_from(b->size()));
        }
        if (count_upcrossings(trace, alpha, beta) >= n) total += Dyadic::pow2(-static_cast<int>(depth));
    }
    return total;
}

}  // namespace cantor
