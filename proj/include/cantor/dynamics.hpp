#pragma once

#include <cstdint>

#include "cantor/surgery.hpp"

namespace cantor {

// A point of Cantor space with an eventually periodic tail:
// prefix ^ period ^ period ^ ...
struct OrbitPoint {
    Word prefix;
    Word period;

    int stream_bit(size_t i) const {
        if (i < prefix.size()) return prefix.bit(i);
        return period.bit((i - prefix.size()) % period.size());
    }
    Word stream_prefix(size_t len) const;
};

OrbitPoint parse_point(const std::string& text);  // "<prefix>:<period>"

// The clopen sets used as test functions are cylinder unions; membership of
// a point is decided from finitely many stream bits.
using ClopenSet = CylinderSet;

bool point_in(const ClopenSet& f, const OrbitPoint& p);

// One application of the limit transformation.  Throws OrbitUndefined when
// the image stays finite (the point sits in a tower-top block of T).
OrbitPoint step(const PartialTransformation& t, const OrbitPoint& p);

// Exact partial Birkhoff averages of an indicator along an orbit.  Stored as
// run-length-encoded membership bits (value n = count(n)/(n+1)), or as
// explicit rational values for externally supplied traces.
class AverageTrace {
public:
    AverageTrace() = default;
    static AverageTrace from_values(std::vector<Rational> values);

    void push(bool in_set) { push_run(in_set, 1); }
    void push_run(bool in_set, uint64_t n);

    uint64_t size() const { return size_; }
    bool indicator_backed() const { return values_.empty(); }

    // Number of one-bits among steps 0..i (indicator-backed only).
    uint64_t count_through(uint64_t i) const;
    Rational value(uint64_t i) const;
    bool step_bit(uint64_t i) const;

    struct Run {
        bool bit;
        uint64_t start;         // first step index of the run
        uint64_t len;
        uint64_t count_before;  // one-bits before the run
    };
    const std::vector<Run>& runs() const { return runs_; }
    const std::vector<Rational>& values() const { return values_; }

private:
    std::vector<Run> runs_;
    std::vector<Rational> values_;
    uint64_t size_ = 0;
    uint64_t ones_ = 0;
};

struct OrbitResult {
    AverageTrace trace;
    bool hit_undefined = false;
    uint64_t defined_steps = 0;  // trace length actually produced
};

// Exact averages of the indicator of f along x, T x, ..., up to `horizon`
// steps.  With a TowerIndex the orbit is fast-forwarded tower
// block by tower block; without one it falls back to stepwise evaluation.
// When the orbit leaves the defined region before the horizon the trace is
// truncated there and hit_undefined is set; `strict` instead throws
// OrbitUndefined (reporting the failing step).
OrbitResult orbit_averages(const PartialTransformation& t, const TowerIndex* index,
                           const OrbitPoint& p, const ClopenSet& f, uint64_t horizon,
                           bool strict = false);

// Stepwise reference evaluation (the oracle for fast-forward agreement).
OrbitResult orbit_averages_naive(const PartialTransformation& t, const OrbitPoint& p,
                                 const ClopenSet& f, uint64_t horizon);

// Maximum N over subsequences u_1<v_1<...<u_N<v_N with value(u_i) < alpha
// and value(v_i) > beta, computed by one greedy scan.
uint64_t count_upcrossings(const AverageTrace& trace, const Rational& alpha, const Rational& beta);

// Loose variant: the down-crossings read f_trace, the up-crossings read
// fh_trace (the averages of f + h for a nonnegative perturbation h).
uint64_t count_loose_upcrossings(const AverageTrace& f_trace, const AverageTrace& fh_trace,
                                 const Rational& alpha, const Rational& beta);

// Data-level check of the loose-to-strict reduction: whenever the h-averages
// stay at or below delta from step n on, every loose upcrossing sequence
// starting at or after n is a strict (alpha, beta - delta) upcrossing
// sequence of f_trace.
bool loose_to_strict_check(const AverageTrace& f_trace, const AverageTrace& h_trace,
                           const Rational& alpha, const Rational& beta, const Rational& delta,
                           uint64_t n);

struct BishopReport {
    Rational lhs_estimate;
    Rational rhs_bound;
    bool holds = false;
    uint64_t samples_used = 0;
};

// Monte Carlo check of the upcrossing inequality: the mean truncated
// upcrossing count over seeded samples must stay below the exact bound
// (1/(beta-alpha)) * (1-alpha) * mu(f).  Truncation only under-counts, so a
// violation indicts the implementation.
BishopReport bishop_check(const PartialTransformation& t, const TowerIndex* index,
                          const ClopenSet& f, const Rational& alpha, const Rational& beta,
                          uint64_t sample_count, uint64_t horizon, uint64_t seed);

// Exact measure of the depth-`depth` cylinders all of whose points provably
// attain >= n upcrossings within the current loop structure: a certified
// inner approximation of the deficiency set.
Dyadic deficiency_set_estimate(const PartialTransformation& t, const ClopenSet& f,
                               const Rational& alpha, const Rational& beta, uint64_t n,
                               size_t depth);

}  // namespace cantor
