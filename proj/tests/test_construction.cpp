#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "fixtures.hpp"

#include "cantor/construction.hpp"
#include "cantor/dynamics.hpp"

using namespace cantor;
using namespace cantor::testing;

TEST_CASE("initial state bookkeeping") {
    ConstructionState st = init_state(0);
    CHECK(st.ledger.w_parts[0] == CylinderSet({Word("0")}));
    CHECK(st.ledger.a_parts[0] == CylinderSet({Word("1000")}));
    CHECK(st.ledger.a_parts[0].measure() == Dyadic::pow2(-4));
    CHECK(st.ledger.b_parts[0] == CylinderSet({Word("1001"), Word("1010")}));
    CHECK(st.ledger.b_parts[0].measure() == Dyadic::pow2(-3));
    CHECK(st.ledger.watch_level_of(Word("0")) == 6);
    CHECK(st.ledger.a_budget[0] == Dyadic::pow2(-6));
    CHECK(st.ledger.b_budget[0] == Dyadic::pow2(-4));
    CHECK(st.transformation == seed_transformation());
    CHECK(audit_state(st).empty());

    ConstructionState mirror = init_state(1);
    CHECK(mirror.ledger.w_parts[0] == CylinderSet({Word("1")}));
    CHECK(mirror.ledger.a_parts[0] == CylinderSet({Word("0000")}));
}

TEST_CASE("component chunks pair B at twice A for every level") {
    for (uint64_t k = 0; k <= 10; ++k) {
        Dyadic mu_a = cylinder_measure(component_a_address(0, k));
        Dyadic mu_b;
        for (const Word& w : component_b_addresses(0, k)) mu_b += cylinder_measure(w);
        CHECK(mu_b == Dyadic(2) * mu_a);
        CHECK(mu_a == Dyadic::pow2(-static_cast<int>(k) - 4));
    }
}

TEST_CASE("enumeration validation") {
    auto ev = [](uint64_t s, uint64_t l, const char* w) {
        return TestEvent{s, l, Word::parse(w)};
    };
    CHECK(validate_enumeration({{ev(1, 6, "0101010")}}).empty());

    auto m = validate_enumeration({{ev(1, 2, "00"), ev(3, 2, "01")}});
    REQUIRE(m.size() == 1);
    CHECK(m[0].clause == "measure");
    CHECK(m[0].detail.find("event 2") != std::string::npos);

    CHECK(validate_enumeration({{ev(1, 1, "0"), ev(3, 2, "01")}}).empty());
    auto nest = validate_enumeration({{ev(1, 1, "1"), ev(3, 2, "01")}});
    REQUIRE(nest.size() == 1);
    CHECK(nest[0].clause == "nesting");

    CHECK_FALSE(validate_enumeration({{ev(2, 1, "0")}}).empty());
    CHECK_FALSE(validate_enumeration({{ev(3, 1, "0"), ev(1, 2, "00")}}).empty());
}

namespace {

// Independent exhaustive oracle for the (N, N') search over the two
// inequalities alone.
std::pair<unsigned, unsigned> search_oracle(const ThinningProblem& pr) {
    for (unsigned n = 1; n <= 32; ++n)
        for (unsigned np = 1; np <= 32; ++np) {
            unsigned s = n + np;
            if (!(Dyadic::pow2(-static_cast<int>(s)) < pr.loop_width)) continue;
            if (s <= pr.max_portion_len + n) continue;
            Dyadic scale = Dyadic::pow2(static_cast<int>(s)) - Dyadic::pow2(static_cast<int>(np));
            if (!(scale * pr.sigma_u >=
                  Dyadic::pow2(static_cast<int>(s)) * pr.loop_burden +
                      Dyadic(static_cast<long>(pr.e_t))))
                continue;
            if (!(scale * pr.sigma_v >
                  Dyadic::pow2(static_cast<int>(s)) * Dyadic(2) * pr.sigma_u +
                      Dyadic(static_cast<long>(pr.e_u * pr.portion_count_u))))
                continue;
            return {n, np};
        }
    return {0, 0};
}

}  // namespace

TEST_CASE("thinning parameter search") {
    ThinningProblem pr;
    pr.sigma_u = Dyadic::pow2(-2);
    pr.sigma_v = Dyadic::pow2(-2);
    pr.loop_burden = Dyadic::pow2(-3);
    pr.loop_width = Dyadic::pow2(-3);
    pr.e_t = pr.e_u = pr.e_v = 1;
    pr.portion_count_u = 1;
    CHECK_THROWS_AS(choose_thinning_params(pr), Error);  // sigma_v = sigma_u infeasible

    pr.sigma_v = Dyadic(3) * Dyadic::pow2(-2);
    auto got = choose_thinning_params(pr);
    auto want = search_oracle(pr);
    CHECK(got == want);
    CHECK(got.first >= 1);

    // Doubling e_t never decreases N + N'.
    std::mt19937_64 rng(5);
    for (int i = 0; i < 50; ++i) {
        ThinningProblem q;
        int wexp = 2 + static_cast<int>(rng() % 4);
        q.loop_width = Dyadic::pow2(-wexp);
        q.loop_burden = Dyadic(static_cast<long>(1 + rng() % 3)) * q.loop_width;
        q.sigma_u = q.loop_burden + q.loop_width;
        q.sigma_v = Dyadic(4) * q.loop_burden + q.loop_width;
        q.e_t = 1 + rng() % 6;
        q.e_u = 1 + rng() % 4;
        q.portion_count_u = 1 + rng() % 5;
        auto a = choose_thinning_params(q);
        ThinningProblem q2 = q;
        q2.e_t *= 2;
        auto b = choose_thinning_params(q2);
        CHECK(a.first + a.second <= b.first + b.second);
        CHECK(a == search_oracle(q));
    }
}

TEST_CASE("portion allocation") {
    ConstructionState st = init_state(0);
    st = run(st, {}, 6);
    st.ledger.a_parts[0] = CylinderSet({Word("10")});

    auto words = allocate_portions(st, 0, Dyadic(3) * Dyadic::pow2(-5), ComponentKind::A);
    Dyadic total;
    for (const Word& w : words) total += cylinder_measure(w);
    CHECK(total == Dyadic(3) * Dyadic::pow2(-5));
    CHECK(words.size() == 2);
    for (const Word& w : words) {
        CHECK(st.transformation.is_determined(w));
        CHECK_FALSE(st.transformation.is_blocked(w));
        CHECK_FALSE(st.transformation.eval(w).is_empty());
    }
    for (size_t i = 0; i < words.size(); ++i)
        for (size_t j = i + 1; j < words.size(); ++j)
            CHECK_FALSE(words[i].comparable(words[j]));

    CHECK_THROWS_AS(allocate_portions(st, 0, Dyadic::pow2(-1), ComponentKind::A), Error);

    auto bwords = allocate_portions(st, 0, Dyadic::pow2(-5), ComponentKind::B);
    Dyadic btotal;
    for (const Word& w : bwords) btotal += cylinder_measure(w);
    CHECK(btotal > Dyadic::pow2(-5));
}

TEST_CASE("runs without events just totalize") {
    ConstructionState st = init_state(0);
    ConstructionState s4 = run(st, {}, 4);
    CHECK(empty_image_measure(s4.transformation) == Dyadic::pow2(-2));
    CHECK(s4.stage == 4);

    ConstructionState s0 = run(st, {}, 0);
    CHECK(s0.transformation == st.transformation);
    CHECK(s0.stage == 0);

    TestEnumeration bad;
    bad.events.push_back({2, 1, Word("0")});
    CHECK_THROWS_AS(run(st, bad, 4), Error);
}

TEST_CASE("watch mismatch does nothing but count the stage") {
    ConstructionState st = run(init_state(0), {}, 1);
    REQUIRE(st.stage == 1);
    TestEvent ev{1, 3, Word("010")};
    ConstructionState after = odd_stage(st, ev);
    CHECK(after.stage == 2);
    CHECK(after.transformation == st.transformation);
    CHECK(after.ledger.a_budget == st.ledger.a_budget);
    CHECK(after.ledger.w_parts.size() == st.ledger.w_parts.size());
}

TEST_CASE("events outside the work area are refused") {
    ConstructionState st = run(init_state(0), {}, 1);
    TestEvent ev{1, 6, Word("1000")};
    CHECK_THROWS_AS(odd_stage(st, ev), Error);
    try {
        odd_stage(st, ev);
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::StateCorrupt);
    }
}

TEST_CASE("even stages and mismatch odd stages commute") {
    ConstructionState st = run(init_state(0), {}, 1);
    TestEvent miss{1, 4, Word("01")};
    ConstructionState a = odd_stage(st, miss);
    a.transformation = even_stage(a.transformation);
    ConstructionState b = st;
    b.transformation = even_stage(b.transformation);
    b = odd_stage(b, miss);
    CHECK(a.transformation == b.transformation);
}

TEST_CASE("scripted surgery run") {
    ConstructionState st = init_state(0);
    TestEnumeration e;
    e.events.push_back({9, 6, Word("010101")});
    ConstructionState s = run(st, e, 10);
    CHECK(audit_state(s).empty());

    CHECK(s.ledger.w_parts.count(1));
    CHECK(s.ledger.w_parts[1].contains_cylinder(Word("010101")));
    CHECK_FALSE(s.ledger.w_parts[0].intersects(Word("010101")));

    CHECK(!s.ledger.a_budget[1].is_zero());
    CHECK(s.ledger.b_budget[1] == Dyadic(4) * s.ledger.a_budget[1]);
    CHECK(s.ledger.a_budget[1] < s.ledger.a_parts[1].measure());
    CHECK(s.ledger.b_budget[1] < s.ledger.b_parts[1].measure());

    auto level = s.ledger.watch_level_of(Word("0101010000000"));
    REQUIRE(level.has_value());
    CHECK(*level != 6);

    TowerIndex ix = TowerIndex::build(s.transformation);
    OrbitPoint x{Word("010101"), Word("01")};
    OrbitResult orbit = orbit_averages(s.transformation, &ix, x, s.target_set, 5000);
    Rational peak(0), last(0);
    for (uint64_t i = 0; i < orbit.trace.size(); ++i) {
        peak = std::max(peak, orbit.trace.value(i));
        last = orbit.trace.value(i);
    }
    CHECK(peak > Rational(1, 2));
    CHECK(last <= Rational(1, 3));
    CHECK(count_upcrossings(orbit.trace, Rational(87, 256), Rational(125, 256)) >= 1);
}

TEST_CASE("transformations extend monotonically across stages") {
    ConstructionState st = init_state(0);
    TestEnumeration e;
    e.events.push_back({9, 6, Word("010101")});
    std::mt19937_64 rng(13);
    ConstructionState prev = st;
    for (uint64_t stage = 1; stage <= 10; ++stage) {
        ConstructionState next = run(prev, e, stage);
        for (int i = 0; i < 50; ++i) {
            size_t len = rng() % 8;
            std::string bits;
            for (size_t j = 0; j < len; ++j) bits.push_back('0' + rng() % 2);
            Word w(bits);
            CHECK(prev.transformation.eval(w).is_prefix_of(next.transformation.eval(w)));
        }
        prev = next;
    }
}
