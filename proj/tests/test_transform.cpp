#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "fixtures.hpp"

using namespace cantor;
using namespace cantor::testing;

TEST_CASE("evaluation via blocks and meets") {
    PartialTransformation ta = make_ta();
    CHECK(ta.eval(Word("01")) == Word("11"));
    CHECK(ta.eval(Word("1")) == Word::empty());
    CHECK(ta.eval(Word::empty()) == Word::empty());
    CHECK(ta.eval(Word("0")) == Word("1"));
    CHECK(ta.eval(Word("0110")) == Word("1110"));
}

TEST_CASE("determinedness") {
    PartialTransformation ta = make_ta();
    CHECK(ta.is_determined(Word("10")));
    CHECK_FALSE(ta.is_determined(Word::empty()));
    CHECK(ta.is_determined(Word("0")));
}

TEST_CASE("blockedness") {
    PartialTransformation ta = make_ta();
    CHECK(ta.is_blocked(Word("1")));
    CHECK_FALSE(ta.is_blocked(Word("0")));
    PartialTransformation flat = from_entries({{"0", "e"}, {"1", "e"}});
    CHECK_FALSE(flat.is_blocked(Word("0")));
}

TEST_CASE("propriety audits") {
    CHECK(make_ta().audit_proper().empty());

    // Plus images nested: image of 1 extends the plus image of 0.
    PartialTransformation nested = from_entries({}, {{"0", "0"}, {"1", "0"}});
    bool found = false;
    for (const auto& f : nested.audit_proper())
        if (f.clause == "image-nesting" || f.clause == "plus-image-disjoint") found = true;
    CHECK(found);

    PartialTransformation gap = from_entries({{"0", "e"}});
    found = false;
    for (const auto& f : gap.audit_proper())
        if (f.clause == "cover") found = true;
    CHECK(found);

    PartialTransformation overlap = from_entries({{"0", "e"}, {"01", "e"}, {"1", "e"}});
    found = false;
    for (const auto& f : overlap.audit_proper())
        if (f.clause == "prefix-free") found = true;
    CHECK(found);

    PartialTransformation longminus = from_entries({{"0", "11"}, {"1", "e"}});
    found = false;
    for (const auto& f : longminus.audit_proper())
        if (f.clause == "minus-shorter") found = true;
    CHECK(found);
}

TEST_CASE("loop decomposition of the running example") {
    PartialTransformation ta = make_ta();
    LoopDecomposition dec = decompose_loops(ta);
    REQUIRE(dec.loops.size() == 1);
    CHECK(dec.loops[0].blocks == std::vector<Word>{Word("0"), Word("1")});
    CHECK(dec.loops[0].width() == Dyadic::pow2(-1));

    LoopDecomposition dec2 = decompose_loops(even_stage(ta));
    REQUIRE(dec2.loops.size() == 2);
    CHECK(dec2.loops[0].blocks == std::vector<Word>{Word("00"), Word("10")});
    CHECK(dec2.loops[1].blocks == std::vector<Word>{Word("01"), Word("11")});
}

TEST_CASE("closed loops are refused") {
    PartialTransformation closed = from_entries({}, {{"0", "1"}, {"1", "0"}});
    CHECK_THROWS_AS(decompose_loops(closed), Error);
    try {
        decompose_loops(closed);
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::NotPartitioned);
    }
}

TEST_CASE("burden values") {
    PartialTransformation ta = make_ta();
    CHECK(burden(ta, Word("0")) == Dyadic::one());
    CHECK(burden(even_stage(ta), Word("00")) == Dyadic::pow2(-1));
    OpenLoop l01{{Word("0"), Word("1")}};
    ThinOutcome thin = thin_loop(ta, l01, Dyadic::pow2(-2));
    CHECK(burden(thin.t, Word("00")) == Dyadic::one());
}

TEST_CASE("burden is constant on a loop and matches the level oracle") {
    std::mt19937_64 rng(23);
    for (int trial = 0; trial < 20; ++trial) {
        auto steps = random_surgery_program(rng, 6, 4);
        PartialTransformation t = steps.empty() ? seed_transformation() : steps.back().after;
        size_t depth = std::min<size_t>(t.max_block_len() + 2, 8);
        for (size_t level = 1; level <= depth; ++level) {
            auto table = burden_table(t, level);
            for (const auto& [w, b] : table) CHECK(burden(t, w) == b);
        }
    }
}

TEST_CASE("monotonicity of eval under extension") {
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 10; ++trial) {
        auto steps = random_surgery_program(rng, 5, 3);
        PartialTransformation t = steps.empty() ? seed_transformation() : steps.back().after;
        size_t depth = t.max_block_len() + 2;
        for (uint64_t v = 0; v < (1ull << depth); ++v) {
            std::string bits(depth, '0');
            for (size_t i = 0; i < depth; ++i)
                if (v & (1ull << (depth - 1 - i))) bits[i] = '1';
            Word w(bits);
            for (size_t cut = 0; cut < depth; ++cut)
                CHECK(t.eval(w.prefix(cut)).is_prefix_of(t.eval(w)));
        }
    }
}

TEST_CASE("plus images are pairwise disjoint cylinders") {
    std::mt19937_64 rng(37);
    for (int trial = 0; trial < 10; ++trial) {
        auto steps = random_surgery_program(rng, 6, 4);
        PartialTransformation t = steps.empty() ? seed_transformation() : steps.back().after;
        std::vector<Word> images;
        for (const auto& [p, img] : t.plus()) images.push_back(img);
        for (size_t i = 0; i < images.size(); ++i)
            for (size_t j = i + 1; j < images.size(); ++j)
                CHECK_FALSE(images[i].comparable(images[j]));
    }
}

TEST_CASE("measure preservation on the blocked region") {
    std::mt19937_64 rng(41);
    for (int trial = 0; trial < 8; ++trial) {
        auto steps = random_surgery_program(rng, 5, 3);
        PartialTransformation t = steps.empty() ? seed_transformation() : steps.back().after;
        size_t depth = t.max_block_len() + 2;
        for (uint64_t v = 0; v < (1ull << depth); ++v) {
            std::string bits(depth, '0');
            for (size_t i = 0; i < depth; ++i)
                if (v & (1ull << (depth - 1 - i))) bits[i] = '1';
            Word tau(bits);
            // Preimage mass of [tau] under the rigid plus parts.
            Dyadic mass;
            bool fully_blocked = true;
            for (const auto& [p, img] : t.plus()) {
                if (img.is_prefix_of(tau))
                    mass += cylinder_measure(tau);
                else if (tau.is_strict_prefix_of(img))
                    mass += cylinder_measure(img);
            }
            CHECK(mass <= cylinder_measure(tau));
            // Equality iff [tau] is covered by plus-image cones.
            CylinderSet rest({tau});
            std::vector<Word> cones;
            for (const auto& [p, img] : t.plus()) cones.push_back(img);
            rest = rest.subtract(CylinderSet(cones));
            fully_blocked = rest.empty();
            CHECK((mass == cylinder_measure(tau)) == fully_blocked);
        }
    }
}

TEST_CASE("loops partition the space") {
    std::mt19937_64 rng(43);
    for (int trial = 0; trial < 10; ++trial) {
        auto steps = random_surgery_program(rng, 6, 4);
        PartialTransformation t = steps.empty() ? seed_transformation() : steps.back().after;
        LoopDecomposition dec = decompose_loops(t);
        Dyadic total;
        for (const OpenLoop& l : dec.loops) {
            CHECK(check_open_loop(t, l).empty());
            total += l.burden();
        }
        CHECK(total == Dyadic::one());
    }
}

TEST_CASE("decompose_loops agrees with naive chain-following") {
    std::mt19937_64 rng(47);
    for (int trial = 0; trial < 12; ++trial) {
        auto steps = random_surgery_program(rng, 6, 4);
        PartialTransformation t = steps.empty() ? seed_transformation() : steps.back().after;
        size_t d = std::max<size_t>(1, t.max_block_len());
        auto table = burden_table(t, d);  // built by naive chain-following
        LoopDecomposition dec = decompose_loops(t);
        for (const OpenLoop& l : dec.loops)
            for (const Word& b : l.blocks) CHECK(table.at(b) == l.burden());
    }
}
