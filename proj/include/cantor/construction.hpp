#pragma once

#include <cstdint>

#include "cantor/dynamics.hpp"

namespace cantor {

struct TestEvent {
    uint64_t stage = 0;
    uint64_t level = 0;
    Word word;
};

// An explicit Martin-Löf test enumeration: which word enters which level at
// which odd stage.
struct TestEnumeration {
    std::vector<TestEvent> events;
};

std::vector<AuditFinding> validate_enumeration(const TestEnumeration& e);

// Per-level workspace/component bookkeeping.  Component sets shrink as
// surgeries consume portions; consumed material moves into the work area one
// level up.  Watch regions are kept pairwise disjoint, so the watch level of
// a loop is the level of the unique region containing its head.
struct ComponentLedger {
    std::map<uint64_t, CylinderSet> w_parts;
    std::map<uint64_t, CylinderSet> a_parts;
    std::map<uint64_t, CylinderSet> b_parts;
    std::map<uint64_t, Dyadic> a_budget;
    std::map<uint64_t, Dyadic> b_budget;
    std::vector<std::pair<CylinderSet, uint64_t>> watch;

    std::optional<uint64_t> watch_level_of(const Word& cell) const;
    std::optional<uint64_t> w_index_of(const Word& cell) const;
};

struct ConstructionState {
    PartialTransformation transformation;
    ComponentLedger ledger;
    uint64_t stage = 0;
    size_t escape_depth_bound = 0;
    ClopenSet target_set;
    int seed_bit = 0;
    std::vector<std::string> log;
};

// Component addressing: chunk k lives under (complement bit) ^ 1^k ^ 0.
Word component_a_address(int seed_bit, uint64_t k);
std::vector<Word> component_b_addresses(int seed_bit, uint64_t k);

ConstructionState init_state(int first_bit);

struct ThinningProblem {
    Dyadic sigma_u;       // total A-portion measure
    Dyadic sigma_v;       // total B-portion measure
    Dyadic loop_burden;   // burden of the triggering loop
    Dyadic loop_width;
    uint64_t e_t = 0, e_u = 0, e_v = 0;
    uint64_t portion_count_u = 0;
    size_t max_portion_len = 0;   // second thinning must refine below |p| + N
    size_t max_inner_len = 0;     // deepest block inside any region being thinned
    size_t strip_room = 0;        // headroom bits for nonoverlapping escape strips
    unsigned search_bound = 64;
};

// Least (N, then N') satisfying both step-count inequalities and the
// geometric side conditions.
std::pair<unsigned, unsigned> choose_thinning_params(const ThinningProblem& pr);

enum class ComponentKind { A, B };

// Distinct, incomparable, determined, unblocked words from component part k
// whose measures sum exactly to `required` (A) or to the least multiple of
// the component grain strictly above `required` (B).  Blocks whose image is
// already empty are reserved as escape terminals and never allocated.
std::vector<Word> allocate_portions(const ConstructionState& st, uint64_t k,
                                    const Dyadic& required, ComponentKind which);

ConstructionState odd_stage(const ConstructionState& st, const TestEvent& event);

ConstructionState run(const ConstructionState& st, const TestEnumeration& e, uint64_t upto_stage);

// Full state audit: propriety, loop partition, ledger disjointness, budget
// inequalities, unblocked components, and per-component escape reachability.
std::vector<AuditFinding> audit_state(const ConstructionState& st);

}  // namespace cantor
