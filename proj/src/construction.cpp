#include "cantor/construction.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace cantor {

namespace {

constexpr uint64_t kComponentCap = 16;  // addressable component chunks

Word bits_of(uint64_t v, size_t len) {
    std::string s(len, '0');
    for (size_t i = 0; i < len; ++i)
        if (v & (1ull << (len - 1 - i))) s[i] = '1';
    return Word(s);
}

std::string chunk_prefix(int seed_bit, uint64_t k) {
    std::string s(1, static_cast<char>('0' + (1 - seed_bit)));
    s += std::string(k, '1');
    s += '0';
    return s;
}

// Largest power of two <= d (d > 0), as 2^-q.
int floor_pow2_exponent(const Dyadic& d) {
    // d = num * 2^-exp, num >= 1: largest 2^-q <= d  has q = exp - msb(num).
    unsigned m = boost::multiprecision::msb(d.numerator());
    return static_cast<int>(d.exponent()) - static_cast<int>(m);
}

}  // namespace

Word component_a_address(int seed_bit, uint64_t k) {
    return Word(chunk_prefix(seed_bit, k) + "00");
}

std::vector<Word> component_b_addresses(int seed_bit, uint64_t k) {
    return {Word(chunk_prefix(seed_bit, k) + "01"), Word(chunk_prefix(seed_bit, k) + "10")};
}

std::optional<uint64_t> ComponentLedger::watch_level_of(const Word& cell) const {
    for (const auto& [region, level] : watch)
        if (region.contains_point_prefix(cell)) return level;
    return std::nullopt;
}

std::optional<uint64_t> ComponentLedger::w_index_of(const Word& cell) const {
    for (const auto& [k, set] : w_parts)
        if (set.contains_point_prefix(cell)) return k;
    return std::nullopt;
}

namespace {

void materialize(ConstructionState& st, uint64_t k) {
    if (st.ledger.a_parts.count(k)) return;
    if (k >= kComponentCap)
        fail(ErrorKind::Unsupported, "component chunk index exceeds the addressing cap");
    st.ledger.a_parts[k] = CylinderSet({component_a_address(st.seed_bit, k)});
    st.ledger.b_parts[k] = CylinderSet(component_b_addresses(st.seed_bit, k));
    if (!st.ledger.a_budget.count(k)) st.ledger.a_budget[k] = Dyadic::zero();
    if (!st.ledger.b_budget.count(k)) st.ledger.b_budget[k] = Dyadic::zero();
}

}  // namespace

ConstructionState init_state(int first_bit) {
    if (first_bit != 0 && first_bit != 1)
        fail(ErrorKind::PreconditionViolated, "seed bit must be 0 or 1");
    ConstructionState st;
    st.seed_bit = first_bit;
    st.transformation = seed_transformation();
    st.ledger.w_parts[0] = CylinderSet({Word(std::string(1, static_cast<char>('0' + first_bit)))});
    materialize(st, 0);

    Dyadic mu_a = st.ledger.a_parts[0].measure();
    Dyadic mu_b = st.ledger.b_parts[0].measure();
    unsigned j = 0;
    while (j <= 64 && !(Dyadic::pow2(-static_cast<int>(j)) < mu_a &&
                        Dyadic(4) * Dyadic::pow2(-static_cast<int>(j)) < mu_b))
        ++j;
    if (j > 64) fail(ErrorKind::Infeasible, "no watch level fits the initial components");
    st.ledger.a_budget[0] = Dyadic::pow2(-static_cast<int>(j));
    st.ledger.b_budget[0] = Dyadic(4) * Dyadic::pow2(-static_cast<int>(j));
    st.ledger.watch.push_back({st.ledger.w_parts[0], j});

    std::vector<Word> target;
    for (uint64_t k = 0; k < kComponentCap; ++k) target.push_back(component_a_address(first_bit, k));
    st.target_set = ClopenSet(std::move(target));
    st.escape_depth_bound = 8;
    st.log.push_back("init seed-bit " + std::to_string(first_bit) + " watch-level " + std::to_string(j));
    return st;
}

std::vector<AuditFinding> validate_enumeration(const TestEnumeration& e) {
    std::vector<AuditFinding> findings;
    std::map<uint64_t, CylinderSet> level_sets;
    uint64_t prev_stage = 0;
    for (size_t idx = 0; idx < e.events.size(); ++idx) {
        const TestEvent& ev = e.events[idx];
        std::string at = "event " + std::to_string(idx + 1);
        if (ev.stage % 2 == 0)
            findings.push_back({"stage-parity", {ev.word}, at + ": stage must be odd"});
        if (idx > 0 && ev.stage <= prev_stage)
            findings.push_back({"stage-order", {ev.word}, at + ": stages must strictly increase"});
        prev_stage = ev.stage;

        auto& set = level_sets[ev.level];
        set = set.unite(CylinderSet({ev.word}));
        if (set.measure() > Dyadic::pow2(-static_cast<int>(ev.level)))
            findings.push_back({"measure", {ev.word},
                                at + ": level " + std::to_string(ev.level) + " holds measure " +
                                    set.measure().text()});

        // Nesting: for every lower level already in play, an ancestor of this
        // word must have entered it earlier.
        std::set<uint64_t> prior_levels;
        for (size_t jdx = 0; jdx < idx; ++jdx) prior_levels.insert(e.events[jdx].level);
        for (uint64_t i : prior_levels) {
            if (i >= ev.level) break;
            bool prior = false;
            for (size_t jdx = 0; jdx < idx && !prior; ++jdx)
                prior = (e.events[jdx].level == i && e.events[jdx].word.is_prefix_of(ev.word));
            if (!prior)
                findings.push_back({"nesting", {ev.word},
                                    at + ": no prior level-" + std::to_string(i) + " ancestor"});
        }
    }
    return findings;
}

std::pair<unsigned, unsigned> choose_thinning_params(const ThinningProblem& pr) {
    if (pr.sigma_v <= Dyadic(2) * pr.sigma_u)
        fail(ErrorKind::Infeasible,
             "B portions must outweigh twice the A portions (sigma_v " + pr.sigma_v.text() +
                 " vs sigma_u " + pr.sigma_u.text() + ")");
    Dyadic et(static_cast<long>(pr.e_t));
    Dyadic ueu(static_cast<long>(pr.e_u * pr.portion_count_u));
    for (unsigned n = 1; n <= pr.search_bound; ++n) {
        for (unsigned np = 1; np <= pr.search_bound; ++np) {
            unsigned s = n + np;
            if (!(Dyadic::pow2(-static_cast<int>(s)) < pr.loop_width)) continue;
            if (s <= pr.max_portion_len + n) continue;
            if (s <= pr.max_inner_len) continue;
            if (s < pr.strip_room + 1) continue;
            Dyadic scale = Dyadic::pow2(static_cast<int>(s)) - Dyadic::pow2(static_cast<int>(np));
            Dyadic lhs1 = scale * pr.sigma_u;
            Dyadic rhs1 = Dyadic::pow2(static_cast<int>(s)) * pr.loop_burden + et;
            if (!(lhs1 >= rhs1)) continue;
            Dyadic lhs2 = scale * pr.sigma_v;
            Dyadic rhs2 = Dyadic::pow2(static_cast<int>(s)) * Dyadic(2) * pr.sigma_u + ueu;
            if (!(lhs2 > rhs2)) continue;
            return {n, np};
        }
    }
    fail(ErrorKind::Infeasible, "no (N, N') within the search bound satisfies the inequalities");
}

namespace {

struct PoolPiece {
    Word word;
    Word image;  // eval at the piece
};

// Free determined pieces of a component part: whole generators when a block
// sits at or above them, otherwise the blocks below.  Empty-image blocks stay
// reserved as escape terminals.
std::vector<PoolPiece> component_pool(const PartialTransformation& t, const CylinderSet& part) {
    std::vector<PoolPiece> pool;
    auto consider = [&](const Word& w) {
        Word img = t.eval(w);
        if (img.is_empty()) return;  // reserved escape terminal
        if (t.is_blocked(w)) return;
        if (!(img.size() < w.size() && img.is_prefix_of(w))) return;  // must be its own open loop
        pool.push_back({w, img});
    };
    for (const Word& g : part.generators()) {
        if (t.block_of(g)) {
            consider(g);
            continue;
        }
        for (const auto& [b, img] : t.minus())
            if (g.is_prefix_of(b)) consider(b);
        for (const auto& [b, img] : t.plus())
            if (g.is_prefix_of(b)) { /* plus blocks are mid-loop, not allocatable */ }
    }
    std::sort(pool.begin(), pool.end(),
              [](const PoolPiece& a, const PoolPiece& b) { return a.word < b.word; });
    return pool;
}

Dyadic pool_measure(const std::vector<PoolPiece>& pool) {
    Dyadic m;
    for (const auto& p : pool) m += cylinder_measure(p.word);
    return m;
}

std::vector<Word> allocate_exact(const PartialTransformation& t, std::vector<PoolPiece> pool,
                                 const Dyadic& required) {
    if (required.is_zero() || required < Dyadic::zero())
        fail(ErrorKind::PreconditionViolated, "allocation request must be positive");
    if (pool_measure(pool) < required)
        fail(ErrorKind::Exhausted, "component lacks capacity for " + required.text());
    std::vector<Word> out;
    Dyadic remaining = required;
    while (!remaining.is_zero()) {
        if (pool.empty()) fail(ErrorKind::Exhausted, "component pool exhausted");
        // Largest piece first (shortlex: shorter words are wider).
        std::stable_sort(pool.begin(), pool.end(),
                         [](const PoolPiece& a, const PoolPiece& b) { return a.word < b.word; });
        PoolPiece piece = pool.front();
        pool.erase(pool.begin());
        int want_exp = floor_pow2_exponent(remaining);
        size_t want_len = std::max(piece.word.size(), static_cast<size_t>(std::max(want_exp, 0)));
        Word taken = piece.word.concat(Word(std::string(want_len - piece.word.size(), '0')));
        for (size_t jd = piece.word.size(); jd < want_len; ++jd) {
            Word sib = taken.prefix(jd).append(1 - taken.bit(jd));
            pool.push_back({sib, t.eval(sib)});
        }
        out.push_back(taken);
        remaining -= cylinder_measure(taken);
    }
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace

std::vector<Word> allocate_portions(const ConstructionState& st, uint64_t k,
                                    const Dyadic& required, ComponentKind which) {
    auto it = (which == ComponentKind::A) ? st.ledger.a_parts.find(k) : st.ledger.b_parts.find(k);
    const auto& parts = (which == ComponentKind::A) ? st.ledger.a_parts : st.ledger.b_parts;
    if (it == parts.end())
        fail(ErrorKind::Exhausted, "component part " + std::to_string(k) + " not materialized");
    std::vector<PoolPiece> pool = component_pool(st.transformation, it->second);
    if (pool.empty()) fail(ErrorKind::Exhausted, "component part has no free pieces");

    if (which == ComponentKind::A) {
        if (!(required < pool_measure(pool)))
            fail(ErrorKind::Exhausted, "requested measure " + required.text() +
                                           " does not leave component headroom");
        return allocate_exact(st.transformation, pool, required);
    }
    // B: least multiple of the coarsest free grain strictly above `required`.
    Dyadic avail = pool_measure(pool);
    for (size_t grain_len = pool.front().word.size(); grain_len <= pool.front().word.size() + 24;
         ++grain_len) {
        Dyadic grain = Dyadic::pow2(-static_cast<int>(grain_len));
        // target = (floor(required / grain) + 1) * grain
        Dyadic scaled = required * Dyadic::pow2(static_cast<int>(grain_len));
        BigInt whole = scaled.numerator() >> scaled.exponent();
        Dyadic target = Dyadic(whole + 1, 0) * grain;
        if (target <= avail) return allocate_exact(st.transformation, pool, target);
    }
    fail(ErrorKind::Exhausted, "component lacks capacity above " + required.text());
}

namespace {

// Block-level escape route: minus blocks hopping image-compatibly down to an
// empty-image block.  Preferred pass stays inside `prefer` (plus empty-image
// terminals anywhere); the fallback roams.
std::optional<std::vector<Word>> route_blocks(const PartialTransformation& t, const Word& from_image,
                                              const CylinderSet* prefer, const CylinderSet& claimed,
                                              size_t max_hops = 8) {
    // Blocks sharing an image are interchangeable for onward search, so the
    // BFS is keyed by image words; hops materialize the first usable block.
    for (int pass = 0; pass < 2; ++pass) {
        bool restricted = (pass == 0) && prefer != nullptr;
        std::set<Word> visited{from_image};
        std::deque<std::pair<Word, std::vector<Word>>> queue;  // (image, block path)
        queue.push_back({from_image, {}});
        while (!queue.empty()) {
            auto [img, path] = queue.front();
            queue.pop_front();
            if (path.size() >= max_hops) continue;
            for (const auto& [b, bimg] : t.minus()) {
                if (!img.comparable(b)) continue;
                if (claimed.contains_cylinder(b)) continue;
                if (restricted && !prefer->contains_point_prefix(b) && !bimg.is_empty()) continue;
                if (bimg.is_empty()) {
                    auto done = path;
                    done.push_back(b);
                    return done;
                }
                if (visited.insert(bimg).second) {
                    auto next = path;
                    next.push_back(b);
                    queue.push_back({bimg, std::move(next)});
                }
            }
        }
        if (!prefer) break;
    }
    return std::nullopt;
}

struct PackingFailure {};

// Chooses one strip cell of length `len` inside each route block, avoiding
// claimed regions and blocked cones, and claims the picks.
std::vector<Word> place_route_cells(const PartialTransformation& t, const Word& start_image,
                                    const std::vector<Word>& route, size_t len,
                                    CylinderSet& claimed) {
    std::vector<Word> cells;
    Word img = start_image;
    for (const Word& b : route) {
        Word base = (img.size() >= b.size()) ? img : b;
        if (!img.comparable(b)) throw PackingFailure{};
        if (base.size() > len) throw PackingFailure{};
        size_t free_bits = len - base.size();
        if (free_bits > 24) free_bits = 24;
        bool placed = false;
        for (uint64_t v = 0; v < (1ull << free_bits) && !placed; ++v) {
            Word c = base.concat(bits_of(v, len - base.size()));
            if (t.is_blocked(c)) continue;
            if (claimed.intersects(c)) continue;
            cells.push_back(c);
            claimed = claimed.unite(CylinderSet({c}));
            placed = true;
        }
        if (!placed) throw PackingFailure{};
        img = t.minus().at(b);
    }
    return cells;
}

struct ChainPart {
    Word head;
    Word exit;
    uint64_t block_count = 0;
    bool in_a = false;  // lives in the A component (counts toward the target set)
};

// One full surgery on a triggering loop: thin, route, lockstep, splice, and
// update the ledger.  `claimed` carries regions other concurrent pieces own.
void apply_pipeline(ConstructionState& st, const OpenLoop& loop, uint64_t k, CylinderSet& claimed) {
    PartialTransformation t = st.transformation;
    Dyadic bd = loop.burden();
    Dyadic width = loop.width();

    if (!(bd <= st.ledger.a_budget.at(k)))
        fail(ErrorKind::StateCorrupt, "budget invariant broken: burden " + bd.text() +
                                          " exceeds a-budget " + st.ledger.a_budget.at(k).text());
    if (!(Dyadic(4) * bd <= st.ledger.b_budget.at(k)))
        fail(ErrorKind::StateCorrupt, "budget invariant broken: 4x burden exceeds b-budget");
    materialize(st, k + 1);

    // A-portions: slightly more than the loop union, rounded up to the
    // component grain so the portions stay coarse.
    std::vector<PoolPiece> pool_a = component_pool(t, st.ledger.a_parts.at(k));
    if (pool_a.empty()) fail(ErrorKind::Exhausted, "A component has no free pieces");
    Dyadic request_a = bd + width;
    {
        size_t grain_len = pool_a.front().word.size();
        Dyadic grain = Dyadic::pow2(-static_cast<int>(grain_len));
        Dyadic scaled = request_a * Dyadic::pow2(static_cast<int>(grain_len));
        BigInt whole = scaled.numerator() >> scaled.exponent();
        if (Dyadic(whole, 0) * grain != request_a) whole += 1;
        Dyadic rounded = Dyadic(whole, 0) * grain;
        if (rounded < pool_measure(pool_a)) request_a = rounded;
    }
    std::vector<Word> portions_a = allocate_portions(st, k, request_a, ComponentKind::A);
    std::vector<Word> portions_b = allocate_portions(st, k, Dyadic(4) * bd, ComponentKind::B);

    Dyadic sigma_u, sigma_v;
    for (const Word& p : portions_a) sigma_u += cylinder_measure(p);
    for (const Word& p : portions_b) sigma_v += cylinder_measure(p);

    // Escape route heights (block-level), before any thinning.  The hosts
    // the routes touch also bound the strip length the packer needs.
    CylinderSet w_union;
    for (const auto& [wk, set] : st.ledger.w_parts) w_union = w_union.unite(set);
    size_t max_route_host = 1;
    auto height_of = [&](const Word& from, const CylinderSet* prefer) -> uint64_t {
        Word img = t.eval(from);
        if (img.is_empty()) return 1;
        auto route = route_blocks(t, img, prefer, claimed);
        if (!route) fail(ErrorKind::Exhausted, "no escape route from " + from.text());
        for (const Word& b : *route)
            max_route_host = std::max({max_route_host, b.size(), t.eval(from).size()});
        return route->size() + 1;
    };
    uint64_t e_t = height_of(loop.exit(), &w_union);
    uint64_t e_u = 1, e_v = 1;
    for (const Word& p : portions_a) e_u = std::max(e_u, height_of(p, &st.ledger.a_parts.at(k)));
    for (const Word& p : portions_b) e_v = std::max(e_v, height_of(p, &st.ledger.b_parts.at(k)));

    ThinningProblem pr;
    pr.sigma_u = sigma_u;
    pr.sigma_v = sigma_v;
    pr.loop_burden = bd;
    pr.loop_width = width;
    pr.e_t = e_t;
    pr.e_u = e_u;
    pr.e_v = e_v;
    pr.portion_count_u = portions_a.size();
    for (const Word& p : portions_a) pr.max_portion_len = std::max(pr.max_portion_len, p.size());
    for (const Word& p : portions_b) pr.max_portion_len = std::max(pr.max_portion_len, p.size());
    for (const auto& [b, img] : t.minus())
        if (loop.exit().is_prefix_of(b) || b.is_prefix_of(loop.exit()))
            pr.max_inner_len = std::max(pr.max_inner_len, b.size());
    {
        // Strip hosts are route blocks; leave pad room for every escape.
        uint64_t elements = e_t + portions_a.size() * e_u + portions_b.size() * e_v + 2;
        size_t pad = 1;
        while ((1ull << pad) < elements + 2) ++pad;
        pr.strip_room = max_route_host + pad + 1;
    }

    for (unsigned bump = 0; bump <= 8; ++bump) {
        ThinningProblem attempt = pr;
        attempt.strip_room = pr.strip_room + bump;
        auto [bigN, bigNp] = choose_thinning_params(attempt);
        unsigned s = bigN + bigNp;
        try {
            PartialTransformation cur = t;
            CylinderSet local_claimed = claimed;
            std::vector<ChainPart> chain;
            std::vector<Word> strip_cells;

            ThinOutcome main_thin = thin_loop(cur, loop, Dyadic::pow2(-static_cast<int>(s)), false);
            cur = main_thin.t;
            chain.push_back({main_thin.head, main_thin.exit, main_thin.block_count, false});
            local_claimed = local_claimed.unite(loop.cylinder_union());

            auto thin_portion = [&](const Word& p, bool in_a) {
                ThinOutcome lo = thin_loop_with_leftover(
                    cur, OpenLoop{{p}}, Dyadic::pow2(-static_cast<int>(p.size() + bigN)), false);
                cur = lo.t;
                OpenLoop mid;
                for (uint64_t v = 0; v + 1 < (1ull << bigN); ++v)
                    mid.blocks.push_back(p.concat(bits_of(v, bigN)));
                ThinOutcome th = thin_loop(cur, mid, Dyadic::pow2(-static_cast<int>(s)), false);
                cur = th.t;
                chain.push_back({th.head, th.exit, th.block_count, in_a});
                CylinderSet thinned = CylinderSet({p}).subtract(CylinderSet(lo.leftover));
                local_claimed = local_claimed.unite(thinned);
            };
            for (const Word& p : portions_a) thin_portion(p, true);
            for (const Word& p : portions_b) thin_portion(p, false);

            // Escapes and locksteps, one chain part at a time.
            std::vector<Word> chain_ends;
            uint64_t escape_cells = 0;
            for (size_t ci = 0; ci < chain.size(); ++ci) {
                Word exit = chain[ci].exit;
                Word img = cur.eval(exit);
                if (img.is_empty()) {
                    chain_ends.push_back(exit);
                    continue;
                }
                const CylinderSet* prefer =
                    (ci == 0) ? &w_union
                              : (chain[ci].in_a ? &st.ledger.a_parts.at(k) : &st.ledger.b_parts.at(k));
                auto route = route_blocks(cur, img, prefer, local_claimed);
                if (!route) fail(ErrorKind::Exhausted, "no escape route from " + exit.text());
                std::vector<Word> cells =
                    place_route_cells(cur, img, *route, s - 1, local_claimed);
                EscapeSequence esc;
                esc.elements.push_back(exit);
                esc.elements.insert(esc.elements.end(), cells.begin(), cells.end());
                esc = reduce_escape(cur, esc);
                LockstepOutcome lk = lockstep_escape(cur, esc, false);
                cur = lk.t;
                chain_ends.push_back(lk.chain_end);
                escape_cells += esc.elements.size() - 1;
                for (size_t i = 1; i < esc.elements.size(); ++i)
                    strip_cells.push_back(esc.elements[i]);
            }

            // Splice the chain: main -> A portions -> B portions; the final
            // end keeps its empty image as the mega-loop exit.
            Editor ed(cur);
            for (size_t ci = 0; ci + 1 < chain.size(); ++ci) {
                ed.erase_block(chain_ends[ci]);
                ed.set_plus(chain_ends[ci], chain[ci + 1].head);
            }
            cur = freeze_checked(ed, "odd_stage splice", false);

            // Validate the assembled mega loop.
            TowerIndex ix = TowerIndex::build(cur);
            Word head_cell = main_thin.head.concat(
                Word(std::string(ix.depth() - main_thin.head.size(), '0')));
            TowerIndex::Position pos = ix.locate(head_cell);
            uint64_t expect = escape_cells;
            for (const ChainPart& c : chain) expect += c.block_count;
            uint64_t scale = 1ull << (ix.depth() - s);
            if (pos.index != 0 || ix.loop_length(pos) != expect * scale)
                fail(ErrorKind::StateCorrupt,
                     "mega loop has " + std::to_string(ix.loop_length(pos)) + " cells, expected " +
                         std::to_string(expect * scale));

            // Ledger updates.
            CylinderSet consumed = loop.cylinder_union();
            for (const Word& p : portions_a) consumed = consumed.unite(CylinderSet({p}));
            for (const Word& p : portions_b) consumed = consumed.unite(CylinderSet({p}));
            CylinderSet strips(strip_cells);
            Dyadic gamma_u = strips.intersect(st.ledger.a_parts.at(k)).measure();
            Dyadic gamma_v = strips.intersect(st.ledger.b_parts.at(k)).measure();
            consumed = consumed.unite(strips);

            for (auto& [wk, set] : st.ledger.w_parts) set = set.subtract(consumed);
            for (auto& [ak, set] : st.ledger.a_parts) set = set.subtract(consumed);
            for (auto& [bk, set] : st.ledger.b_parts) set = set.subtract(consumed);
            st.ledger.w_parts[k + 1] = st.ledger.w_parts[k + 1].unite(consumed);

            auto clamp0 = [](Dyadic d) { return d < Dyadic::zero() ? Dyadic::zero() : d; };
            st.ledger.a_budget[k] = clamp0(st.ledger.a_budget[k] - bd - gamma_u);
            st.ledger.b_budget[k] = clamp0(st.ledger.b_budget[k] - Dyadic(4) * bd - gamma_v);

            Dyadic gamma = Dyadic(BigInt(expect), 0) * Dyadic::pow2(-static_cast<int>(s));
            Dyadic mu_a1 = st.ledger.a_parts.at(k + 1).measure();
            Dyadic mu_b1 = st.ledger.b_parts.at(k + 1).measure();
            unsigned jp = 0;
            bool found = false;
            for (; jp <= 64; ++jp) {
                Dyadic g2 = gamma * Dyadic::pow2(-static_cast<int>(jp));
                if (g2 < mu_a1 - st.ledger.a_budget[k + 1] &&
                    Dyadic(4) * g2 < mu_b1 - st.ledger.b_budget[k + 1]) {
                    found = true;
                    break;
                }
            }
            if (!found) fail(ErrorKind::Exhausted, "no watch level fits component " +
                                                       std::to_string(k + 1));
            st.ledger.a_budget[k + 1] += gamma * Dyadic::pow2(-static_cast<int>(jp));
            st.ledger.b_budget[k + 1] += Dyadic(4) * gamma * Dyadic::pow2(-static_cast<int>(jp));

            for (auto& [region, level] : st.ledger.watch) region = region.subtract(consumed);
            std::erase_if(st.ledger.watch, [](const auto& r) { return r.first.empty(); });
            st.ledger.watch.push_back({consumed, jp});

            st.transformation = cur;
            claimed = claimed.unite(consumed);
            std::ostringstream os;
            os << "surgery k=" << k << " head=" << loop.head().text() << " N=" << bigN
               << " N'=" << bigNp << " mega-cells=" << expect << " burden=" << gamma.text()
               << " next-watch=" << jp;
            st.log.push_back(os.str());
            return;
        } catch (const PackingFailure&) {
            continue;  // widen the strips and retry deterministically
        }
    }
    fail(ErrorKind::Exhausted, "escape strip packing failed at every attempted width");
}

}  // namespace

ConstructionState odd_stage(const ConstructionState& st, const TestEvent& event) {
    ConstructionState out = st;
    const Word& tau = event.word;

    CylinderSet tau_set({tau});
    CylinderSet w_union;
    for (const auto& [wk, set] : out.ledger.w_parts) w_union = w_union.unite(set);
    if (!tau_set.subtract(w_union).empty())
        fail(ErrorKind::StateCorrupt,
             "event word " + tau.text() + " leaves the work area; events must target it");

    TowerIndex ix = TowerIndex::build(out.transformation);
    size_t depth = static_cast<size_t>(ix.depth());

    // The determined pieces of [tau], grouped by open loop.
    std::vector<OpenLoop> pieces;
    std::set<Word> seen_heads;
    auto add_cell = [&](const Word& cell) {
        TowerIndex::Position pos = ix.locate(cell);
        Word head = ix.loop_head(pos);
        if (!seen_heads.insert(head).second) return;
        OpenLoop lp;
        for (uint64_t i = 0; i < ix.loop_length(pos); ++i) lp.blocks.push_back(ix.loop_block(pos, i));
        pieces.push_back(std::move(lp));
    };
    if (tau.size() >= depth) {
        add_cell(tau.prefix(depth));
    } else {
        uint64_t span = 1ull << (depth - tau.size());
        if (span > 4096) fail(ErrorKind::Unsupported, "event word names too many loops");
        for (uint64_t v = 0; v < span; ++v) add_cell(tau.concat(bits_of(v, depth - tau.size())));
    }

    CylinderSet claimed;
    for (const OpenLoop& lp : pieces) claimed = claimed.unite(lp.cylinder_union());

    for (const OpenLoop& lp : pieces) {
        auto level = out.ledger.watch_level_of(lp.head());
        if (!level || *level != event.level) continue;  // watch mismatch: do nothing
        auto k = out.ledger.w_index_of(lp.head());
        if (!k) fail(ErrorKind::StateCorrupt, "watched loop is not indexed in the work area");
        apply_pipeline(out, lp, *k, claimed);
    }
    out.stage = st.stage + 1;
    return out;
}

ConstructionState run(const ConstructionState& st, const TestEnumeration& e, uint64_t upto_stage) {
    auto findings = validate_enumeration(e);
    if (!findings.empty())
        fail(ErrorKind::PreconditionViolated,
             "enumeration rejected: " + findings.front().clause + " (" + findings.front().detail + ")");
    std::map<uint64_t, TestEvent> by_stage;
    for (const TestEvent& ev : e.events) by_stage[ev.stage] = ev;

    ConstructionState cur = st;
    while (cur.stage < upto_stage) {
        if (cur.stage % 2 == 0) {
            cur.transformation = even_stage(cur.transformation);
            cur.stage += 1;
        } else {
            auto it = by_stage.find(cur.stage);
            if (it != by_stage.end()) {
                cur = odd_stage(cur, it->second);
            } else {
                cur.stage += 1;
            }
        }
        cur.escape_depth_bound =
            std::max(cur.escape_depth_bound, cur.transformation.max_block_len() + 2);
        auto audit = audit_state(cur);
        if (!audit.empty())
            fail(ErrorKind::StateCorrupt, "stage " + std::to_string(cur.stage) +
                                              " audit failed: " + audit.front().clause + " (" +
                                              audit.front().detail + ")");
    }
    return cur;
}

std::vector<AuditFinding> audit_state(const ConstructionState& st) {
    std::vector<AuditFinding> findings = st.transformation.audit_proper();
    if (!findings.empty()) return findings;
    try {
        TowerIndex::build(st.transformation);
    } catch (const Error& e) {
        findings.push_back({"loop-partition", {}, e.what()});
        return findings;
    }

    std::vector<std::pair<std::string, const CylinderSet*>> parts;
    for (const auto& [k, set] : st.ledger.w_parts) parts.push_back({"W" + std::to_string(k), &set});
    for (const auto& [k, set] : st.ledger.a_parts) parts.push_back({"A" + std::to_string(k), &set});
    for (const auto& [k, set] : st.ledger.b_parts) parts.push_back({"B" + std::to_string(k), &set});
    for (size_t i = 0; i < parts.size(); ++i)
        for (size_t j = i + 1; j < parts.size(); ++j)
            if (!parts[i].second->disjoint(*parts[j].second))
                findings.push_back({"ledger-disjoint", {},
                                    parts[i].first + " and " + parts[j].first + " overlap"});

    for (const auto& [k, bud] : st.ledger.a_budget)
        if (!bud.is_zero() && st.ledger.a_parts.count(k) &&
            !(bud < st.ledger.a_parts.at(k).measure()))
            findings.push_back({"budget", {}, "a-budget " + std::to_string(k) + " not below measure"});
    for (const auto& [k, bud] : st.ledger.b_budget)
        if (!bud.is_zero() && st.ledger.b_parts.count(k) &&
            !(bud < st.ledger.b_parts.at(k).measure()))
            findings.push_back({"budget", {}, "b-budget " + std::to_string(k) + " not below measure"});

    const PartialTransformation& t = st.transformation;
    auto check_unblocked = [&](const CylinderSet& part, const std::string& name) {
        for (const auto& [b, img] : t.minus())
            if (part.contains_point_prefix(b) && t.is_blocked(b))
                findings.push_back({"component-blocked", {b}, name + " holds blocked block"});
        for (const auto& [b, img] : t.plus())
            if (part.contains_point_prefix(b) && t.is_blocked(b))
                findings.push_back({"component-blocked", {b}, name + " holds blocked block"});
    };
    for (const auto& [k, set] : st.ledger.a_parts) check_unblocked(set, "A" + std::to_string(k));
    for (const auto& [k, set] : st.ledger.b_parts) check_unblocked(set, "B" + std::to_string(k));

    // Escape reachability for every ledgered block.  Routes prefer their own
    // component but may finish through foreign cells: the totalization
    // stages starve deep components of empty-image words, so a strictly
    // in-component escape cannot exist there and consumed foreign strips are
    // accounted by location instead.
    CylinderSet ledgered;
    for (const auto& [k, set] : st.ledger.w_parts) ledgered = ledgered.unite(set);
    for (const auto& [k, set] : st.ledger.a_parts) ledgered = ledgered.unite(set);
    for (const auto& [k, set] : st.ledger.b_parts) ledgered = ledgered.unite(set);

    // Interval arithmetic at the refinement depth keeps the reachability
    // fixpoint near-linear in the block count.
    int depth = static_cast<int>(std::max<size_t>(1, t.max_block_len()));
    auto interval_of = [&](const Word& w) -> std::pair<uint64_t, uint64_t> {
        uint64_t v = 0;
        for (size_t i = 0; i < w.size(); ++i) v = (v << 1) | static_cast<uint64_t>(w.bit(i));
        uint64_t lo = v << (depth - w.size());
        return {lo, lo + (1ull << (depth - w.size()))};
    };
    std::map<uint64_t, uint64_t> reached;  // disjoint intervals lo -> hi
    auto overlaps = [&](uint64_t lo, uint64_t hi) {
        auto it = reached.upper_bound(lo);
        if (it != reached.begin() && std::prev(it)->second > lo) return true;
        return it != reached.end() && it->first < hi;
    };
    auto insert_interval = [&](uint64_t lo, uint64_t hi) {
        auto it = reached.upper_bound(lo);
        if (it != reached.begin() && std::prev(it)->second >= lo) {
            --it;
            lo = it->first;
            hi = std::max(hi, it->second);
        }
        while (it != reached.end() && it->first <= hi) {
            hi = std::max(hi, it->second);
            it = reached.erase(it);
        }
        reached[lo] = hi;
    };
    std::vector<std::pair<const Word*, const Word*>> pending;  // (block, image)
    for (const auto& [b, img] : t.minus()) {
        if (img.is_empty()) {
            auto [lo, hi] = interval_of(b);
            insert_interval(lo, hi);
        } else {
            pending.push_back({&b, &img});
        }
    }
    bool grew = true;
    while (grew) {
        grew = false;
        for (auto it = pending.begin(); it != pending.end();) {
            auto [ilo, ihi] = interval_of(*it->second);
            if (overlaps(ilo, ihi)) {
                auto [blo, bhi] = interval_of(*it->first);
                insert_interval(blo, bhi);
                it = pending.erase(it);
                grew = true;
            } else {
                ++it;
            }
        }
    }
    for (const auto& [b, img] : pending)
        if (ledgered.contains_point_prefix(*b))
            findings.push_back({"escape", {*b}, "block has no escape route to an empty image"});

    return findings;
}

}  // namespace cantor
