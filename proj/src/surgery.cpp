#include "cantor/surgery.hpp"

#include <algorithm>
#include <deque>
#include <set>

namespace cantor {

std::string check_escape(const PartialTransformation& t, const EscapeSequence& e) {
    const auto& el = e.elements;
    if (el.empty()) return "escape sequence is empty";
    for (const Word& w : el)
        if (!t.is_determined(w)) return "element " + w.text() + " is not determined";
    for (size_t i = 2; i < el.size(); ++i)
        if (el[i].size() != el[1].size()) return "elements after sigma_0 have unequal lengths";
    for (size_t i = 0; i + 1 < el.size(); ++i) {
        Word img = t.eval(el[i]);
        if (!img.is_prefix_of(el[i + 1]))
            return "element " + el[i + 1].text() + " does not extend the image " + img.text();
        if (t.is_blocked(el[i + 1]) && el[i + 1] != img)
            return "blocked element " + el[i + 1].text() + " differs from the image " + img.text();
    }
    if (!t.eval(el.back()).is_empty()) return "final image is not empty";
    return "";
}

bool is_reduced_escape(const PartialTransformation& t, const EscapeSequence& e) {
    const auto& el = e.elements;
    if (!check_escape(t, e).empty()) return false;
    for (size_t i = 0; i + 1 < el.size(); ++i)
        if (t.eval(el[i]).is_empty()) return false;
    for (size_t j = 0; j < el.size(); ++j) {
        Word img = t.eval(el[j]);
        for (size_t i = j + 2; i < el.size(); ++i)
            if (img.is_prefix_of(el[i]) && !t.is_blocked(el[i])) return false;
    }
    return true;
}

std::optional<EscapeSequence> find_escape(const PartialTransformation& t, const Word& w,
                                          size_t depth_bound) {
    if (!t.is_determined(w))
        fail(ErrorKind::PreconditionViolated, "find_escape: " + w.text() + " is not determined");
    Word img0 = t.eval(w);
    if (img0.size() >= w.size())
        fail(ErrorKind::PreconditionViolated, "find_escape: image of " + w.text() + " is not shorter");
    if (img0.is_empty()) {
        EscapeSequence e{{w}, false};
        e.reduced = is_reduced_escape(t, e);
        return e;
    }
    if (w.size() > depth_bound && img0.size() > depth_bound) return std::nullopt;

    for (size_t len = std::max<size_t>(1, img0.size()); len <= depth_bound; ++len) {
        // BFS over length-len elements, expanding candidates in lexicographic
        // order so the first hit is the canonical escape at this length.
        auto candidates = [&](const Word& img) {
            std::vector<Word> out;
            if (img.size() > len) return out;
            if (img.size() == len) {
                if (t.is_determined(img)) out.push_back(img);
                return out;
            }
            size_t free_bits = len - img.size();
            if (free_bits > 20) fail(ErrorKind::Unsupported, "find_escape candidate fan-out too large");
            for (uint64_t v = 0; v < (1ull << free_bits); ++v) {
                std::string suffix(free_bits, '0');
                for (size_t i = 0; i < free_bits; ++i)
                    if (v & (1ull << (free_bits - 1 - i))) suffix[i] = '1';
                Word c = img.concat(Word(suffix));
                if (t.is_determined(c) && !t.is_blocked(c)) out.push_back(c);
            }
            return out;
        };

        std::map<Word, Word> parent;  // element -> previous element
        std::deque<Word> queue;
        for (const Word& c : candidates(img0)) {
            if (!parent.count(c)) {
                parent.emplace(c, w);
                queue.push_back(c);
            }
        }
        while (!queue.empty()) {
            Word cur = queue.front();
            queue.pop_front();
            if (t.eval(cur).is_empty()) {
                std::vector<Word> path{cur};
                while (path.back() != w) path.push_back(parent.at(path.back()));
                std::reverse(path.begin(), path.end());
                EscapeSequence e{std::move(path), false};
                std::string err = check_escape(t, e);
                if (!err.empty()) fail(ErrorKind::StateCorrupt, "find_escape produced invalid sequence: " + err);
                e.reduced = is_reduced_escape(t, e);
                return e;
            }
            for (const Word& c : candidates(t.eval(cur))) {
                if (!parent.count(c)) {
                    parent.emplace(c, cur);
                    queue.push_back(c);
                }
            }
        }
    }
    return std::nullopt;
}

EscapeSequence reduce_escape(const PartialTransformation& t, const EscapeSequence& e) {
    std::string err = check_escape(t, e);
    if (!err.empty()) fail(ErrorKind::PreconditionViolated, "reduce_escape: " + err);
    std::vector<Word> el = e.elements;
    bool changed = true;
    while (changed) {
        changed = false;
        for (size_t i = 0; i + 1 < el.size(); ++i) {
            if (t.eval(el[i]).is_empty()) {
                el.resize(i + 1);
                changed = true;
                break;
            }
        }
        if (changed) continue;
        for (size_t j = 0; j < el.size() && !changed; ++j) {
            Word img = t.eval(el[j]);
            for (size_t i = j + 2; i < el.size(); ++i) {
                if (img.is_prefix_of(el[i]) && !t.is_blocked(el[i])) {
                    el.erase(el.begin() + static_cast<long>(j) + 1, el.begin() + static_cast<long>(i));
                    changed = true;
                    break;
                }
            }
        }
    }
    EscapeSequence out{std::move(el), true};
    err = check_escape(t, out);
    if (!err.empty() || !is_reduced_escape(t, out))
        fail(ErrorKind::StateCorrupt, "reduce_escape produced a non-reduced sequence");
    return out;
}

EscapeSequence widen_escape(const PartialTransformation& t, const EscapeSequence& e, const Word& rho) {
    std::string err = check_escape(t, e);
    if (!err.empty()) fail(ErrorKind::PreconditionViolated, "widen_escape: " + err);
    if (rho.is_empty() || e.elements.size() < 2) return e;
    std::vector<Word> el;
    el.push_back(e.elements.front());
    for (size_t i = 1; i < e.elements.size(); ++i) el.push_back(e.elements[i].concat(rho));
    EscapeSequence out{std::move(el), false};
    err = check_escape(t, out);
    if (!err.empty()) fail(ErrorKind::ValidityLost, "widen_escape broke a clause: " + err);
    out.reduced = is_reduced_escape(t, out);
    return out;
}

void Editor::expose(const Word& cell) {
    std::optional<Word> b;
    for (size_t len = 0; len <= cell.size() && !b; ++len) {
        Word pre = cell.prefix(len);
        if (minus_.count(pre) || plus_.count(pre)) b = pre;
    }
    if (!b) fail(ErrorKind::PreconditionViolated, "expose: " + cell.text() + " is below no block");
    if (*b == cell) return;
    bool is_minus = minus_.count(*b) > 0;
    Word img = is_minus ? minus_.at(*b) : plus_.at(*b);
    erase_block(*b);
    for (size_t j = b->size(); j < cell.size(); ++j) {
        Word sib = cell.prefix(j).append(1 - cell.bit(j));
        if (is_minus)
            set_minus(sib, img);
        else
            set_plus(sib, img.concat(sib.suffix_from(b->size())));
    }
    if (is_minus)
        set_minus(cell, img);
    else
        set_plus(cell, img.concat(cell.suffix_from(b->size())));
}

std::vector<std::pair<Word, bool>> Editor::clear_region(const Word& region) {
    std::vector<std::pair<Word, bool>> removed;
    for (auto it = minus_.begin(); it != minus_.end();) {
        if (region.is_prefix_of(it->first)) {
            removed.push_back({it->first, true});
            it = minus_.erase(it);
        } else
            ++it;
    }
    for (auto it = plus_.begin(); it != plus_.end();) {
        if (region.is_prefix_of(it->first)) {
            removed.push_back({it->first, false});
            it = plus_.erase(it);
        } else
            ++it;
    }
    return removed;
}

PartialTransformation freeze_checked(const Editor& ed, const std::string& op, bool deep_audit) {
    PartialTransformation t = ed.freeze();
    auto report = t.audit_proper();
    if (!report.empty())
        fail(ErrorKind::StateCorrupt,
             op + " produced an improper transformation: " + report.front().clause + " (" +
                 report.front().detail + ")");
    if (deep_audit) TowerIndex::build(t);  // throws NotPartitioned on broken loops
    return t;
}

namespace {

// Shared mechanics of the two thinning lemmas.  `leftover` leaves the
// all-ones strip of every block untouched and exits one strip early.
ThinOutcome thin_impl(const PartialTransformation& t, const OpenLoop& loop, const Dyadic& eps,
                      bool leftover, bool deep_audit) {
    std::string err = check_open_loop(t, loop);
    if (!err.empty()) fail(ErrorKind::PreconditionViolated, "thin_loop: " + err);
    if (eps.numerator() != 1 || eps.exponent() == 0 || !(eps < loop.width()))
        fail(ErrorKind::PreconditionViolated,
             "thin_loop: epsilon " + eps.text() + " is not a power of two below the loop width " +
                 loop.width().text());
    const Word& head = loop.head();
    for (const auto& [b, img] : t.minus())
        if (head.is_strict_prefix_of(img))
            fail(ErrorKind::PreconditionViolated,
                 "thin_loop: image of " + b.text() + " strictly extends the loop head");
    for (const auto& [b, img] : t.plus())
        if (head.is_strict_prefix_of(img))
            fail(ErrorKind::PreconditionViolated,
                 "thin_loop: image of " + b.text() + " strictly extends the loop head");

    size_t m = head.size();
    size_t n = eps.exponent();
    size_t r = n - m;
    if (r > 32) fail(ErrorKind::Unsupported, "thin_loop: refinement of more than 32 bits");

    const Word& exit_el = loop.exit();
    PartialTransformation base = t;
    Editor ed(base);

    // Carve [exit_el] out of the block structure.
    if (auto b = base.block_of(exit_el)) {
        if (base.plus().count(*b))
            fail(ErrorKind::PreconditionViolated, "thin_loop: loop exit sits inside a plus block");
        ed.expose(exit_el);
        ed.erase_block(exit_el);
    } else {
        for (const auto& [b, img] : base.plus())
            if (exit_el.is_prefix_of(b))
                fail(ErrorKind::PreconditionViolated, "thin_loop: plus block inside the loop exit");
        for (const auto& [b, img] : base.minus())
            if (exit_el.is_prefix_of(b) && b.size() > n)
                fail(ErrorKind::PreconditionViolated,
                     "thin_loop: epsilon not below the width of inner block " + b.text());
        ed.clear_region(exit_el);
    }

    auto old_eval = [&](const Word& cell) { return base.eval(cell); };

    std::string ones(r, '1');
    Word all_ones(ones);
    Word exit_cell = leftover ? exit_el.concat(Word(ones.substr(0, r - 1)).append(0))
                              : exit_el.concat(all_ones);

    for (uint64_t v = 0; v < (1ull << r); ++v) {
        std::string bits(r, '0');
        for (size_t i = 0; i < r; ++i)
            if (v & (1ull << (r - 1 - i))) bits[i] = '1';
        Word upsilon(bits);
        Word cell = exit_el.concat(upsilon);
        if (cell == exit_cell || (leftover && upsilon == all_ones)) {
            ed.set_minus(cell, old_eval(cell));
            continue;
        }
        Word target = head.concat(upsilon.increment());
        if (!old_eval(cell).is_prefix_of(target))
            fail(ErrorKind::PreconditionViolated,
                 "thin_loop: restacking would not extend the transformation at " + cell.text());
        ed.set_plus(cell, target);
    }

    ThinOutcome out;
    out.t = freeze_checked(ed, "thin_loop", deep_audit);
    out.head = head.concat(Word(std::string(r, '0')));
    out.exit = exit_cell;
    out.cell_len = n;
    uint64_t strips = leftover ? ((1ull << r) - 1) : (1ull << r);
    out.block_count = strips * loop.blocks.size();
    if (leftover)
        for (const Word& b : loop.blocks) out.leftover.push_back(b.concat(all_ones));
    return out;
}

}  // namespace

ThinOutcome thin_loop(const PartialTransformation& t, const OpenLoop& loop, const Dyadic& eps,
                      bool deep_audit) {
    return thin_impl(t, loop, eps, false, deep_audit);
}

ThinOutcome thin_loop_with_leftover(const PartialTransformation& t, const OpenLoop& loop,
                                    const Dyadic& eps, bool deep_audit) {
    return thin_impl(t, loop, eps, true, deep_audit);
}

LockstepOutcome lockstep_escape(const PartialTransformation& t, const EscapeSequence& e,
                                bool deep_audit) {
    if (!e.reduced || !is_reduced_escape(t, e))
        fail(ErrorKind::PreconditionViolated, "lockstep_escape: sequence is not reduced");
    const auto& el = e.elements;
    if (el.size() < 2)
        fail(ErrorKind::PreconditionViolated, "lockstep_escape: single-element sequence has no tail");
    if (el[0].size() != el[1].size() + 1)
        fail(ErrorKind::PreconditionViolated,
             "lockstep_escape: |sigma_0| must equal |sigma_1| + 1");
    if (t.eval(el[0]).size() >= el[0].size())
        fail(ErrorKind::PreconditionViolated, "lockstep_escape: sigma_0 already has a full image");

    Editor ed(t);
    ed.expose(el[0]);
    std::vector<Word> cells;  // sigma_i ^ 0 for i >= 1
    for (size_t i = 1; i < el.size(); ++i) {
        cells.push_back(el[i].append(0));
        ed.expose(cells.back());
    }
    auto extend_to = [&](const Word& from, const Word& to, bool plus_entry) {
        if (!t.eval(from).is_prefix_of(to))
            fail(ErrorKind::PreconditionViolated,
                 "lockstep_escape: new image at " + from.text() + " would not extend the old one");
        ed.erase_block(from);
        if (plus_entry)
            ed.set_plus(from, to);
        else
            ed.set_minus(from, to);
    };
    extend_to(el[0], cells[0], true);
    for (size_t i = 0; i + 1 < cells.size(); ++i) extend_to(cells[i], cells[i + 1], true);

    LockstepOutcome out;
    out.chain_end = cells.back();
    out.t = freeze_checked(ed, "lockstep_escape", deep_audit);
    return out;
}

PartialTransformation even_stage(const PartialTransformation& t) {
    auto report = t.audit_proper();
    if (!report.empty())
        fail(ErrorKind::PreconditionViolated, "even_stage: transformation is not proper");
    TowerIndex ix = TowerIndex::build(t);

    std::map<Word, Word> minus, plus = t.plus();
    for (const auto& [b, img] : t.minus()) {
        Word leftmost = b.concat(Word(std::string(ix.depth() - b.size(), '0')));
        Word head = ix.loop_head(ix.locate(leftmost));
        if (!img.is_strict_prefix_of(head))
            fail(ErrorKind::StateCorrupt,
                 "even_stage: image of " + b.text() + " is not a strict prefix of its loop head");
        int bit = head.bit(img.size());
        minus[b.append(0)] = img;
        minus[b.append(1)] = img.append(bit);
    }
    PartialTransformation out(std::move(minus), std::move(plus));
    auto post = out.audit_proper();
    if (!post.empty()) fail(ErrorKind::StateCorrupt, "even_stage broke propriety");
    TowerIndex::build(out);
    return out;
}

Dyadic empty_image_measure(const PartialTransformation& t) {
    Dyadic total;
    for (const auto& [b, img] : t.minus())
        if (img.is_empty()) total += cylinder_measure(b);
    return total;
}

}  // namespace cantor
