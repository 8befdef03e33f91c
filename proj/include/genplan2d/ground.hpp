#ifndef GENPLAN2D_GROUND_HPP
#define GENPLAN2D_GROUND_HPP

#include <algorithm>
#include <set>
#include <unordered_map>
#include <vector>

#include "genplan2d/domain.hpp"

namespace genplan2d {

// ---------------------------------------------------------------------------
// Per-state predicate index
// ---------------------------------------------------------------------------

using DecodedAtom = std::array<int, kMaxArity>;

inline void decode_into(const Domain &d, AtomCode c,
                        std::vector<std::vector<DecodedAtom>> &out) {
    int p = atom_pred(c);
    DecodedAtom a{};
    atom_args(c, d.pred(p).arity(), a.data());
    out[static_cast<size_t>(p)].push_back(a);
}

// Static and certified atoms of one context, decoded and grouped by
// predicate. Built once per context; these sets can be large after eager
// stream testing, so they must not be re-decoded per state.
struct CtxIndex {
    std::vector<std::vector<DecodedAtom>> atoms;

    static std::shared_ptr<const CtxIndex> build(const StaticContext &ctx) {
        auto idx = std::make_shared<CtxIndex>();
        idx->atoms.resize(ctx.domain->predicates.size());
        for (AtomCode c : ctx.static_atoms) decode_into(*ctx.domain, c, idx->atoms);
        for (AtomCode c : ctx.certified_atoms) decode_into(*ctx.domain, c, idx->atoms);
        return idx;
    }
};

inline void finalize_context(StaticContext &ctx) {
    ctx.rebuild_sort_lists();
    ctx.index = CtxIndex::build(ctx);
}

/*
  Per-state view: the shared background index plus this state's decoded
  fluents. Used by universal-precondition checks, goal evaluation and feature
  evaluation.
*/
class StateIndex {
public:
    explicit StateIndex(const GroundState &s) : state_(&s) {
        const auto &d = *s.ctx->domain;
        if (s.ctx->index) {
            base_ = s.ctx->index;
        } else {
            base_ = CtxIndex::build(*s.ctx);
        }
        fluent_atoms_.resize(d.predicates.size());
        for (AtomCode c : s.fluents) decode_into(d, c, fluent_atoms_);
    }

    size_t count(int pred) const {
        size_t p = static_cast<size_t>(pred);
        return base_->atoms[p].size() + fluent_atoms_[p].size();
    }
    const DecodedAtom &at(int pred, size_t i) const {
        size_t p = static_cast<size_t>(pred);
        const auto &bg = base_->atoms[p];
        return i < bg.size() ? bg[i] : fluent_atoms_[p][i - bg.size()];
    }
    const GroundState &state() const { return *state_; }

private:
    const GroundState *state_;
    std::shared_ptr<const CtxIndex> base_;
    std::vector<std::vector<DecodedAtom>> fluent_atoms_;
};

// ---------------------------------------------------------------------------
// Template instantiation helpers
// ---------------------------------------------------------------------------

// Resolves a term under a (possibly partial) binding; -1 = unbound variable.
inline int resolve_term(Term t, const std::vector<int> &binding) {
    if (!term_is_var(t)) return term_entity(t);
    int v = binding[static_cast<size_t>(t)];
    return v;
}

inline AtomCode instantiate(const AtomTemplate &tpl, const std::vector<int> &binding) {
    int args[kMaxArity];
    for (size_t i = 0; i < tpl.args.size(); ++i) {
        args[i] = resolve_term(tpl.args[i], binding);
    }
    return atom_code(tpl.pred, args, static_cast<int>(tpl.args.size()));
}

/*
  Enumerates bindings of the open variables in `templates` against atoms in
  `index`, extending `binding` in place and invoking `fn` for each complete
  match. Variables not covered by any template are NOT bound here.
*/
template <typename Fn>
bool match_templates(const StateIndex &index, const std::vector<AtomTemplate> &templates,
                     size_t ti, std::vector<int> &binding, const Fn &fn) {
    if (ti == templates.size()) return fn();
    const AtomTemplate &tpl = templates[ti];
    size_t n = index.count(tpl.pred);
    for (size_t ai = 0; ai < n; ++ai) {
        const DecodedAtom &atom = index.at(tpl.pred, ai);
        bool ok = true;
        std::vector<std::pair<int, int>> bound;  // (var, entity) undo log
        for (size_t i = 0; i < tpl.args.size() && ok; ++i) {
            Term t = tpl.args[i];
            if (!term_is_var(t)) {
                ok = term_entity(t) == atom[i];
            } else if (binding[static_cast<size_t>(t)] >= 0) {
                ok = binding[static_cast<size_t>(t)] == atom[i];
            } else {
                binding[static_cast<size_t>(t)] = atom[i];
                bound.emplace_back(t, atom[i]);
            }
        }
        if (ok && match_templates(index, templates, ti + 1, binding, fn)) return true;
        for (auto &ve : bound) binding[static_cast<size_t>(ve.first)] = -1;
    }
    return false;
}

// ---------------------------------------------------------------------------
// Applicability and successor function
// ---------------------------------------------------------------------------

/*
  Universal preconditions are evaluated by enumeration over the current
  universe. Guard atoms drive the enumeration through the state index, so the
  cost is proportional to the number of guard matches, not the universe size.
  Certified atoms absent from the state are treated as false.
*/
inline bool universal_holds(const StateIndex &index, const UniversalCondition &uc,
                            const std::vector<int> &param_binding) {
    size_t nparams = param_binding.size();
    std::vector<int> binding(nparams + uc.var_names.size(), -1);
    std::copy(param_binding.begin(), param_binding.end(), binding.begin());

    if (!uc.guard.empty()) {
        // Violated iff some guard match fails the body.
        bool violated =
            match_templates(index, uc.guard, 0, binding, [&]() {
                // Unmatched quantified vars would make the check ill-formed;
                // domain validation rejects those, so all vars are bound here.
                AtomCode body = instantiate(uc.body, binding);
                bool holds = index.state().holds(body);
                return uc.body_negated ? holds : !holds;
            });
        return !violated;
    }

    // No guard. For a negated body this asks that no atom matches the body
    // pattern; for a positive body, that every binding of the variables has
    // the atom (enumerated over sort domains).
    if (uc.body_negated) {
        std::vector<AtomTemplate> pat = {uc.body};
        bool found = match_templates(index, pat, 0, binding, [&]() { return true; });
        return !found;
    }
    const StaticContext &ctx = *index.state().ctx;
    std::function<bool(size_t)> rec = [&](size_t vi) -> bool {
        if (vi == uc.var_names.size()) {
            return index.state().holds(instantiate(uc.body, binding));
        }
        for (int e : ctx.domain_of(uc.var_sorts[vi])) {
            binding[nparams + vi] = e;
            if (!rec(vi + 1)) return false;
        }
        binding[nparams + vi] = -1;
        return true;
    };
    return rec(0);
}

inline bool applicable(const GroundState &s, const GroundAction &a, const StateIndex *index = nullptr) {
    for (AtomCode c : a.pre_pos)
        if (!s.holds(c)) return false;
    for (AtomCode c : a.pre_neg)
        if (s.holds(c)) return false;
    const ActionSchema &schema = s.ctx->domain->actions[static_cast<size_t>(a.schema)];
    if (!schema.universals.empty()) {
        std::optional<StateIndex> local;
        if (!index) local.emplace(s);
        const StateIndex &idx = index ? *index : *local;
        for (const auto &uc : schema.universals)
            if (!universal_holds(idx, uc, a.args)) return false;
    }
    return true;
}

// Delete-then-add semantics; the universe is unchanged.
inline GroundState apply(const GroundState &s, const GroundAction &a) {
    if (!applicable(s, a))
        throw contract_error("apply: action " +
                             action_name(*s.ctx->domain, a, *s.ctx) + " not applicable");
    std::vector<AtomCode> next;
    next.reserve(s.fluents.size() + a.eff_pos.size());
    std::vector<AtomCode> dels(a.eff_neg.begin(), a.eff_neg.end());
    std::sort(dels.begin(), dels.end());
    std::set_difference(s.fluents.begin(), s.fluents.end(), dels.begin(), dels.end(),
                        std::back_inserter(next));
    for (AtomCode c : a.eff_pos) {
        auto it = std::lower_bound(next.begin(), next.end(), c);
        if (it == next.end() || *it != c) next.insert(it, c);
    }
    return GroundState{s.ctx, std::move(next)};
}

// ---------------------------------------------------------------------------
// Grounding
// ---------------------------------------------------------------------------

/*
  Produces every parameter binding whose positive static/certified
  preconditions hold in the state. Fluent preconditions are left to
  `applicable`. Parameters not constrained by any background atom are
  enumerated over their sort domain.
*/
inline std::vector<GroundAction> ground_actions(const Domain &domain, const GroundState &s) {
    std::vector<GroundAction> out;
    StateIndex index(s);
    const StaticContext &ctx = *s.ctx;
    for (size_t ai = 0; ai < domain.actions.size(); ++ai) {
        const ActionSchema &schema = domain.actions[ai];
        std::vector<AtomTemplate> background;
        for (const auto &tpl : schema.pre_pos) {
            if (domain.pred(tpl.pred).kind != PredKind::Fluent) background.push_back(tpl);
        }
        std::set<std::vector<int>> seen;
        std::vector<int> binding(schema.param_names.size(), -1);
        auto finish = [&]() {
            // Enumerate any parameters the background join left open.
            std::vector<size_t> open;
            for (size_t i = 0; i < binding.size(); ++i)
                if (binding[i] < 0) open.push_back(i);
            std::function<void(size_t)> rec = [&](size_t oi) {
                if (oi == open.size()) {
                    if (!seen.insert(binding).second) return;
                    GroundAction ga;
                    ga.schema = static_cast<int>(ai);
                    ga.args = binding;
                    for (const auto &tpl : schema.pre_pos)
                        ga.pre_pos.push_back(instantiate(tpl, binding));
                    for (const auto &tpl : schema.pre_neg)
                        ga.pre_neg.push_back(instantiate(tpl, binding));
                    for (const auto &tpl : schema.eff_pos)
                        ga.eff_pos.push_back(instantiate(tpl, binding));
                    for (const auto &tpl : schema.eff_neg)
                        ga.eff_neg.push_back(instantiate(tpl, binding));
                    out.push_back(std::move(ga));
                    return;
                }
                for (int e : ctx.domain_of(schema.param_sorts[open[oi]])) {
                    binding[open[oi]] = e;
                    rec(oi + 1);
                }
                binding[open[oi]] = -1;
            };
            rec(0);
            return false;  // keep enumerating matches
        };
        match_templates(index, background, 0, binding, finish);
    }
    std::sort(out.begin(), out.end());
    return out;
}

// ---------------------------------------------------------------------------
// Goal evaluation
// ---------------------------------------------------------------------------

inline bool goal_conjunct_holds(const StateIndex &index, const GoalConjunct &gc) {
    const StaticContext &ctx = *index.state().ctx;
    size_t nf = gc.forall_names.size();
    std::vector<int> binding(nf + gc.exists_names.size(), -1);

    auto body_holds = [&]() -> bool {
        // exists W: all body literals hold. Positive literals drive the
        // search through the index; negative ones are checked at the end.
        std::vector<AtomTemplate> pos;
        std::vector<const Literal *> neg;
        for (const auto &lit : gc.body) {
            if (lit.negated)
                neg.push_back(&lit);
            else
                pos.push_back(lit.atom);
        }
        auto check_neg = [&]() -> bool {
            // Any exists-vars untouched by positive literals: enumerate.
            std::vector<size_t> open;
            for (size_t i = 0; i < gc.exists_names.size(); ++i)
                if (binding[nf + i] < 0) open.push_back(i);
            std::function<bool(size_t)> rec = [&](size_t oi) -> bool {
                if (oi == open.size()) {
                    for (const Literal *lit : neg)
                        if (index.state().holds(instantiate(lit->atom, binding))) return false;
                    return true;
                }
                for (int e : ctx.domain_of(gc.exists_sorts[open[oi]])) {
                    binding[nf + open[oi]] = e;
                    if (rec(oi + 1)) {
                        binding[nf + open[oi]] = -1;
                        return true;
                    }
                }
                binding[nf + open[oi]] = -1;
                return false;
            };
            return rec(0);
        };
        bool sat = match_templates(index, pos, 0, binding, check_neg);
        for (size_t i = 0; i < gc.exists_names.size(); ++i) binding[nf + i] = -1;
        return sat;
    };

    if (nf == 0) return body_holds();

    // forall V: guard -> body. Guard-driven when possible.
    if (!gc.guard.empty()) {
        bool violated = match_templates(index, gc.guard, 0, binding, [&]() {
            return !body_holds();
        });
        return !violated;
    }
    std::function<bool(size_t)> rec = [&](size_t vi) -> bool {
        if (vi == nf) return body_holds();
        for (int e : ctx.domain_of(gc.forall_sorts[vi])) {
            binding[vi] = e;
            if (!rec(vi + 1)) return false;
        }
        binding[vi] = -1;
        return true;
    };
    return rec(0);
}

inline bool goal_satisfied(const GroundState &s, const GoalFormula &goal) {
    StateIndex index(s);
    for (const auto &gc : goal.conjuncts)
        if (!goal_conjunct_holds(index, gc)) return false;
    return true;
}

}  // namespace genplan2d

#endif
