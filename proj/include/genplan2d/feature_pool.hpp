#ifndef GENPLAN2D_FEATURE_POOL_HPP
#define GENPLAN2D_FEATURE_POOL_HPP

#include <cstdio>
#include <cstdlib>
#include <map>
#include <thread>
#include <set>
#include <string>
#include <vector>

#include "genplan2d/features.hpp"
#include "genplan2d/solver.hpp"

namespace genplan2d {

/*
  Generator caps. The complexity bound is the contract; the rest bound the
  search through concept space: conjunctions grow one literal at a time up to
  max_pure_lits (one more when the concept carries an implication),
  implications pair single literals and are then grown by conjunction, and
  quantifier prefixes alternate at most max_quant_blocks times. Every feature
  shape reported for the five tasks fits these defaults: the tray-capacity
  feature is (and lit lit (implies lit lit)) under an exists-forall prefix.
*/
struct PoolConfig {
    int max_complexity = 5;
    int max_vars = 5;
    int max_obj_vars = 3;             // per-sort variable caps
    int max_pose_vars = 2;
    int max_pure_lits = 3;            // literals in an implication-free conjunction
    int max_lits_with_impl = 4;       // total literals when an implication is present
    int max_impl_fresh_rhs_vars = 2;  // fresh variables an implication rhs may introduce
    int max_quant_blocks = 2;         // maximal quantifier alternations in a prefix
    int max_mixed_block_size = 2;     // block size cap when the prefix alternates
    bool count_objects_only = true;   // free variable ranges over symbolic entities
    size_t ext_cap = 4000;            // per-probe-state extension materialization cap
    int probe_states = 4;             // states used for growth gating
    size_t max_features = 200000;
};

struct AnnotatedFeature {
    Feature f;
    std::vector<long> values;  // per dataset state
    bool boolean_kind = false;
};

struct FeaturePool {
    std::shared_ptr<const Domain> domain;
    std::vector<GroundState> states;                 // distinct dataset states
    std::vector<std::pair<int, int>> transition_states;  // (s, s2) indices per transition
    std::vector<AnnotatedFeature> features;          // canonical order; id = index
    bool annotated = false;

    const AnnotatedFeature &operator[](size_t i) const { return features[i]; }
    size_t size() const { return features.size(); }
};

// ---------------------------------------------------------------------------
// Dataset state collection
// ---------------------------------------------------------------------------

inline void collect_pool_states(const Dataset &ds, FeaturePool &pool) {
    std::map<std::pair<const void *, uint64_t>, int> ids;
    auto intern = [&](const GroundState &s) {
        auto key = std::make_pair(static_cast<const void *>(s.ctx.get()), s.hash());
        auto it = ids.find(key);
        if (it != ids.end()) return it->second;
        int id = static_cast<int>(pool.states.size());
        ids.emplace(key, id);
        pool.states.push_back(s);
        return id;
    };
    for (const auto &t : ds.transitions) {
        int a = intern(t.s);
        int b = intern(t.s2);
        pool.transition_states.emplace_back(a, b);
    }
}

// ---------------------------------------------------------------------------
// Concept generation
// ---------------------------------------------------------------------------

namespace detail_pool {

struct GenConcept {
    ConceptNode node;            // canonical variable naming
    std::vector<ArgSort> sorts;  // per variable id
    int height = 1;
    int impls = 0;
    int lits = 1;
    int ext_rank = -1;  // rank of the last literal conjoined (monotone growth)
    std::string repr;
    std::vector<uint64_t> sig;   // per-state extension signature
    bool sig_exact = true;
};

inline bool sort_counts_ok(const std::vector<ArgSort> &sorts, const PoolConfig &cfg) {
    int obj = 0, pose = 0;
    for (ArgSort s : sorts) (s == ArgSort::Obj ? obj : pose)++;
    return obj <= cfg.max_obj_vars && pose <= cfg.max_pose_vars;
}

inline void concept_lits(const ConceptNode &n, std::vector<const ConceptNode *> &out) {
    if (n.kind == ConceptNode::Kind::Lit) out.push_back(&n);
    else
        for (const auto &c : n.children) concept_lits(c, out);
}

// Canonical renaming of a bare concept: smallest serialized form over all
// variable bijections.
inline void canonicalize_concept(const Domain &d, ConceptNode &node, std::vector<ArgSort> &sorts) {
    std::set<int> vars;
    detail_feat::collect_vars(node, vars);
    std::vector<int> old_ids(vars.begin(), vars.end());
    size_t n = old_ids.size();
    std::vector<int> perm(n);
    for (size_t i = 0; i < n; ++i) perm[i] = static_cast<int>(i);
    std::string best;
    ConceptNode best_node;
    std::vector<ArgSort> best_sorts;
    do {
        std::vector<int> map(sorts.size(), -1);
        std::vector<ArgSort> new_sorts(n);
        for (size_t i = 0; i < n; ++i) {
            map[static_cast<size_t>(old_ids[i])] = perm[i];
            new_sorts[static_cast<size_t>(perm[i])] = sorts[static_cast<size_t>(old_ids[i])];
        }
        ConceptNode c = node;
        detail_feat::rename_vars(c, map);
        c = detail_feat::normalize(d, std::move(c));
        std::string repr = detail_feat::concept_string(d, c);
        if (best.empty() || repr < best) {
            best = std::move(repr);
            best_node = std::move(c);
            best_sorts = std::move(new_sorts);
        }
    } while (std::next_permutation(perm.begin(), perm.end()));
    node = std::move(best_node);
    sorts = std::move(best_sorts);
}

/*
  Extension of a +/- literal conjunction over the state, as tuples indexed by
  variable id (-1 for variables the group does not mention). Positive
  literals drive the enumeration through the index; leftover variables are
  enumerated over their sort domains; negative literals filter.
*/
inline bool lits_extension(const std::vector<const ConceptNode *> &lits, size_t nvars,
                           const std::vector<ArgSort> &sorts, const StateIndex &index,
                           size_t cap, std::vector<std::vector<int>> &out) {
    const StaticContext &ctx = *index.state().ctx;
    std::vector<const ConceptNode *> pos, neg;
    std::set<int> covered;
    for (const ConceptNode *l : lits) {
        (l->negated ? neg : pos).push_back(l);
        if (!l->negated) covered.insert(l->args.begin(), l->args.end());
    }
    std::sort(pos.begin(), pos.end(), [&](const ConceptNode *a, const ConceptNode *b) {
        return index.count(a->pred) < index.count(b->pred);
    });
    std::set<int> mentioned;
    for (const ConceptNode *l : lits) mentioned.insert(l->args.begin(), l->args.end());
    std::vector<int> open;  // mentioned but not positively covered
    for (int v : mentioned)
        if (!covered.count(v)) open.push_back(v);

    // Bail out before materializing unbounded open products.
    double open_product = 1;
    for (int v : open) open_product *= std::max<size_t>(ctx.domain_of(sorts[static_cast<size_t>(v)]).size(), 1);
    if (open_product > static_cast<double>(cap)) return false;

    std::vector<int> binding(nvars, -1);
    bool exact = true;
    std::function<bool(size_t)> match = [&](size_t li) -> bool {
        if (out.size() >= cap) {
            exact = false;
            return true;  // abort
        }
        if (li == pos.size()) {
            // enumerate uncovered variables, then filter negatives
            std::function<bool(size_t)> fill = [&](size_t oi) -> bool {
                if (out.size() >= cap) {
                    exact = false;
                    return true;
                }
                if (oi == open.size()) {
                    for (const ConceptNode *l : neg) {
                        int args[kMaxArity];
                        for (size_t i = 0; i < l->args.size(); ++i)
                            args[i] = binding[static_cast<size_t>(l->args[i])];
                        if (index.state().holds(
                                atom_code(l->pred, args, static_cast<int>(l->args.size()))))
                            return false;
                    }
                    std::vector<int> tuple(nvars, -1);
                    for (int v : mentioned)
                        tuple[static_cast<size_t>(v)] = binding[static_cast<size_t>(v)];
                    out.push_back(std::move(tuple));
                    return false;
                }
                for (int e : ctx.domain_of(sorts[static_cast<size_t>(open[oi])])) {
                    binding[static_cast<size_t>(open[oi])] = e;
                    if (fill(oi + 1)) return true;
                }
                binding[static_cast<size_t>(open[oi])] = -1;
                return false;
            };
            return fill(0);
        }
        const ConceptNode *l = pos[li];
        size_t n = index.count(l->pred);
        for (size_t ai = 0; ai < n; ++ai) {
            const DecodedAtom &atom = index.at(l->pred, ai);
            bool ok = true;
            std::vector<int> undo;
            for (size_t i = 0; i < l->args.size() && ok; ++i) {
                int v = l->args[i];
                if (binding[static_cast<size_t>(v)] >= 0) {
                    ok = binding[static_cast<size_t>(v)] == atom[i];
                } else {
                    binding[static_cast<size_t>(v)] = atom[i];
                    undo.push_back(v);
                }
            }
            if (ok && match(li + 1)) return true;
            for (int v : undo) binding[static_cast<size_t>(v)] = -1;
        }
        return false;
    };
    match(0);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return exact;
}

inline uint64_t tuples_hash(const std::vector<std::vector<int>> &tuples) {
    uint64_t h = 0x9ae16a3b2f90404fULL;
    for (const auto &t : tuples) {
        uint64_t th = 0xc3a5c85c97cb3127ULL;
        for (int v : t) th = hash_combine(th, static_cast<uint64_t>(v) + 2);
        h = hash_combine(h, th);
    }
    return h;
}

// ---------------------------------------------------------------------------
// Extension-based feature evaluation (for the growth gate)
// ---------------------------------------------------------------------------

/*
  A concept's truth at a full binding decomposes as  b ∈ P  and  b ∉ W :
  P is the materialized extension of the conjunctive part and W the
  extension of (lhs ∧ ¬rhs) when an implication is present. Feature values
  for every quantifier prefix then come from walks over the two sorted
  relations, with one representative standing in for all entities outside
  the relations at a given column.
*/
struct ExtRel {
    std::vector<std::vector<int>> tuples;  // sorted; -1 at uncovered columns
    std::vector<char> mask;                // per var: column covered?
    bool exact = true;

    static ExtRel universe(size_t nvars) {
        ExtRel r;
        r.mask.assign(nvars, 0);
        r.tuples.push_back(std::vector<int>(nvars, -1));
        return r;
    }
    static ExtRel empty(size_t nvars) {
        ExtRel r;
        r.mask.assign(nvars, 0);
        return r;
    }
};

class ExtEvaluator {
public:
    ExtEvaluator(const ExtRel &p, const ExtRel &w, const std::vector<Quant> &prefix,
                 const std::vector<const std::vector<int> *> &domains)
        : p_(p), w_(w), prefix_(prefix), domains_(domains) {}

    long count() {
        return count_at(0, 0, p_.tuples.size(), 0, w_.tuples.size());
    }

private:
    struct Run {
        int value;
        size_t lo, hi;
    };

    static void runs_of(const std::vector<std::vector<int>> &tuples, size_t lo, size_t hi,
                        int col, std::vector<Run> &out) {
        size_t i = lo;
        while (i < hi) {
            size_t j = i + 1;
            int v = tuples[i][static_cast<size_t>(col)];
            while (j < hi && tuples[j][static_cast<size_t>(col)] == v) ++j;
            out.push_back({v, i, j});
            i = j;
        }
    }

    std::pair<size_t, size_t> narrow(const std::vector<std::vector<int>> &tuples, size_t lo,
                                     size_t hi, int col, int value) const {
        // tuples sorted lexicographically; find the run with this column value
        auto cmp_lo = std::partition_point(tuples.begin() + static_cast<long>(lo),
                                           tuples.begin() + static_cast<long>(hi),
                                           [&](const std::vector<int> &t) {
                                               return t[static_cast<size_t>(col)] < value;
                                           });
        auto cmp_hi = std::partition_point(cmp_lo, tuples.begin() + static_cast<long>(hi),
                                           [&](const std::vector<int> &t) {
                                               return t[static_cast<size_t>(col)] <= value;
                                           });
        return {static_cast<size_t>(cmp_lo - tuples.begin()),
                static_cast<size_t>(cmp_hi - tuples.begin())};
    }

    bool sat(size_t var, size_t plo, size_t phi, size_t wlo, size_t whi) const {
        if (var == domains_.size()) return plo < phi && wlo >= whi;
        Quant q = prefix_[var - 1];
        return quantify(q, var, plo, phi, wlo, whi);
    }

    bool quantify(Quant q, size_t var, size_t plo, size_t phi, size_t wlo, size_t whi) const {
        const std::vector<int> &domain = *domains_[var];
        int col = static_cast<int>(var);
        auto recurse = [&](int value, size_t pl, size_t ph) {
            size_t wl = wlo, wh = whi;
            if (w_.mask[static_cast<size_t>(col)]) {
                auto r = narrow(w_.tuples, wlo, whi, col, value);
                wl = r.first;
                wh = r.second;
            }
            return var + 1 == domains_.size() ? (pl < ph && wl >= wh)
                                              : quantify(prefix_[var], var + 1, pl, ph, wl, wh);
        };
        if (p_.mask[static_cast<size_t>(col)]) {
            std::vector<Run> runs;
            runs_of(p_.tuples, plo, phi, col, runs);
            if (q == Quant::Exists) {
                for (const Run &r : runs)
                    if (recurse(r.value, r.lo, r.hi)) return true;
                return false;
            }
            if (runs.size() < domain.size()) return false;  // some entity falsifies P
            for (const Run &r : runs)
                if (!recurse(r.value, r.lo, r.hi)) return false;
            return true;
        }
        // P unconstrained at this column; only W distinguishes values
        std::vector<Run> wruns;
        if (w_.mask[static_cast<size_t>(col)]) runs_of(w_.tuples, wlo, whi, col, wruns);
        size_t covered = wruns.size();
        if (q == Quant::Exists) {
            for (const Run &r : wruns) {
                size_t wl = r.lo, wh = r.hi;
                bool ok = var + 1 == domains_.size()
                              ? (plo < phi && wl >= wh)
                              : quantify(prefix_[var], var + 1, plo, phi, wl, wh);
                if (ok) return true;
            }
            if (covered < domain.size()) {
                return var + 1 == domains_.size()
                           ? plo < phi
                           : quantify(prefix_[var], var + 1, plo, phi, 0, 0);
            }
            return false;
        }
        for (const Run &r : wruns) {
            bool ok = var + 1 == domains_.size()
                          ? (plo < phi && r.lo >= r.hi)
                          : quantify(prefix_[var], var + 1, plo, phi, r.lo, r.hi);
            if (!ok) return false;
        }
        if (covered < domain.size()) {
            return var + 1 == domains_.size()
                       ? plo < phi
                       : quantify(prefix_[var], var + 1, plo, phi, 0, 0);
        }
        return true;
    }

    long count_at(size_t var, size_t plo, size_t phi, size_t wlo, size_t whi) const {
        const std::vector<int> &domain = *domains_[0];
        int col = 0;
        auto sat_for = [&](size_t pl, size_t ph, size_t wl, size_t wh) {
            return domains_.size() == 1 ? (pl < ph && wl >= wh)
                                        : quantify(prefix_[0], 1, pl, ph, wl, wh);
        };
        (void)var;
        if (p_.mask[0]) {
            std::vector<Run> runs;
            runs_of(p_.tuples, plo, phi, col, runs);
            long n = 0;
            for (const Run &r : runs) {
                size_t wl = wlo, wh = whi;
                if (w_.mask[0]) {
                    auto rr = narrow(w_.tuples, wlo, whi, 0, r.value);
                    wl = rr.first;
                    wh = rr.second;
                }
                if (sat_for(r.lo, r.hi, wl, wh)) ++n;
            }
            return n;
        }
        std::vector<Run> wruns;
        if (w_.mask[0]) runs_of(w_.tuples, wlo, whi, 0, wruns);
        long n = 0;
        for (const Run &r : wruns)
            if (sat_for(plo, phi, r.lo, r.hi)) ++n;
        if (wruns.size() < domain.size()) {
            if (sat_for(plo, phi, 0, 0)) n += static_cast<long>(domain.size() - wruns.size());
        }
        return n;
    }

    const ExtRel &p_, &w_;
    const std::vector<Quant> &prefix_;
    const std::vector<const std::vector<int> *> &domains_;
};

// Materializes the P / W relations of a concept on one state. Returns false
// if a cap was hit (the caller then treats the concept as unmergeable).
inline bool concept_relations(const GenConcept &c, const StateIndex &index, size_t cap,
                              ExtRel &p, ExtRel &w) {
    detail_feat::ConceptShape shape = detail_feat::shape_of(c.node);
    size_t nvars = c.sorts.size();
    bool exact = true;
    auto mask_of = [&](const std::vector<const ConceptNode *> &lits) {
        std::vector<char> m(nvars, 0);
        for (const ConceptNode *l : lits)
            for (int a : l->args) m[static_cast<size_t>(a)] = 1;
        return m;
    };
    if (shape.pure.empty()) {
        p = ExtRel::universe(nvars);
    } else {
        p.tuples.clear();
        p.mask = mask_of(shape.pure);
        if (!lits_extension(shape.pure, nvars, c.sorts, index, cap, p.tuples)) exact = false;
    }
    if (shape.impl) {
        // violations: lhs holds and rhs does not
        ConceptNode flipped = *shape.rhs[0];
        flipped.negated = !flipped.negated;
        std::vector<const ConceptNode *> vio = {shape.lhs[0], &flipped};
        w.tuples.clear();
        w.mask = mask_of(vio);
        if (!lits_extension(vio, nvars, c.sorts, index, cap, w.tuples)) exact = false;
    } else {
        w = ExtRel::empty(nvars);
    }
    return exact;
}

/*
  Growth gate: per probe state, the feature values of the concept under the
  all-exists and all-forall prefixes for every free-variable choice. Concepts
  agreeing on all of these merge (the lower-complexity one survives); this is
  the uniqueness pruning of the generation loop, coarse enough to keep the
  pool tractable. Exact uniqueness over the full dataset happens in prune().
*/
inline void compute_signature(GenConcept &c, const std::vector<StateIndex> &indexes,
                              uint64_t salt, bool obj_free_only) {
    c.sig.clear();
    c.sig_exact = true;
    size_t nvars = c.sorts.size();
    bool has_obj = false;
    for (ArgSort s : c.sorts)
        if (s == ArgSort::Obj) has_obj = true;
    if (nvars == 0 || (obj_free_only && !has_obj)) {
        c.sig.assign(1, hash_combine(salt, hash_string(c.repr)));
        return;
    }
    // per (free var, exists/forall): rolling hash over the probe states
    std::vector<uint64_t> he(nvars, hash_mix(11)), ha(nvars, hash_mix(13));
    for (size_t free = 0; free < nvars; ++free) {
        if (obj_free_only && c.sorts[free] != ArgSort::Obj) continue;
        std::vector<int> map(nvars);
        map[free] = 0;
        int next = 1;
        for (size_t v = 0; v < nvars; ++v)
            if (v != free) map[v] = next++;
        Feature f;
        f.expr = c.node;
        detail_feat::rename_vars(f.expr, map);
        f.var_sorts.resize(nvars);
        for (size_t v = 0; v < nvars; ++v)
            f.var_sorts[static_cast<size_t>(map[v])] = c.sorts[v];
        f.prefix.assign(nvars - 1, Quant::Exists);
        for (const auto &index : indexes)
            he[free] = hash_combine(he[free], static_cast<uint64_t>(evaluate(f, index)) + 1);
        f.prefix.assign(nvars - 1, Quant::Forall);
        for (const auto &index : indexes)
            ha[free] = hash_combine(ha[free], static_cast<uint64_t>(evaluate(f, index)) + 1);
    }
    std::vector<uint64_t> vector_hashes;
    for (size_t free = 0; free < nvars; ++free) {
        if (obj_free_only && c.sorts[free] != ArgSort::Obj) continue;
        vector_hashes.push_back(he[free]);
        vector_hashes.push_back(ha[free]);
    }
    // order-free: a permuted variable naming must produce the same gate
    std::sort(vector_hashes.begin(), vector_hashes.end());
    c.sig = std::move(vector_hashes);
}

inline int min_rule_count(const GenConcept &c) { return concept_rule_count(c.node); }

// All stage-one literal concepts: every predicate, both polarities, every
// canonical sort-consistent argument identification pattern.
inline std::vector<GenConcept> literal_concepts(const Domain &d, const PoolConfig &cfg) {
    std::vector<GenConcept> out;
    for (size_t pi = 0; pi < d.predicates.size(); ++pi) {
        const PredicateSchema &ps = d.predicates[pi];
        int arity = ps.arity();
        std::vector<int> assign(static_cast<size_t>(std::max(arity, 1)), -1);
        std::function<void(int, int)> rec = [&](int pos, int used) {
            if (pos == arity) {
                if (used > cfg.max_vars) return;
                for (int negated = 0; negated < 2; ++negated) {
                    GenConcept c;
                    c.node.kind = ConceptNode::Kind::Lit;
                    c.node.pred = static_cast<int>(pi);
                    c.node.negated = negated == 1;
                    c.node.args.assign(assign.begin(), assign.begin() + arity);
                    c.sorts.resize(static_cast<size_t>(used));
                    for (int i = 0; i < arity; ++i)
                        c.sorts[static_cast<size_t>(assign[static_cast<size_t>(i)])] =
                            ps.sig[static_cast<size_t>(i)];
                    c.height = 1;
                    c.impls = 0;
                    c.lits = 1;
                    c.repr = detail_feat::concept_string(d, c.node);
                    out.push_back(std::move(c));
                }
                return;
            }
            // restricted-growth enumeration: reuse an existing variable of
            // the right sort or introduce the next fresh one
            for (int v = 0; v <= used; ++v) {
                if (v < used) {
                    bool sort_ok = true;
                    for (int j = 0; j < pos; ++j)
                        if (assign[static_cast<size_t>(j)] == v)
                            sort_ok = ps.sig[static_cast<size_t>(j)] ==
                                      ps.sig[static_cast<size_t>(pos)];
                    if (!sort_ok) continue;
                    assign[static_cast<size_t>(pos)] = v;
                    rec(pos + 1, used);
                } else {
                    assign[static_cast<size_t>(pos)] = v;
                    rec(pos + 1, used + 1);
                }
            }
        };
        if (arity == 0) {
            for (int negated = 0; negated < 2; ++negated) {
                GenConcept c;
                c.node.kind = ConceptNode::Kind::Lit;
                c.node.pred = static_cast<int>(pi);
                c.node.negated = negated == 1;
                c.height = 1;
                c.impls = 0;
                c.lits = 1;
                c.repr = detail_feat::concept_string(d, c.node);
                out.push_back(std::move(c));
            }
        } else {
            rec(0, 0);
        }
    }
    return out;
}

// Injective embeddings of B's variables into A's variable set or fresh ids.
inline std::vector<std::vector<int>> var_merges(const GenConcept &a, const GenConcept &b,
                                                int max_vars, bool require_shared) {
    size_t bn = b.sorts.size();
    std::vector<std::vector<int>> out;
    std::vector<int> map(bn, -1);
    std::vector<char> taken(a.sorts.size(), 0);
    std::function<void(size_t, int, int)> rec = [&](size_t bi, int fresh, int shared) {
        if (bi == bn) {
            int total = static_cast<int>(a.sorts.size()) + fresh;
            if (total > max_vars) return;
            if (require_shared && shared == 0 && !a.sorts.empty() && bn > 0) return;
            out.push_back(map);
            return;
        }
        for (size_t ai = 0; ai < a.sorts.size(); ++ai) {
            if (taken[ai] || a.sorts[ai] != b.sorts[bi]) continue;
            taken[ai] = 1;
            map[bi] = static_cast<int>(ai);
            rec(bi + 1, fresh, shared + 1);
            taken[ai] = 0;
        }
        map[bi] = static_cast<int>(a.sorts.size()) + fresh;
        rec(bi + 1, fresh + 1, shared);
        map[bi] = -1;
    };
    rec(0, 0, 0);
    return out;
}

inline ConceptNode remap_node(const ConceptNode &n, const std::vector<int> &map) {
    ConceptNode c = n;
    detail_feat::rename_vars(c, map);
    return c;
}

}  // namespace detail_pool

// ---------------------------------------------------------------------------
// Pool generation
// ---------------------------------------------------------------------------

/*
  Bottom-up generation per the grammar: literal concepts, conjunctions grown
  one literal at a time (flattening makes this complete for conjunction
  sets), one implication per concept (as the whole concept or as one
  conjunct), then quantifier prefixes over every choice of free variable.
  Pruning between rounds: syntactic canonicalization plus per-state
  extension signatures over the dataset.
*/
inline FeaturePool generate_pool(std::shared_ptr<const Domain> domain, int max_complexity,
                                 const Dataset &ds, const PoolConfig &cfg_in = PoolConfig()) {
    using namespace detail_pool;
    PoolConfig cfg = cfg_in;
    cfg.max_complexity = max_complexity;

    FeaturePool pool;
    pool.domain = domain;
    collect_pool_states(ds, pool);

    // Growth gating uses a spread of probe states; the full dataset is used
    // for the feature-level uniqueness pruning in prune().
    std::vector<StateIndex> indexes;
    size_t nprobe = std::min<size_t>(static_cast<size_t>(std::max(cfg.probe_states, 1)),
                                     pool.states.size());
    for (size_t i = 0; i < nprobe; ++i) {
        size_t si = nprobe == 1 ? 0 : i * (pool.states.size() - 1) / (nprobe - 1);
        indexes.emplace_back(pool.states[si]);
    }

    const Domain &d = *domain;
    std::vector<GenConcept> concepts;
    std::set<std::string> seen_repr;
    std::map<std::vector<uint64_t>, size_t> seen_sig;
    uint64_t salt = 0;
    size_t inexact_admits = 0;

    auto admit = [&](GenConcept &&c) -> bool {
        if (detail_feat::count_implications(c.node) > 1) return false;
        if (static_cast<int>(c.sorts.size()) > cfg.max_vars) return false;
        if (!sort_counts_ok(c.sorts, cfg)) return false;
        // In multi-literal concepts every variable must occur positively
        // somewhere; a variable known only through negations ranges over a
        // complement, which explodes and carries no task signal.
        if (c.lits >= 2) {
            std::vector<const ConceptNode *> all_lits;
            concept_lits(c.node, all_lits);
            std::vector<char> pos(c.sorts.size(), 0);
            for (const ConceptNode *l : all_lits)
                if (!l->negated)
                    for (int a : l->args) pos[static_cast<size_t>(a)] = 1;
            for (char p : pos)
                if (!p) return false;
        }
        c.height = detail_feat::tree_height(c.node);
        // Growth only increases both the rule count and the variable count,
        // so concepts already over the bound can never yield a feature.
        if (std::max(min_rule_count(c), static_cast<int>(c.sorts.size())) > cfg.max_complexity)
            return false;
        if (!seen_repr.insert(c.repr).second) return false;
        compute_signature(c, indexes, ++salt, cfg.count_objects_only);
        if (!c.sig_exact) ++inexact_admits;
        auto it = seen_sig.find(c.sig);
        if (it != seen_sig.end()) return false;  // semantically equal on dataset
        seen_sig.emplace(c.sig, concepts.size());
        concepts.push_back(std::move(c));
        return true;
    };

    std::vector<GenConcept> lits = literal_concepts(d, cfg);
    std::sort(lits.begin(), lits.end(),
              [](const GenConcept &a, const GenConcept &b) { return a.repr < b.repr; });
    for (size_t li = 0; li < lits.size(); ++li) lits[li].ext_rank = static_cast<int>(li);
    size_t frontier_begin = 0;
    for (auto &l : lits) {
        GenConcept c = l;
        admit(std::move(c));
    }

    for (int round = 2; round <= cfg.max_complexity; ++round) {
        size_t frontier_end = concepts.size();
        std::vector<GenConcept> fresh;
        // conjunction: extend any concept by one literal, in non-decreasing
        // literal rank so each conjunction set is built along one path
        for (size_t ci = frontier_begin; ci < frontier_end; ++ci) {
            for (size_t li = 0; li < lits.size(); ++li) {
                const GenConcept &a = concepts[ci];
                const GenConcept &lit = lits[li];
                if (static_cast<int>(li) < a.ext_rank) continue;
                int lit_cap = a.impls ? cfg.max_lits_with_impl : cfg.max_pure_lits;
                if (a.lits + 1 > lit_cap) continue;
                // negated certified atoms are sound only under an implication
                if (lit.node.negated &&
                    d.pred(lit.node.pred).kind == PredKind::Certified)
                    continue;
                bool lit_varfree = lit.sorts.empty();
                auto merges = var_merges(a, lit, cfg.max_vars, !lit_varfree && !a.sorts.empty());
                for (const auto &m : merges) {
                    GenConcept c;
                    c.sorts = a.sorts;
                    for (size_t bi = 0; bi < lit.sorts.size(); ++bi) {
                        size_t target = static_cast<size_t>(m[bi]);
                        if (target >= c.sorts.size()) c.sorts.resize(target + 1);
                        c.sorts[target] = lit.sorts[bi];
                    }
                    if (!sort_counts_ok(c.sorts, cfg)) continue;
                    ConceptNode merged;
                    merged.kind = ConceptNode::Kind::And;
                    merged.children.push_back(a.node);
                    merged.children.push_back(remap_node(lit.node, m));
                    c.node = detail_feat::normalize(d, std::move(merged));
                    canonicalize_concept(d, c.node, c.sorts);
                    c.lits = a.lits + 1;
                    c.impls = a.impls;
                    c.ext_rank = static_cast<int>(li);
                    c.repr = detail_feat::concept_string(d, c.node);
                    fresh.push_back(std::move(c));
                }
            }
        }
        // implication: literal sides; compound antecedents arise by growing
        // the conjunction around the implication afterwards
        for (size_t ai = 0; round == 2 && ai < lits.size(); ++ai) {
            const GenConcept &a = lits[ai];
            for (size_t bi = 0; bi < lits.size(); ++bi) {
                const GenConcept &b = lits[bi];
                bool side_varfree = a.sorts.empty() || b.sorts.empty();
                auto merges = var_merges(a, b, cfg.max_vars, !side_varfree);
                for (const auto &m : merges) {
                    int fresh_vars = 0;
                    for (int t : m)
                        if (t >= static_cast<int>(a.sorts.size())) ++fresh_vars;
                    if (fresh_vars > cfg.max_impl_fresh_rhs_vars) continue;
                    ConceptNode impl;
                    impl.kind = ConceptNode::Kind::Implies;
                    impl.children.push_back(a.node);
                    impl.children.push_back(remap_node(b.node, m));
                    GenConcept c;
                    c.sorts = a.sorts;
                    for (size_t vb = 0; vb < b.sorts.size(); ++vb) {
                        size_t target = static_cast<size_t>(m[vb]);
                        if (target >= c.sorts.size()) c.sorts.resize(target + 1);
                        c.sorts[target] = b.sorts[vb];
                    }
                    c.node = detail_feat::normalize(d, std::move(impl));
                    canonicalize_concept(d, c.node, c.sorts);
                    c.lits = a.lits + b.lits;
                    c.impls = 1;
                    c.repr = detail_feat::concept_string(d, c.node);
                    fresh.push_back(std::move(c));
                }
            }
        }
        for (auto &c : fresh) c.height = detail_feat::tree_height(c.node);
        std::sort(fresh.begin(), fresh.end(), [](const GenConcept &x, const GenConcept &y) {
            int cx = std::max(min_rule_count(x), static_cast<int>(x.sorts.size()));
            int cy = std::max(min_rule_count(y), static_cast<int>(y.sorts.size()));
            if (cx != cy) return cx < cy;
            return x.repr < y.repr;
        });
        frontier_begin = frontier_end;
        for (auto &c : fresh) admit(std::move(c));
        if (getenv("GENPLAN2D_POOL_DEBUG"))
            fprintf(stderr, "[pool] round %d: candidates=%zu concepts=%zu inexact=%zu\n", round,
                    fresh.size(), concepts.size(), inexact_admits);
    }

    // Features: free-variable choice x quantifier prefix over the rest.
    std::map<std::string, Feature> features;
    for (const auto &c : concepts) {
        int v = static_cast<int>(c.sorts.size());
        if (v == 0) continue;
        if (std::max(min_rule_count(c), v) > cfg.max_complexity) continue;
        for (int free = 0; free < v; ++free) {
            if (cfg.count_objects_only && c.sorts[static_cast<size_t>(free)] != ArgSort::Obj)
                continue;
            std::vector<int> rest;
            for (int i = 0; i < v; ++i)
                if (i != free) rest.push_back(i);
            // ordered block partitions with alternating quantifiers
            std::vector<std::pair<Quant, int>> prefix;
            std::function<void(std::vector<int> &, int)> blocks = [&](std::vector<int> &left,
                                                                      int depth) {
                if (left.empty()) {
                    Feature f;
                    if (!make_canonical_feature(d, c.node, c.sorts, free, prefix, f)) return;
                    f.complexity = feature_complexity(f);
                    if (f.complexity > cfg.max_complexity) return;
                    if (features.size() >= cfg.max_features) return;
                    features.emplace(f.repr, std::move(f));
                    return;
                }
                if (depth >= cfg.max_quant_blocks) return;
                // choose the next block (nonempty subset) and its quantifier;
                // single-block prefixes may take everything, alternating
                // prefixes use blocks of bounded size
                size_t n = left.size();
                for (uint64_t mask = 1; mask < (1ULL << n); ++mask) {
                    int popcount = __builtin_popcountll(mask);
                    bool whole = mask + 1 == (1ULL << n);
                    if (!(depth == 0 && whole) && popcount > cfg.max_mixed_block_size) continue;
                    std::vector<int> block, remain;
                    for (size_t i = 0; i < n; ++i)
                        ((mask >> i) & 1 ? block : remain).push_back(left[i]);
                    for (Quant q : {Quant::Exists, Quant::Forall}) {
                        if (depth > 0 && prefix.back().first == q) continue;  // maximal blocks
                        size_t before = prefix.size();
                        for (int var : block) prefix.emplace_back(q, var);
                        blocks(remain, depth + 1);
                        prefix.resize(before);
                    }
                }
            };
            blocks(rest, 0);
        }
    }

    for (auto &[repr, f] : features) {
        AnnotatedFeature af;
        af.f = std::move(f);
        pool.features.push_back(std::move(af));
    }
    std::sort(pool.features.begin(), pool.features.end(),
              [](const AnnotatedFeature &a, const AnnotatedFeature &b) {
                  if (a.f.complexity != b.f.complexity) return a.f.complexity < b.f.complexity;
                  return a.f.repr < b.f.repr;
              });
    return pool;
}

/*
  Evaluates every feature on every dataset state and applies uniqueness
  pruning: among features with identical value vectors the lowest-complexity
  (then lexicographically first) one survives. Ids follow canonical order.
*/
inline void prune(FeaturePool &pool, int workers = 2) {
    if (pool.annotated) return;
    std::vector<StateIndex> indexes;
    indexes.reserve(pool.states.size());
    for (const auto &s : pool.states) indexes.emplace_back(s);
    // evaluations are pure; split features across workers
    auto annotate = [&](size_t begin, size_t end) {
        for (size_t fi = begin; fi < end; ++fi) {
            auto &af = pool.features[fi];
            af.values.resize(pool.states.size());
            long maxv = 0;
            for (size_t si = 0; si < pool.states.size(); ++si) {
                af.values[si] = evaluate(af.f, indexes[si]);
                maxv = std::max(maxv, af.values[si]);
            }
            af.boolean_kind = maxv <= 1;
        }
    };
    size_t n = pool.features.size();
    if (workers > 1 && n > 256) {
        std::vector<std::thread> pool_threads;
        size_t chunk = (n + static_cast<size_t>(workers) - 1) / static_cast<size_t>(workers);
        for (int w = 0; w < workers; ++w) {
            size_t b = static_cast<size_t>(w) * chunk;
            size_t e = std::min(n, b + chunk);
            if (b < e) pool_threads.emplace_back(annotate, b, e);
        }
        for (auto &t : pool_threads) t.join();
    } else {
        annotate(0, n);
    }
    // features are already in (complexity, repr) order: first wins
    std::map<std::vector<long>, size_t> by_vector;
    std::vector<AnnotatedFeature> kept;
    for (auto &af : pool.features) {
        auto it = by_vector.find(af.values);
        if (it != by_vector.end()) continue;
        by_vector.emplace(af.values, kept.size());
        kept.push_back(std::move(af));
    }
    pool.features = std::move(kept);
    pool.annotated = true;
}

}  // namespace genplan2d

#endif
