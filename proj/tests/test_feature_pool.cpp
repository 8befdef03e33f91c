#include <catch2/catch_amalgamated.hpp>

#include "genplan2d/feature_pool.hpp"
#include "support/reference_checker.hpp"
#include "support/test_util.hpp"

using namespace genplan2d;
using gptest::make_load_problem;
using gptest::ref_evaluate;

namespace {

Dataset load_training_dataset(int max_n, int augment_k) {
    Dataset ds;
    for (int n = 1; n <= max_n; ++n) {
        auto pi = make_load_problem(n);
        SolverConfig cfg;
        cfg.seed = 100 + static_cast<uint64_t>(n);
        cfg.timeout = 60;
        auto res = solve(pi, cfg);
        REQUIRE(res.status == SolveStatus::Solved);
        ds.merge(collect_transitions(res.plan, pi.goal));
    }
    return augment_samples(ds, augment_k, 999);
}

// Independent exhaustive enumerator for complexity <= 3: single literals and
// literal => literal implications, all canonical argument/variable patterns,
// all quantifier prefixes. Dedupes by brute-force evaluation vectors.
int reference_pool_size_bound3(const Domain &d, const std::vector<GroundState> &states) {
    std::vector<std::pair<int, bool>> lit_heads;  // (pred, negated)
    std::set<std::string> reprs;
    std::map<std::vector<long>, std::string> vectors;

    // all single-literal concepts with canonical variable patterns
    struct LitPattern {
        ConceptNode node;
        std::vector<ArgSort> sorts;
    };
    std::vector<LitPattern> lits;
    for (size_t pi = 0; pi < d.predicates.size(); ++pi) {
        const PredicateSchema &ps = d.predicates[pi];
        int arity = ps.arity();
        std::vector<int> assign(static_cast<size_t>(std::max(arity, 1)));
        std::function<void(int, int)> rec = [&](int pos, int used) {
            if (pos == arity) {
                for (int neg = 0; neg < 2; ++neg) {
                    LitPattern lp;
                    lp.node.kind = ConceptNode::Kind::Lit;
                    lp.node.pred = static_cast<int>(pi);
                    lp.node.negated = neg == 1;
                    lp.node.args.assign(assign.begin(), assign.begin() + arity);
                    lp.sorts.resize(static_cast<size_t>(used));
                    for (int i = 0; i < arity; ++i)
                        lp.sorts[static_cast<size_t>(assign[static_cast<size_t>(i)])] =
                            ps.sig[static_cast<size_t>(i)];
                    lits.push_back(std::move(lp));
                }
                return;
            }
            for (int v = 0; v <= used; ++v) {
                bool ok = true;
                for (int j = 0; j < pos; ++j)
                    if (assign[static_cast<size_t>(j)] == v &&
                        ps.sig[static_cast<size_t>(j)] != ps.sig[static_cast<size_t>(pos)])
                        ok = false;
                if (!ok) continue;
                assign[static_cast<size_t>(pos)] = v;
                rec(pos + 1, std::max(used, v + 1));
            }
        };
        if (arity > 0) rec(0, 0);
        else {
            for (int neg = 0; neg < 2; ++neg) {
                LitPattern lp;
                lp.node.kind = ConceptNode::Kind::Lit;
                lp.node.pred = static_cast<int>(pi);
                lp.node.negated = neg == 1;
                lits.push_back(std::move(lp));
            }
        }
    }

    std::vector<std::pair<ConceptNode, std::vector<ArgSort>>> concepts;
    for (const auto &lp : lits) concepts.emplace_back(lp.node, lp.sorts);
    // literal => literal with every variable identification (R = 3)
    for (const auto &a : lits) {
        for (const auto &b : lits) {
            size_t bn = b.sorts.size();
            std::vector<int> map(bn, -1);
            std::function<void(size_t)> maps = [&](size_t bi) {
                if (bi == bn) {
                    ConceptNode impl;
                    impl.kind = ConceptNode::Kind::Implies;
                    impl.children.push_back(a.node);
                    ConceptNode rb = b.node;
                    detail_feat::rename_vars(rb, map);
                    impl.children.push_back(rb);
                    std::vector<ArgSort> sorts = a.sorts;
                    for (size_t i = 0; i < bn; ++i) {
                        size_t t = static_cast<size_t>(map[i]);
                        if (t >= sorts.size()) sorts.resize(t + 1);
                        sorts[t] = b.sorts[i];
                    }
                    if (sorts.size() <= 3) concepts.emplace_back(impl, sorts);
                    return;
                }
                for (size_t ai = 0; ai < a.sorts.size() + bi + 1 && ai < 5; ++ai) {
                    // candidate target id (either an existing var or fresh)
                    if (ai < a.sorts.size() && a.sorts[ai] != b.sorts[bi]) continue;
                    bool taken = false;
                    for (size_t j = 0; j < bi; ++j)
                        if (map[j] == static_cast<int>(ai)) taken = true;
                    if (taken) continue;
                    map[bi] = static_cast<int>(ai);
                    maps(bi + 1);
                }
                map[bi] = -1;
            };
            maps(0);
        }
    }

    for (const auto &[node, sorts] : concepts) {
        int v = static_cast<int>(sorts.size());
        if (v == 0 || v > 3) continue;
        for (int free = 0; free < v; ++free) {
            std::vector<int> rest;
            for (int i = 0; i < v; ++i)
                if (i != free) rest.push_back(i);
            std::vector<std::vector<std::pair<Quant, int>>> prefixes;
            std::sort(rest.begin(), rest.end());
            std::vector<int> perm = rest;
            do {
                for (uint64_t mask = 0; mask < (1ULL << perm.size()); ++mask) {
                    std::vector<std::pair<Quant, int>> p;
                    for (size_t i = 0; i < perm.size(); ++i)
                        p.emplace_back(((mask >> i) & 1) ? Quant::Forall : Quant::Exists,
                                       perm[i]);
                    prefixes.push_back(std::move(p));
                }
            } while (std::next_permutation(perm.begin(), perm.end()));
            for (const auto &prefix : prefixes) {
                Feature f;
                if (!make_canonical_feature(d, node, sorts, free, prefix, f)) continue;
                f.complexity = feature_complexity(f);
                if (f.complexity > 3) continue;
                if (!reprs.insert(f.repr).second) continue;
                std::vector<long> vec;
                for (const auto &s : states) vec.push_back(ref_evaluate(f, s));
                if (!vectors.count(vec)) vectors.emplace(vec, f.repr);
            }
        }
    }
    return static_cast<int>(vectors.size());
}

}  // namespace

TEST_CASE("pool at bound 5 contains the working-example features") {
    Dataset ds = load_training_dataset(3, 3);
    auto d = ds.transitions[0].s.ctx->domain;
    FeaturePool pool = generate_pool(d, 5, ds);
    prune(pool);
    REQUIRE(pool.size() > 0);

    auto vector_of = [&](const std::string &text) {
        Feature f = parse_feature(*d, text);
        std::vector<long> vec;
        for (const auto &s : pool.states) vec.push_back(ref_evaluate(f, s));
        return vec;
    };
    auto pool_has_vector = [&](const std::vector<long> &vec) {
        for (const auto &af : pool.features)
            if (af.values == vec) return true;
        return false;
    };

    // f1, f2, f3 and the capacity feature f4, up to dataset equivalence
    CHECK(pool_has_vector(vector_of("(count ?x0 (and (holding ?x0) (not (tray ?x0))))")));
    CHECK(pool_has_vector(vector_of("(count ?x0 (and (holding ?x0) (tray ?x0)))")));
    CHECK(pool_has_vector(vector_of(
        "(count ?x0 (exists (?x1 pose ?x2 obj) (and (not (tray ?x2)) (on ?x0 ?x1 ?x2))))")));
    CHECK(pool_has_vector(vector_of(
        "(count ?x0 (exists (?x1 pose ?x2 obj) (forall (?x3 obj ?x4 pose) (and (tray ?x2) "
        "(pose ?x0 ?x1 ?x2) (implies (on ?x3 ?x4 ?x2) (cfree ?x0 ?x1 ?x3 ?x4))))))")));

    SECTION("uniqueness pruning leaves distinct evaluation vectors") {
        std::set<std::vector<long>> vecs;
        for (const auto &af : pool.features) {
            CHECK(vecs.insert(af.values).second);
        }
    }
    SECTION("every feature respects the complexity bound") {
        for (const auto &af : pool.features) {
            CHECK(af.f.complexity <= 5);
            CHECK(af.f.complexity == feature_complexity(af.f));
        }
    }
    SECTION("cached vectors match fresh evaluation") {
        for (size_t i = 0; i < std::min<size_t>(pool.size(), 25); ++i) {
            const auto &af = pool.features[i * pool.size() / 25];
            for (size_t si = 0; si < pool.states.size(); ++si)
                CHECK(af.values[si] == evaluate(af.f, pool.states[si]));
        }
    }
}

TEST_CASE("pool at bound 3 matches the exhaustive reference generator") {
    Dataset ds = load_training_dataset(2, 2);
    auto d = ds.transitions[0].s.ctx->domain;
    FeaturePool pool = generate_pool(d, 3, ds);
    prune(pool);
    int reference = reference_pool_size_bound3(*d, pool.states);
    CHECK(static_cast<int>(pool.size()) == reference);
    SECTION("bound 3 admits no conjunctions") {
        for (const auto &af : pool.features) {
            CHECK(af.f.expr.kind != ConceptNode::Kind::And);
        }
    }
}

TEST_CASE("capacity feature stabilizes under augmentation at k=5") {
    Dataset base;
    auto pi = make_load_problem(3);
    SolverConfig cfg;
    cfg.seed = 103;
    cfg.timeout = 60;
    auto res = solve(pi, cfg);
    REQUIRE(res.status == SolveStatus::Solved);
    base.merge(collect_transitions(res.plan, pi.goal));
    Feature cap = parse_feature(
        *pi.domain,
        "(count ?x0 (exists (?x1 pose ?x2 obj) (forall (?x3 obj ?x4 pose) (and (tray ?x2) "
        "(pose ?x0 ?x1 ?x2) (implies (on ?x3 ?x4 ?x2) (cfree ?x0 ?x1 ?x3 ?x4))))))");
    Dataset k5 = augment_samples(base, 5, 999);
    Dataset k6 = augment_samples(base, 6, 999);
    for (size_t i = 0; i < k5.transitions.size(); ++i) {
        CHECK(qual_of(evaluate(cap, k5.transitions[i].s)) ==
              qual_of(evaluate(cap, k6.transitions[i].s)));
        CHECK(qual_of(evaluate(cap, k5.transitions[i].s2)) ==
              qual_of(evaluate(cap, k6.transitions[i].s2)));
    }
}
