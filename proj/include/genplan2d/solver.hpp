#ifndef GENPLAN2D_SOLVER_HPP
#define GENPLAN2D_SOLVER_HPP

#include <deque>
#include <limits>
#include <queue>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "genplan2d/ground.hpp"
#include "genplan2d/problem_io.hpp"

namespace genplan2d {

// ---------------------------------------------------------------------------
// Configuration and results
// ---------------------------------------------------------------------------

enum class Heuristic { Additive, Blind };

struct SolverConfig {
    int max_level = 6;          // optimistic stream instantiation rounds
    double timeout = 120.0;     // seconds
    Heuristic heuristic = Heuristic::Additive;
    uint64_t seed = 0;
    int max_pose_entities = 1500;
    uint64_t stream_call_budget = 4000000;
};

struct SearchStats {
    uint64_t expansions = 0;
    uint64_t generated = 0;
    uint64_t stream_calls = 0;
    double wall_seconds = 0;
    int level = 0;
};

struct PlanStep {
    GroundAction action;
    GroundState state;  // state after the action
};

struct Plan {
    std::string problem;
    GroundState initial;
    std::vector<PlanStep> steps;
    bool empty() const { return steps.empty(); }
};

enum class SolveStatus { Solved, Infeasible, Timeout };

struct SolveResult {
    SolveStatus status = SolveStatus::Infeasible;
    Plan plan;
    SearchStats stats;
};

// ---------------------------------------------------------------------------
// Stream instantiation
// ---------------------------------------------------------------------------

namespace detail_solver {

// (object, pose, surface) triples read back from the certified atoms of
// generator streams; the procedural tests enumerate over these.
struct PlacementTuple {
    int obj, pose, surface;
};

inline std::vector<PlacementTuple> placement_tuples(const StaticContext &ctx) {
    std::vector<PlacementTuple> out;
    const Domain &d = *ctx.domain;
    for (const auto &ss : d.streams) {
        if (!ss.is_generator()) continue;
        for (const auto &tpl : ss.certified) {
            // arg roles: first obj input, the output, second obj input
            int obj_pos = -1, pose_pos = -1, surf_pos = -1;
            for (size_t i = 0; i < tpl.args.size(); ++i) {
                Term t = tpl.args[i];
                if (!term_is_var(t)) continue;
                size_t v = static_cast<size_t>(t);
                if (v < ss.input_names.size()) {
                    if (ss.input_sorts[v] == ArgSort::Obj) {
                        if (obj_pos < 0) obj_pos = static_cast<int>(i);
                        else surf_pos = static_cast<int>(i);
                    }
                } else {
                    pose_pos = static_cast<int>(i);
                }
            }
            if (obj_pos < 0 || pose_pos < 0 || surf_pos < 0) continue;
            int arity = d.pred(tpl.pred).arity();
            for (AtomCode c : ctx.certified_atoms) {
                if (atom_pred(c) != tpl.pred) continue;
                int args[kMaxArity];
                atom_args(c, arity, args);
                out.push_back({args[obj_pos], args[pose_pos], args[surf_pos]});
            }
        }
    }
    std::sort(out.begin(), out.end(), [](const PlacementTuple &a, const PlacementTuple &b) {
        return std::tie(a.obj, a.pose, a.surface) < std::tie(b.obj, b.pose, b.surface);
    });
    out.erase(std::unique(out.begin(), out.end(),
                          [](const PlacementTuple &a, const PlacementTuple &b) {
                              return a.obj == b.obj && a.pose == b.pose &&
                                     a.surface == b.surface;
                          }),
              out.end());
    return out;
}

// Input bindings of a stream: joins of its :domain templates over the
// context's static atoms, sorted for determinism.
inline std::vector<std::vector<int>> stream_bindings(const StaticContext &ctx,
                                                     const StreamSchema &ss) {
    GroundState probe{std::shared_ptr<const StaticContext>(&ctx, [](const StaticContext *) {}),
                      {}};
    StateIndex index(probe);
    std::set<std::vector<int>> seen;
    std::vector<int> binding(ss.input_names.size() + ss.output_names.size(), -1);
    match_templates(index, ss.domain_pre, 0, binding, [&]() {
        std::vector<int> in(binding.begin(),
                            binding.begin() + static_cast<long>(ss.input_names.size()));
        bool complete = true;
        for (int v : in)
            if (v < 0) complete = false;
        if (complete) seen.insert(in);
        return false;
    });
    return {seen.begin(), seen.end()};
}

// Runs the procedural tests (collision, trajectory) exhaustively over all
// placement tuples and merges the certified atoms into ctx.
inline void run_test_streams(StaticContext &ctx, uint64_t &stream_calls) {
    const Domain &d = *ctx.domain;
    auto tuples = placement_tuples(ctx);
    auto payload = [&](int pose_entity) -> const PoseVal & {
        return *ctx.entities[static_cast<size_t>(pose_entity)].payload;
    };
    std::vector<AtomCode> added;
    for (const auto &ss : d.streams) {
        if (ss.is_generator()) continue;
        if (ss.proc == StreamProc::Collision) {
            for (size_t i = 0; i < tuples.size(); ++i) {
                for (size_t j = i + 1; j < tuples.size(); ++j) {
                    const auto &a = tuples[i], &b = tuples[j];
                    if (a.obj == b.obj || a.pose == b.pose) continue;
                    if (payload(a.pose).frame != payload(b.pose).frame) continue;
                    ++stream_calls;
                    if (!cfree(ctx.geom, a.obj, payload(a.pose), b.obj, payload(b.pose)))
                        continue;
                    for (const auto &tpl : ss.certified) {
                        std::vector<int> bind = {a.obj, a.pose, b.obj, b.pose};
                        added.push_back(instantiate(tpl, bind));
                        bind = {b.obj, b.pose, a.obj, a.pose};
                        added.push_back(instantiate(tpl, bind));
                    }
                }
            }
        } else if (ss.proc == StreamProc::Traj) {
            for (const auto &ob : tuples) {
                for (const auto &tg : tuples) {
                    if (ob.obj == tg.obj) continue;
                    ++stream_calls;
                    if (!blocks_sweep(ctx.geom, ob.obj, payload(ob.pose), payload(tg.pose)))
                        continue;
                    for (const auto &tpl : ss.certified) {
                        std::vector<int> bind = {ob.obj, ob.pose, tg.obj, tg.pose};
                        added.push_back(instantiate(tpl, bind));
                    }
                }
            }
        }
    }
    ctx.certified_atoms.insert(ctx.certified_atoms.end(), added.begin(), added.end());
    sort_unique(ctx.certified_atoms);
}

}  // namespace detail_solver

/*
  Optimistic instantiation: `level` rounds of generator-stream sampling over
  all valid input bindings, then exhaustive test-stream evaluation. Level 0
  keeps the initial entities but still runs the tests.
*/
inline std::shared_ptr<StaticContext> instantiate_streams(const ProblemInstance &pi, int level,
                                                          const SolverConfig &cfg,
                                                          uint64_t &stream_calls) {
    auto ctx = std::make_shared<StaticContext>(*pi.ctx);
    const Domain &d = *ctx->domain;
    int created = 0;
    for (int round = 1; round <= level; ++round) {
        for (const auto &ss : d.streams) {
            if (!ss.is_generator()) continue;
            auto bindings = detail_solver::stream_bindings(*ctx, ss);
            for (const auto &in : bindings) {
                if (static_cast<int>(ctx->poses.size()) + created >= cfg.max_pose_entities)
                    break;
                if (stream_calls >= cfg.stream_call_budget) break;
                if (static_cast<int>(ctx->entities.size()) >= kMaxEntities) break;
                ++stream_calls;
                SplitRng rng = SplitRng::keyed(cfg.seed, "stream:" + ss.name,
                                               static_cast<uint64_t>(in[0]),
                                               static_cast<uint64_t>(in.size() > 1 ? in[1] : 0),
                                               static_cast<uint64_t>(round));
                PoseVal pose;
                try {
                    pose = sample_placement(ctx->geom, in[0], in[1], rng);
                } catch (const NoPlacement &) {
                    continue;
                }
                Entity e;
                e.id = static_cast<int>(ctx->entities.size());
                e.name = "q" + std::to_string(e.id);
                e.kind = EntityKind::Sampled;
                e.payload = pose;
                ctx->entities.push_back(e);
                ++created;
                std::vector<int> bind = in;
                bind.push_back(e.id);
                for (const auto &tpl : ss.certified)
                    ctx->certified_atoms.push_back(instantiate(tpl, bind));
            }
        }
        sort_unique(ctx->certified_atoms);
        ctx->rebuild_sort_lists();
        ctx->index = CtxIndex::build(*ctx);
    }
    detail_solver::run_test_streams(*ctx, stream_calls);
    finalize_context(*ctx);
    return ctx;
}

// ---------------------------------------------------------------------------
// Additive heuristic
// ---------------------------------------------------------------------------

namespace detail_solver {

constexpr int kInf = std::numeric_limits<int>::max() / 4;

/*
  Grounded problem prepared for search: per-action fluent-only precondition
  atom ids and the goal expanded into per-conjunct disjunct lists. The
  additive heuristic ignores negative and universal preconditions.
*/
struct GroundedSearch {
    std::shared_ptr<const StaticContext> ctx;
    const ProblemInstance *pi = nullptr;
    std::vector<GroundAction> actions;

    std::unordered_map<AtomCode, int> atom_id;
    std::vector<AtomCode> atoms;
    std::vector<std::vector<int>> act_pre;       // fluent positive pres
    std::vector<std::vector<int>> act_add;       // fluent adds
    std::vector<std::vector<std::vector<int>>> goal_sets;  // conjunct -> disjunct -> atom ids
    bool goal_reachable_form = true;

    int intern(AtomCode c) {
        auto it = atom_id.find(c);
        if (it != atom_id.end()) return it->second;
        int id = static_cast<int>(atoms.size());
        atom_id.emplace(c, id);
        atoms.push_back(c);
        return id;
    }
};

inline void expand_goal_sets(GroundedSearch &g, const GoalFormula &goal) {
    const StaticContext &ctx = *g.ctx;
    const Domain &d = *ctx.domain;
    for (const auto &gc : goal.conjuncts) {
        size_t nf = gc.forall_names.size();
        std::vector<int> binding(nf + gc.exists_names.size(), -1);
        std::vector<std::vector<int>> conjunct_disjuncts;
        bool conjunct_static_true = false;

        std::function<void(size_t)> eexists = [&](size_t vi) {
            if (vi == gc.exists_names.size()) {
                std::vector<int> atoms;
                bool dead = false, all_static_true = true;
                for (const auto &lit : gc.body) {
                    AtomCode c = instantiate(lit.atom, binding);
                    const auto &ps = d.pred(lit.atom.pred);
                    if (lit.negated) continue;  // h_add ignores negatives
                    if (ps.kind == PredKind::Fluent) {
                        atoms.push_back(g.intern(c));
                        all_static_true = false;
                    } else if (!ctx.has_background(c)) {
                        dead = true;
                        break;
                    }
                }
                if (!dead) {
                    if (atoms.empty() && all_static_true) conjunct_static_true = true;
                    sort_unique(atoms);
                    conjunct_disjuncts.push_back(std::move(atoms));
                }
                return;
            }
            for (int e : ctx.domain_of(gc.exists_sorts[vi])) {
                binding[nf + vi] = e;
                eexists(vi + 1);
            }
            binding[nf + vi] = -1;
        };

        std::function<void(size_t)> eforall = [&](size_t vi) {
            if (vi == nf) {
                for (const auto &gt : gc.guard) {
                    const auto &ps = d.pred(gt.pred);
                    AtomCode c = instantiate(gt, binding);
                    if (ps.kind == PredKind::Fluent)
                        throw contract_error("goal guards must be static for grounding");
                    if (!ctx.has_background(c)) return;  // guard false: binding exempt
                }
                conjunct_disjuncts.clear();
                conjunct_static_true = false;
                eexists(0);
                if (!conjunct_static_true) {
                    std::sort(conjunct_disjuncts.begin(), conjunct_disjuncts.end());
                    conjunct_disjuncts.erase(
                        std::unique(conjunct_disjuncts.begin(), conjunct_disjuncts.end()),
                        conjunct_disjuncts.end());
                    g.goal_sets.push_back(conjunct_disjuncts);
                }
                return;
            }
            for (int e : ctx.domain_of(gc.forall_sorts[vi])) {
                binding[vi] = e;
                eforall(vi + 1);
            }
            binding[vi] = -1;
        };

        eforall(0);
    }
}

inline GroundedSearch prepare_search(const ProblemInstance &pi,
                                     std::shared_ptr<const StaticContext> ctx) {
    GroundedSearch g;
    g.ctx = ctx;
    g.pi = &pi;
    GroundState init{ctx, pi.initial_fluents};
    g.actions = ground_actions(*ctx->domain, init);
    const Domain &d = *ctx->domain;

    // Drop actions with a statically false positive or statically true
    // negative background precondition; strip background atoms from the rest.
    std::vector<GroundAction> kept;
    for (auto &a : g.actions) {
        bool dead = false;
        std::vector<AtomCode> fpre, fneg;
        for (AtomCode c : a.pre_pos) {
            if (d.pred(atom_pred(c)).kind == PredKind::Fluent) fpre.push_back(c);
            else if (!ctx->has_background(c)) dead = true;
        }
        for (AtomCode c : a.pre_neg) {
            if (d.pred(atom_pred(c)).kind == PredKind::Fluent) fneg.push_back(c);
            else if (ctx->has_background(c)) dead = true;
        }
        if (dead) continue;
        a.pre_pos = std::move(fpre);
        a.pre_neg = std::move(fneg);
        kept.push_back(std::move(a));
    }
    g.actions = std::move(kept);

    g.act_pre.resize(g.actions.size());
    g.act_add.resize(g.actions.size());
    for (size_t i = 0; i < g.actions.size(); ++i) {
        for (AtomCode c : g.actions[i].pre_pos) g.act_pre[i].push_back(g.intern(c));
        for (AtomCode c : g.actions[i].eff_pos) g.act_add[i].push_back(g.intern(c));
    }
    expand_goal_sets(g, pi.goal);
    return g;
}

inline int h_add(const GroundedSearch &g, const GroundState &s) {
    size_t n = g.atoms.size();
    std::vector<int> cost(n, kInf);
    using QE = std::pair<int, int>;  // (cost, atom)
    std::priority_queue<QE, std::vector<QE>, std::greater<QE>> pq;
    for (AtomCode c : s.fluents) {
        auto it = g.atom_id.find(c);
        if (it != g.atom_id.end()) {
            cost[static_cast<size_t>(it->second)] = 0;
            pq.emplace(0, it->second);
        }
    }
    // For each action, how many preconditions are still infinite.
    std::vector<int> missing(g.actions.size());
    std::vector<std::vector<int>> consumers(n);
    std::vector<int> base_cost(g.actions.size(), 1);
    std::vector<char> applied(g.actions.size(), 0);
    std::vector<int> ready;
    for (size_t i = 0; i < g.actions.size(); ++i) {
        missing[i] = 0;
        for (int a : g.act_pre[i]) {
            if (cost[static_cast<size_t>(a)] != 0) ++missing[i];
            consumers[static_cast<size_t>(a)].push_back(static_cast<int>(i));
        }
        if (missing[i] == 0) ready.push_back(static_cast<int>(i));
    }
    auto relax_action = [&](int ai) {
        if (applied[static_cast<size_t>(ai)]) return;
        applied[static_cast<size_t>(ai)] = 1;
        long total = 1;
        for (int a : g.act_pre[static_cast<size_t>(ai)]) total += cost[static_cast<size_t>(a)];
        int c = static_cast<int>(std::min<long>(total, kInf));
        for (int add : g.act_add[static_cast<size_t>(ai)]) {
            if (c < cost[static_cast<size_t>(add)]) {
                cost[static_cast<size_t>(add)] = c;
                pq.emplace(c, add);
            }
        }
    };
    for (int ai : ready) relax_action(ai);
    std::vector<char> settled(n, 0);
    while (!pq.empty()) {
        auto [c, a] = pq.top();
        pq.pop();
        if (settled[static_cast<size_t>(a)] || c > cost[static_cast<size_t>(a)]) continue;
        settled[static_cast<size_t>(a)] = 1;
        for (int ai : consumers[static_cast<size_t>(a)]) {
            if (--missing[static_cast<size_t>(ai)] == 0) relax_action(ai);
        }
    }
    long h = 0;
    for (const auto &conjunct : g.goal_sets) {
        long best = kInf;
        for (const auto &disjunct : conjunct) {
            long sum = 0;
            for (int a : disjunct) sum += cost[static_cast<size_t>(a)];
            best = std::min(best, sum);
        }
        h += best;
        if (h >= kInf) return kInf;
    }
    return static_cast<int>(std::min<long>(h, kInf));
}

}  // namespace detail_solver

// ---------------------------------------------------------------------------
// Greedy best-first search
// ---------------------------------------------------------------------------

namespace detail_solver {

struct SearchOutcome {
    enum { Found, Exhausted, OutOfTime } kind = Exhausted;
    std::vector<int> plan_actions;  // indices into grounded action list
    GroundState final_state;
};

inline SearchOutcome gbfs(const GroundedSearch &g, const GroundState &init,
                          const GoalFormula &goal, Heuristic heur, const Stopwatch &clock,
                          double deadline, SearchStats &stats) {
    struct Node {
        GroundState state;
        int parent;
        int action;
    };
    std::deque<Node> nodes;
    std::unordered_map<uint64_t, std::vector<int>> seen;
    using QE = std::tuple<int, uint64_t, int>;  // (h, seq, node)
    std::priority_queue<QE, std::vector<QE>, std::greater<QE>> open;
    uint64_t seq = 0;

    auto push = [&](GroundState &&s, int parent, int action) -> int {
        uint64_t h = s.hash();
        auto &bucket = seen[h];
        for (int idx : bucket)
            if (nodes[static_cast<size_t>(idx)].state == s) return -1;
        int idx = static_cast<int>(nodes.size());
        bucket.push_back(idx);
        int hv = heur == Heuristic::Additive ? h_add(g, s) : 0;
        if (hv >= kInf) {
            nodes.push_back({std::move(s), parent, action});
            return -1;  // unreachable under relaxation at this level
        }
        nodes.push_back({std::move(s), parent, action});
        open.emplace(hv, seq++, idx);
        ++stats.generated;
        return idx;
    };

    push(GroundState(init), -1, -1);

    SearchOutcome out;
    while (!open.empty()) {
        if ((stats.expansions & 63) == 0 && clock.seconds() > deadline) {
            out.kind = SearchOutcome::OutOfTime;
            return out;
        }
        auto [h, s, idx] = open.top();
        open.pop();
        const GroundState state = nodes[static_cast<size_t>(idx)].state;
        ++stats.expansions;

        StateIndex index(state);
        bool is_goal = true;
        for (const auto &gc : goal.conjuncts)
            if (!goal_conjunct_holds(index, gc)) {
                is_goal = false;
                break;
            }
        if (is_goal) {
            out.kind = SearchOutcome::Found;
            out.final_state = state;
            int cur = idx;
            while (cur >= 0 && nodes[static_cast<size_t>(cur)].action >= 0) {
                out.plan_actions.push_back(nodes[static_cast<size_t>(cur)].action);
                cur = nodes[static_cast<size_t>(cur)].parent;
            }
            std::reverse(out.plan_actions.begin(), out.plan_actions.end());
            return out;
        }

        for (size_t ai = 0; ai < g.actions.size(); ++ai) {
            const GroundAction &a = g.actions[ai];
            if (!applicable(state, a, &index)) continue;
            std::vector<AtomCode> next;
            std::vector<AtomCode> dels(a.eff_neg.begin(), a.eff_neg.end());
            std::sort(dels.begin(), dels.end());
            std::set_difference(state.fluents.begin(), state.fluents.end(), dels.begin(),
                                dels.end(), std::back_inserter(next));
            for (AtomCode c : a.eff_pos) {
                auto it = std::lower_bound(next.begin(), next.end(), c);
                if (it == next.end() || *it != c) next.insert(it, c);
            }
            push(GroundState{state.ctx, std::move(next)}, idx, static_cast<int>(ai));
        }
    }
    out.kind = SearchOutcome::Exhausted;
    return out;
}

}  // namespace detail_solver

// ---------------------------------------------------------------------------
// solve
// ---------------------------------------------------------------------------

inline SolveResult solve(const ProblemInstance &pi, const SolverConfig &cfg) {
    Stopwatch clock;
    SolveResult res;
    res.stats.level = 0;

    for (int level = 0; level <= cfg.max_level; ++level) {
        res.stats.level = level;
        auto ctx = instantiate_streams(pi, level, cfg, res.stats.stream_calls);
        auto grounded = detail_solver::prepare_search(pi, ctx);
        GroundState init{ctx, pi.initial_fluents};
        auto outcome = detail_solver::gbfs(grounded, init, pi.goal, cfg.heuristic, clock,
                                           cfg.timeout, res.stats);
        if (outcome.kind == detail_solver::SearchOutcome::OutOfTime) {
            res.status = SolveStatus::Timeout;
            res.stats.wall_seconds = clock.seconds();
            return res;
        }
        if (outcome.kind == detail_solver::SearchOutcome::Found) {
            res.status = SolveStatus::Solved;
            res.plan.problem = pi.name;
            res.plan.initial = init;
            GroundState s = init;
            for (int ai : outcome.plan_actions) {
                const GroundAction &a = grounded.actions[static_cast<size_t>(ai)];
                s = apply(s, a);
                res.plan.steps.push_back({a, s});
            }
            res.stats.wall_seconds = clock.seconds();
            return res;
        }
        if (clock.seconds() > cfg.timeout) {
            res.status = SolveStatus::Timeout;
            res.stats.wall_seconds = clock.seconds();
            return res;
        }
    }
    res.status = SolveStatus::Infeasible;
    res.stats.wall_seconds = clock.seconds();
    return res;
}

// Replays a plan through the successor function and the goal test.
inline bool plan_valid(const Plan &plan, const GoalFormula &goal) {
    GroundState s = plan.initial;
    try {
        for (const auto &step : plan.steps) {
            s = apply(s, step.action);
            if (!(s.fluents == step.state.fluents)) return false;
        }
    } catch (const contract_error &) {
        return false;
    }
    return goal_satisfied(s, goal);
}

// ---------------------------------------------------------------------------
// Transition harvesting
// ---------------------------------------------------------------------------

struct Transition {
    GroundState s;
    GroundAction a;
    GroundState s2;
    bool goal_s2 = false;
    std::string problem;
    int step = 0;
};

struct Dataset {
    std::vector<Transition> transitions;
    // Problems contributing transitions, in first-seen order.
    std::vector<std::string> problems;

    void merge(const Dataset &other) {
        for (const auto &t : other.transitions) transitions.push_back(t);
        for (const auto &p : other.problems)
            if (std::find(problems.begin(), problems.end(), p) == problems.end())
                problems.push_back(p);
    }
};

/*
  Restricts the plan's states to the preimage: symbolic entities are all
  kept; sampled entities survive only if they appear in an action argument,
  a traversed fluent atom, or the goal. Certified atoms over dropped
  entities are removed.
*/
inline Dataset collect_transitions(const Plan &plan, const GoalFormula &goal) {
    Dataset ds;
    if (plan.steps.empty()) return ds;
    const auto base = plan.initial.ctx;
    const Domain &d = *base->domain;

    std::vector<char> keep(base->entities.size(), 0);
    for (const auto &e : base->entities)
        if (e.kind == EntityKind::Symbolic) keep[static_cast<size_t>(e.id)] = 1;
    auto keep_atom_args = [&](AtomCode c) {
        int arity = d.pred(atom_pred(c)).arity();
        int args[kMaxArity];
        atom_args(c, arity, args);
        for (int i = 0; i < arity; ++i) keep[static_cast<size_t>(args[i])] = 1;
    };
    for (AtomCode c : plan.initial.fluents) keep_atom_args(c);
    for (const auto &step : plan.steps) {
        for (int arg : step.action.args) keep[static_cast<size_t>(arg)] = 1;
        for (AtomCode c : step.state.fluents) keep_atom_args(c);
    }
    for (const auto &gc : goal.conjuncts) {
        auto keep_tpl = [&](const AtomTemplate &tpl) {
            for (Term t : tpl.args)
                if (!term_is_var(t)) keep[static_cast<size_t>(term_entity(t))] = 1;
        };
        for (const auto &tpl : gc.guard) keep_tpl(tpl);
        for (const auto &lit : gc.body) keep_tpl(lit.atom);
    }

    auto ctx = std::make_shared<StaticContext>(*base);
    std::vector<AtomCode> cert;
    for (AtomCode c : ctx->certified_atoms) {
        int arity = d.pred(atom_pred(c)).arity();
        int args[kMaxArity];
        atom_args(c, arity, args);
        bool ok = true;
        for (int i = 0; i < arity; ++i)
            if (!keep[static_cast<size_t>(args[i])]) ok = false;
        if (ok) cert.push_back(c);
    }
    ctx->certified_atoms = std::move(cert);
    finalize_context(*ctx);
    // Quantifier domains exclude dropped sampled entities.
    std::vector<int> kept_poses;
    for (int p : ctx->poses)
        if (keep[static_cast<size_t>(p)]) kept_poses.push_back(p);
    ctx->poses = kept_poses;

    GroundState prev{ctx, plan.initial.fluents};
    ds.problems.push_back(plan.problem);
    for (size_t i = 0; i < plan.steps.size(); ++i) {
        GroundState next{ctx, plan.steps[i].state.fluents};
        Transition t;
        t.s = prev;
        t.a = plan.steps[i].action;
        t.s2 = next;
        t.goal_s2 = goal_satisfied(next, goal);
        t.problem = plan.problem;
        t.step = static_cast<int>(i);
        ds.transitions.push_back(std::move(t));
        prev = next;
    }
    return ds;
}

/*
  Adds k extra generator-stream samples per input binding, shared across all
  states of each plan so feature deltas reflect the action and not sampling
  noise. Test streams rerun over the extended pose set; symbolic fluents are
  untouched.
*/
inline Dataset augment_samples(const Dataset &ds, int k, uint64_t seed) {
    if (k <= 0) return ds;
    Dataset out;
    out.problems = ds.problems;
    // Group transitions by problem; all states of one plan share a context.
    std::map<std::string, std::vector<const Transition *>> groups;
    std::vector<std::string> order;
    for (const auto &t : ds.transitions) {
        if (!groups.count(t.problem)) order.push_back(t.problem);
        groups[t.problem].push_back(&t);
    }
    for (const auto &prob : order) {
        const auto &group = groups[prob];
        auto base = group.front()->s.ctx;
        auto ctx = std::make_shared<StaticContext>(*base);
        const Domain &d = *ctx->domain;
        uint64_t calls = 0;
        for (const auto &ss : d.streams) {
            if (!ss.is_generator()) continue;
            auto bindings = detail_solver::stream_bindings(*ctx, ss);
            for (const auto &in : bindings) {
                for (int j = 1; j <= k; ++j) {
                    if (static_cast<int>(ctx->entities.size()) >= kMaxEntities) break;
                    SplitRng rng = SplitRng::keyed(
                        seed, "augment:" + ss.name + ":" + prob,
                        static_cast<uint64_t>(in[0]),
                        static_cast<uint64_t>(in.size() > 1 ? in[1] : 0),
                        static_cast<uint64_t>(j));
                    PoseVal pose;
                    try {
                        pose = sample_placement(ctx->geom, in[0], in[1], rng);
                    } catch (const NoPlacement &) {
                        continue;
                    }
                    Entity e;
                    e.id = static_cast<int>(ctx->entities.size());
                    e.name = "aug" + std::to_string(e.id);
                    e.kind = EntityKind::Sampled;
                    e.payload = pose;
                    ctx->entities.push_back(e);
                    std::vector<int> bind = in;
                    bind.push_back(e.id);
                    for (const auto &tpl : ss.certified)
                        ctx->certified_atoms.push_back(instantiate(tpl, bind));
                }
            }
        }
        sort_unique(ctx->certified_atoms);
        ctx->rebuild_sort_lists();
        ctx->index = CtxIndex::build(*ctx);
        detail_solver::run_test_streams(*ctx, calls);
        finalize_context(*ctx);
        for (const Transition *t : group) {
            Transition nt = *t;
            nt.s.ctx = ctx;
            nt.s2.ctx = ctx;
            out.transitions.push_back(std::move(nt));
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Trajectory blockers (state-level stream query)
// ---------------------------------------------------------------------------

/*
  Objects currently placed whose rectangles intersect the sweep from the
  robot origin to the target's current pose. Relies on the placement fluent
  being named "on" with signature (obj pose obj), which all shipped domains
  follow.
*/
inline std::vector<std::pair<int, int>> traj_blockers(const GroundState &s, int target) {
    const StaticContext &ctx = *s.ctx;
    int on = ctx.domain->pred_id("on");
    if (on < 0) throw contract_error("traj_blockers: domain has no 'on' fluent");
    std::optional<PoseVal> target_pose;
    std::vector<std::pair<int, int>> placed;
    for (AtomCode c : s.fluents) {
        if (atom_pred(c) != on) continue;
        int args[kMaxArity];
        atom_args(c, 3, args);
        if (args[0] == target) target_pose = ctx.entities[static_cast<size_t>(args[1])].payload;
        else placed.emplace_back(args[0], args[1]);
    }
    if (!target_pose) throw contract_error("traj_blockers: target has no pose");
    std::vector<std::pair<int, int>> out;
    for (auto &[obj, pose] : placed) {
        const PoseVal &p = *ctx.entities[static_cast<size_t>(pose)].payload;
        if (blocks_sweep(ctx.geom, obj, p, *target_pose)) out.emplace_back(obj, pose);
    }
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace genplan2d

#endif
