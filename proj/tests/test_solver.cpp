#include <catch2/catch_amalgamated.hpp>

#include "genplan2d/solver.hpp"
#include "support/test_util.hpp"

using namespace genplan2d;
using gptest::make_load_problem;

namespace {

SolverConfig quick_config() {
    SolverConfig cfg;
    cfg.timeout = 30.0;
    cfg.max_level = 4;
    cfg.seed = 17;
    return cfg;
}

// Independent optimal-length oracle: breadth-first search over the same
// instantiated context, no heuristics.
int bfs_optimal_length(const ProblemInstance &pi, int level, uint64_t seed) {
    SolverConfig cfg = quick_config();
    cfg.seed = seed;
    uint64_t calls = 0;
    auto ctx = instantiate_streams(pi, level, cfg, calls);
    auto actions = ground_actions(*ctx->domain, GroundState{ctx, pi.initial_fluents});
    std::deque<std::pair<GroundState, int>> frontier;
    std::unordered_map<uint64_t, std::vector<GroundState>> seen;
    GroundState init{ctx, pi.initial_fluents};
    frontier.emplace_back(init, 0);
    seen[init.hash()].push_back(init);
    while (!frontier.empty()) {
        auto [s, depth] = frontier.front();
        frontier.pop_front();
        if (goal_satisfied(s, pi.goal)) return depth;
        StateIndex idx(s);
        for (const auto &a : actions) {
            if (!applicable(s, a, &idx)) continue;
            GroundState s2 = apply(s, a);
            auto &bucket = seen[s2.hash()];
            bool dup = false;
            for (const auto &old : bucket)
                if (old == s2) dup = true;
            if (dup) continue;
            bucket.push_back(s2);
            frontier.emplace_back(std::move(s2), depth + 1);
        }
    }
    return -1;
}

}  // namespace

TEST_CASE("load N=1 solves with the three-step plan") {
    auto pi = make_load_problem(1);
    auto res = solve(pi, quick_config());
    REQUIRE(res.status == SolveStatus::Solved);
    REQUIRE(res.plan.steps.size() == 3);
    const Domain &d = *pi.domain;
    CHECK(d.actions[static_cast<size_t>(res.plan.steps[0].action.schema)].name == "pick");
    CHECK(d.actions[static_cast<size_t>(res.plan.steps[1].action.schema)].name == "place");
    CHECK(d.actions[static_cast<size_t>(res.plan.steps[2].action.schema)].name == "pick");
    // final pick grasps the tray
    const auto &ctx = *res.plan.initial.ctx;
    CHECK(ctx.entities[static_cast<size_t>(res.plan.steps[2].action.args[0])].name == "t");
    CHECK(plan_valid(res.plan, pi.goal));
    // independent optimal-length oracle agrees
    CHECK(bfs_optimal_length(pi, 1, quick_config().seed) == 3);
}

TEST_CASE("goal already true gives the empty plan") {
    auto pi = make_load_problem(1);
    pi.goal = GoalFormula{};
    auto res = solve(pi, quick_config());
    REQUIRE(res.status == SolveStatus::Solved);
    CHECK(res.plan.steps.empty());
}

TEST_CASE("solve is deterministic") {
    auto pi = make_load_problem(2);
    auto r1 = solve(pi, quick_config());
    auto r2 = solve(pi, quick_config());
    REQUIRE(r1.status == SolveStatus::Solved);
    REQUIRE(r2.status == SolveStatus::Solved);
    REQUIRE(r1.plan.steps.size() == r2.plan.steps.size());
    for (size_t i = 0; i < r1.plan.steps.size(); ++i) {
        CHECK(r1.plan.steps[i].action == r2.plan.steps[i].action);
    }
    CHECK(r1.stats.expansions == r2.stats.expansions);
    CHECK(r1.stats.stream_calls == r2.stats.stream_calls);
}

TEST_CASE("additive plans are never longer than blind plans on tiny instances") {
    for (int n = 1; n <= 2; ++n) {
        auto pi = make_load_problem(n);
        SolverConfig add = quick_config();
        SolverConfig blind = quick_config();
        blind.heuristic = Heuristic::Blind;
        auto ra = solve(pi, add);
        auto rb = solve(pi, blind);
        REQUIRE(ra.status == SolveStatus::Solved);
        REQUIRE(rb.status == SolveStatus::Solved);
        CHECK(ra.plan.steps.size() <= rb.plan.steps.size());
    }
}

TEST_CASE("collect_transitions harvests the preimage") {
    auto pi = make_load_problem(1);
    auto res = solve(pi, quick_config());
    REQUIRE(res.status == SolveStatus::Solved);
    Dataset ds = collect_transitions(res.plan, pi.goal);

    SECTION("one transition per step, last flagged goal") {
        REQUIRE(ds.transitions.size() == 3);
        CHECK_FALSE(ds.transitions[0].goal_s2);
        CHECK_FALSE(ds.transitions[1].goal_s2);
        CHECK(ds.transitions[2].goal_s2);
        for (const auto &t : ds.transitions) {
            GroundState replay = apply(t.s, t.a);
            CHECK(replay.fluents == t.s2.fluents);
        }
    }
    SECTION("empty plan gives an empty fragment") {
        Plan empty;
        empty.initial = res.plan.initial;
        empty.problem = "empty";
        CHECK(collect_transitions(empty, pi.goal).transitions.empty());
    }
    SECTION("certified collision atoms only cover surviving pose pairs and match geometry") {
        const auto &ctx = *ds.transitions[0].s.ctx;
        int cf = ctx.domain->pred_id("cfree");
        std::set<int> kept(ctx.poses.begin(), ctx.poses.end());
        for (AtomCode c : ctx.certified_atoms) {
            if (atom_pred(c) != cf) continue;
            int args[kMaxArity];
            atom_args(c, 4, args);
            CHECK(kept.count(args[1]));
            CHECK(kept.count(args[3]));
            CHECK(cfree(ctx.geom, args[0], *ctx.entities[static_cast<size_t>(args[1])].payload,
                        args[2], *ctx.entities[static_cast<size_t>(args[3])].payload));
        }
        // the preimage universe is no larger than the search universe
        CHECK(ctx.poses.size() <= res.plan.initial.ctx->poses.size());
    }
}

TEST_CASE("augment_samples") {
    auto pi = make_load_problem(1);
    auto res = solve(pi, quick_config());
    REQUIRE(res.status == SolveStatus::Solved);
    Dataset ds = collect_transitions(res.plan, pi.goal);

    SECTION("k=0 leaves the dataset unchanged") {
        Dataset same = augment_samples(ds, 0, 5);
        REQUIRE(same.transitions.size() == ds.transitions.size());
        for (size_t i = 0; i < ds.transitions.size(); ++i) {
            CHECK(same.transitions[i].s.ctx == ds.transitions[i].s.ctx);
        }
    }
    SECTION("k=2 with 1 movable and 2 surfaces adds at least 4 pose atoms") {
        Dataset aug = augment_samples(ds, 2, 5);
        int pose = pi.domain->pred_id("pose");
        auto count_pose = [&](const StaticContext &c) {
            int n = 0;
            for (AtomCode a : c.certified_atoms)
                if (atom_pred(a) == pose) ++n;
            return n;
        };
        int before = count_pose(*ds.transitions[0].s.ctx);
        int after = count_pose(*aug.transitions[0].s.ctx);
        CHECK(after - before >= 4);
    }
    SECTION("symbolic fluents are untouched and deltas stay aligned") {
        Dataset aug = augment_samples(ds, 3, 5);
        for (size_t i = 0; i < ds.transitions.size(); ++i) {
            CHECK(aug.transitions[i].s.fluents == ds.transitions[i].s.fluents);
            CHECK(aug.transitions[i].s2.fluents == ds.transitions[i].s2.fluents);
            // all states of the plan share one augmented context
            CHECK(aug.transitions[i].s.ctx == aug.transitions[0].s.ctx);
        }
    }
    SECTION("augmentation is deterministic") {
        Dataset a1 = augment_samples(ds, 2, 5);
        Dataset a2 = augment_samples(ds, 2, 5);
        CHECK(a1.transitions[0].s.ctx->certified_atoms ==
              a2.transitions[0].s.ctx->certified_atoms);
    }
}

TEST_CASE("traj_blockers") {
    // Table with a target at the origin and one obstacle on the sweep line.
    auto d = parse_domain(gptest::load_domain_text());
    std::string prob = R"((define (problem blockers)
      (:domain load2d)
      (:objects target obs side src)
      (:sampled (pt 0 0 src) (po 0 -2 src) (ps 3 -2 src))
      (:geom (extent target 0.4 0.4) (extent obs 0.4 0.4) (extent side 0.4 0.4)
             (surface src table src 0 0 5 5) (robot 0 -7) (table-frame src))
      (:init (handempty) (surface src)
             (movable target) (movable obs) (movable side)
             (on target pt src) (on obs po src) (on side ps src)
             (pose target pt src) (pose obs po src) (pose side ps src))
      (:goal (and (holding target))))
)";
    auto pi = parse_problem(prob, d);
    GroundState s = pi.initial_state();
    SECTION("one object centered on the sweep segment is returned") {
        auto blockers = traj_blockers(s, pi.ctx->entity_id("target"));
        REQUIRE(blockers.size() == 1);
        CHECK(blockers[0].first == pi.ctx->entity_id("obs"));
    }
    SECTION("no placed objects means no blockers") {
        std::vector<AtomCode> fl;
        int on = d->pred_id("on");
        fl.push_back(atom_code(on, {pi.ctx->entity_id("target"), pi.ctx->entity_id("pt"),
                                    pi.ctx->entity_id("src")}));
        GroundState lone{pi.ctx, fl};
        CHECK(traj_blockers(lone, pi.ctx->entity_id("target")).empty());
    }
}
