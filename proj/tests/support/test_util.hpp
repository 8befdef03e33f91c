#ifndef GENPLAN2D_TESTS_SUPPORT_TEST_UTIL_HPP
#define GENPLAN2D_TESTS_SUPPORT_TEST_UTIL_HPP

#include <string>
#include <vector>

#include "genplan2d/ground.hpp"
#include "genplan2d/problem_io.hpp"

namespace gptest {

using namespace genplan2d;

// Hand-rolled Load instance: N unit blocks and a capacity-2 tray on a table.
// Kept independent of the task generators so domain tests stand alone.
inline std::string load_domain_text() {
    return R"((define (domain load2d)
  (:predicates
    (:fluent (on obj pose obj) (holding obj) (handempty))
    (:static (movable obj) (tray obj) (surface obj))
    (:certified (pose obj pose obj) (cfree obj pose obj pose)))
  (:action pick
    :params (?o obj ?p pose ?s obj)
    :pre ((handempty) (on ?o ?p ?s) (pose ?o ?p ?s))
    :pre-neg ()
    :forall ()
    :eff ((holding ?o))
    :eff-neg ((on ?o ?p ?s) (handempty)))
  (:action place
    :params (?o obj ?p pose ?s obj)
    :pre ((holding ?o) (pose ?o ?p ?s))
    :pre-neg ()
    :forall ((:vars (?o2 obj ?p2 pose) :when ((on ?o2 ?p2 ?s)) :must (cfree ?o ?p ?o2 ?p2)))
    :eff ((on ?o ?p ?s) (handempty))
    :eff-neg ((holding ?o)))
  (:stream sampleplacement
    :inputs (?o obj ?s obj) :outputs (?p)
    :domain ((movable ?o) (surface ?s))
    :certified ((pose ?o ?p ?s))
    :proc placement)
  (:stream checkcollision
    :inputs (?o1 obj ?p1 pose ?o2 obj ?p2 pose) :outputs ()
    :domain ()
    :certified ((cfree ?o1 ?p1 ?o2 ?p2))
    :proc collision))
)";
}

inline std::string load_problem_text(int n_blocks) {
    std::string objs, sampled, geom, init, goal_on;
    for (int i = 1; i <= n_blocks; ++i) {
        std::string b = "b" + std::to_string(i);
        std::string bp = "bp" + std::to_string(i);
        objs += b + " ";
        sampled += "(" + bp + " " + std::to_string(-3.0 + i * 1.2) + " 0.5 src) ";
        geom += "(extent " + b + " 0.5 0.5) ";
        init += "(movable " + b + ") (on " + b + " " + bp + " src) (pose " + b + " " + bp +
                " src) ";
    }
    // Certify the initial configuration collision-free, both argument orders.
    std::vector<std::pair<std::string, std::string>> placed;
    for (int i = 1; i <= n_blocks; ++i)
        placed.emplace_back("b" + std::to_string(i), "bp" + std::to_string(i));
    placed.emplace_back("t", "tp");
    for (size_t i = 0; i < placed.size(); ++i)
        for (size_t j = 0; j < placed.size(); ++j)
            if (i != j)
                init += "(cfree " + placed[i].first + " " + placed[i].second + " " +
                        placed[j].first + " " + placed[j].second + ") ";
    // Goal: the first min(N, 2) blocks ride the tray (capacity 2), then the
    // tray is grasped.
    for (int i = 1; i <= std::min(n_blocks, 2); ++i) {
        goal_on += "(exists (?p" + std::to_string(i) + " pose) (on b" + std::to_string(i) +
                   " ?p" + std::to_string(i) + " t)) ";
    }
    return "(define (problem load-" + std::to_string(n_blocks) +
           ")\n"
           "  (:domain load2d)\n"
           "  (:objects " +
           objs +
           "t src)\n"
           "  (:sampled " +
           sampled +
           "(tp 1.0 -2.0 src))\n"
           "  (:geom " +
           geom +
           "(extent t 1.25 0.65)\n"
           "         (surface src table src 0 0 4 4)\n"
           "         (surface t tray t 0 0 1.15 0.55)\n"
           "         (robot 0 -6) (table-frame src))\n"
           "  (:init (handempty) (tray t) (surface src) (surface t)\n"
           "         (on t tp src) (pose t tp src) " +
           init +
           ")\n"
           "  (:goal (and " +
           goal_on + "(holding t))))\n";
}

inline ProblemInstance make_load_problem(int n) {
    auto d = parse_domain(load_domain_text());
    return parse_problem(load_problem_text(n), d);
}

inline AtomCode atom_of(const ProblemInstance &pi, const std::string &pred,
                        const std::vector<std::string> &args) {
    int p = pi.domain->pred_id(pred);
    if (p < 0) throw std::runtime_error("no predicate " + pred);
    std::vector<int> ids;
    for (const auto &a : args) {
        int id = pi.ctx->entity_id(a);
        if (id < 0) throw std::runtime_error("no entity " + a);
        ids.push_back(id);
    }
    return atom_code(p, ids);
}

inline GroundAction find_action(const std::vector<GroundAction> &actions, const Domain &d,
                                const StaticContext &ctx, const std::string &schema,
                                const std::vector<std::string> &args) {
    for (const auto &a : actions) {
        if (d.actions[static_cast<size_t>(a.schema)].name != schema) continue;
        bool ok = a.args.size() == args.size();
        for (size_t i = 0; ok && i < args.size(); ++i)
            ok = ctx.entities[static_cast<size_t>(a.args[i])].name == args[i];
        if (ok) return a;
    }
    throw std::runtime_error("ground action not found: " + schema);
}

}  // namespace gptest

#endif
