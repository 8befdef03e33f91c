#ifndef GENPLAN2D_DOMAIN_HPP
#define GENPLAN2D_DOMAIN_HPP

#include <array>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "genplan2d/geometry.hpp"
#include "genplan2d/util.hpp"

namespace genplan2d {

// ---------------------------------------------------------------------------
// Predicates and atoms
// ---------------------------------------------------------------------------

enum class PredKind { Fluent, Static, Certified };

// Argument sorts restrict grounding and quantifier domains. Symbolic entities
// have sort Obj, sampled entities sort Pose.
enum class ArgSort { Obj, Pose };

struct PredicateSchema {
    std::string name;
    PredKind kind = PredKind::Fluent;
    std::vector<ArgSort> sig;
    int arity() const { return static_cast<int>(sig.size()); }
};

constexpr int kMaxArity = 5;
constexpr int kMaxEntities = 2045;
constexpr int kMaxPredicates = 255;

// Ground atoms are packed into one u64: 8 bits of predicate id, then five
// 11-bit entity slots holding id+1 (0 = unused). Packed order sorts
// lexicographically by (predicate, args), which we use as canonical order.
using AtomCode = uint64_t;

inline AtomCode atom_code(int pred, const int *args, int arity) {
    AtomCode c = static_cast<AtomCode>(pred);
    for (int i = 0; i < kMaxArity; ++i) {
        c <<= 11;
        if (i < arity) c |= static_cast<AtomCode>(args[i] + 1);
    }
    return c;
}

inline AtomCode atom_code(int pred, const std::vector<int> &args) {
    return atom_code(pred, args.data(), static_cast<int>(args.size()));
}

inline int atom_pred(AtomCode c) { return static_cast<int>(c >> 55); }

inline void atom_args(AtomCode c, int arity, int *out) {
    for (int i = 0; i < arity; ++i) {
        out[i] = static_cast<int>((c >> (11 * (kMaxArity - 1 - i))) & 0x7ff) - 1;
    }
}

// ---------------------------------------------------------------------------
// Entities
// ---------------------------------------------------------------------------

enum class EntityKind { Symbolic, Sampled };

struct Entity {
    int id = -1;
    std::string name;
    EntityKind kind = EntityKind::Symbolic;
    // Sampled entities carry a pose payload; symbolic entities never do.
    std::optional<PoseVal> payload;

    ArgSort sort() const { return kind == EntityKind::Symbolic ? ArgSort::Obj : ArgSort::Pose; }
};

// ---------------------------------------------------------------------------
// Lifted templates
// ---------------------------------------------------------------------------

// A term is a variable index (>= 0) or a constant entity id encoded as
// -(id + 1).
using Term = int;
inline Term term_var(int v) { return v; }
inline Term term_const(int entity) { return -(entity + 1); }
inline bool term_is_var(Term t) { return t >= 0; }
inline int term_entity(Term t) { return -t - 1; }

struct AtomTemplate {
    int pred = -1;
    std::vector<Term> args;
};

struct Literal {
    AtomTemplate atom;
    bool negated = false;
};

// "forall vars: guard => body". Variables of the enclosing schema may appear
// bound in guard/body; `vars` are the locally quantified ones.
struct UniversalCondition {
    std::vector<std::string> var_names;
    std::vector<ArgSort> var_sorts;
    std::vector<AtomTemplate> guard;
    AtomTemplate body;
    bool body_negated = false;
};

struct ActionSchema {
    std::string name;
    std::vector<std::string> param_names;
    std::vector<ArgSort> param_sorts;
    std::vector<AtomTemplate> pre_pos;
    std::vector<AtomTemplate> pre_neg;
    std::vector<UniversalCondition> universals;
    std::vector<AtomTemplate> eff_pos;
    std::vector<AtomTemplate> eff_neg;
};

// Procedural backends a stream can bind to (geometry side of the module).
enum class StreamProc { Placement, Collision, Traj };

struct StreamSchema {
    std::string name;
    std::vector<std::string> input_names;
    std::vector<ArgSort> input_sorts;
    std::vector<std::string> output_names;  // sampled entities, sort Pose
    std::vector<AtomTemplate> domain_pre;   // static atoms over inputs
    std::vector<AtomTemplate> certified;    // atoms over inputs + outputs
    StreamProc proc = StreamProc::Placement;

    bool is_generator() const { return !output_names.empty(); }
};

struct Domain {
    std::string name;
    std::vector<PredicateSchema> predicates;
    std::vector<ActionSchema> actions;
    std::vector<StreamSchema> streams;
    std::map<std::string, int> pred_by_name;
    std::map<std::string, int> action_by_name;

    int pred_id(const std::string &n) const {
        auto it = pred_by_name.find(n);
        return it == pred_by_name.end() ? -1 : it->second;
    }
    const PredicateSchema &pred(int id) const { return predicates[static_cast<size_t>(id)]; }
};

// ---------------------------------------------------------------------------
// Goals
// ---------------------------------------------------------------------------

// One conjunct of a goal:  forall V: guard -> exists W: body.  Plain literals
// parse into a conjunct with empty prefixes; free variables in body become
// existentials.
struct GoalConjunct {
    std::vector<std::string> forall_names;
    std::vector<ArgSort> forall_sorts;
    std::vector<AtomTemplate> guard;
    std::vector<std::string> exists_names;
    std::vector<ArgSort> exists_sorts;
    std::vector<Literal> body;
};

struct GoalFormula {
    std::vector<GoalConjunct> conjuncts;
};

// ---------------------------------------------------------------------------
// Ground states
// ---------------------------------------------------------------------------

/*
  Immutable per-problem context shared by all states of one search or one
  plan: the entity universe, static and certified atoms, and geometry.
  Successor computation touches only the fluent vector.
*/
struct CtxIndex;

struct StaticContext {
    std::shared_ptr<const Domain> domain;
    std::vector<Entity> entities;            // indexed by id
    std::vector<AtomCode> static_atoms;      // sorted
    std::vector<AtomCode> certified_atoms;   // sorted
    GeomTable geom;
    // Decoded background atoms; set by finalize_context once the atom sets
    // stop changing.
    std::shared_ptr<const CtxIndex> index;

    std::vector<int> objects;  // symbolic entity ids, ascending
    std::vector<int> poses;    // sampled entity ids, ascending

    void rebuild_sort_lists() {
        objects.clear();
        poses.clear();
        for (const auto &e : entities) {
            if (e.kind == EntityKind::Symbolic)
                objects.push_back(e.id);
            else
                poses.push_back(e.id);
        }
    }

    const std::vector<int> &domain_of(ArgSort s) const {
        return s == ArgSort::Obj ? objects : poses;
    }

    bool has_background(AtomCode c) const {
        return std::binary_search(static_atoms.begin(), static_atoms.end(), c) ||
               std::binary_search(certified_atoms.begin(), certified_atoms.end(), c);
    }

    int entity_id(const std::string &name) const {
        for (const auto &e : entities)
            if (e.name == name) return e.id;
        return -1;
    }
};

struct GroundState {
    std::shared_ptr<const StaticContext> ctx;
    std::vector<AtomCode> fluents;  // sorted

    bool has_fluent(AtomCode c) const {
        return std::binary_search(fluents.begin(), fluents.end(), c);
    }
    // Truth of an atom of any predicate kind.
    bool holds(AtomCode c) const {
        int p = atom_pred(c);
        if (ctx->domain->pred(p).kind == PredKind::Fluent) return has_fluent(c);
        return ctx->has_background(c);
    }

    uint64_t hash() const {
        uint64_t h = 0x2545f4914f6cdd1dULL;
        for (AtomCode c : fluents) h = hash_combine(h, c);
        return h;
    }
    bool operator==(const GroundState &o) const { return fluents == o.fluents; }
};

struct GroundAction {
    int schema = -1;
    std::vector<int> args;
    // Ground atom codes, precomputed at grounding time.
    std::vector<AtomCode> pre_pos;
    std::vector<AtomCode> pre_neg;
    std::vector<AtomCode> eff_pos;
    std::vector<AtomCode> eff_neg;

    bool operator==(const GroundAction &o) const {
        return schema == o.schema && args == o.args;
    }
    bool operator<(const GroundAction &o) const {
        if (schema != o.schema) return schema < o.schema;
        return args < o.args;
    }
};

inline std::string action_name(const Domain &d, const GroundAction &a,
                               const StaticContext &ctx) {
    std::string s = d.actions[static_cast<size_t>(a.schema)].name + "(";
    for (size_t i = 0; i < a.args.size(); ++i) {
        if (i) s += ",";
        s += ctx.entities[static_cast<size_t>(a.args[i])].name;
    }
    return s + ")";
}

// ---------------------------------------------------------------------------
// Problems and tasks
// ---------------------------------------------------------------------------

struct ProblemInstance {
    std::string name;
    std::shared_ptr<const Domain> domain;
    std::shared_ptr<const StaticContext> ctx;
    std::vector<AtomCode> initial_fluents;  // sorted
    GoalFormula goal;

    GroundState initial_state() const { return GroundState{ctx, initial_fluents}; }
};

enum class TaskName { Load, Unstack, Sort, Clutter, Transport };

inline std::string task_to_string(TaskName t) {
    switch (t) {
        case TaskName::Load: return "load";
        case TaskName::Unstack: return "unstack";
        case TaskName::Sort: return "sort";
        case TaskName::Clutter: return "clutter";
        case TaskName::Transport: return "transport";
    }
    return "?";
}

struct TaskSpec {
    TaskName task = TaskName::Load;
    int size_x = 1;  // primary size parameter (N, X)
    int size_y = 0;  // secondary (Sort-X-Y, Transport-X-Y)
    uint64_t seed = 0;

    std::string instance_name() const {
        std::string s = task_to_string(task) + "-" + std::to_string(size_x);
        if (task == TaskName::Sort || task == TaskName::Transport)
            s += "-" + std::to_string(size_y);
        return s + "-s" + std::to_string(seed);
    }
};

}  // namespace genplan2d

#endif
