#ifndef GENPLAN2D_TESTS_SUPPORT_RANDOM_STATES_HPP
#define GENPLAN2D_TESTS_SUPPORT_RANDOM_STATES_HPP

#include "test_util.hpp"

namespace gptest {

using namespace genplan2d;

// Random small states over the load domain for property tests: a handful of
// objects and poses with arbitrary fluent/certified atoms. Not required to
// be reachable; only well-sorted.
inline GroundState random_state(std::shared_ptr<const Domain> d, SplitRng &rng, int max_entities = 6) {
    auto ctx = std::make_shared<StaticContext>();
    ctx->domain = d;
    int n_obj = 1 + static_cast<int>(rng.below(static_cast<uint64_t>(max_entities / 2)));
    int n_pose = static_cast<int>(rng.below(static_cast<uint64_t>(max_entities - n_obj + 1)));
    for (int i = 0; i < n_obj; ++i) {
        Entity e;
        e.id = static_cast<int>(ctx->entities.size());
        e.name = "o" + std::to_string(i);
        e.kind = EntityKind::Symbolic;
        ctx->entities.push_back(e);
    }
    for (int i = 0; i < n_pose; ++i) {
        Entity e;
        e.id = static_cast<int>(ctx->entities.size());
        e.name = "p" + std::to_string(i);
        e.kind = EntityKind::Sampled;
        e.payload = PoseVal{rng.uniform(-2, 2), rng.uniform(-2, 2), 0};
        ctx->entities.push_back(e);
    }
    ctx->rebuild_sort_lists();

    auto pick_obj = [&]() { return static_cast<int>(rng.below(static_cast<uint64_t>(n_obj))); };
    auto pick_pose = [&]() {
        return n_obj + static_cast<int>(rng.below(static_cast<uint64_t>(std::max(1, n_pose))));
    };

    std::vector<AtomCode> fluents;
    if (n_pose > 0) {
        int n_on = static_cast<int>(rng.below(5));
        for (int i = 0; i < n_on; ++i)
            fluents.push_back(
                atom_code(d->pred_id("on"), {pick_obj(), pick_pose(), pick_obj()}));
        int n_posea = static_cast<int>(rng.below(6));
        for (int i = 0; i < n_posea; ++i)
            ctx->certified_atoms.push_back(
                atom_code(d->pred_id("pose"), {pick_obj(), pick_pose(), pick_obj()}));
        int n_cfree = static_cast<int>(rng.below(6));
        for (int i = 0; i < n_cfree; ++i)
            ctx->certified_atoms.push_back(atom_code(
                d->pred_id("cfree"), {pick_obj(), pick_pose(), pick_obj(), pick_pose()}));
    }
    if (rng.below(2)) fluents.push_back(atom_code(d->pred_id("holding"), {pick_obj()}));
    if (rng.below(2)) fluents.push_back(atom_code(d->pred_id("handempty"), {}));
    for (int i = 0; i < n_obj; ++i) {
        if (rng.below(2))
            ctx->static_atoms.push_back(atom_code(d->pred_id("movable"), {i}));
        if (rng.below(3) == 0) ctx->static_atoms.push_back(atom_code(d->pred_id("tray"), {i}));
        if (rng.below(2)) ctx->static_atoms.push_back(atom_code(d->pred_id("surface"), {i}));
    }
    sort_unique(fluents);
    sort_unique(ctx->static_atoms);
    sort_unique(ctx->certified_atoms);
    finalize_context(*ctx);
    return GroundState{ctx, fluents};
}

}  // namespace gptest

#endif
