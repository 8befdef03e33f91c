#ifndef GENPLAN2D_GEOMETRY_HPP
#define GENPLAN2D_GEOMETRY_HPP

#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <vector>

#include "genplan2d/util.hpp"

namespace genplan2d {

/*
  2D tabletop geometry: axis-aligned rectangles, no rotation. Poses live in a
  coordinate frame (the table frame, or a tray's local frame). Rectangles in
  different frames never collide.
*/

struct Extent {
    double hw = 0.5, hh = 0.5;  // half sizes, strictly positive
};

struct PoseVal {
    double x = 0, y = 0;
    int frame = -1;  // entity id of the coordinate frame
};

enum class SurfaceKind { Table, Tray, Region, Source, Destination };

struct SurfaceInfo {
    int entity = -1;
    int frame = -1;      // frame its placement poses are expressed in
    double cx = 0, cy = 0;
    double hw = 1, hh = 1;
    SurfaceKind kind = SurfaceKind::Table;
};

struct NoPlacement : contract_error {
    NoPlacement() : contract_error("object does not fit on surface") {}
};

// Open-overlap test: touching boundaries count as collision-free.
inline bool rects_overlap(double cx1, double cy1, const Extent &e1, double cx2, double cy2,
                          const Extent &e2) {
    return std::abs(cx1 - cx2) < e1.hw + e2.hw && std::abs(cy1 - cy2) < e1.hh + e2.hh;
}

// Segment (x1,y1)-(x2,y2) vs axis-aligned rectangle, boundary inclusive.
inline bool segment_hits_rect(double x1, double y1, double x2, double y2, double cx, double cy,
                              const Extent &e) {
    double minx = cx - e.hw, maxx = cx + e.hw, miny = cy - e.hh, maxy = cy + e.hh;
    double dx = x2 - x1, dy = y2 - y1;
    double t0 = 0.0, t1 = 1.0;
    auto clip = [&](double p, double q) {
        // Liang-Barsky edge clip: p * t <= q
        if (p == 0.0) return q >= 0.0;
        double r = q / p;
        if (p < 0.0) {
            if (r > t1) return false;
            if (r > t0) t0 = r;
        } else {
            if (r < t0) return false;
            if (r < t1) t1 = r;
        }
        return true;
    };
    return clip(-dx, x1 - minx) && clip(dx, maxx - x1) && clip(-dy, y1 - miny) &&
           clip(dy, maxy - y1);
}

struct GeomTable {
    std::map<int, Extent> extents;       // movable objects and surfaces with bodies
    std::map<int, SurfaceInfo> surfaces; // placement targets
    double robot_x = 0, robot_y = 0;     // fixed approach origin, table frame
    int table_frame = -1;

    const Extent &extent_of(int entity) const {
        auto it = extents.find(entity);
        if (it == extents.end())
            throw contract_error("no geometry for entity " + std::to_string(entity));
        return it->second;
    }
    const SurfaceInfo &surface_of(int entity) const {
        auto it = surfaces.find(entity);
        if (it == surfaces.end())
            throw contract_error("entity " + std::to_string(entity) + " is not a surface");
        return it->second;
    }
    bool is_surface(int entity) const { return surfaces.count(entity) > 0; }
};

// Uniform pose over placements of `obj` fully inside `surface`. The zero-area
// feasible set (object exactly the surface size) yields the centered pose.
inline PoseVal sample_placement(const GeomTable &g, int obj, int surface, SplitRng &rng) {
    if (obj == surface) throw NoPlacement();
    const Extent &oe = g.extent_of(obj);
    const SurfaceInfo &s = g.surface_of(surface);
    double fx = s.hw - oe.hw, fy = s.hh - oe.hh;
    if (fx < 0 || fy < 0) throw NoPlacement();
    PoseVal p;
    p.frame = s.frame;
    p.x = fx == 0 ? s.cx : rng.uniform(s.cx - fx, s.cx + fx);
    p.y = fy == 0 ? s.cy : rng.uniform(s.cy - fy, s.cy + fy);
    return p;
}

inline bool pose_inside_surface(const GeomTable &g, int obj, const PoseVal &p, int surface) {
    const Extent &oe = g.extent_of(obj);
    const SurfaceInfo &s = g.surface_of(surface);
    return p.frame == s.frame && p.x - oe.hw >= s.cx - s.hw - 1e-9 &&
           p.x + oe.hw <= s.cx + s.hw + 1e-9 && p.y - oe.hh >= s.cy - s.hh - 1e-9 &&
           p.y + oe.hh <= s.cy + s.hh + 1e-9;
}

// True iff the two rectangles at their poses do not overlap. Poses in
// different frames are trivially collision-free.
inline bool cfree(const GeomTable &g, int o1, const PoseVal &p1, int o2, const PoseVal &p2) {
    if (p1.frame != p2.frame) return true;
    return !rects_overlap(p1.x, p1.y, g.extent_of(o1), p2.x, p2.y, g.extent_of(o2));
}

// True iff `obstacle` at `obstacle_pose` intersects the straight sweep from
// the robot origin to `target_pose`. Only table-frame poses can block.
inline bool blocks_sweep(const GeomTable &g, int obstacle, const PoseVal &obstacle_pose,
                         const PoseVal &target_pose) {
    if (obstacle_pose.frame != g.table_frame || target_pose.frame != g.table_frame)
        return false;
    return segment_hits_rect(g.robot_x, g.robot_y, target_pose.x, target_pose.y,
                             obstacle_pose.x, obstacle_pose.y, g.extent_of(obstacle));
}

/*
  Exhaustive grid check for surface capacity: can k identical objects of
  extent `e` be placed on `surface` pairwise collision-free? Used by the task
  generators and capacity tests (k <= 3).
*/
inline bool grid_packing_exists(const GeomTable &g, int surface, const Extent &e, int k,
                                double step = 0.05) {
    const SurfaceInfo &s = g.surface_of(surface);
    double fx = s.hw - e.hw, fy = s.hh - e.hh;
    if (fx < 0 || fy < 0) return false;
    if (k <= 0) return true;
    std::vector<std::pair<double, double>> grid;
    int nx = std::max(1, static_cast<int>(std::floor(2 * fx / step)) + 1);
    int ny = std::max(1, static_cast<int>(std::floor(2 * fy / step)) + 1);
    for (int i = 0; i < nx; ++i)
        for (int j = 0; j < ny; ++j)
            grid.emplace_back(s.cx - fx + (nx == 1 ? fx : i * (2 * fx / (nx - 1))),
                              s.cy - fy + (ny == 1 ? fy : j * (2 * fy / (ny - 1))));
    std::vector<std::pair<double, double>> chosen;
    std::function<bool(size_t)> rec = [&](size_t start) -> bool {
        if (static_cast<int>(chosen.size()) == k) return true;
        for (size_t i = start; i < grid.size(); ++i) {
            bool ok = true;
            for (auto &c : chosen)
                if (rects_overlap(grid[i].first, grid[i].second, e, c.first, c.second, e)) {
                    ok = false;
                    break;
                }
            if (!ok) continue;
            chosen.push_back(grid[i]);
            if (rec(i + 1)) return true;
            chosen.pop_back();
        }
        return false;
    };
    return rec(0);
}

}  // namespace genplan2d

#endif
