// SPDX-License-Identifier: Apache-2.0
//
// mmtrack - location-aided beam tracking simulator for mmWave links
// Copyright (C) 2026 The mmtrack Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#ifndef MMTRACK_SCENARIO_HPP
#define MMTRACK_SCENARIO_HPP

#include "channel.hpp"
#include "path.hpp"
#include "rng.hpp"

#include <algorithm>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace mmtrack
{

// ------------------------------------------------------------------------
// Geometry helpers
// ------------------------------------------------------------------------

// Axis-aligned box with its base on the ground plane.
struct Box
{
    Vec3 lo = Vec3::Zero();
    Vec3 hi = Vec3::Zero();
};

// Length of the part of segment [a, b] that lies inside `box`, as a fraction
// of the segment (0 when the segment misses or only touches the box).
inline double segment_box_overlap(const Vec3 &a, const Vec3 &b, const Box &box)
{
    double t0 = 0.0, t1 = 1.0;
    const Vec3 d = b - a;
    for (int k = 0; k < 3; ++k)
    {
        if (std::abs(d[k]) < 1e-15)
        {
            if (a[k] <= box.lo[k] || a[k] >= box.hi[k])
                return 0.0;
            continue;
        }
        double ta = (box.lo[k] - a[k]) / d[k];
        double tb = (box.hi[k] - a[k]) / d[k];
        if (ta > tb)
            std::swap(ta, tb);
        t0 = std::max(t0, ta);
        t1 = std::min(t1, tb);
        if (t0 >= t1)
            return 0.0;
    }
    return t1 - t0;
}

inline bool segment_hits_box(const Vec3 &a, const Vec3 &b, const Box &box)
{
    // Ignore grazing contacts shorter than a millimetre.
    const double len = (b - a).norm();
    return len > 0.0 && segment_box_overlap(a, b, box) * len > 1e-3;
}

inline double polygon_area(const std::vector<Vec2> &poly)
{
    double acc = 0.0;
    for (std::size_t i = 0; i < poly.size(); ++i)
    {
        const Vec2 &p = poly[i];
        const Vec2 &q = poly[(i + 1) % poly.size()];
        acc += p.x() * q.y() - q.x() * p.y();
    }
    return std::abs(acc) / 2.0;
}

// Even-odd rule.
inline bool point_in_polygon(const Vec2 &p, const std::vector<Vec2> &poly)
{
    bool inside = false;
    for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++)
    {
        const Vec2 &a = poly[i];
        const Vec2 &b = poly[j];
        if ((a.y() > p.y()) != (b.y() > p.y()))
        {
            const double x = (b.x() - a.x()) * (p.y() - a.y()) / (b.y() - a.y()) + a.x();
            if (p.x() < x)
                inside = !inside;
        }
    }
    return inside;
}

// ------------------------------------------------------------------------
// Configuration
// ------------------------------------------------------------------------

struct Building
{
    Vec2 min = Vec2::Zero();
    Vec2 max = Vec2::Zero();
    double height = 0.0;
    std::string material = "brick";

    Box box() const { return {{min.x(), min.y(), 0.0}, {max.x(), max.y(), height}}; }
};

struct BlockerSpec
{
    std::string name;
    double width = 0.5;  // along x
    double depth = 0.5;  // along y
    double height = 1.5;
    double weight = 1.0; // relative frequency among specs
    std::vector<std::string> materials = {"brick", "glass"}; // loss drawn uniformly per blocker
};

// Link-budget and tracer parameters shared by every module.
struct RadioConfig
{
    PathLossModel path_loss{};
    double tx_power_dbm = 30.0;
    double noise_psd_dbm_hz = -174.0;
    double bandwidth_hz = 100e6;
    double power_floor_dbm = -140.0;
    double angular_resolution_deg = 0.1;
};

struct ScenarioConfig
{
    std::string name = "scenario";
    RadioConfig radio{};
    std::map<std::string, double> materials = {{"brick", 28.3}, {"glass", 3.9}};
    std::vector<Building> buildings;
    Vec2 bs_xy = Vec2::Zero();
    double bs_height = 6.0;
    std::optional<double> bs_boresight_deg; // derived from the mounting wall when unset
    std::vector<Vec2> trajectory;
    double ue_height = 1.4;
    double grid_size = 3.0;
    double speed_kmh = 5.0;
    double blocker_density = 0.0; // per m^2
    std::vector<BlockerSpec> blocker_specs;
    std::vector<Vec2> street_region;
};

// ------------------------------------------------------------------------
// Scenario
// ------------------------------------------------------------------------

struct GridCell
{
    int id = 0;
    double s_begin = 0.0; // arc length along the trajectory, meters
    double s_end = 0.0;
    Vec2 center = Vec2::Zero();
    double heading = 0.0; // travel direction, radians from +x
};

struct Scenario
{
    ScenarioConfig config;
    Vec3 bs_position = Vec3::Zero();
    double bs_yaw = 0.0;
    std::vector<double> cumulative; // arc length at each trajectory vertex
    std::vector<GridCell> grids;

    int grid_count() const { return static_cast<int>(grids.size()); }
    double trajectory_length() const { return cumulative.empty() ? 0.0 : cumulative.back(); }
    double street_area() const { return polygon_area(config.street_region); }

    double material_loss(const std::string &material) const
    {
        auto it = config.materials.find(material);
        if (it == config.materials.end())
            throw ConfigError("materials", "unknown material '" + material + "'");
        return it->second;
    }

    Vec2 point_at(double s) const
    {
        const auto &pts = config.trajectory;
        s = std::clamp(s, 0.0, trajectory_length());
        for (std::size_t k = 0; k + 1 < pts.size(); ++k)
        {
            const double seg = cumulative[k + 1] - cumulative[k];
            if (s <= cumulative[k + 1] || k + 2 == pts.size())
            {
                const double t = seg > 0.0 ? (s - cumulative[k]) / seg : 0.0;
                return pts[k] + t * (pts[k + 1] - pts[k]);
            }
        }
        return pts.back();
    }

    double heading_at(double s) const
    {
        const auto &pts = config.trajectory;
        for (std::size_t k = 0; k + 1 < pts.size(); ++k)
            if (s <= cumulative[k + 1] || k + 2 == pts.size())
            {
                const Vec2 d = pts[k + 1] - pts[k];
                return std::atan2(d.y(), d.x());
            }
        return 0.0;
    }

    Vec3 ue_position(int grid_id) const
    {
        const Vec2 c = grids.at(grid_id).center;
        return {c.x(), c.y(), config.ue_height};
    }

    int grid_of_arc(double s) const
    {
        const int i = static_cast<int>(std::floor(s / config.grid_size));
        return std::clamp(i, 0, grid_count() - 1);
    }
};

struct Projection
{
    double s = 0.0;        // arc length of the closest trajectory point
    double distance = 0.0; // horizontal distance to that point
    bool beyond_ends = false;
};

// Closest point on the trajectory polyline. `beyond_ends` flags points whose
// projection falls past the first or last vertex.
inline Projection project_onto_trajectory(const Scenario &sc, const Vec2 &p)
{
    const auto &pts = sc.config.trajectory;
    Projection best;
    best.distance = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k + 1 < pts.size(); ++k)
    {
        const Vec2 a = pts[k], b = pts[k + 1];
        const Vec2 ab = b - a;
        const double len2 = ab.squaredNorm();
        const double t_raw = len2 > 0.0 ? (p - a).dot(ab) / len2 : 0.0;
        const double t = std::clamp(t_raw, 0.0, 1.0);
        const double dist = (a + t * ab - p).norm();
        if (dist < best.distance)
        {
            best.distance = dist;
            best.s = sc.cumulative[k] + t * std::sqrt(len2);
            best.beyond_ends = (k == 0 && t_raw < 0.0) || (k + 2 == pts.size() && t_raw > 1.0);
        }
    }
    return best;
}

// Validates `cfg` and computes the grid layout. Deterministic.
inline Scenario build_scenario(const ScenarioConfig &cfg)
{
    if (cfg.trajectory.size() < 2)
        throw ConfigError("trajectory", "needs at least two points");
    if (!(cfg.grid_size > 0.0))
        throw ConfigError("grid_size", "must be positive");
    if (!(cfg.bs_height > 0.0))
        throw ConfigError("bs_height", "must be positive");
    if (!(cfg.ue_height > 0.0))
        throw ConfigError("ue_height", "must be positive");
    if (cfg.blocker_density < 0.0)
        throw ConfigError("blocker_density", "must be >= 0");
    if (cfg.speed_kmh <= 0.0)
        throw ConfigError("speed_kmh", "must be positive");
    if (cfg.blocker_density > 0.0 && cfg.street_region.size() < 3)
        throw ConfigError("street_region", "needs at least three vertices when blockers are enabled");
    if (cfg.blocker_density > 0.0 && cfg.blocker_specs.empty())
        throw ConfigError("blocker_specs", "empty while blocker_density > 0");
    for (const auto &b : cfg.blocker_specs)
        if (!(b.width > 0.0 && b.depth > 0.0 && b.height > 0.0) || b.weight < 0.0 || b.materials.empty())
            throw ConfigError("blocker_specs", "invalid spec '" + b.name + "'");
    for (const auto &[name, loss] : cfg.materials)
        if (loss < 0.0)
            throw ConfigError("materials", "negative loss for '" + name + "'");
    const auto &r = cfg.radio;
    if (!(r.path_loss.frequency_hz > 0.0))
        throw ConfigError("radio.frequency_hz", "must be positive");
    if (!(r.bandwidth_hz > 0.0))
        throw ConfigError("radio.bandwidth_hz", "must be positive");
    if (r.angular_resolution_deg < 0.0)
        throw ConfigError("radio.angular_resolution_deg", "must be >= 0");

    Scenario sc;
    sc.config = cfg;
    for (std::size_t i = 0; i < cfg.buildings.size(); ++i)
    {
        const auto &b = cfg.buildings[i];
        if (!(b.max.x() > b.min.x() && b.max.y() > b.min.y() && b.height > 0.0))
            throw ConfigError("buildings[" + std::to_string(i) + "]", "footprint and height must be positive");
        (void)sc.material_loss(b.material);
    }
    for (const auto &b : cfg.blocker_specs)
        for (const auto &m : b.materials)
            (void)sc.material_loss(m);

    sc.cumulative.assign(1, 0.0);
    for (std::size_t k = 0; k + 1 < cfg.trajectory.size(); ++k)
        sc.cumulative.push_back(sc.cumulative.back() + (cfg.trajectory[k + 1] - cfg.trajectory[k]).norm());
    const double length = sc.cumulative.back();
    if (!(length > 0.0))
        throw ConfigError("trajectory", "has zero length");

    const int m = static_cast<int>(std::ceil(length / cfg.grid_size - 1e-9));
    for (int i = 0; i < m; ++i)
    {
        GridCell g;
        g.id = i;
        g.s_begin = i * cfg.grid_size;
        g.s_end = std::min(length, (i + 1) * cfg.grid_size);
        const double mid = 0.5 * (g.s_begin + g.s_end);
        g.center = sc.point_at(mid);
        g.heading = sc.heading_at(mid);
        sc.grids.push_back(g);
    }

    // The BS must sit on (or within 1 m of) a building face and outside every building.
    sc.bs_position = {cfg.bs_xy.x(), cfg.bs_xy.y(), cfg.bs_height};
    double best = std::numeric_limits<double>::infinity();
    double normal_yaw = 0.0;
    for (const auto &b : cfg.buildings)
    {
        const Vec2 p = cfg.bs_xy;
        if (p.x() > b.min.x() && p.x() < b.max.x() && p.y() > b.min.y() && p.y() < b.max.y())
            throw ConfigError("bs.position", "lies inside a building");
        const struct
        {
            double dist;
            bool in_span;
            double yaw;
        } faces[4] = {
            {b.min.x() - p.x(), p.y() >= b.min.y() && p.y() <= b.max.y(), pi},
            {p.x() - b.max.x(), p.y() >= b.min.y() && p.y() <= b.max.y(), 0.0},
            {b.min.y() - p.y(), p.x() >= b.min.x() && p.x() <= b.max.x(), -pi / 2.0},
            {p.y() - b.max.y(), p.x() >= b.min.x() && p.x() <= b.max.x(), pi / 2.0},
        };
        for (const auto &f : faces)
            if (f.in_span && f.dist >= 0.0 && f.dist < best && cfg.bs_height <= b.height)
            {
                best = f.dist;
                normal_yaw = f.yaw;
            }
    }
    if (best > 1.0 && !cfg.bs_boresight_deg)
        throw ConfigError("bs.position", "not mounted on a building face (set bs.boresight_deg for free-standing masts)");
    sc.bs_yaw = cfg.bs_boresight_deg ? deg_to_rad(*cfg.bs_boresight_deg) : normal_yaw;
    return sc;
}

// ------------------------------------------------------------------------
// Temporary obstacles
// ------------------------------------------------------------------------

struct Blocker
{
    Vec3 position = Vec3::Zero(); // footprint centre, ground level
    double width = 0.0;
    double depth = 0.0;
    double height = 0.0;
    double loss_db = 0.0;
    int spec_index = 0;

    Box box() const
    {
        return {{position.x() - width / 2, position.y() - depth / 2, 0.0},
                {position.x() + width / 2, position.y() + depth / 2, height}};
    }
};

struct ObstacleSet
{
    std::vector<Blocker> blockers;
    std::uint64_t seed = 0;
};

// Poisson number of blockers placed uniformly inside the street region.
inline ObstacleSet sample_obstacles(const Scenario &sc, std::uint64_t seed)
{
    ObstacleSet out;
    out.seed = seed;
    const auto &cfg = sc.config;
    if (cfg.blocker_density <= 0.0 || cfg.blocker_specs.empty())
        return out;

    Rng rng(seed);
    const double mean = cfg.blocker_density * sc.street_area();
    std::poisson_distribution<int> count_dist(mean);
    const int count = count_dist(rng);

    Vec2 lo = cfg.street_region.front(), hi = lo;
    for (const auto &p : cfg.street_region)
    {
        lo = lo.cwiseMin(p);
        hi = hi.cwiseMax(p);
    }
    std::uniform_real_distribution<double> ux(lo.x(), hi.x()), uy(lo.y(), hi.y());
    std::vector<double> weights;
    for (const auto &s : cfg.blocker_specs)
        weights.push_back(s.weight);
    std::discrete_distribution<int> pick_spec(weights.begin(), weights.end());

    for (int n = 0; n < count; ++n)
    {
        Vec2 p;
        do
            p = {ux(rng), uy(rng)};
        while (!point_in_polygon(p, cfg.street_region));
        const int k = pick_spec(rng);
        const auto &spec = cfg.blocker_specs[k];
        std::uniform_int_distribution<std::size_t> pick_mat(0, spec.materials.size() - 1);
        Blocker b;
        b.position = {p.x(), p.y(), 0.0};
        b.width = spec.width;
        b.depth = spec.depth;
        b.height = spec.height;
        b.loss_db = sc.material_loss(spec.materials[pick_mat(rng)]);
        b.spec_index = k;
        out.blockers.push_back(b);
    }
    return out;
}

// ------------------------------------------------------------------------
// Image-source tracer: LoS plus single-bounce specular reflections off
// vertical building faces. Every building or blocker box crossed by a path
// segment adds its penetration loss.
// ------------------------------------------------------------------------

inline double penetration_along(const Scenario &sc, const ObstacleSet &obs, const Vec3 &a, const Vec3 &b)
{
    double loss = 0.0;
    for (const auto &bld : sc.config.buildings)
        if (segment_hits_box(a, b, bld.box()))
            loss += sc.material_loss(bld.material);
    for (const auto &blk : obs.blockers)
        if (segment_hits_box(a, b, blk.box()))
            loss += blk.loss_db;
    return loss;
}

struct TracedPath
{
    Path path;
    double beta_db = 0.0;
};

// All geometric paths, unsorted and unquantized, with their large-scale gain.
inline std::vector<TracedPath> trace_all(const Scenario &sc, const ObstacleSet &obs, const Vec3 &rx, double rx_yaw)
{
    std::vector<TracedPath> out;
    const Vec3 tx = sc.bs_position;
    const auto &pl = sc.config.radio.path_loss;
    const auto add = [&](Path p) {
        const double g = large_scale_gain_db(p, pl.frequency_hz, pl.los_exponent, pl.nlos_exponent);
        out.push_back({p, g});
    };

    if ((rx - tx).norm() > 0.0)
    {
        Path los;
        los.is_los = true;
        los.reflection_count = 0;
        los.length = (rx - tx).norm();
        los.aod = to_local(rx - tx, sc.bs_yaw);
        los.aoa = to_local(tx - rx, rx_yaw);
        los.penetration_loss_db = penetration_along(sc, obs, tx, rx);
        add(los);
    }

    for (const auto &bld : sc.config.buildings)
    {
        for (int axis = 0; axis < 2; ++axis)
        {
            for (int side = 0; side < 2; ++side)
            {
                const double plane = side == 0 ? bld.min[axis] : bld.max[axis];
                const double outward = side == 0 ? -1.0 : 1.0;
                if (outward * (tx[axis] - plane) <= 0.0 || outward * (rx[axis] - plane) <= 0.0)
                    continue;
                Vec3 image = tx;
                image[axis] = 2.0 * plane - tx[axis];
                const double t = (plane - image[axis]) / (rx[axis] - image[axis]);
                const Vec3 hit = image + t * (rx - image);
                const int other = 1 - axis;
                if (hit[other] < bld.min[other] || hit[other] > bld.max[other] || hit.z() < 0.0 || hit.z() > bld.height)
                    continue;
                Path p;
                p.is_los = false;
                p.reflection_count = 1;
                p.length = (rx - image).norm();
                p.aod = to_local(hit - tx, sc.bs_yaw);
                p.aoa = to_local(hit - rx, rx_yaw);
                p.penetration_loss_db = penetration_along(sc, obs, tx, hit) + penetration_along(sc, obs, hit, rx);
                add(p);
            }
        }
    }
    return out;
}

// Up to `max_paths` paths above the power floor, strongest first, angles
// quantized to `angular_resolution_deg`. An empty result signals outage.
inline std::vector<Path> trace_paths(const Scenario &sc, const ObstacleSet &obs, const Vec3 &rx, int max_paths,
                                     double angular_resolution_deg, double rx_yaw = 0.0)
{
    if (max_paths < 1)
        throw DomainError("trace_paths: max_paths must be >= 1");
    auto all = trace_all(sc, obs, rx, rx_yaw);
    const double floor_db = sc.config.radio.power_floor_dbm - sc.config.radio.tx_power_dbm;
    std::erase_if(all, [&](const TracedPath &t) { return t.beta_db < floor_db; });
    std::stable_sort(all.begin(), all.end(),
                     [](const TracedPath &a, const TracedPath &b) { return a.beta_db > b.beta_db; });
    if (static_cast<int>(all.size()) > max_paths)
        all.resize(max_paths);
    const double step = deg_to_rad(angular_resolution_deg);
    std::vector<Path> out;
    out.reserve(all.size());
    for (auto &t : all)
    {
        t.path.aod = quantize(t.path.aod, step);
        t.path.aoa = quantize(t.path.aoa, step);
        out.push_back(t.path);
    }
    return out;
}

inline std::vector<Path> trace_paths(const Scenario &sc, const ObstacleSet &obs, const Vec3 &rx, int max_paths)
{
    return trace_paths(sc, obs, rx, max_paths, sc.config.radio.angular_resolution_deg);
}

} // namespace mmtrack

#endif // MMTRACK_SCENARIO_HPP
