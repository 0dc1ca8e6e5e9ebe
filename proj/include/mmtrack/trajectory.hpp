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

#ifndef MMTRACK_TRAJECTORY_HPP
#define MMTRACK_TRAJECTORY_HPP

#include "beamforming.hpp"
#include "channel.hpp"
#include "localization.hpp"
#include "rng.hpp"
#include "scenario.hpp"
#include "skeleton.hpp"

#include <cmath>
#include <limits>
#include <memory>
#include <vector>

namespace mmtrack
{

/*!MD
# One walk along the trajectory

A trial world holds everything random about one walk: the obstacle draw,
the traced paths and fading of every grid, and one unit-disk localization
draw per grid. It does not depend on T_D, r or the controller, so every
parameter value sees the same draws for a given (seed, trial).
MD!*/

// Which channel the tracking pilots are compared on.
//   averaged      : path amplitudes sqrt(beta), i.e. the fading-averaged channel
//   instantaneous : the faded channel of the current visit
enum class MeasurementMode
{
    averaged,
    instantaneous,
};

struct SimulationConfig
{
    ArrayGeometry tx{8, 8};
    ArrayGeometry rx{4, 4};
    PhaseConvention convention = PhaseConvention::as_printed;
    int channel_paths = 8;
    int skeleton_size = 3;
    MeasurementMode measurement = MeasurementMode::instantaneous;
    DistanceNorm norm = DistanceNorm::frobenius;
    bool relative_distance = false;
    ReferenceMode reference = ReferenceMode::estimated;
    bool quantize_beams = false;              // snap matched beams to the codebooks
    bool resample_obstacles_per_grid = false; // default: one obstacle draw per walk
};

inline void validate(const SimulationConfig &s)
{
    validate(s.tx, "antennas.bs");
    validate(s.rx, "antennas.ue");
    if (s.channel_paths < 1)
        throw ConfigError("simulation.channel_paths", "must be >= 1");
    if (s.skeleton_size < 1)
        throw ConfigError("simulation.skeleton_size", "must be >= 1");
}

struct GridWorld
{
    int grid_id = 0;
    std::vector<Path> paths;
    std::vector<double> betas;
    PathChannel channel;  // faded
    PathChannel averaged; // sqrt(beta) amplitudes, zero phase
    Vec2 unit_error = Vec2::Zero();
};

struct TrialWorld
{
    std::uint64_t seed = 0;
    int trial = 0;
    ObstacleSet obstacles;
    std::vector<GridWorld> grids;
};

inline GridWorld build_grid_world(const Scenario &sc, const SimulationConfig &sim, const ObstacleSet &obs,
                                  std::uint64_t seed, int trial, int grid_id)
{
    GridWorld g;
    g.grid_id = grid_id;
    const auto &cell = sc.grids.at(grid_id);
    g.paths = trace_paths(sc, obs, sc.ue_position(grid_id), sim.channel_paths,
                          sc.config.radio.angular_resolution_deg, cell.heading);
    Rng fading = make_stream(seed, trial, Stream::fading, grid_id);
    std::vector<cplx> h, amp;
    for (const auto &p : g.paths)
    {
        const double beta = large_scale_gain(p, sc.config.radio.path_loss);
        g.betas.push_back(beta);
        h.push_back(sample_fading(beta, fading));
        amp.push_back(std::sqrt(beta));
    }
    g.channel = PathChannel::from_paths(g.paths, h, sim.tx, sim.rx, sim.convention, grid_id);
    g.averaged = g.channel.with_coefficients(amp);
    Rng loc = make_stream(seed, trial, Stream::localization, grid_id);
    g.unit_error = sample_unit_disk(loc);
    return g;
}

inline TrialWorld build_trial_world(const Scenario &sc, const SimulationConfig &sim, std::uint64_t seed, int trial)
{
    TrialWorld w;
    w.seed = seed;
    w.trial = trial;
    w.obstacles = sample_obstacles(sc, derive_seed(seed, {static_cast<std::uint64_t>(trial),
                                                          static_cast<std::uint64_t>(Stream::obstacles), 0}));
    w.grids.reserve(sc.grids.size());
    for (const auto &cell : sc.grids)
    {
        if (sim.resample_obstacles_per_grid)
        {
            const auto obs = sample_obstacles(
                sc, derive_seed(seed, {static_cast<std::uint64_t>(trial), static_cast<std::uint64_t>(Stream::obstacles),
                                       static_cast<std::uint64_t>(cell.id) + 1}));
            w.grids.push_back(build_grid_world(sc, sim, obs, seed, trial, cell.id));
        }
        else
            w.grids.push_back(build_grid_world(sc, sim, w.obstacles, seed, trial, cell.id));
    }
    return w;
}

// ------------------------------------------------------------------------
// Controllers
// ------------------------------------------------------------------------

struct Controller
{
    enum class Kind
    {
        tracking,       // distance-triggered skeleton updates
        per_grid,       // skeleton refreshed on every grid
        fixed_distance, // beams refreshed every `spacing` meters of travel
    };
    Kind kind = Kind::tracking;
    double threshold = 0.0; // T_D
    double spacing = 0.0;   // D, meters

    static Controller tracking(double td) { return {Kind::tracking, td, 0.0}; }
    static Controller per_grid() { return {Kind::per_grid, 0.0, 0.0}; }
    static Controller fixed_distance(double d)
    {
        if (!(d > 0.0))
            throw ConfigError("controller.distance", "must be positive");
        return {Kind::fixed_distance, 0.0, d};
    }
};

inline std::string to_string(Controller::Kind k)
{
    switch (k)
    {
    case Controller::Kind::tracking:
        return "skeleton-tracking";
    case Controller::Kind::per_grid:
        return "per-grid";
    case Controller::Kind::fixed_distance:
        return "fixed-distance";
    }
    return "unknown";
}

struct TrajectoryResult
{
    std::vector<double> per_grid_rate;   // bits/s
    std::vector<double> per_grid_snr_db;
    std::vector<int> update_events;      // grid indices, including the initial query
    std::vector<int> perceived_grid;
    std::vector<double> distance;        // d(i,0) per grid, +inf where no check ran
    int U = 0;
    int pilot_slots = 0;
    int max_pilots_per_grid = 0;
    int out_of_trajectory = 0;           // visits whose estimate projected past an end
    bool budget_exceeded = false;
    std::uint64_t seed = 0;
    int trial = 0;

    double trajectory_rate() const { return mmtrack::trajectory_rate(per_grid_rate); }
};

// Whether the fixed-distance rule fires on `cell`: some multiple of D falls
// inside the cell's arc-length span. Grid 0 always fires.
inline bool fixed_distance_fires(const GridCell &cell, double spacing)
{
    if (cell.id == 0)
        return true;
    if (!std::isfinite(spacing))
        return false;
    const double k = std::ceil(cell.s_begin / spacing - 1e-9);
    return k * spacing < cell.s_end - 1e-9;
}

// Walks the trajectory once. `db` is taken by value so the query counter is
// private to this walk.
inline TrajectoryResult run_trajectory(const Scenario &sc, const TrialWorld &world, SkeletonDatabase db,
                                       double radius, const Controller &ctl, const TrackingOptions &opt,
                                       MeasurementMode mode = MeasurementMode::instantaneous)
{
    if (radius < 0.0)
        throw ConfigError("r", "error radius must be >= 0");
    db.reset_counter();
    TrajectoryResult out;
    out.seed = world.seed;
    out.trial = world.trial;
    const std::size_t M = world.grids.size();
    out.per_grid_rate.reserve(M);
    out.per_grid_snr_db.reserve(M);

    TrackingState state;
    std::optional<BeamPair> held; // fixed-distance controller only

    for (std::size_t i = 0; i < M; ++i)
    {
        const auto &gw = world.grids[i];
        const auto &cell = sc.grids[i];
        const auto perceived = perceived_grid_at(sc, cell.center + radius * gw.unit_error);
        out.perceived_grid.push_back(perceived.grid_id);
        out.out_of_trajectory += perceived.out_of_trajectory ? 1 : 0;

        double snr_lin = 0.0, r = 0.0;
        int pilots = 0;
        bool updated = false;
        double dist = std::numeric_limits<double>::infinity();
        if (ctl.kind == Controller::Kind::fixed_distance)
        {
            if (fixed_distance_fires(cell, ctl.spacing))
            {
                const auto q = db.query(perceived.grid_id);
                out.budget_exceeded = out.budget_exceeded || q.budget_exceeded;
                held = detail::matched_beams(gw.channel, q.skeleton, opt);
                pilots = static_cast<int>(q.skeleton.size());
                updated = true;
            }
            r = link_rate(gw.channel, held, opt, &snr_lin);
        }
        else
        {
            GridContext ctx{cell.id, perceived.grid_id, gw.channel,
                            mode == MeasurementMode::averaged ? gw.averaged : gw.channel};
            const auto step = tracking_step(state, ctx, db, ctl.threshold, opt, ctl.kind == Controller::Kind::per_grid);
            out.budget_exceeded = out.budget_exceeded || step.budget_exceeded;
            snr_lin = step.snr;
            r = step.rate;
            pilots = step.pilot_slots;
            updated = step.update_event;
            dist = step.distance;
        }
        if (updated)
            out.update_events.push_back(static_cast<int>(i));
        out.per_grid_rate.push_back(r);
        out.per_grid_snr_db.push_back(snr_lin > 0.0 ? linear_to_db(snr_lin)
                                                    : -std::numeric_limits<double>::infinity());
        out.distance.push_back(dist);
        out.pilot_slots += pilots;
        out.max_pilots_per_grid = std::max(out.max_pilots_per_grid, pilots);
    }
    out.U = db.query_count();
    return out;
}

// ------------------------------------------------------------------------
// Simulator: scenario + array setup + populated database
// ------------------------------------------------------------------------

class Simulator
{
public:
    Simulator(Scenario sc, SimulationConfig sim) : scenario_(std::move(sc)), sim_(sim)
    {
        validate(sim_);
        db_ = populate_database(scenario_, sim_.skeleton_size);
        const auto &radio = scenario_.config.radio;
        opt_.tx = sim_.tx;
        opt_.rx = sim_.rx;
        opt_.convention = sim_.convention;
        opt_.norm = sim_.norm;
        opt_.relative_distance = sim_.relative_distance;
        opt_.reference = sim_.reference;
        opt_.sigma2 = LinkBudget{radio.tx_power_dbm, radio.noise_psd_dbm_hz, radio.bandwidth_hz}.sigma2();
        opt_.bandwidth_hz = radio.bandwidth_hz;
        opt_.gain_floor = db_to_linear(radio.power_floor_dbm - radio.tx_power_dbm);
        if (sim_.quantize_beams)
        {
            tx_cb_ = std::make_shared<const Codebook>(build_codebook(sim_.tx, Sector{}, Side::tx, sim_.convention));
            rx_cb_ = std::make_shared<const Codebook>(build_codebook(sim_.rx, Sector{}, Side::rx, sim_.convention));
            opt_.tx_codebook = tx_cb_.get();
            opt_.rx_codebook = rx_cb_.get();
        }
    }

    const Scenario &scenario() const { return scenario_; }
    const SimulationConfig &config() const { return sim_; }
    const SkeletonDatabase &database() const { return db_; }
    const TrackingOptions &options() const { return opt_; }
    void set_database(SkeletonDatabase db) { db_ = std::move(db); }

    TrialWorld world(std::uint64_t seed, int trial) const { return build_trial_world(scenario_, sim_, seed, trial); }

    TrajectoryResult run(const TrialWorld &w, double radius, const Controller &ctl) const
    {
        return run_trajectory(scenario_, w, db_.fresh(), radius, ctl, opt_, sim_.measurement);
    }

private:
    Scenario scenario_;
    SimulationConfig sim_;
    SkeletonDatabase db_;
    TrackingOptions opt_;
    std::shared_ptr<const Codebook> tx_cb_;
    std::shared_ptr<const Codebook> rx_cb_;
};

} // namespace mmtrack

#endif // MMTRACK_TRAJECTORY_HPP
