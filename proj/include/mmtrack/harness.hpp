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

#ifndef MMTRACK_HARNESS_HPP
#define MMTRACK_HARNESS_HPP

#include "optimize.hpp"
#include "scenario_io.hpp"

#include <json.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace mmtrack
{

/*!MD
# Experiment harness

An experiment file names a scenario (path relative to the experiment file, or
an inline object), an antenna preset, the error radii to run and the
controller. `run` writes

    rates_per_grid.csv     grid_index, r, mean_rate, stderr, below_rate_threshold
    rate_distribution.csv  r, cdf, rate   (101 quantiles of the pooled per-grid rates)
    updates_table.csv      one row per radius: U statistics, violation probability, rates
    optimizer_trace.jsonl  one JSON record per T_D probe
    manifest.json          resolved config, seeds and code version

Rates in the CSV files are in Gbps. The resolved config inside the manifest
is itself a valid experiment file, so any row can be regenerated from it.
MD!*/

// Optimization finished without any point meeting the constraints.
class InfeasibleError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

struct AntennaSetup
{
    std::string preset = "narrow";
    ArrayGeometry bs{8, 8};
    ArrayGeometry ue{4, 4};
    int u_max = 20;
};

// narrow: 64-element BS, 16-element UE. wide: 32 and 8 elements, with the
// halved dimension along the array columns.
inline AntennaSetup antenna_preset(const std::string &name)
{
    if (name == "narrow")
        return {"narrow", {8, 8}, {4, 4}, 20};
    if (name == "wide")
        return {"wide", {4, 8}, {4, 2}, 15};
    throw ConfigError("antennas", "unknown preset '" + name + "' (expected narrow, wide or {bs, ue})");
}

struct TuningConfig
{
    std::optional<double> lo;
    std::optional<double> hi;
    double tol = 0.0;
    int grid_points = 11;
    bool retune_per_radius = false;
};

struct ExperimentConfig
{
    std::string name = "experiment";
    ScenarioConfig scenario;
    AntennaSetup antennas;
    SimulationConfig simulation;
    std::vector<double> radii{0.0};
    std::optional<double> threshold; // T_D; tuned when unset
    int u_max = 20;
    double delta = 0.05;
    double rate_threshold = 200e6; // bits/s
    int trials = 200;
    std::uint64_t seed = 1;
    bool seed_given = false;
    int workers = 1;
    Controller controller = Controller::tracking(0.0);
    TuningConfig tuning;
    std::vector<double> gamma;
    std::string skeleton_db; // absolute path of an imported database, empty to trace one
};

inline void validate(const ExperimentConfig &c)
{
    if (c.trials < 1)
        throw ConfigError("trials", "must be >= 1");
    if (c.workers < 1)
        throw ConfigError("workers", "must be >= 1");
    if (c.u_max < 1)
        throw ConfigError("u_max", "must be >= 1");
    if (!(c.delta >= 0.0 && c.delta <= 1.0))
        throw ConfigError("delta", "must lie in [0, 1]");
    if (!(c.rate_threshold > 0.0))
        throw ConfigError("rate_threshold_bps", "must be positive");
    if (c.radii.empty())
        throw ConfigError("radii", "must not be empty");
    for (double r : c.radii)
        if (!(r >= 0.0))
            throw ConfigError("radii", "radii must be >= 0");
    if (c.threshold && !(*c.threshold >= 0.0))
        throw ConfigError("threshold", "must be >= 0");
    if (!std::is_sorted(c.gamma.begin(), c.gamma.end()))
        throw ConfigError("gamma", "candidates must be sorted ascending");
    if (!c.gamma.empty() && c.gamma.front() < 0.0)
        throw ConfigError("gamma", "radii must be >= 0");
    if (c.tuning.tol < 0.0)
        throw ConfigError("tuning.tol", "must be >= 0");
    if (c.tuning.grid_points < 0)
        throw ConfigError("tuning.grid_points", "must be >= 0");
    if (c.tuning.lo && c.tuning.hi && !(*c.tuning.hi > *c.tuning.lo))
        throw ConfigError("tuning", "lo must be below hi");
    if (c.controller.kind == Controller::Kind::fixed_distance && !(c.controller.spacing > 0.0))
        throw ConfigError("controller.distance_m", "must be positive");
    validate(c.simulation);
}

namespace json_detail
{

template <class E> E parse_enum(const json &j, const std::string &field, std::initializer_list<std::pair<const char *, E>> options)
{
    if (!j.is_string())
        throw ConfigError(field, "expected a string");
    const auto s = j.get<std::string>();
    std::string allowed;
    for (const auto &[name, value] : options)
    {
        if (s == name)
            return value;
        allowed += allowed.empty() ? name : std::string(", ") + name;
    }
    throw ConfigError(field, "unknown value '" + s + "' (expected " + allowed + ")");
}

inline ArrayGeometry get_array(const json &j, const std::string &field)
{
    if (!j.is_array() || j.size() != 2 || !j[0].is_number_integer() || !j[1].is_number_integer())
        throw ConfigError(field, "expected [columns, rows]");
    ArrayGeometry g{j[0].get<int>(), j[1].get<int>()};
    validate(g, field);
    return g;
}

inline std::vector<double> get_radii(const json &j, const std::string &field)
{
    if (!j.is_array())
        throw ConfigError(field, "expected a list of radii in meters");
    std::vector<double> out;
    for (const auto &v : j)
    {
        if (!v.is_number())
            throw ConfigError(field, "expected numbers");
        out.push_back(v.get<double>());
    }
    return out;
}

inline const char *measurement_name(MeasurementMode m)
{
    return m == MeasurementMode::averaged ? "averaged" : "instantaneous";
}
inline const char *reference_name(ReferenceMode m) { return m == ReferenceMode::database ? "database" : "estimated"; }
inline const char *norm_name(DistanceNorm n) { return n == DistanceNorm::spectral ? "spectral" : "frobenius"; }
inline const char *convention_name(PhaseConvention c)
{
    return c == PhaseConvention::conventional ? "conventional" : "as_printed";
}

} // namespace json_detail

inline ExperimentConfig experiment_from_json(const nlohmann::json &j, const std::filesystem::path &base_dir = {})
{
    using namespace json_detail;
    check_keys(j, "",
               {"name", "scenario", "antennas", "radii", "threshold", "u_max", "delta", "rate_threshold_bps", "trials",
                "seed", "workers", "controller", "simulation", "tuning", "gamma", "skeleton_db"});
    ExperimentConfig c;
    get_if(j, "name", "name", c.name);

    if (!j.contains("scenario"))
        throw ConfigError("scenario", "missing");
    if (j["scenario"].is_string())
        c.scenario = load_scenario_config(base_dir / j["scenario"].get<std::string>());
    else if (j["scenario"].is_object())
        c.scenario = scenario_from_json(j["scenario"]);
    else
        throw ConfigError("scenario", "expected a file name or an inline scenario object");

    bool u_max_given = j.contains("u_max");
    if (j.contains("antennas"))
    {
        const auto &a = j["antennas"];
        if (a.is_string())
            c.antennas = antenna_preset(a.get<std::string>());
        else if (a.is_object())
        {
            check_keys(a, "antennas", {"bs", "ue"});
            if (!a.contains("bs") || !a.contains("ue"))
                throw ConfigError("antennas", "custom arrays need both bs and ue");
            c.antennas.preset = "custom";
            c.antennas.bs = get_array(a["bs"], "antennas.bs");
            c.antennas.ue = get_array(a["ue"], "antennas.ue");
        }
        else
            throw ConfigError("antennas", "expected a preset name or {bs, ue}");
    }
    c.u_max = u_max_given ? get<int>(j, "u_max", "u_max") : c.antennas.u_max;

    if (j.contains("radii"))
        c.radii = get_radii(j["radii"], "radii");
    if (j.contains("threshold"))
    {
        const auto &t = j["threshold"];
        if (t.is_number())
            c.threshold = t.get<double>();
        else if (!(t.is_string() && t.get<std::string>() == "tune"))
            throw ConfigError("threshold", "expected a number or \"tune\"");
    }
    get_if(j, "delta", "delta", c.delta);
    get_if(j, "rate_threshold_bps", "rate_threshold_bps", c.rate_threshold);
    get_if(j, "trials", "trials", c.trials);
    if (j.contains("seed"))
    {
        const auto &sj = j["seed"];
        if (!sj.is_number_integer() || (!sj.is_number_unsigned() && sj.get<std::int64_t>() < 0))
            throw ConfigError("seed", "expected a non-negative integer");
        c.seed = j["seed"].get<std::uint64_t>();
        c.seed_given = true;
    }
    get_if(j, "workers", "workers", c.workers);

    if (j.contains("controller"))
    {
        const auto &k = j["controller"];
        check_keys(k, "controller", {"type", "distance_m"});
        const auto kind = k.contains("type") ? parse_enum<Controller::Kind>(k["type"], "controller.type",
                                                                            {{"skeleton-tracking", Controller::Kind::tracking},
                                                                             {"per-grid", Controller::Kind::per_grid},
                                                                             {"fixed-distance", Controller::Kind::fixed_distance}})
                                             : Controller::Kind::tracking;
        if (kind == Controller::Kind::fixed_distance)
        {
            if (!k.contains("distance_m"))
                throw ConfigError("controller.distance_m", "required for fixed-distance");
            c.controller = Controller::fixed_distance(get<double>(k, "distance_m", "controller.distance_m"));
        }
        else
        {
            if (k.contains("distance_m"))
                throw ConfigError("controller.distance_m", "only valid for fixed-distance");
            c.controller = kind == Controller::Kind::per_grid ? Controller::per_grid() : Controller::tracking(0.0);
        }
    }

    if (j.contains("simulation"))
    {
        const auto &s = j["simulation"];
        check_keys(s, "simulation",
                   {"channel_paths", "skeleton_size", "measurement", "reference", "distance_norm", "relative_distance",
                    "phase_convention", "quantize_beams", "resample_obstacles_per_grid"});
        auto &sim = c.simulation;
        get_if(s, "channel_paths", "simulation.channel_paths", sim.channel_paths);
        get_if(s, "skeleton_size", "simulation.skeleton_size", sim.skeleton_size);
        if (s.contains("measurement"))
            sim.measurement = parse_enum<MeasurementMode>(s["measurement"], "simulation.measurement",
                                                          {{"instantaneous", MeasurementMode::instantaneous},
                                                           {"averaged", MeasurementMode::averaged}});
        if (s.contains("reference"))
            sim.reference = parse_enum<ReferenceMode>(
                s["reference"], "simulation.reference",
                {{"estimated", ReferenceMode::estimated}, {"database", ReferenceMode::database}});
        if (s.contains("distance_norm"))
            sim.norm = parse_enum<DistanceNorm>(s["distance_norm"], "simulation.distance_norm",
                                                {{"frobenius", DistanceNorm::frobenius}, {"spectral", DistanceNorm::spectral}});
        get_if(s, "relative_distance", "simulation.relative_distance", sim.relative_distance);
        if (s.contains("phase_convention"))
            sim.convention = parse_enum<PhaseConvention>(
                s["phase_convention"], "simulation.phase_convention",
                {{"as_printed", PhaseConvention::as_printed}, {"conventional", PhaseConvention::conventional}});
        get_if(s, "quantize_beams", "simulation.quantize_beams", sim.quantize_beams);
        get_if(s, "resample_obstacles_per_grid", "simulation.resample_obstacles_per_grid",
               sim.resample_obstacles_per_grid);
    }
    c.simulation.tx = c.antennas.bs;
    c.simulation.rx = c.antennas.ue;

    if (j.contains("tuning"))
    {
        const auto &t = j["tuning"];
        check_keys(t, "tuning", {"lo", "hi", "tol", "grid_points", "retune_per_radius"});
        if (t.contains("lo"))
            c.tuning.lo = get<double>(t, "lo", "tuning.lo");
        if (t.contains("hi"))
            c.tuning.hi = get<double>(t, "hi", "tuning.hi");
        get_if(t, "tol", "tuning.tol", c.tuning.tol);
        get_if(t, "grid_points", "tuning.grid_points", c.tuning.grid_points);
        get_if(t, "retune_per_radius", "tuning.retune_per_radius", c.tuning.retune_per_radius);
    }
    if (j.contains("gamma"))
        c.gamma = get_radii(j["gamma"], "gamma");
    if (j.contains("skeleton_db"))
        c.skeleton_db = std::filesystem::absolute(base_dir / get<std::string>(j, "skeleton_db", "skeleton_db")).string();

    (void)build_scenario(c.scenario);
    validate(c);
    return c;
}

inline ExperimentConfig load_experiment(const std::filesystem::path &p)
{
    return experiment_from_json(read_json_file(p, "config"), p.parent_path());
}

// Fully resolved form: scenario inline, every default spelled out.
inline nlohmann::json experiment_to_json(const ExperimentConfig &c)
{
    using namespace json_detail;
    json j;
    j["name"] = c.name;
    j["scenario"] = scenario_to_json(c.scenario);
    j["antennas"] = {{"bs", {c.antennas.bs.n_cols, c.antennas.bs.n_rows}},
                     {"ue", {c.antennas.ue.n_cols, c.antennas.ue.n_rows}}};
    j["radii"] = c.radii;
    j["threshold"] = c.threshold ? json(*c.threshold) : json("tune");
    j["u_max"] = c.u_max;
    j["delta"] = c.delta;
    j["rate_threshold_bps"] = c.rate_threshold;
    j["trials"] = c.trials;
    j["seed"] = c.seed;
    j["workers"] = c.workers;
    j["controller"] = {{"type", to_string(c.controller.kind)}};
    if (c.controller.kind == Controller::Kind::fixed_distance)
        j["controller"]["distance_m"] = c.controller.spacing;
    const auto &s = c.simulation;
    j["simulation"] = {{"channel_paths", s.channel_paths},
                       {"skeleton_size", s.skeleton_size},
                       {"measurement", measurement_name(s.measurement)},
                       {"reference", reference_name(s.reference)},
                       {"distance_norm", norm_name(s.norm)},
                       {"relative_distance", s.relative_distance},
                       {"phase_convention", convention_name(s.convention)},
                       {"quantize_beams", s.quantize_beams},
                       {"resample_obstacles_per_grid", s.resample_obstacles_per_grid}};
    j["tuning"] = {{"tol", c.tuning.tol},
                   {"grid_points", c.tuning.grid_points},
                   {"retune_per_radius", c.tuning.retune_per_radius}};
    if (c.tuning.lo)
        j["tuning"]["lo"] = *c.tuning.lo;
    if (c.tuning.hi)
        j["tuning"]["hi"] = *c.tuning.hi;
    if (!c.gamma.empty())
        j["gamma"] = c.gamma;
    if (!c.skeleton_db.empty())
        j["skeleton_db"] = c.skeleton_db;
    return j;
}

inline Simulator make_simulator(const ExperimentConfig &c)
{
    Simulator sim(build_scenario(c.scenario), c.simulation);
    if (!c.skeleton_db.empty())
    {
        auto db = import_database(read_json_file(c.skeleton_db, "skeleton_db"));
        for (const auto &g : sim.scenario().grids)
            if (!db.entries().count(g.id))
                throw ConfigError("skeleton_db", "no skeleton for grid " + std::to_string(g.id));
        sim.set_database(std::move(db));
    }
    auto db = sim.database();
    db.set_budget(c.u_max);
    sim.set_database(std::move(db));
    return sim;
}

inline EvaluationSettings evaluation_settings(const ExperimentConfig &c)
{
    return {c.trials, c.seed, c.u_max, c.workers};
}

inline ThresholdSearch threshold_search(const ExperimentConfig &c, double radius)
{
    ThresholdSearch q;
    q.u_max = c.u_max;
    q.delta = c.delta;
    q.lo = c.tuning.lo;
    q.hi = c.tuning.hi;
    q.tol = c.tuning.tol;
    q.radius = radius;
    q.grid_points = c.tuning.grid_points;
    q.eval = evaluation_settings(c);
    return q;
}

inline RadiusSearch radius_search(const ExperimentConfig &c)
{
    RadiusSearch q;
    q.gamma = c.gamma.empty() ? c.radii : c.gamma;
    q.u_max = c.u_max;
    q.delta = c.delta;
    q.rate_threshold = c.rate_threshold;
    q.threshold = c.threshold;
    q.retune_per_radius = c.tuning.retune_per_radius;
    q.tuning = threshold_search(c, 0.0);
    q.eval = evaluation_settings(c);
    return q;
}

// ------------------------------------------------------------------------
// Benchmarks
// ------------------------------------------------------------------------

// Skeleton refreshed on every grid: U = M on every trial.
inline std::vector<TrajectoryResult> benchmark_per_grid(const Simulator &sim, double radius,
                                                        const EvaluationSettings &s)
{
    return simulate(sim, Controller::per_grid(), radius, s);
}

// Beams refreshed each time the walked distance passes a multiple of D and
// held in between.
inline std::vector<TrajectoryResult> benchmark_fixed_distance(const Simulator &sim, double spacing, double radius,
                                                              const EvaluationSettings &s)
{
    return simulate(sim, Controller::fixed_distance(spacing), radius, s);
}

// ------------------------------------------------------------------------
// Runs
// ------------------------------------------------------------------------

struct RadiusRun
{
    double radius = 0.0;
    double threshold = 0.0;       // T_D, tracking controller only
    ObjectiveEstimate estimate;
    std::vector<double> quantiles; // pooled per-grid rates at cdf k/100, bits/s; empty when not collected
    bool rate_ok = false;
    bool budget_ok = false;
};

struct TraceEntry
{
    double radius = 0.0; // radius the T_D search ran at
    ProbeRecord record;
};

struct RunResult
{
    std::vector<RadiusRun> runs;
    std::vector<ThresholdResult> tunings;
    std::vector<double> tuned_at;
    bool feasible = true; // false when a T_D search found no feasible point
};

// Linear-interpolation quantiles at p = 0, 0.01, ..., 1.
inline std::vector<double> quantiles_101(std::vector<double> x)
{
    std::vector<double> q;
    if (x.empty())
        return q;
    std::sort(x.begin(), x.end());
    for (int k = 0; k <= 100; ++k)
    {
        const double pos = k / 100.0 * (x.size() - 1);
        const auto lo = static_cast<std::size_t>(std::floor(pos));
        const auto hi = std::min(lo + 1, x.size() - 1);
        q.push_back(x[lo] + (pos - lo) * (x[hi] - x[lo]));
    }
    return q;
}

inline RadiusRun summarize(const std::vector<TrajectoryResult> &runs, double radius, double threshold,
                           const ExperimentConfig &c)
{
    RadiusRun out;
    out.radius = radius;
    out.threshold = threshold;
    out.estimate = aggregate(runs, c.u_max);
    std::vector<double> pooled;
    for (const auto &r : runs)
        pooled.insert(pooled.end(), r.per_grid_rate.begin(), r.per_grid_rate.end());
    out.quantiles = quantiles_101(std::move(pooled));
    out.rate_ok = out.estimate.min_grid_rate >= c.rate_threshold;
    out.budget_ok = out.estimate.budget_violation_prob <= c.delta;
    return out;
}

// Runs every radius of the config with its controller. A tracking
// controller without a fixed T_D is tuned first (at r = 0, or at every
// radius with retune_per_radius). An infeasible search stops the run
// before any trajectory is simulated for that radius.
inline RunResult run_experiment(const ExperimentConfig &c, const Simulator &sim)
{
    validate(c);
    RunResult res;
    const auto es = evaluation_settings(c);
    const bool tracking = c.controller.kind == Controller::Kind::tracking;
    std::optional<double> td = c.threshold;
    const auto tune = [&](double r) {
        res.tunings.push_back(optimize_threshold(sim, threshold_search(c, r)));
        res.tuned_at.push_back(r);
        if (!res.tunings.back().feasible)
            res.feasible = false;
        return res.tunings.back().threshold;
    };
    if (tracking && !td)
    {
        td = tune(0.0);
        if (!res.feasible)
            return res;
    }
    for (double r : c.radii)
    {
        Controller ctl = c.controller;
        if (tracking)
        {
            ctl.threshold = *td;
            if (!c.threshold && c.tuning.retune_per_radius && r != 0.0)
            {
                ctl.threshold = tune(r);
                if (!res.feasible)
                    return res;
            }
        }
        res.runs.push_back(summarize(simulate(sim, ctl, r, es), r, ctl.threshold, c));
    }
    return res;
}

inline RunResult run_experiment(const ExperimentConfig &c) { return run_experiment(c, make_simulator(c)); }

// Candidates of a radius search in the same shape as a run.
inline std::vector<RadiusRun> radius_runs(const RadiusResult &r)
{
    std::vector<RadiusRun> out;
    for (const auto &cand : r.candidates)
    {
        RadiusRun x;
        x.radius = cand.radius;
        x.threshold = cand.threshold;
        x.estimate = cand.estimate;
        x.rate_ok = cand.rate_ok;
        x.budget_ok = cand.budget_ok;
        out.push_back(std::move(x));
    }
    return out;
}

// ------------------------------------------------------------------------
// Output
// ------------------------------------------------------------------------

inline constexpr const char *rates_file = "rates_per_grid.csv";
inline constexpr const char *distribution_file = "rate_distribution.csv";
inline constexpr const char *updates_file = "updates_table.csv";
inline constexpr const char *trace_file = "optimizer_trace.jsonl";
inline constexpr const char *manifest_file = "manifest.json";

inline double gbps(double bps) { return bps / 1e9; }

inline void write_rates_per_grid(std::ostream &os, const std::vector<RadiusRun> &runs, double rate_threshold)
{
    os << "grid_index,r,mean_rate,stderr,below_rate_threshold\n" << std::setprecision(12);
    for (const auto &run : runs)
    {
        const auto &e = run.estimate;
        for (std::size_t i = 0; i < e.per_grid_mean_rates.size(); ++i)
            os << i << ',' << run.radius << ',' << gbps(e.per_grid_mean_rates[i]) << ','
               << gbps(e.per_grid_stderr[i]) << ',' << (e.per_grid_mean_rates[i] < rate_threshold ? 1 : 0) << '\n';
    }
}

inline void write_rate_distribution(std::ostream &os, const std::vector<RadiusRun> &runs)
{
    os << "r,cdf,rate\n" << std::setprecision(12);
    for (const auto &run : runs)
        for (std::size_t k = 0; k < run.quantiles.size(); ++k)
            os << run.radius << ',' << k / 100.0 << ',' << gbps(run.quantiles[k]) << '\n';
}

inline void write_updates_table(std::ostream &os, const std::vector<RadiusRun> &runs)
{
    os << "r,threshold,trials,mean_U,U_stderr,violation_prob,violation_stderr,mean_pilot_slots,"
          "mean_trajectory_rate,trajectory_rate_stderr,min_grid_rate,min_grid,rate_ok,budget_ok\n"
       << std::setprecision(12);
    for (const auto &run : runs)
    {
        const auto &e = run.estimate;
        os << run.radius << ',' << run.threshold << ',' << e.trials << ',' << e.mean_U << ',' << e.U_stderr << ','
           << e.budget_violation_prob << ',' << e.violation_stderr << ',' << e.mean_pilot_slots << ','
           << gbps(e.mean_trajectory_rate) << ',' << gbps(e.trajectory_rate_stderr) << ',' << gbps(e.min_grid_rate)
           << ',' << e.min_grid << ',' << (run.rate_ok ? 1 : 0) << ',' << (run.budget_ok ? 1 : 0) << '\n';
    }
}

inline nlohmann::json trace_record(double radius, const ProbeRecord &p)
{
    nlohmann::json j = {{"radius", radius},
                        {"phase", p.phase},
                        {"threshold", p.parameter},
                        {"mean_trajectory_rate_gbps", gbps(p.mean_trajectory_rate)},
                        {"stderr_gbps", gbps(p.stderr_)},
                        {"violation_prob", p.violation_prob},
                        {"mean_U", p.mean_U},
                        {"feasible", p.feasible}};
    j["objective_gbps"] = std::isfinite(p.objective) ? nlohmann::json(gbps(p.objective)) : nlohmann::json(nullptr);
    return j;
}

inline void write_trace(std::ostream &os, const std::vector<ThresholdResult> &tunings,
                        const std::vector<double> &radii)
{
    for (std::size_t k = 0; k < tunings.size(); ++k)
        for (const auto &p : tunings[k].trace)
            os << trace_record(k < radii.size() ? radii[k] : 0.0, p).dump() << '\n';
}

inline nlohmann::json tuning_summary(const ThresholdResult &t, double radius)
{
    nlohmann::json j = {{"radius", radius},
                        {"threshold", t.threshold},
                        {"feasible", t.feasible},
                        {"bracket", {t.lo, t.hi}},
                        {"iterations", t.iterations},
                        {"grid_disagrees", t.grid_disagrees}};
    if (t.grid_argmax)
        j["grid_argmax"] = *t.grid_argmax;
    return j;
}

inline nlohmann::json make_manifest(const ExperimentConfig &c, const std::string &command)
{
    return {{"tool", "mmtrack"},
            {"version", version},
            {"command", command},
            {"config", experiment_to_json(c)},
            {"seeds",
             {{"master", c.seed},
              {"trials", c.trials},
              {"derivation", "splitmix64 chain over (master, trial, stream, index); streams obstacles=1 fading=2 "
                             "localization=3"}}}};
}

inline void write_text(const std::filesystem::path &p, const std::string &text)
{
    std::ofstream out(p);
    if (!out)
        throw std::runtime_error("cannot write '" + p.string() + "'");
    out << text;
}

template <class F> std::string to_text(F &&f)
{
    std::ostringstream os;
    f(os);
    return os.str();
}

inline void write_run_outputs(const std::filesystem::path &dir, const ExperimentConfig &c, const RunResult &r,
                              const std::string &command)
{
    std::filesystem::create_directories(dir);
    auto manifest = make_manifest(c, command);
    manifest["feasible"] = r.feasible;
    manifest["tunings"] = nlohmann::json::array();
    for (std::size_t k = 0; k < r.tunings.size(); ++k)
        manifest["tunings"].push_back(tuning_summary(r.tunings[k], r.tuned_at[k]));
    manifest["outputs"] = nlohmann::json::array();
    if (!r.tunings.empty())
    {
        write_text(dir / trace_file, to_text([&](std::ostream &os) { write_trace(os, r.tunings, r.tuned_at); }));
        manifest["outputs"].push_back(trace_file);
    }
    if (!r.runs.empty())
    {
        write_text(dir / rates_file,
                   to_text([&](std::ostream &os) { write_rates_per_grid(os, r.runs, c.rate_threshold); }));
        write_text(dir / distribution_file, to_text([&](std::ostream &os) { write_rate_distribution(os, r.runs); }));
        write_text(dir / updates_file, to_text([&](std::ostream &os) { write_updates_table(os, r.runs); }));
        manifest["outputs"].push_back(rates_file);
        manifest["outputs"].push_back(distribution_file);
        manifest["outputs"].push_back(updates_file);
    }
    manifest["outputs"].push_back(manifest_file);
    write_text(dir / manifest_file, manifest.dump(2) + "\n");
}

} // namespace mmtrack

#endif // MMTRACK_HARNESS_HPP
