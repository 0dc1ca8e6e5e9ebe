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

#include <mmtrack/mmtrack.hpp>

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

using namespace mmtrack;
namespace fs = std::filesystem;

namespace
{

constexpr int exit_ok = 0;
constexpr int exit_config = 2;
constexpr int exit_infeasible = 3;

struct Common
{
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<int> trials;
    std::optional<int> workers;
    std::string out = "out";
};

void add_common(CLI::App *sub, Common &c, bool seed_required)
{
    sub->add_option("-c,--config", c.config, "experiment file")->required()->check(CLI::ExistingFile);
    auto *seed = sub->add_option("--seed", c.seed, "master seed");
    if (seed_required)
        seed->required();
    sub->add_option("--trials", c.trials, "Monte-Carlo trials per evaluation");
    sub->add_option("--workers", c.workers, "worker threads");
    sub->add_option("-o,--out", c.out, "output directory");
}

ExperimentConfig load(const Common &c)
{
    auto cfg = load_experiment(c.config);
    if (c.seed)
    {
        cfg.seed = *c.seed;
        cfg.seed_given = true;
    }
    if (c.trials)
        cfg.trials = *c.trials;
    if (c.workers)
        cfg.workers = *c.workers;
    validate(cfg);
    return cfg;
}

std::string command_line(int argc, char **argv)
{
    std::string s;
    for (int k = 0; k < argc; ++k)
        s += (k ? " " : "") + std::string(argv[k]);
    return s;
}

void print_runs(const std::vector<RadiusRun> &runs)
{
    std::cout << std::setprecision(4);
    for (const auto &r : runs)
        std::cout << "r=" << r.radius << " T_D=" << r.threshold << " mean_U=" << r.estimate.mean_U
                  << " violation=" << r.estimate.budget_violation_prob
                  << " rate/grid=" << gbps(r.estimate.mean_trajectory_rate) / std::max<std::size_t>(1, r.estimate.per_grid_mean_rates.size())
                  << " Gbps min=" << gbps(r.estimate.min_grid_rate) << " Gbps\n";
}

int cmd_run(const Common &c, std::optional<double> threshold, const std::vector<double> &radii,
            const std::string &cmdline)
{
    auto cfg = load(c);
    if (threshold)
        cfg.threshold = *threshold;
    if (!radii.empty())
        cfg.radii = radii;
    validate(cfg);
    const auto res = run_experiment(cfg);
    write_run_outputs(c.out, cfg, res, cmdline);
    print_runs(res.runs);
    if (!res.feasible)
    {
        std::cerr << "no feasible T_D in the bracket; see " << (fs::path(c.out) / trace_file).string() << '\n';
        return exit_infeasible;
    }
    return exit_ok;
}

int cmd_bench(const Common &c, const std::string &kind, double distance, const std::string &cmdline)
{
    auto cfg = load(c);
    cfg.controller = kind == "per-grid" ? Controller::per_grid() : Controller::fixed_distance(distance);
    validate(cfg);
    const auto res = run_experiment(cfg);
    write_run_outputs(c.out, cfg, res, cmdline);
    print_runs(res.runs);
    return exit_ok;
}

int cmd_tune_td(const Common &c, double radius, const std::string &cmdline)
{
    const auto cfg = load(c);
    const auto sim = make_simulator(cfg);
    const auto t = optimize_threshold(sim, threshold_search(cfg, radius));
    fs::create_directories(c.out);
    write_text(fs::path(c.out) / trace_file, to_text([&](std::ostream &os) { write_trace(os, {t}, {radius}); }));
    auto manifest = make_manifest(cfg, cmdline);
    manifest["tunings"] = {tuning_summary(t, radius)};
    manifest["outputs"] = {trace_file, manifest_file};
    write_text(fs::path(c.out) / manifest_file, manifest.dump(2) + "\n");
    if (t.grid_disagrees)
        std::cerr << "warning: golden-section result " << t.threshold << " is more than one cell from the grid argmax "
                  << *t.grid_argmax << '\n';
    if (!t.feasible)
    {
        std::cerr << "no T_D in [" << t.lo << ", " << t.hi << "] meets Pr{U > " << cfg.u_max << "} <= " << cfg.delta
                  << "; violation curve:\n";
        for (const auto &p : t.trace)
            if (p.phase == "grid")
                std::cerr << "  T_D=" << p.parameter << " violation=" << p.violation_prob << '\n';
        return exit_infeasible;
    }
    std::cout << "T_D*=" << t.threshold << " mean_U=" << t.estimate.mean_U
              << " violation=" << t.estimate.budget_violation_prob
              << " trajectory_rate=" << gbps(t.estimate.mean_trajectory_rate) << " Gbps\n";
    return exit_ok;
}

int cmd_tune_r(const Common &c, const std::vector<double> &gamma, const std::string &cmdline)
{
    auto cfg = load(c);
    if (!gamma.empty())
        cfg.gamma = gamma;
    validate(cfg);
    const auto sim = make_simulator(cfg);
    const auto res = max_tolerable_radius(sim, radius_search(cfg));
    const auto runs = radius_runs(res);

    std::vector<double> tuned_at;
    if (!cfg.threshold)
    {
        tuned_at.push_back(0.0);
        if (cfg.tuning.retune_per_radius)
            for (const auto &cand : res.candidates)
                if (cand.radius != 0.0)
                    tuned_at.push_back(cand.radius);
    }
    fs::create_directories(c.out);
    const fs::path out(c.out);
    write_text(out / rates_file, to_text([&](std::ostream &os) { write_rates_per_grid(os, runs, cfg.rate_threshold); }));
    write_text(out / updates_file, to_text([&](std::ostream &os) { write_updates_table(os, runs); }));
    auto manifest = make_manifest(cfg, cmdline);
    manifest["outputs"] = {rates_file, updates_file, manifest_file};
    if (!res.tunings.empty())
    {
        write_text(out / trace_file, to_text([&](std::ostream &os) { write_trace(os, res.tunings, tuned_at); }));
        manifest["outputs"].push_back(trace_file);
        manifest["tunings"] = nlohmann::json::array();
        for (std::size_t k = 0; k < res.tunings.size(); ++k)
            manifest["tunings"].push_back(tuning_summary(res.tunings[k], k < tuned_at.size() ? tuned_at[k] : 0.0));
    }
    manifest["r_star"] = res.r_star ? nlohmann::json(*res.r_star) : nlohmann::json(nullptr);
    manifest["argmax_of_min"] = res.argmax_of_min ? nlohmann::json(*res.argmax_of_min) : nlohmann::json(nullptr);
    write_text(out / manifest_file, manifest.dump(2) + "\n");

    print_runs(runs);
    if (!res.r_star)
    {
        std::cerr << "no candidate radius is feasible:\n";
        for (const auto &cand : res.candidates)
            std::cerr << "  r=" << cand.radius << (cand.rate_ok ? "" : " min-grid rate below threshold")
                      << (cand.budget_ok ? "" : " budget violated") << '\n';
        return exit_infeasible;
    }
    std::cout << "r*=" << *res.r_star << " m (argmax of min-grid rate: " << *res.argmax_of_min << " m)\n";
    return exit_ok;
}

struct TraceOptions
{
    std::string scenario;
    std::string config;
    std::string antennas = "narrow";
    std::string export_db;
    std::string dump_h;
    int grid = 0;
    std::uint64_t seed = 1;
    int trial = 0;
};

int cmd_trace(const TraceOptions &o)
{
    if (o.scenario.empty() == o.config.empty())
        throw ConfigError("scenario", "give exactly one of --scenario or --config");
    ExperimentConfig cfg;
    if (!o.config.empty())
        cfg = load_experiment(o.config);
    else
    {
        cfg.scenario = load_scenario_config(o.scenario);
        cfg.antennas = antenna_preset(o.antennas);
        cfg.simulation.tx = cfg.antennas.bs;
        cfg.simulation.rx = cfg.antennas.ue;
    }
    const auto sim = make_simulator(cfg);
    const auto &sc = sim.scenario();
    std::cout << "scenario '" << sc.config.name << "': " << sc.grids.size() << " grids of " << sc.config.grid_size
              << " m, trajectory " << sc.trajectory_length() << " m\n";
    std::cout << std::setprecision(4);
    for (const auto &[id, ps] : sim.database().entries())
    {
        std::cout << "grid " << id << ':';
        for (const auto &p : ps.paths)
            std::cout << " [aod " << rad_to_deg(p.aod.phi) << '/' << rad_to_deg(p.aod.theta) << " aoa "
                      << rad_to_deg(p.aoa.phi) << '/' << rad_to_deg(p.aoa.theta) << ' '
                      << linear_to_db(p.beta) << " dB]";
        std::cout << '\n';
    }
    if (!o.export_db.empty())
        write_text(o.export_db, export_database(sim.database()).dump(2) + "\n");
    if (!o.dump_h.empty())
    {
        if (o.grid < 0 || o.grid >= static_cast<int>(sc.grids.size()))
            throw ConfigError("grid", "out of range");
        const auto w = sim.world(o.seed, o.trial);
        std::ofstream os(o.dump_h);
        if (!os)
            throw std::runtime_error("cannot write '" + o.dump_h + "'");
        write_channel_text(os, w.grids[o.grid].channel.matrix());
    }
    return exit_ok;
}

} // namespace

int main(int argc, char **argv)
{
    CLI::App app{"mmtrack: location-aided beam tracking simulator"};
    app.set_version_flag("--version", std::string(version));
    app.require_subcommand(1);
    const auto cmdline = command_line(argc, argv);

    Common run_opt, bench_opt, td_opt, r_opt;
    std::optional<double> run_threshold;
    std::vector<double> run_radii, gamma;
    std::string bench_kind = "per-grid";
    double bench_distance = 7.0;
    double td_radius = 0.0;
    TraceOptions trace_opt;

    auto *run = app.add_subcommand("run", "run an experiment and write CSVs, trace and manifest");
    add_common(run, run_opt, true);
    run->add_option("--threshold", run_threshold, "fixed T_D (skips tuning)");
    run->add_option("--r", run_radii, "error radii in meters")->delimiter(',');

    auto *tune_td = app.add_subcommand("tune-td", "golden-section search for T_D");
    add_common(tune_td, td_opt, false);
    tune_td->add_option("--r", td_radius, "error radius the search runs at");

    auto *tune_r = app.add_subcommand("tune-r", "largest tolerable error radius over a candidate set");
    add_common(tune_r, r_opt, false);
    tune_r->add_option("--gamma", gamma, "candidate radii")->delimiter(',');

    auto *bench = app.add_subcommand("bench", "benchmark controllers");
    add_common(bench, bench_opt, false);
    bench->add_option("--kind", bench_kind, "per-grid or fixed-distance")
        ->check(CLI::IsMember({"per-grid", "fixed-distance"}));
    bench->add_option("--distance", bench_distance, "update spacing D in meters (fixed-distance)");

    auto *trace = app.add_subcommand("trace-scenario", "trace a map, list skeletons, export the database or dump H");
    trace->add_option("--scenario", trace_opt.scenario, "scenario file")->check(CLI::ExistingFile);
    trace->add_option("-c,--config", trace_opt.config, "experiment file")->check(CLI::ExistingFile);
    trace->add_option("--antennas", trace_opt.antennas, "narrow or wide (with --scenario)")
        ->check(CLI::IsMember({"narrow", "wide"}));
    trace->add_option("--export-db", trace_opt.export_db, "write the skeleton database as JSON");
    trace->add_option("--dump-h", trace_opt.dump_h, "write the faded channel matrix of one grid");
    trace->add_option("--grid", trace_opt.grid, "grid index for --dump-h");
    trace->add_option("--seed", trace_opt.seed, "master seed for --dump-h");
    trace->add_option("--trial", trace_opt.trial, "trial index for --dump-h");

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::Success &e)
    {
        return app.exit(e);
    }
    catch (const CLI::ParseError &e)
    {
        app.exit(e);
        return exit_config;
    }

    try
    {
        if (*run)
            return cmd_run(run_opt, run_threshold, run_radii, cmdline);
        if (*tune_td)
            return cmd_tune_td(td_opt, td_radius, cmdline);
        if (*tune_r)
            return cmd_tune_r(r_opt, gamma, cmdline);
        if (*bench)
            return cmd_bench(bench_opt, bench_kind, bench_distance, cmdline);
        if (*trace)
            return cmd_trace(trace_opt);
    }
    catch (const ConfigError &e)
    {
        std::cerr << "config error: " << e.what() << '\n';
        return exit_config;
    }
    catch (const InfeasibleError &e)
    {
        std::cerr << "infeasible: " << e.what() << '\n';
        return exit_infeasible;
    }
    catch (const std::exception &e)
    {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return exit_ok;
}
