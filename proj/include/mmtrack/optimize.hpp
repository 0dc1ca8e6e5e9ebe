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

#ifndef MMTRACK_OPTIMIZE_HPP
#define MMTRACK_OPTIMIZE_HPP

#include "trajectory.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <functional>
#include <limits>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

namespace mmtrack
{

// ------------------------------------------------------------------------
// Monte-Carlo evaluation
// ------------------------------------------------------------------------

// Runs body(k) for k in [0, n) on up to `workers` threads. The first
// exception thrown by any task is rethrown on the caller.
inline void parallel_for(int n, int workers, const std::function<void(int)> &body)
{
    workers = std::clamp(workers, 1, std::max(1, n));
    if (workers == 1)
    {
        for (int k = 0; k < n; ++k)
            body(k);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (int k = next++; k < n; k = next++)
            {
                try
                {
                    body(k);
                }
                catch (...)
                {
                    std::lock_guard lock(error_mutex);
                    if (!error)
                        error = std::current_exception();
                }
            }
        });
    for (auto &t : pool)
        t.join();
    if (error)
        std::rethrow_exception(error);
}

struct MeanEstimate
{
    double mean = 0.0;
    double stderr_ = 0.0;
};

inline MeanEstimate mean_and_stderr(const std::vector<double> &x)
{
    MeanEstimate m;
    if (x.empty())
        return m;
    double s = 0.0;
    for (double v : x)
        s += v;
    m.mean = s / x.size();
    if (x.size() > 1)
    {
        double ss = 0.0;
        for (double v : x)
            ss += (v - m.mean) * (v - m.mean);
        m.stderr_ = std::sqrt(ss / (x.size() - 1) / x.size());
    }
    return m;
}

struct ObjectiveEstimate
{
    int trials = 0;
    double mean_trajectory_rate = 0.0; // sum over grids of E[R_i], bits/s
    double trajectory_rate_stderr = 0.0;
    std::vector<double> per_grid_mean_rates;
    std::vector<double> per_grid_stderr;
    double min_grid_rate = 0.0;
    int min_grid = 0;
    double budget_violation_prob = 0.0; // fraction of trials with U > U_max
    double violation_stderr = 0.0;
    double mean_U = 0.0;
    double U_stderr = 0.0;
    double mean_pilot_slots = 0.0;
    std::vector<int> U_per_trial;
    std::vector<double> trajectory_rate_per_trial;
};

struct EvaluationSettings
{
    int trials = 200;
    std::uint64_t seed = 1;
    int u_max = 0; // 0: no budget, violation probability reported as 0
    int workers = 1;
};

// Aggregation happens in trial order, so the result does not depend on the
// number of workers.
inline ObjectiveEstimate aggregate(const std::vector<TrajectoryResult> &runs, int u_max)
{
    ObjectiveEstimate est;
    est.trials = static_cast<int>(runs.size());
    if (runs.empty())
        return est;
    const std::size_t M = runs.front().per_grid_rate.size();
    std::vector<double> col(runs.size()), traj, us, viol, pilots;
    for (const auto &r : runs)
    {
        traj.push_back(r.trajectory_rate());
        us.push_back(r.U);
        viol.push_back(u_max > 0 && r.U > u_max ? 1.0 : 0.0);
        pilots.push_back(r.pilot_slots);
        est.U_per_trial.push_back(r.U);
    }
    est.trajectory_rate_per_trial = traj;
    for (std::size_t i = 0; i < M; ++i)
    {
        for (std::size_t t = 0; t < runs.size(); ++t)
            col[t] = runs[t].per_grid_rate[i];
        const auto m = mean_and_stderr(col);
        est.per_grid_mean_rates.push_back(m.mean);
        est.per_grid_stderr.push_back(m.stderr_);
    }
    const auto tr = mean_and_stderr(traj);
    est.mean_trajectory_rate = tr.mean;
    est.trajectory_rate_stderr = tr.stderr_;
    const auto u = mean_and_stderr(us);
    est.mean_U = u.mean;
    est.U_stderr = u.stderr_;
    const auto v = mean_and_stderr(viol);
    est.budget_violation_prob = v.mean;
    est.violation_stderr = v.stderr_;
    est.mean_pilot_slots = mean_and_stderr(pilots).mean;
    if (M > 0)
    {
        const auto it = std::min_element(est.per_grid_mean_rates.begin(), est.per_grid_mean_rates.end());
        est.min_grid_rate = *it;
        est.min_grid = static_cast<int>(it - est.per_grid_mean_rates.begin());
    }
    return est;
}

// Runs `s.trials` walks. Trial t always uses the world derived from
// (s.seed, t), whatever the controller or radius.
inline std::vector<TrajectoryResult> simulate(const Simulator &sim, const Controller &ctl, double radius,
                                              const EvaluationSettings &s)
{
    if (s.trials < 1)
        throw ConfigError("trials", "must be >= 1");
    std::vector<TrajectoryResult> runs(s.trials);
    parallel_for(s.trials, s.workers, [&](int t) { runs[t] = sim.run(sim.world(s.seed, t), radius, ctl); });
    return runs;
}

inline ObjectiveEstimate evaluate(const Simulator &sim, const Controller &ctl, double radius,
                                  const EvaluationSettings &s)
{
    return aggregate(simulate(sim, ctl, radius, s), s.u_max);
}

// Several (controller, radius) probes over the same worlds; each world is
// traced once.
struct Probe
{
    Controller controller;
    double radius = 0.0;
};

inline std::vector<ObjectiveEstimate> evaluate_batch(const Simulator &sim, const std::vector<Probe> &probes,
                                                     const EvaluationSettings &s)
{
    if (s.trials < 1)
        throw ConfigError("trials", "must be >= 1");
    std::vector<std::vector<TrajectoryResult>> runs(probes.size(), std::vector<TrajectoryResult>(s.trials));
    parallel_for(s.trials, s.workers, [&](int t) {
        const auto w = sim.world(s.seed, t);
        for (std::size_t p = 0; p < probes.size(); ++p)
            runs[p][t] = sim.run(w, probes[p].radius, probes[p].controller);
    });
    std::vector<ObjectiveEstimate> out;
    for (const auto &r : runs)
        out.push_back(aggregate(r, s.u_max));
    return out;
}

// ------------------------------------------------------------------------
// Golden-section search
// ------------------------------------------------------------------------

inline constexpr double golden_ratio_conjugate = 0.6180339887498949;

inline int golden_iterations(double lo, double hi, double tol)
{
    if (!(hi > lo))
        throw ConfigError("bracket", "lower end must be below upper end");
    if (!(tol > 0.0))
        throw ConfigError("tol", "must be positive");
    if (tol >= hi - lo)
        return 0;
    return static_cast<int>(std::ceil(std::log(tol / (hi - lo)) / std::log(golden_ratio_conjugate)));
}

struct GoldenProbe
{
    double x = 0.0;
    double value = 0.0;
};

struct GoldenResult
{
    double x = 0.0;
    double value = -std::numeric_limits<double>::infinity();
    bool feasible = false; // some probe had a finite value
    int iterations = 0;
    double final_lo = 0.0;
    double final_hi = 0.0;
    std::vector<GoldenProbe> probes;
};

// Maximizes f on [lo, hi]. Infeasible points should return -inf; when both
// interior probes are -inf the bracket moves right, while equal finite values
// keep the left part. Returns the best probe seen (earliest on ties), not the
// bracket midpoint.
template <class F> GoldenResult golden_section_maximize(F &&f, double lo, double hi, double tol)
{
    GoldenResult res;
    res.iterations = golden_iterations(lo, hi, tol);
    const auto eval = [&](double x) {
        const double v = f(x);
        res.probes.push_back({x, v});
        if (v > res.value)
        {
            res.value = v;
            res.x = x;
            res.feasible = true;
        }
        return v;
    };
    double a = lo, b = hi;
    double c = b - golden_ratio_conjugate * (b - a);
    double d = a + golden_ratio_conjugate * (b - a);
    double fc = eval(c), fd = eval(d);
    for (int it = 0; it < res.iterations; ++it)
    {
        if (fc > fd || (fc == fd && std::isfinite(fc)))
        {
            b = d;
            d = c;
            fd = fc;
            c = b - golden_ratio_conjugate * (b - a);
            fc = eval(c);
        }
        else
        {
            a = c;
            c = d;
            fc = fd;
            d = a + golden_ratio_conjugate * (b - a);
            fd = eval(d);
        }
    }
    res.final_lo = a;
    res.final_hi = b;
    if (!res.feasible)
        res.x = 0.5 * (a + b);
    return res;
}

// ------------------------------------------------------------------------
// T_D tuning
// ------------------------------------------------------------------------

struct ProbeRecord
{
    std::string phase; // "golden" or "grid"
    double parameter = 0.0;
    double objective = 0.0; // mean trajectory rate, bits/s (-inf when infeasible)
    double mean_trajectory_rate = 0.0;
    double stderr_ = 0.0;
    double violation_prob = 0.0;
    double mean_U = 0.0;
    bool feasible = false;
};

struct ThresholdSearch
{
    int u_max = 20;
    double delta = 0.05;
    std::optional<double> lo; // default 0
    std::optional<double> hi; // default: auto_threshold_bracket()
    double tol = 0.0;         // 0: 1e-3 of the bracket width
    double radius = 0.0;
    int grid_points = 11;
    EvaluationSettings eval;
};

struct ThresholdResult
{
    double threshold = 0.0;
    bool feasible = false;
    ObjectiveEstimate estimate; // at the returned threshold
    double lo = 0.0;
    double hi = 0.0;
    int iterations = 0;
    std::vector<ProbeRecord> trace;
    std::optional<double> grid_argmax;
    double grid_cell = 0.0;
    bool grid_disagrees = false; // golden result more than one cell from the grid argmax
};

// Upper end for T_D: twice the largest strength-channel norm the stored
// skeletons can produce, so d(i,0) never exceeds it in practice.
inline double auto_threshold_bracket(const Simulator &sim)
{
    const auto &opt = sim.options();
    double best = 0.0;
    for (const auto &[id, ps] : sim.database().entries())
    {
        std::vector<cplx> amp;
        for (const auto &p : ps.paths)
            amp.push_back(std::sqrt(p.beta));
        const double n = strength_channel(ps, amp, opt.tx, opt.rx, opt.convention).entries.norm();
        best = std::max(best, n);
    }
    if (sim.options().relative_distance)
        return 2.0;
    return best > 0.0 ? 2.0 * best : 1.0;
}

inline ProbeRecord make_record(const std::string &phase, double x, const ObjectiveEstimate &e, double delta)
{
    ProbeRecord r;
    r.phase = phase;
    r.parameter = x;
    r.mean_trajectory_rate = e.mean_trajectory_rate;
    r.stderr_ = e.trajectory_rate_stderr;
    r.violation_prob = e.budget_violation_prob;
    r.mean_U = e.mean_U;
    r.feasible = e.budget_violation_prob <= delta;
    r.objective = r.feasible ? e.mean_trajectory_rate : -std::numeric_limits<double>::infinity();
    return r;
}

inline ThresholdResult optimize_threshold(const Simulator &sim, const ThresholdSearch &q)
{
    if (q.u_max < 1)
        throw ConfigError("u_max", "must be >= 1");
    if (q.delta < 0.0 || q.delta > 1.0)
        throw ConfigError("delta", "must lie in [0, 1]");
    ThresholdResult res;
    res.lo = q.lo.value_or(0.0);
    res.hi = q.hi.value_or(auto_threshold_bracket(sim));
    if (!(res.hi > res.lo))
        throw ConfigError("bracket", "lower end must be below upper end");
    const double tol = q.tol > 0.0 ? q.tol : 1e-3 * (res.hi - res.lo);
    EvaluationSettings es = q.eval;
    es.u_max = q.u_max;

    std::map<double, ObjectiveEstimate> cache;
    const auto estimate = [&](double x) -> const ObjectiveEstimate & {
        auto it = cache.find(x);
        if (it == cache.end())
            it = cache.emplace(x, evaluate(sim, Controller::tracking(x), q.radius, es)).first;
        return it->second;
    };

    const auto g = golden_section_maximize(
        [&](double x) {
            const auto rec = make_record("golden", x, estimate(x), q.delta);
            res.trace.push_back(rec);
            return rec.objective;
        },
        res.lo, res.hi, tol);
    res.iterations = g.iterations;
    res.feasible = g.feasible;
    res.threshold = g.x;
    res.estimate = estimate(g.x);

    if (q.grid_points >= 2)
    {
        res.grid_cell = (res.hi - res.lo) / (q.grid_points - 1);
        double best = -std::numeric_limits<double>::infinity();
        for (int k = 0; k < q.grid_points; ++k)
        {
            const double x = res.lo + k * res.grid_cell;
            const auto rec = make_record("grid", x, estimate(x), q.delta);
            res.trace.push_back(rec);
            if (rec.objective > best)
            {
                best = rec.objective;
                res.grid_argmax = x;
            }
        }
        if (res.feasible && res.grid_argmax)
            res.grid_disagrees = std::abs(res.threshold - *res.grid_argmax) > res.grid_cell * (1.0 + 1e-9);
    }
    return res;
}

// ------------------------------------------------------------------------
// Maximum tolerable localization error
// ------------------------------------------------------------------------

struct RadiusSearch
{
    std::vector<double> gamma;
    int u_max = 20;
    double delta = 0.05;
    double rate_threshold = 200e6; // R_th, bits/s
    std::optional<double> threshold;       // T_D; tuned at r = 0 when unset
    bool retune_per_radius = false;
    ThresholdSearch tuning;                // used whenever T_D is tuned
    EvaluationSettings eval;
};

struct RadiusCandidate
{
    double radius = 0.0;
    double threshold = 0.0;
    ObjectiveEstimate estimate;
    bool rate_ok = false;
    bool budget_ok = false;
    bool feasible() const { return rate_ok && budget_ok; }
};

struct RadiusResult
{
    std::optional<double> r_star;         // largest feasible radius
    std::optional<double> argmax_of_min;  // feasible radius with the largest min-grid rate (ties: larger r)
    double threshold = 0.0;               // T_D used at r = 0 / when not retuned
    std::vector<RadiusCandidate> candidates;
    std::vector<ThresholdResult> tunings;
};

inline RadiusResult max_tolerable_radius(const Simulator &sim, const RadiusSearch &q)
{
    if (q.gamma.empty())
        throw ConfigError("r", "candidate list is empty");
    if (!std::is_sorted(q.gamma.begin(), q.gamma.end()))
        throw ConfigError("r", "candidates must be sorted ascending");
    if (q.gamma.front() < 0.0)
        throw ConfigError("r", "radii must be >= 0");
    if (!(q.rate_threshold > 0.0))
        throw ConfigError("rate_threshold", "must be positive");

    RadiusResult res;
    EvaluationSettings es = q.eval;
    es.u_max = q.u_max;
    auto tune = [&](double r) {
        ThresholdSearch t = q.tuning;
        t.u_max = q.u_max;
        t.delta = q.delta;
        t.radius = r;
        t.eval = q.eval;
        res.tunings.push_back(optimize_threshold(sim, t));
        return res.tunings.back().threshold;
    };
    res.threshold = q.threshold ? *q.threshold : tune(0.0);

    double best_min = -std::numeric_limits<double>::infinity();
    for (double r : q.gamma)
    {
        RadiusCandidate c;
        c.radius = r;
        c.threshold = q.retune_per_radius && !q.threshold ? (r == 0.0 ? res.threshold : tune(r)) : res.threshold;
        c.estimate = evaluate(sim, Controller::tracking(c.threshold), r, es);
        c.rate_ok = c.estimate.min_grid_rate >= q.rate_threshold;
        c.budget_ok = c.estimate.budget_violation_prob <= q.delta;
        if (c.feasible())
        {
            res.r_star = r;
            if (c.estimate.min_grid_rate >= best_min)
            {
                best_min = c.estimate.min_grid_rate;
                res.argmax_of_min = r;
            }
        }
        res.candidates.push_back(c);
    }
    return res;
}

} // namespace mmtrack

#endif // MMTRACK_OPTIMIZE_HPP
