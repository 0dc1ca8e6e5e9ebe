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

#ifndef MMTRACK_SKELETON_HPP
#define MMTRACK_SKELETON_HPP

#include "beamforming.hpp"
#include "channel.hpp"
#include "path.hpp"
#include "scenario.hpp"

#include <json.hpp>

#include <algorithm>
#include <map>
#include <memory>
#include <numeric>
#include <optional>
#include <span>
#include <vector>

namespace mmtrack
{

/*!MD
# Path-skeleton tracking

The BS keeps one skeleton (L strongest paths) per grid ID. Along the
trajectory it probes only the directions of the current reference skeleton,
rebuilds a channel estimate from the per-path strengths and compares it with
the estimate taken when the reference was installed. A Frobenius distance
above `T_D` triggers a new database query for the grid the user is believed
to be in.
MD!*/

// Top-L paths by gain, strongest first. Ties keep input order.
inline PathSkeleton extract_skeleton(std::span<const Path> paths, std::span<const double> betas, int L, int grid_id)
{
    if (L < 1)
        throw DomainError("extract_skeleton: L must be >= 1");
    if (paths.size() != betas.size())
        throw DomainError("extract_skeleton: paths and gains are not aligned");
    std::vector<std::size_t> idx(paths.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return betas[a] > betas[b]; });
    PathSkeleton ps;
    ps.grid_id = grid_id;
    for (std::size_t k = 0; k < idx.size() && static_cast<int>(k) < L; ++k)
        ps.paths.push_back({paths[idx[k]].aod, paths[idx[k]].aoa, betas[idx[k]]});
    return ps;
}

// Skeleton entries viewed as geometric paths, for channel assembly.
inline std::vector<Path> skeleton_as_paths(const PathSkeleton &ps)
{
    std::vector<Path> out;
    out.reserve(ps.size());
    for (const auto &p : ps.paths)
    {
        Path q;
        q.aod = p.aod;
        q.aoa = p.aoa;
        q.length = 1.0;
        out.push_back(q);
    }
    return out;
}

// ------------------------------------------------------------------------
// Database
// ------------------------------------------------------------------------

using SkeletonTable = std::map<int, PathSkeleton>;

struct QueryResult
{
    const PathSkeleton &skeleton;
    bool budget_exceeded = false; // U > U_max after this query
};

// Read-only skeleton table plus a query counter. Copies share the table and
// own their counter, so each Monte-Carlo trial takes its own copy.
class SkeletonDatabase
{
public:
    SkeletonDatabase() : table_(std::make_shared<SkeletonTable>()) {}
    explicit SkeletonDatabase(SkeletonTable table, int budget = 0)
        : table_(std::make_shared<const SkeletonTable>(std::move(table))), budget_(budget)
    {
    }

    // Every query counts; there is no caching and no refusal.
    QueryResult query(int grid_id)
    {
        auto it = table_->find(grid_id);
        if (it == table_->end())
            throw LookupError("no path skeleton stored for grid " + std::to_string(grid_id));
        ++query_count_;
        return {it->second, budget_ > 0 && query_count_ > budget_};
    }

    bool contains(int grid_id) const { return table_->count(grid_id) != 0; }
    const SkeletonTable &entries() const { return *table_; }
    int query_count() const { return query_count_; }
    int budget() const { return budget_; }
    void set_budget(int b) { budget_ = b; }
    void reset_counter() { query_count_ = 0; }
    // Fresh counter over the same table.
    SkeletonDatabase fresh() const
    {
        SkeletonDatabase d = *this;
        d.query_count_ = 0;
        return d;
    }

private:
    std::shared_ptr<const SkeletonTable> table_;
    int query_count_ = 0;
    int budget_ = 0;
};

inline QueryResult db_query(SkeletonDatabase &db, int grid_id) { return db.query(grid_id); }

// Traces every grid centre without temporary blockers and stores its L
// strongest paths. The user array is assumed to face the travel direction.
inline SkeletonDatabase populate_database(const Scenario &sc, int L, int budget = 0)
{
    SkeletonTable table;
    const ObstacleSet none;
    for (const auto &g : sc.grids)
    {
        const auto paths = trace_paths(sc, none, sc.ue_position(g.id), L, sc.config.radio.angular_resolution_deg, g.heading);
        std::vector<double> betas;
        for (const auto &p : paths)
            betas.push_back(large_scale_gain(p, sc.config.radio.path_loss));
        table[g.id] = extract_skeleton(paths, betas, L, g.id);
    }
    return SkeletonDatabase(std::move(table), budget);
}

// Structured-text export: angles in degrees, gains in dB.
inline nlohmann::json export_database(const SkeletonDatabase &db)
{
    nlohmann::json grids = nlohmann::json::array();
    for (const auto &[id, ps] : db.entries())
    {
        nlohmann::json paths = nlohmann::json::array();
        for (const auto &p : ps.paths)
            paths.push_back({{"aod_deg", {rad_to_deg(p.aod.phi), rad_to_deg(p.aod.theta)}},
                             {"aoa_deg", {rad_to_deg(p.aoa.phi), rad_to_deg(p.aoa.theta)}},
                             {"gain_db", linear_to_db(p.beta)}});
        grids.push_back({{"grid_id", id}, {"paths", paths}});
    }
    return {{"format", "mmtrack-skeleton-db"}, {"version", 1}, {"grids", grids}};
}

inline SkeletonDatabase import_database(const nlohmann::json &j, int budget = 0)
{
    if (!j.contains("grids") || !j["grids"].is_array())
        throw ConfigError("grids", "missing skeleton list");
    SkeletonTable table;
    for (const auto &g : j["grids"])
    {
        PathSkeleton ps;
        ps.grid_id = g.at("grid_id").get<int>();
        for (const auto &p : g.at("paths"))
        {
            const auto aod = p.at("aod_deg").get<std::vector<double>>();
            const auto aoa = p.at("aoa_deg").get<std::vector<double>>();
            if (aod.size() != 2 || aoa.size() != 2)
                throw ConfigError("grids.paths", "angles must be [phi, theta] pairs");
            ps.paths.push_back({{deg_to_rad(aod[0]), deg_to_rad(aod[1])},
                                {deg_to_rad(aoa[0]), deg_to_rad(aoa[1])},
                                db_to_linear(p.at("gain_db").get<double>())});
        }
        if (!table.emplace(ps.grid_id, ps).second)
            throw ConfigError("grids", "duplicate grid_id " + std::to_string(ps.grid_id));
    }
    return SkeletonDatabase(std::move(table), budget);
}

// ------------------------------------------------------------------------
// Estimation on skeleton directions
// ------------------------------------------------------------------------

struct SkeletonEstimate
{
    std::vector<cplx> coefficients; // per skeleton path, same normalization as h in the channel law
    ChannelMatrix channel;          // skeleton paths assembled with `coefficients`
    int pilot_slots = 0;
};

// Sends one pilot per skeleton path (f = a_tx(aod), w = a_rx(aoa)) through the
// true channel `H`, then solves the L x L system that maps path coefficients
// to probe outputs. Exact whenever H is a combination of the skeleton's paths.
template <class Channel>
SkeletonEstimate estimate_on_skeleton(const Channel &H, const PathSkeleton &ps, const ArrayGeometry &tx,
                                      const ArrayGeometry &rx, PhaseConvention conv = PhaseConvention::as_printed)
{
    SkeletonEstimate est;
    est.pilot_slots = static_cast<int>(ps.size());
    if (ps.empty())
    {
        est.channel = zero_channel(tx, rx, channel_grid_id(H));
        return est;
    }
    const auto L = static_cast<Eigen::Index>(ps.size());
    std::vector<CVector> f(L), w(L);
    for (Eigen::Index l = 0; l < L; ++l)
    {
        f[l] = array_response(tx, ps.paths[l].aod, conv);
        w[l] = array_response(rx, ps.paths[l].aoa, conv);
    }
    const double scale = std::sqrt(static_cast<double>(tx.total()) * rx.total() / L);
    CVector y(L);
    CMatrix G(L, L);
    for (Eigen::Index l = 0; l < L; ++l)
    {
        y(l) = probe(H, w[l], f[l]);
        for (Eigen::Index k = 0; k < L; ++k)
            G(l, k) = scale * w[l].dot(w[k]) * f[k].dot(f[l]);
    }
    const CVector c = G.completeOrthogonalDecomposition().solve(y);
    est.coefficients.assign(c.data(), c.data() + L);
    const auto paths = skeleton_as_paths(ps);
    est.channel = assemble_channel(std::span<const Path>(paths), std::span<const cplx>(est.coefficients), tx, rx, conv,
                                   channel_grid_id(H));
    return est;
}

// Channel rebuilt from per-path signal strengths |c_l| only. The tracker
// compares these, so geometric phase drift of the probes does not count as
// change.
inline ChannelMatrix strength_channel(const PathSkeleton &ps, std::span<const cplx> coefficients,
                                      const ArrayGeometry &tx, const ArrayGeometry &rx,
                                      PhaseConvention conv = PhaseConvention::as_printed)
{
    std::vector<cplx> amp(coefficients.size());
    for (std::size_t l = 0; l < amp.size(); ++l)
        amp[l] = std::abs(coefficients[l]);
    const auto paths = skeleton_as_paths(ps);
    return assemble_channel(std::span<const Path>(paths), std::span<const cplx>(amp), tx, rx, conv);
}

enum class DistanceNorm
{
    frobenius,
    spectral,
};

inline double skeleton_distance(const ChannelMatrix &Hi, const ChannelMatrix &H0,
                                DistanceNorm norm = DistanceNorm::frobenius)
{
    if (Hi.n_rx() != H0.n_rx() || Hi.n_tx() != H0.n_tx())
        throw DomainError("skeleton_distance: channel dimensions differ");
    const CMatrix diff = Hi.entries - H0.entries;
    if (norm == DistanceNorm::frobenius)
        return diff.norm();
    if (diff.size() == 0)
        return 0.0;
    Eigen::JacobiSVD<CMatrix> svd(diff);
    return svd.singularValues()(0);
}

// ------------------------------------------------------------------------
// Tracking controller
// ------------------------------------------------------------------------

// How H_0 is formed when a skeleton becomes the reference.
//   database  : channel at the reference location as stored, path amplitudes sqrt(beta)
//   estimated : pilots on the new skeleton at the current grid
enum class ReferenceMode
{
    database,
    estimated,
};

struct TrackingOptions
{
    ArrayGeometry tx{8, 8};
    ArrayGeometry rx{4, 4};
    PhaseConvention convention = PhaseConvention::as_printed;
    DistanceNorm norm = DistanceNorm::frobenius;
    bool relative_distance = false;   // d / ||H_0||_F instead of raw d
    ReferenceMode reference = ReferenceMode::estimated;
    double sigma2 = 0.0;              // P_tx / noise power, linear
    double bandwidth_hz = 100e6;
    double gain_floor = 0.0;          // |c|^2 at or below this counts as blocked
    const Codebook *tx_codebook = nullptr; // when both set, matched beams snap to the codebook
    const Codebook *rx_codebook = nullptr;
};

struct TrackingState
{
    PathSkeleton reference_ps;
    ChannelMatrix reference_channel;
    bool initialized = false;
};

// What the controller sees at one grid visit.
struct GridContext
{
    int grid_id = 0;             // true grid
    int perceived_grid = 0;      // grid reported by localization
    PathChannel channel;         // current channel with small-scale fading
    PathChannel measurement;     // channel the tracking pilots observe
};

struct StepResult
{
    std::optional<BeamPair> beams; // nullopt on outage
    double snr = 0.0;
    double rate = 0.0;
    bool update_event = false;
    bool budget_exceeded = false;
    double distance = 0.0;       // d(i,0); +inf when no reference existed
    int pilot_slots = 0;
    int skeleton_grid = -1;      // grid ID of the skeleton used for the beams
};

namespace detail
{

template <class Channel>
std::optional<BeamPair> matched_beams(const Channel &H, const PathSkeleton &ps, const TrackingOptions &opt)
{
    const auto est = estimate_on_skeleton(H, ps, opt.tx, opt.rx, opt.convention);
    std::vector<double> powers(est.coefficients.size());
    for (std::size_t l = 0; l < powers.size(); ++l)
        powers[l] = std::norm(est.coefficients[l]);
    auto pair = select_beams_skeleton(powers, ps, opt.tx, opt.rx, opt.gain_floor, opt.convention);
    if (pair && opt.tx_codebook && opt.rx_codebook)
    {
        const auto i = nearest_codeword(*opt.tx_codebook, pair->f.weights);
        const auto j = nearest_codeword(*opt.rx_codebook, pair->w.weights);
        pair->f = opt.tx_codebook->beams[i];
        pair->w = opt.rx_codebook->beams[j];
    }
    return pair;
}

// A reference that saw no energy at all counts as infinitely far, so any
// finite T_D asks for a new skeleton.
inline double tracking_distance(const ChannelMatrix &Hi, const ChannelMatrix &H0, const TrackingOptions &opt)
{
    const double d = skeleton_distance(Hi, H0, opt.norm);
    const double n0 = H0.entries.norm();
    if (!(n0 > 0.0))
        return std::numeric_limits<double>::infinity();
    return opt.relative_distance ? d / n0 : d;
}

} // namespace detail

template <class Channel>
double link_rate(const Channel &H, const std::optional<BeamPair> &beams, const TrackingOptions &opt,
                 double *snr_out = nullptr)
{
    const double s = beams ? snr(H, beams->f.weights, beams->w.weights, opt.sigma2) : 0.0;
    if (snr_out)
        *snr_out = s;
    return rate(s, opt.bandwidth_hz);
}

// One grid of the tracking controller. On the first call (or with
// `force_update`) the skeleton of the perceived grid is queried. Otherwise the
// reference skeleton is probed and a query happens only when d(i,0) > T_D.
// Beams always come from the skeleton in force after the decision.
inline StepResult tracking_step(TrackingState &state, const GridContext &ctx, SkeletonDatabase &db, double threshold,
                                const TrackingOptions &opt, bool force_update = false)
{
    StepResult out;
    out.distance = std::numeric_limits<double>::infinity();
    bool update = force_update || !state.initialized;
    if (!update)
    {
        const auto probe = estimate_on_skeleton(ctx.measurement, state.reference_ps, opt.tx, opt.rx, opt.convention);
        out.pilot_slots += probe.pilot_slots;
        const auto Hi = strength_channel(state.reference_ps, probe.coefficients, opt.tx, opt.rx, opt.convention);
        out.distance = detail::tracking_distance(Hi, state.reference_channel, opt);
        update = out.distance > threshold;
    }
    if (update)
    {
        const auto q = db.query(ctx.perceived_grid);
        out.budget_exceeded = q.budget_exceeded;
        state.reference_ps = q.skeleton;
        const auto probe = estimate_on_skeleton(ctx.measurement, state.reference_ps, opt.tx, opt.rx, opt.convention);
        out.pilot_slots += probe.pilot_slots;
        if (opt.reference == ReferenceMode::database)
        {
            std::vector<cplx> amp;
            for (const auto &p : state.reference_ps.paths)
                amp.push_back(std::sqrt(p.beta));
            state.reference_channel = strength_channel(state.reference_ps, amp, opt.tx, opt.rx, opt.convention);
        }
        else
            state.reference_channel =
                strength_channel(state.reference_ps, probe.coefficients, opt.tx, opt.rx, opt.convention);
        state.initialized = true;
        out.update_event = true;
    }
    out.skeleton_grid = state.reference_ps.grid_id;
    out.beams = detail::matched_beams(ctx.channel, state.reference_ps, opt);
    out.rate = link_rate(ctx.channel, out.beams, opt, &out.snr);
    return out;
}

} // namespace mmtrack

#endif // MMTRACK_SKELETON_HPP
