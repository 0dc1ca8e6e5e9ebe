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

#ifndef MMTRACK_BEAMFORMING_HPP
#define MMTRACK_BEAMFORMING_HPP

#include "channel.hpp"
#include "path.hpp"

#include <limits>
#include <optional>
#include <span>
#include <vector>

namespace mmtrack
{

enum class Side
{
    tx,
    rx,
};

struct BeamVector
{
    CVector weights;
    Direction pointing;
    Side side = Side::tx;
};

inline BeamVector make_beam(const ArrayGeometry &g, const Direction &d, Side side,
                            PhaseConvention conv = PhaseConvention::as_printed)
{
    return {array_response(g, d, conv), d, side};
}

// Angular region served by a codebook (array-local angles, radians).
struct Sector
{
    double phi_min = -pi / 2.0;
    double phi_max = pi / 2.0;
    double theta_min = 0.0;
    double theta_max = pi;

    bool empty() const { return !(phi_max >= phi_min && theta_max >= theta_min); }
};

struct Codebook
{
    std::vector<BeamVector> beams;
    Side side = Side::tx;
    ArrayGeometry geometry;
    PhaseConvention convention = PhaseConvention::as_printed;
    Vec2 spacing = Vec2::Zero(); // sine-space grid pitch (u, v)

    std::size_t size() const { return beams.size(); }
};

namespace detail
{

// Normalized power pattern of an N-element half-wavelength ULA at a
// sine-space offset `delta` from its pointing direction.
inline double ula_power(int n, double delta)
{
    const double den = n * std::sin(pi * delta / 2.0);
    if (std::abs(den) < 1e-300)
        return 1.0;
    const double r = std::sin(n * pi * delta / 2.0) / den;
    return r * r;
}

// Grid pitch for an N-element axis: twice the offset at which the pattern has
// dropped to 1/sqrt(2), so the product of both axes never falls below 1/2.
inline double codebook_pitch(int n)
{
    if (n <= 1)
        return std::numeric_limits<double>::infinity();
    double lo = 0.0, hi = 1.0 / n;
    const double target = 1.0 / std::sqrt(2.0);
    for (int it = 0; it < 100; ++it)
    {
        const double mid = 0.5 * (lo + hi);
        (ula_power(n, mid) > target ? lo : hi) = mid;
    }
    return 2.0 * lo;
}

inline std::vector<double> axis_points(double lo, double hi, double pitch)
{
    const double mid = 0.5 * (lo + hi);
    if (!std::isfinite(pitch))
        return {mid};
    const int n = std::max(1, static_cast<int>(std::ceil((hi - lo) / pitch - 1e-12)));
    std::vector<double> out;
    for (int k = 0; k < n; ++k)
        out.push_back(mid + (k - (n - 1) / 2.0) * pitch);
    return out;
}

// Inverse of sine_space(). Picks the solution inside `sector` when the
// mapping is two-to-one.
inline Direction direction_from_uv(double u, double v, PhaseConvention conv, const Sector &sector)
{
    Direction d;
    const double tmid = 0.5 * (sector.theta_min + sector.theta_max);
    if (conv == PhaseConvention::as_printed)
    {
        v = std::clamp(v, -1.0, 1.0);
        const double a = std::acos(v);
        d.phi = u < 0.0 ? -a : a;
        if (d.phi < sector.phi_min || d.phi > sector.phi_max)
        {
            if (-d.phi >= sector.phi_min && -d.phi <= sector.phi_max && std::abs(u) < 1e-12)
                d.phi = -d.phi;
        }
        const double s = std::abs(std::sin(d.phi));
        if (s < 1e-12)
            d.theta = tmid;
        else
        {
            const double t = std::asin(std::clamp(std::abs(u) / s, 0.0, 1.0));
            const double alt = pi - t;
            d.theta = std::abs(t - tmid) <= std::abs(alt - tmid) ? t : alt;
        }
    }
    else
    {
        d.theta = std::acos(std::clamp(v, -1.0, 1.0));
        const double s = std::sin(d.theta);
        d.phi = s < 1e-12 ? 0.0 : std::asin(std::clamp(u / s, -1.0, 1.0));
    }
    d.phi = wrap_angle(d.phi);
    return d;
}

} // namespace detail

// Steering-vector grid in sine space covering `sector`. Each axis is sampled
// at a pitch shrinking as 1/N; an axis with one element gets one point.
inline Codebook build_codebook(const ArrayGeometry &g, const Sector &sector, Side side = Side::tx,
                               PhaseConvention conv = PhaseConvention::as_printed)
{
    validate(g, "codebook.geometry");
    Codebook cb;
    cb.side = side;
    cb.geometry = g;
    cb.convention = conv;
    if (sector.empty())
        throw ConfigError("codebook.sector", "empty sector");

    // Sine-space bounding box of the sector.
    double umin = 1e9, umax = -1e9, vmin = 1e9, vmax = -1e9;
    const int n = 181;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
        {
            const Direction d{sector.phi_min + (sector.phi_max - sector.phi_min) * i / (n - 1),
                              sector.theta_min + (sector.theta_max - sector.theta_min) * j / (n - 1)};
            const Vec2 uv = sine_space(d, conv);
            umin = std::min(umin, uv.x());
            umax = std::max(umax, uv.x());
            vmin = std::min(vmin, uv.y());
            vmax = std::max(vmax, uv.y());
        }

    const double pu = detail::codebook_pitch(g.n_cols);
    const double pv = detail::codebook_pitch(g.n_rows);
    cb.spacing = {std::isfinite(pu) ? pu : 0.0, std::isfinite(pv) ? pv : 0.0};
    const auto us = detail::axis_points(umin, umax, pu);
    const auto vs = detail::axis_points(vmin, vmax, pv);
    const double hu = std::isfinite(pu) ? pu / 2 : 0.0, hv = std::isfinite(pv) ? pv / 2 : 0.0;

    std::vector<Vec2> kept;
    for (double v : vs)
        for (double u : us)
        {
            Vec2 p(u, v);
            if (p.norm() > 1.0)
            {
                // Keep edge cells that still overlap the visible disk by pulling
                // their centre onto the disk boundary.
                const double cu = std::clamp(0.0, u - hu, u + hu), cv = std::clamp(0.0, v - hv, v + hv);
                if (Vec2(cu, cv).norm() > 1.0)
                    continue;
                p = p.normalized();
            }
            bool dup = false;
            for (const auto &q : kept)
                dup = dup || (q - p).norm() < 1e-9;
            if (!dup)
                kept.push_back(p);
        }
    for (const auto &p : kept)
    {
        const Direction d = detail::direction_from_uv(p.x(), p.y(), conv, sector);
        cb.beams.push_back(make_beam(g, d, side, conv));
    }
    if (cb.beams.empty())
        cb.beams.push_back(make_beam(g, {0.5 * (sector.phi_min + sector.phi_max), 0.5 * (sector.theta_min + sector.theta_max)}, side, conv));
    return cb;
}

// |w^H H f|^2
template <class Channel> double beam_gain(const Channel &H, const CVector &f, const CVector &w)
{
    return std::norm(probe(H, w, f));
}

struct BeamPair
{
    BeamVector f;
    BeamVector w;
    std::size_t tx_index = 0; // codeword or skeleton-path index
    std::size_t rx_index = 0;
    double objective = 0.0;   // |w^H H f|^2 where known
};

// Exhaustive search over F x W. Ties go to the lowest (tx, rx) index pair;
// gains within `tie_tolerance` (relative) of each other count as tied.
inline BeamPair select_beams_exhaustive(const ChannelMatrix &H, const Codebook &F, const Codebook &W,
                                        double tie_tolerance = 1e-12)
{
    if (F.beams.empty() || W.beams.empty())
        throw ConfigError("codebook", "empty codebook");
    if (F.geometry.total() != H.n_tx() || W.geometry.total() != H.n_rx())
        throw ConfigError("codebook", "codebook dimensions do not match the channel");
    std::size_t bi = 0, bj = 0;
    double best = -1.0;
    for (std::size_t i = 0; i < F.beams.size(); ++i)
    {
        const CVector hf = H.entries * F.beams[i].weights;
        for (std::size_t j = 0; j < W.beams.size(); ++j)
        {
            const double g = std::norm(W.beams[j].weights.dot(hf));
            if (g > best + tie_tolerance * std::max(best, 0.0))
            {
                best = g;
                bi = i;
                bj = j;
            }
        }
    }
    return {F.beams[bi], W.beams[bj], bi, bj, best};
}

// Index of the codeword closest (max |c^H b|^2) to `beam`.
inline std::size_t nearest_codeword(const Codebook &cb, const CVector &beam)
{
    std::size_t best_i = 0;
    double best = -1.0;
    for (std::size_t i = 0; i < cb.beams.size(); ++i)
    {
        const double g = std::norm(cb.beams[i].weights.dot(beam));
        if (g > best)
        {
            best = g;
            best_i = i;
        }
    }
    return best_i;
}

// Matches f and w to the strongest measured skeleton path. `powers[l]` is
// the received power of skeleton path l; paths at or below `power_floor`
// are treated as blocked. Returns nullopt (outage) when every path is.
inline std::optional<BeamPair> select_beams_skeleton(std::span<const double> powers, const PathSkeleton &ps,
                                                     const ArrayGeometry &tx, const ArrayGeometry &rx,
                                                     double power_floor = 0.0,
                                                     PhaseConvention conv = PhaseConvention::as_printed)
{
    if (powers.size() != ps.paths.size())
        throw DomainError("select_beams_skeleton: measurements not aligned with the skeleton");
    std::optional<std::size_t> best;
    for (std::size_t l = 0; l < powers.size(); ++l)
        if (powers[l] > power_floor && (!best || powers[l] > powers[*best]))
            best = l;
    if (!best)
        return std::nullopt;
    const auto &p = ps.paths[*best];
    return BeamPair{make_beam(tx, p.aod, Side::tx, conv), make_beam(rx, p.aoa, Side::rx, conv), *best, *best, 0.0};
}

struct LinkBudget
{
    double tx_power_dbm = 30.0;
    double noise_psd_dbm_hz = -174.0;
    double bandwidth_hz = 100e6;

    double noise_power_dbm() const { return noise_psd_dbm_hz + 10.0 * std::log10(bandwidth_hz); }
    // Transmit power over noise power (linear).
    double sigma2() const { return db_to_linear(tx_power_dbm - noise_power_dbm()); }
};

template <class Channel> double snr(const Channel &H, const CVector &f, const CVector &w, double sigma2)
{
    if (!(sigma2 > 0.0))
        throw DomainError("snr: sigma2 must be positive");
    return sigma2 * beam_gain(H, f, w);
}

inline double rate(double snr_linear, double bandwidth_hz)
{
    if (snr_linear < 0.0)
        throw DomainError("rate: negative SNR");
    return bandwidth_hz * std::log2(1.0 + snr_linear);
}

inline double trajectory_rate(std::span<const double> rates)
{
    double acc = 0.0;
    for (double r : rates)
        acc += r;
    return acc;
}

} // namespace mmtrack

#endif // MMTRACK_BEAMFORMING_HPP
