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

#ifndef MMTRACK_CHANNEL_HPP
#define MMTRACK_CHANNEL_HPP

#include "path.hpp"
#include "rng.hpp"

#include <iomanip>
#include <ostream>
#include <random>
#include <span>
#include <vector>

namespace mmtrack
{

/*!MD
# Narrowband geometric channel

Sparse multipath channel between two half-wavelength uniform planar arrays:

    H = sqrt(N_tx * N_rx / L) * sum_l h_l * a_rx(aoa_l) * a_tx(aod_l)^H

with `h_l ~ CN(0, beta_l)` and `beta_l` from a close-in (1 m reference)
path-loss law. Elements are enumerated row-major with the column index
`n_x` running fastest: element index `n_y * n_cols + n_x`.
MD!*/

// Planar array shape. Half-wavelength spacing is implied.
struct ArrayGeometry
{
    int n_cols = 1; // N_x (M_x on the Rx side)
    int n_rows = 1; // N_y (M_y on the Rx side)

    int total() const { return n_cols * n_rows; }
    bool operator==(const ArrayGeometry &) const = default;
};

inline void validate(const ArrayGeometry &g, const std::string &field)
{
    if (g.n_cols < 1 || g.n_rows < 1)
        throw ConfigError(field, "array dimensions must be >= 1");
}

// Phase law of the row (n_y) term.
//   as_printed   : pi * [n_x sin(theta) sin(phi) + n_y cos(phi)]
//   conventional : pi * [n_x sin(theta) sin(phi) + n_y cos(theta)]
enum class PhaseConvention
{
    as_printed,
    conventional,
};

// Sine-space coordinates (u, v) of a direction; the array phase of element
// (n_x, n_y) is pi * (n_x * u + n_y * v).
inline Vec2 sine_space(const Direction &d, PhaseConvention conv = PhaseConvention::as_printed)
{
    const double u = std::sin(d.theta) * std::sin(d.phi);
    const double v = conv == PhaseConvention::as_printed ? std::cos(d.phi) : std::cos(d.theta);
    return {u, v};
}

// Steering vector for a point in sine space. Unit l2 norm.
inline CVector array_response_uv(const ArrayGeometry &g, double u, double v)
{
    const double scale = 1.0 / std::sqrt(static_cast<double>(g.total()));
    CVector a(g.total());
    for (int ny = 0; ny < g.n_rows; ++ny)
        for (int nx = 0; nx < g.n_cols; ++nx)
            a(ny * g.n_cols + nx) = scale * std::polar(1.0, pi * (nx * u + ny * v));
    return a;
}

inline CVector array_response(const ArrayGeometry &g, double phi, double theta,
                              PhaseConvention conv = PhaseConvention::as_printed)
{
    const Vec2 uv = sine_space({phi, theta}, conv);
    return array_response_uv(g, uv.x(), uv.y());
}

inline CVector array_response(const ArrayGeometry &g, const Direction &d,
                              PhaseConvention conv = PhaseConvention::as_printed)
{
    return array_response(g, d.phi, d.theta, conv);
}

// Free-space loss at the 1 m reference distance, dB.
inline double fspl_1m_db(double frequency_hz)
{
    return 20.0 * std::log10(4.0 * pi * frequency_hz / speed_of_light);
}

struct PathLossModel
{
    double frequency_hz = 28e9;
    double los_exponent = 1.9;
    double nlos_exponent = 4.5;
};

// beta in dB (a negative number): -[FSPL(1 m) + 10 n log10(d / 1 m) + penetration].
inline double large_scale_gain_db(const Path &path, double frequency_hz, double los_exponent, double nlos_exponent)
{
    if (!(path.length > 0.0))
        throw DomainError("large_scale_gain: path length must be positive");
    const double n = path.is_los ? los_exponent : nlos_exponent;
    return -(fspl_1m_db(frequency_hz) + 10.0 * n * std::log10(path.length) + path.penetration_loss_db);
}

inline double large_scale_gain(const Path &path, double frequency_hz, double los_exponent, double nlos_exponent)
{
    return db_to_linear(large_scale_gain_db(path, frequency_hz, los_exponent, nlos_exponent));
}

inline double large_scale_gain(const Path &path, const PathLossModel &m)
{
    return large_scale_gain(path, m.frequency_hz, m.los_exponent, m.nlos_exponent);
}

// Circularly-symmetric complex Gaussian with E|h|^2 = beta.
inline cplx sample_fading(double beta, Rng &rng)
{
    if (beta < 0.0)
        throw DomainError("sample_fading: beta must be >= 0");
    std::normal_distribution<double> n01(0.0, 1.0);
    const double re = n01(rng), im = n01(rng);
    const double s = std::sqrt(beta / 2.0);
    return {s * re, s * im};
}

struct PathGain
{
    double beta = 0.0;
    cplx h{};
};

struct ChannelMatrix
{
    CMatrix entries; // N_rx x N_tx
    int grid_id = -1;

    Eigen::Index n_rx() const { return entries.rows(); }
    Eigen::Index n_tx() const { return entries.cols(); }
};

inline ChannelMatrix zero_channel(const ArrayGeometry &tx, const ArrayGeometry &rx, int grid_id = -1)
{
    return {CMatrix::Zero(rx.total(), tx.total()), grid_id};
}

// Rank-one term a_rx(aoa) a_tx(aod)^H of a single path.
inline CMatrix path_atom(const Path &p, const ArrayGeometry &tx, const ArrayGeometry &rx, PhaseConvention conv)
{
    return array_response(rx, p.aoa, conv) * array_response(tx, p.aod, conv).adjoint();
}

// Eq.-(1) style assembly with explicit per-path coefficients. An empty path
// list yields the all-zero (outage) channel.
inline ChannelMatrix assemble_channel(std::span<const Path> paths, std::span<const cplx> coeffs,
                                      const ArrayGeometry &tx, const ArrayGeometry &rx,
                                      PhaseConvention conv = PhaseConvention::as_printed, int grid_id = -1)
{
    if (paths.size() != coeffs.size())
        throw DomainError("assemble_channel: paths and coefficients are not aligned");
    ChannelMatrix H = zero_channel(tx, rx, grid_id);
    if (paths.empty())
        return H;
    const double scale = std::sqrt(static_cast<double>(tx.total()) * rx.total() / paths.size());
    for (std::size_t l = 0; l < paths.size(); ++l)
    {
        const CVector ar = array_response(rx, paths[l].aoa, conv);
        const CVector at = array_response(tx, paths[l].aod, conv);
        H.entries.noalias() += (scale * coeffs[l]) * ar * at.adjoint();
    }
    return H;
}

inline ChannelMatrix assemble_channel(std::span<const Path> paths, std::span<const PathGain> gains,
                                      const ArrayGeometry &tx, const ArrayGeometry &rx,
                                      PhaseConvention conv = PhaseConvention::as_printed, int grid_id = -1)
{
    if (paths.size() != gains.size())
        throw DomainError("assemble_channel: paths and gains are not aligned");
    std::vector<cplx> h(gains.size());
    for (std::size_t l = 0; l < gains.size(); ++l)
        h[l] = gains[l].h;
    return assemble_channel(paths, std::span<const cplx>(h), tx, rx, conv, grid_id);
}

// Same channel kept in path form. Probing w^H H f costs O(L (N_tx + N_rx))
// instead of O(N_tx N_rx), which is what the trajectory loops use.
struct PathChannel
{
    ArrayGeometry tx;
    ArrayGeometry rx;
    double scale = 0.0; // sqrt(N_tx N_rx / L)
    std::vector<CVector> a_tx;
    std::vector<CVector> a_rx;
    std::vector<cplx> coeff;
    int grid_id = -1;

    static PathChannel from_paths(std::span<const Path> paths, std::span<const cplx> coeffs, const ArrayGeometry &tx,
                                  const ArrayGeometry &rx, PhaseConvention conv = PhaseConvention::as_printed,
                                  int grid_id = -1)
    {
        if (paths.size() != coeffs.size())
            throw DomainError("PathChannel: paths and coefficients are not aligned");
        PathChannel c;
        c.tx = tx;
        c.rx = rx;
        c.grid_id = grid_id;
        c.scale = paths.empty() ? 0.0 : std::sqrt(static_cast<double>(tx.total()) * rx.total() / paths.size());
        for (std::size_t l = 0; l < paths.size(); ++l)
        {
            c.a_tx.push_back(array_response(tx, paths[l].aod, conv));
            c.a_rx.push_back(array_response(rx, paths[l].aoa, conv));
            c.coeff.push_back(coeffs[l]);
        }
        return c;
    }

    // Same steering vectors, different coefficients.
    PathChannel with_coefficients(std::span<const cplx> coeffs) const
    {
        if (coeffs.size() != coeff.size())
            throw DomainError("PathChannel: coefficient count mismatch");
        PathChannel c = *this;
        c.coeff.assign(coeffs.begin(), coeffs.end());
        return c;
    }

    std::size_t path_count() const { return coeff.size(); }

    ChannelMatrix matrix() const
    {
        ChannelMatrix H = zero_channel(tx, rx, grid_id);
        for (std::size_t l = 0; l < coeff.size(); ++l)
            H.entries.noalias() += (scale * coeff[l]) * a_rx[l] * a_tx[l].adjoint();
        return H;
    }
};

// w^H H f for either channel representation.
inline cplx probe(const ChannelMatrix &H, const CVector &w, const CVector &f) { return w.dot(H.entries * f); }

inline cplx probe(const PathChannel &H, const CVector &w, const CVector &f)
{
    cplx acc = 0.0;
    for (std::size_t l = 0; l < H.coeff.size(); ++l)
        acc += H.coeff[l] * w.dot(H.a_rx[l]) * H.a_tx[l].dot(f);
    return H.scale * acc;
}

inline int channel_grid_id(const ChannelMatrix &H) { return H.grid_id; }
inline int channel_grid_id(const PathChannel &H) { return H.grid_id; }

// Debug dump: one matrix row per line, entries as "re,im" separated by spaces.
inline void write_channel_text(std::ostream &os, const ChannelMatrix &H)
{
    os << "# grid " << H.grid_id << " rows " << H.n_rx() << " cols " << H.n_tx() << '\n';
    os << std::setprecision(17);
    for (Eigen::Index r = 0; r < H.n_rx(); ++r)
    {
        for (Eigen::Index c = 0; c < H.n_tx(); ++c)
        {
            if (c)
                os << ' ';
            os << H.entries(r, c).real() << ',' << H.entries(r, c).imag();
        }
        os << '\n';
    }
}

} // namespace mmtrack

#endif // MMTRACK_CHANNEL_HPP
