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

#include "catch_amalgamated.hpp"

#include "fixtures.hpp"

#include <cmath>
#include <sstream>

using namespace mmtrack;

namespace
{

// Element (n_x, n_y) of the steering vector written out from the phase law.
cplx element(const ArrayGeometry &g, int nx, int ny, double phi, double theta)
{
    const double ph = pi * (nx * std::sin(theta) * std::sin(phi) + ny * std::cos(phi));
    return cplx(std::cos(ph), std::sin(ph)) / std::sqrt(double(g.n_cols * g.n_rows));
}

} // namespace

TEST_CASE("channel - Steering vectors")
{
    const auto one = array_response(ArrayGeometry{1, 1}, 0.7, 1.1);
    REQUIRE(one.size() == 1);
    CHECK(std::abs(one(0) - cplx(1.0, 0.0)) < 1e-15);

    std::mt19937_64 rng(1);
    for (int k = 0; k < 100; ++k)
    {
        const auto d = fixtures::random_direction(rng);
        CHECK(std::abs(array_response(ArrayGeometry{8, 8}, d).norm() - 1.0) < 1e-12);
        CHECK(std::abs(array_response(ArrayGeometry{4, 2}, d, PhaseConvention::conventional).norm() - 1.0) < 1e-12);
    }

    // phi = theta = pi/2: unit phase step along n_x, none along n_y.
    const auto a = array_response(ArrayGeometry{2, 2}, pi / 2.0, pi / 2.0);
    const cplx expect[4] = {0.5, -0.5, 0.5, -0.5};
    for (int k = 0; k < 4; ++k)
        CHECK(std::abs(a(k) - expect[k]) < 1e-12);

    const ArrayGeometry g{4, 3};
    for (int k = 0; k < 20; ++k)
    {
        const auto d = fixtures::random_direction(rng);
        const auto v = array_response(g, d);
        for (int ny = 0; ny < 3; ++ny)
            for (int nx = 0; nx < 4; ++nx)
                CHECK(std::abs(v(ny * 4 + nx) - element(g, nx, ny, d.phi, d.theta)) < 1e-12);
    }
}

TEST_CASE("channel - Large-scale gain")
{
    Path p;
    p.is_los = true;
    p.length = 1.0;
    CHECK(large_scale_gain_db(p, 28e9, 1.9, 4.5) == Catch::Approx(-61.38).margin(0.01));

    p.length = 37.0;
    const double near = large_scale_gain_db(p, 28e9, 1.9, 4.5);
    p.length = 74.0;
    CHECK(near - large_scale_gain_db(p, 28e9, 1.9, 4.5) == Catch::Approx(5.72).margin(0.005));

    p.penetration_loss_db = 28.3;
    const double through = large_scale_gain_db(p, 28e9, 1.9, 4.5);
    p.penetration_loss_db = 0.0;
    CHECK(large_scale_gain_db(p, 28e9, 1.9, 4.5) - through == Catch::Approx(28.3).margin(1e-12));

    const Path los = p;
    p.is_los = false;
    CHECK(large_scale_gain_db(p, 28e9, 1.9, 4.5) < large_scale_gain_db(los, 28e9, 1.9, 4.5));

    p.length = 0.0;
    CHECK_THROWS_AS(large_scale_gain_db(p, 28e9, 1.9, 4.5), DomainError);
    p.length = -2.0;
    CHECK_THROWS_AS(large_scale_gain(p, PathLossModel{}), DomainError);
}

TEST_CASE("channel - Small-scale fading")
{
    Rng rng(11);
    CHECK(sample_fading(0.0, rng) == cplx(0.0, 0.0));
    CHECK_THROWS_AS(sample_fading(-1.0, rng), DomainError);

    const int n = 100000;
    double acc = 0.0;
    cplx mean = 0.0;
    for (int k = 0; k < n; ++k)
    {
        const cplx h = sample_fading(1.0, rng);
        acc += std::norm(h);
        mean += h;
    }
    CHECK(std::abs(acc / n - 1.0) < 0.02);
    CHECK(std::abs(mean / double(n)) < 0.02);

    Rng a(5), b(5);
    CHECK(sample_fading(2.5, a) == sample_fading(2.5, b));
}

TEST_CASE("channel - Assembly norms")
{
    const ArrayGeometry tx{8, 8}, rx{4, 4};
    std::mt19937_64 rng(2);
    Path p;
    p.aod = fixtures::random_direction(rng);
    p.aoa = fixtures::random_direction(rng);
    const std::vector<Path> one{p};
    const std::vector<cplx> unit{1.0};
    CHECK(assemble_channel(one, std::span<const cplx>(unit), tx, rx).entries.norm() ==
          Catch::Approx(std::sqrt(64.0 * 16.0)).epsilon(1e-12));

    // Sine-space offset 2/N makes the two ULA responses orthogonal.
    const ArrayGeometry ula{4, 1};
    Path q1, q2;
    q1.aod = q1.aoa = {0.0, pi / 2.0};
    q2.aod = q2.aoa = {pi / 6.0, pi / 2.0};
    CHECK(std::abs(array_response(ula, q1.aod).dot(array_response(ula, q2.aod))) < 1e-12);
    const std::vector<Path> two{q1, q2};
    const std::vector<cplx> ones{1.0, 1.0};
    CHECK(assemble_channel(two, std::span<const cplx>(ones), ula, ula).entries.squaredNorm() ==
          Catch::Approx(16.0).epsilon(1e-12));

    const auto empty = assemble_channel(std::span<const Path>(), std::span<const cplx>(), tx, rx);
    CHECK(empty.n_rx() == 16);
    CHECK(empty.n_tx() == 64);
    CHECK(empty.entries.norm() == 0.0);
    CHECK_THROWS_AS(assemble_channel(two, std::span<const cplx>(unit), tx, rx), DomainError);
}

TEST_CASE("channel - Assembly against a naive sum")
{
    std::mt19937_64 rng(4);
    std::normal_distribution<double> g(0.0, 1.0);
    const ArrayGeometry tx{2, 2}, rx{2, 1};
    for (int inst = 0; inst < 20; ++inst)
    {
        std::vector<Path> paths(3);
        std::vector<cplx> h(3);
        for (int l = 0; l < 3; ++l)
        {
            paths[l].aod = fixtures::random_direction(rng);
            paths[l].aoa = fixtures::random_direction(rng);
            h[l] = {g(rng), g(rng)};
        }
        const auto H = assemble_channel(paths, std::span<const cplx>(h), tx, rx);
        for (int i = 0; i < rx.total(); ++i)
            for (int j = 0; j < tx.total(); ++j)
            {
                cplx acc = 0.0;
                for (int l = 0; l < 3; ++l)
                    acc += h[l] * element(rx, i % rx.n_cols, i / rx.n_cols, paths[l].aoa.phi, paths[l].aoa.theta) *
                           std::conj(element(tx, j % tx.n_cols, j / tx.n_cols, paths[l].aod.phi, paths[l].aod.theta));
                acc *= std::sqrt(8.0 / 3.0);
                CHECK(std::abs(H.entries(i, j) - acc) < 1e-12);
            }
    }
}

TEST_CASE("channel - Assembly is linear in the path coefficients")
{
    std::mt19937_64 rng(8);
    const ArrayGeometry tx{4, 2}, rx{2, 2};
    std::vector<Path> paths(4);
    for (auto &p : paths)
    {
        p.aod = fixtures::random_direction(rng);
        p.aoa = fixtures::random_direction(rng);
    }
    const auto a = fixtures::random_cvector(4, rng), b = fixtures::random_cvector(4, rng);
    const CVector s = a + 2.0 * b;
    auto H = [&](const CVector &c) {
        return assemble_channel(paths, std::span<const cplx>(c.data(), 4), tx, rx).entries;
    };
    CHECK((H(s) - H(a) - 2.0 * H(b)).norm() < 1e-12);
}

TEST_CASE("channel - Path form agrees with the matrix")
{
    std::mt19937_64 rng(9);
    const ArrayGeometry tx{8, 4}, rx{4, 2};
    std::vector<Path> paths(5);
    for (auto &p : paths)
    {
        p.aod = fixtures::random_direction(rng);
        p.aoa = fixtures::random_direction(rng);
    }
    const auto c = fixtures::random_cvector(5, rng);
    const std::span<const cplx> cs(c.data(), 5);
    const auto pc = PathChannel::from_paths(paths, cs, tx, rx, PhaseConvention::as_printed, 3);
    const auto H = assemble_channel(paths, cs, tx, rx, PhaseConvention::as_printed, 3);
    CHECK((pc.matrix().entries - H.entries).norm() < 1e-12);
    CHECK(pc.matrix().grid_id == 3);
    for (int k = 0; k < 10; ++k)
    {
        const auto f = fixtures::random_cvector(tx.total(), rng), w = fixtures::random_cvector(rx.total(), rng);
        CHECK(std::abs(probe(pc, w, f) - probe(H, w, f)) < 1e-10 * (1.0 + std::abs(probe(H, w, f))));
    }
}

TEST_CASE("channel - Mean channel energy")
{
    std::mt19937_64 geo(12);
    const ArrayGeometry tx{4, 4}, rx{2, 2};
    std::vector<Path> paths(3);
    for (auto &p : paths)
    {
        p.aod = fixtures::random_direction(geo);
        p.aoa = fixtures::random_direction(geo);
    }
    const double beta[3] = {1.0, 0.3, 0.05};
    const int n = 10000;
    Rng rng(13);
    double s = 0.0, ss = 0.0;
    for (int k = 0; k < n; ++k)
    {
        std::vector<cplx> h(3);
        for (int l = 0; l < 3; ++l)
            h[l] = sample_fading(beta[l], rng);
        const double e = assemble_channel(paths, std::span<const cplx>(h), tx, rx).entries.squaredNorm();
        s += e;
        ss += e * e;
    }
    const double mean = s / n, sd = std::sqrt((ss / n - mean * mean) / (n - 1));
    const double expect = 16.0 * 4.0 * (1.0 + 0.3 + 0.05) / 3.0;
    CHECK(std::abs(mean - expect) < 3.0 * sd);
}

TEST_CASE("channel - Text dump")
{
    ChannelMatrix H = zero_channel({2, 1}, {1, 1}, 7);
    H.entries(0, 1) = {0.5, -1.0};
    std::ostringstream os;
    write_channel_text(os, H);
    CHECK(os.str() == "# grid 7 rows 1 cols 2\n0,0 0.5,-1\n");
}
