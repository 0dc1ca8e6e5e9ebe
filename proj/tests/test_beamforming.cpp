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

#include <algorithm>
#include <cmath>

using namespace mmtrack;

namespace
{

Codebook random_codebook(const ArrayGeometry &g, int n, Side side, std::mt19937_64 &rng)
{
    Codebook cb;
    cb.side = side;
    cb.geometry = g;
    for (int k = 0; k < n; ++k)
        cb.beams.push_back({fixtures::random_cvector(g.total(), rng).normalized(), {}, side});
    return cb;
}

ChannelMatrix random_channel(const ArrayGeometry &tx, const ArrayGeometry &rx, std::mt19937_64 &rng)
{
    ChannelMatrix H = zero_channel(tx, rx);
    for (int j = 0; j < tx.total(); ++j)
        H.entries.col(j) = fixtures::random_cvector(rx.total(), rng);
    return H;
}

ChannelMatrix single_path(const ArrayGeometry &tx, const ArrayGeometry &rx, const Direction &aod,
                          const Direction &aoa, cplx h)
{
    Path p;
    p.aod = aod;
    p.aoa = aoa;
    const std::vector<Path> paths{p};
    const std::vector<cplx> c{h};
    return assemble_channel(paths, std::span<const cplx>(c), tx, rx);
}

} // namespace

TEST_CASE("beamforming - Codebook construction")
{
    const auto omni = build_codebook({1, 1}, Sector{});
    REQUIRE(omni.size() == 1);
    CHECK(std::abs(omni.beams[0].weights(0) - cplx(1.0, 0.0)) < 1e-15);

    const auto a = build_codebook({8, 8}, Sector{});
    const auto b = build_codebook({16, 8}, Sector{});
    const double ratio = double(b.size()) / a.size();
    CHECK(ratio > 1.6);
    CHECK(ratio < 2.4);
    for (const auto *cb : {&a, &b})
        for (const auto &beam : cb->beams)
            CHECK(std::abs(beam.weights.norm() - 1.0) < 1e-12);

    CHECK_THROWS_AS(build_codebook({0, 4}, Sector{}), ConfigError);
    CHECK_THROWS_AS(build_codebook({4, 4}, Sector{0.5, 0.1, 0.0, pi}), ConfigError);

    // A sector narrower than one beam still yields a codeword.
    CHECK(build_codebook({8, 8}, Sector{0.0, 0.01, 1.5, 1.51}).size() >= 1);
}

TEST_CASE("beamforming - Codebook covers its sector at half power")
{
    for (const ArrayGeometry g : {ArrayGeometry{8, 8}, ArrayGeometry{4, 4}, ArrayGeometry{4, 8}, ArrayGeometry{4, 2}})
    {
        const Sector s{};
        const auto cb = build_codebook(g, s);
        double worst = 1.0;
        const int n = 61;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
            {
                const Direction d{s.phi_min + (s.phi_max - s.phi_min) * i / (n - 1),
                                  s.theta_min + (s.theta_max - s.theta_min) * j / (n - 1)};
                const auto a = array_response(g, d);
                double best = 0.0;
                for (const auto &beam : cb.beams)
                    best = std::max(best, std::norm(a.dot(beam.weights)));
                worst = std::min(worst, best);
            }
        INFO(g.n_cols << "x" << g.n_rows << " with " << cb.size() << " beams");
        CHECK(worst >= 0.5);
    }
}

TEST_CASE("beamforming - Exhaustive selection")
{
    const ArrayGeometry tx{4, 2}, rx{2, 2};
    std::mt19937_64 rng(21);
    const auto F = random_codebook(tx, 8, Side::tx, rng);
    const auto W = random_codebook(rx, 4, Side::rx, rng);

    const auto zero = select_beams_exhaustive(zero_channel(tx, rx), F, W);
    CHECK(zero.tx_index == 0);
    CHECK(zero.rx_index == 0);
    CHECK(zero.objective == 0.0);

    for (int inst = 0; inst < 50; ++inst)
    {
        const auto H = random_channel(tx, rx, rng);
        const auto got = select_beams_exhaustive(H, F, W);
        std::size_t bi = 0, bj = 0;
        double best = -1.0;
        for (std::size_t i = 0; i < F.size(); ++i)
            for (std::size_t j = 0; j < W.size(); ++j)
            {
                cplx acc = 0.0;
                for (int r = 0; r < rx.total(); ++r)
                    for (int c = 0; c < tx.total(); ++c)
                        acc += std::conj(W.beams[j].weights(r)) * H.entries(r, c) * F.beams[i].weights(c);
                if (std::norm(acc) > best)
                {
                    best = std::norm(acc);
                    bi = i;
                    bj = j;
                }
            }
        CHECK(got.tx_index == bi);
        CHECK(got.rx_index == bj);
        CHECK(got.objective == Catch::Approx(best).epsilon(1e-12));
    }

    Codebook empty;
    empty.geometry = tx;
    CHECK_THROWS_AS(select_beams_exhaustive(zero_channel(tx, rx), empty, W), ConfigError);
    CHECK_THROWS_AS(select_beams_exhaustive(zero_channel(rx, rx), F, W), ConfigError);
}

TEST_CASE("beamforming - Single path aligned with codewords")
{
    const ArrayGeometry tx{8, 8}, rx{4, 4};
    const auto F = build_codebook(tx, Sector{}, Side::tx);
    const auto W = build_codebook(rx, Sector{}, Side::rx);
    std::mt19937_64 rng(5);
    std::uniform_int_distribution<std::size_t> fi(0, F.size() - 1), wi(0, W.size() - 1);
    for (int k = 0; k < 10; ++k)
    {
        const auto i = fi(rng), j = wi(rng);
        const cplx h(0.3, -1.2);
        const auto H = single_path(tx, rx, F.beams[i].pointing, W.beams[j].pointing, h);
        const auto got = select_beams_exhaustive(H, F, W);
        CHECK(got.tx_index == i);
        CHECK(got.rx_index == j);
        CHECK(got.objective == Catch::Approx(64.0 * 16.0 * std::norm(h)).epsilon(1e-9));
    }
}

TEST_CASE("beamforming - Matched beams beat the codebook on one path")
{
    const ArrayGeometry tx{8, 8}, rx{4, 4};
    const auto F = build_codebook(tx, Sector{}, Side::tx);
    const auto W = build_codebook(rx, Sector{}, Side::rx);
    std::mt19937_64 rng(6);
    for (int k = 0; k < 20; ++k)
    {
        const auto aod = fixtures::random_direction(rng), aoa = fixtures::random_direction(rng);
        const auto H = single_path(tx, rx, aod, aoa, 1.0);
        const double matched = beam_gain(H, array_response(tx, aod), array_response(rx, aoa));
        CHECK(matched == Catch::Approx(64.0 * 16.0).epsilon(1e-9));
        CHECK(matched >= select_beams_exhaustive(H, F, W).objective * (1.0 - 1e-12));
    }
}

TEST_CASE("beamforming - Skeleton-matched selection")
{
    const ArrayGeometry tx{4, 4}, rx{2, 2};
    PathSkeleton ps;
    ps.grid_id = 2;
    ps.paths = {{{0.1, 1.5}, {-0.3, 1.6}, 1e-9}, {{0.6, 1.4}, {0.9, 1.7}, 1e-11}, {{-0.7, 1.2}, {0.2, 1.3}, 1e-12}};

    const std::vector<double> single{5.0};
    PathSkeleton one;
    one.paths = {ps.paths[1]};
    const auto p1 = select_beams_skeleton(single, one, tx, rx);
    REQUIRE(p1);
    CHECK(p1->f.pointing == ps.paths[1].aod);
    CHECK(p1->w.pointing == ps.paths[1].aoa);
    CHECK((p1->f.weights - array_response(tx, ps.paths[1].aod)).norm() < 1e-15);

    const std::vector<double> tie{3.0, 3.0, 1.0};
    CHECK(select_beams_skeleton(tie, ps, tx, rx)->tx_index == 0);

    // Direct ray behind a brick wall: 28.3 dB below its clear-sky power.
    const double floor = db_to_linear(-140.0 - 30.0);
    const double los_clear = db_to_linear(-150.0);
    const std::vector<double> blocked{los_clear / db_to_linear(28.3), db_to_linear(-160.0), 0.0};
    REQUIRE(blocked[0] <= floor);
    const auto nlos = select_beams_skeleton(blocked, ps, tx, rx, floor);
    REQUIRE(nlos);
    CHECK(nlos->tx_index == 1);
    CHECK(nlos->f.pointing == ps.paths[1].aod);

    const std::vector<double> dark{0.0, floor, floor / 2.0};
    CHECK_FALSE(select_beams_skeleton(dark, ps, tx, rx, floor).has_value());
    CHECK_THROWS_AS(select_beams_skeleton(single, ps, tx, rx), DomainError);
}

TEST_CASE("beamforming - Link budget")
{
    const LinkBudget lb{30.0, -174.0, 100e6};
    CHECK(lb.noise_power_dbm() == Catch::Approx(-94.0));
    CHECK(linear_to_db(lb.sigma2()) == Catch::Approx(124.0).margin(1e-9));

    ChannelMatrix H = zero_channel({1, 1}, {1, 1});
    const CVector one = CVector::Ones(1);
    CHECK(snr(H, one, one, lb.sigma2()) == 0.0);
    H.entries(0, 0) = std::sqrt(db_to_linear(-114.0));
    CHECK(linear_to_db(snr(H, one, one, lb.sigma2())) == Catch::Approx(10.0).margin(1e-9));
    CHECK_THROWS_AS(snr(H, one, one, 0.0), DomainError);

    CHECK(rate(0.0, 100e6) == 0.0);
    CHECK(rate(10.0, 100e6) == Catch::Approx(1e8 * std::log2(11.0)).epsilon(1e-15));
    CHECK(rate(10.0, 100e6) / 1e6 == Catch::Approx(345.94).margin(0.01));
    CHECK_THROWS_AS(rate(-1.0, 100e6), DomainError);
    double prev = -1.0;
    for (double s : {0.0, 1e-6, 0.5, 1.0, 10.0, 1e6})
    {
        CHECK(rate(s, 1e8) > prev);
        prev = rate(s, 1e8);
    }

    std::vector<double> rates{0.2e9, 0.3e9};
    CHECK(trajectory_rate(rates) == Catch::Approx(0.5e9));
    std::vector<double> many{1.0, 7.0, 3.5, 0.25, 9.0};
    const double total = trajectory_rate(many);
    std::sort(many.begin(), many.end());
    CHECK(trajectory_rate(many) == total);
}

TEST_CASE("beamforming - Gain is invariant to global beam phases")
{
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> ang(0.0, 2.0 * pi);
    const ArrayGeometry tx{4, 4}, rx{4, 2};
    for (int k = 0; k < 50; ++k)
    {
        const auto H = random_channel(tx, rx, rng);
        const auto f = fixtures::random_cvector(tx.total(), rng), w = fixtures::random_cvector(rx.total(), rng);
        const double g0 = beam_gain(H, f, w);
        const CVector f2 = std::polar(1.0, ang(rng)) * f, w2 = std::polar(1.0, ang(rng)) * w;
        CHECK(std::abs(beam_gain(H, f2, w2) - g0) <= 1e-12 * g0);
    }
}
