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

using namespace mmtrack;

TEST_CASE("scenario - Grid count")
{
    CHECK(build_scenario(fixtures::free_space(150.0)).grid_count() == 50);
    CHECK(build_scenario(fixtures::free_space(3.0)).grid_count() == 1);

    const auto sc = build_scenario(fixtures::free_space(10.0));
    REQUIRE(sc.grid_count() == 4);
    CHECK(sc.grids[3].s_begin == Catch::Approx(9.0));
    CHECK(sc.grids[3].s_end == Catch::Approx(10.0));
    CHECK(sc.grids[3].center.x() == Catch::Approx(9.5));
    for (int i = 0; i < 3; ++i)
        CHECK(sc.grids[i].s_end - sc.grids[i].s_begin == Catch::Approx(3.0));
}

TEST_CASE("scenario - Grid cells follow a bent trajectory")
{
    auto c = fixtures::free_space();
    c.trajectory = {{0.0, 0.0}, {6.0, 0.0}, {6.0, 6.0}};
    const auto sc = build_scenario(c);
    REQUIRE(sc.grid_count() == 4);
    CHECK(sc.grids[1].center.isApprox(Vec2(4.5, 0.0)));
    CHECK(sc.grids[2].center.isApprox(Vec2(6.0, 1.5)));
    CHECK(sc.grids[2].heading == Catch::Approx(pi / 2.0));
    CHECK(sc.grid_of_arc(7.0) == 2);
    CHECK(sc.grid_of_arc(-1.0) == 0);
    CHECK(sc.grid_of_arc(100.0) == 3);
}

TEST_CASE("scenario - Malformed configuration names the field")
{
    auto field_of = [](ScenarioConfig c) {
        try
        {
            build_scenario(c);
        }
        catch (const ConfigError &e)
        {
            return e.field();
        }
        return std::string("<none>");
    };
    auto c = fixtures::free_space();
    c.trajectory.clear();
    CHECK(field_of(c) == "trajectory");
    c = fixtures::free_space();
    c.trajectory = {{1.0, 1.0}, {1.0, 1.0}};
    CHECK(field_of(c) == "trajectory");
    c = fixtures::free_space();
    c.grid_size = -3.0;
    CHECK(field_of(c) == "grid_size");
    c = fixtures::free_space();
    c.buildings.push_back({{0.0, 10.0}, {-5.0, 20.0}, 10.0, "brick"});
    CHECK(field_of(c) == "buildings[0]");
    c = fixtures::free_space();
    c.buildings.push_back({{0.0, 10.0}, {5.0, 20.0}, 10.0, "adamantium"});
    CHECK(field_of(c) == "materials");
    c = fixtures::free_space();
    c.bs_boresight_deg.reset();
    CHECK(field_of(c) == "bs.position");
    c = fixtures::free_space();
    c.blocker_density = 0.01;
    CHECK(field_of(c) == "street_region");
}

namespace
{

ScenarioConfig street_100x20(double density)
{
    auto c = fixtures::free_space(100.0);
    c.blocker_density = density;
    c.street_region = {{0.0, -10.0}, {100.0, -10.0}, {100.0, 10.0}, {0.0, 10.0}};
    c.blocker_specs = {{"pedestrian", 0.5, 0.5, 1.5, 0.6, {"brick", "glass"}},
                       {"vehicle", 4.0, 1.8, 1.0, 0.2, {"brick", "glass"}},
                       {"truck", 4.0, 1.8, 3.0, 0.2, {"brick", "glass"}}};
    return c;
}

} // namespace

TEST_CASE("scenario - Obstacle count is Poisson with mean density times area")
{
    const auto sc = build_scenario(street_100x20(9e-3));
    CHECK(sc.street_area() == Catch::Approx(2000.0));
    const int seeds = 1000;
    double sum = 0.0;
    for (int s = 0; s < seeds; ++s)
        sum += sample_obstacles(sc, s).blockers.size();
    const double lambda = 18.0;
    CHECK(std::abs(sum / seeds - lambda) < 3.0 * std::sqrt(lambda / seeds));
}

TEST_CASE("scenario - Obstacles stay inside the street and are reproducible")
{
    const auto sc = build_scenario(street_100x20(9e-3));
    CHECK(sample_obstacles(build_scenario(street_100x20(0.0)), 42).blockers.empty());

    const auto a = sample_obstacles(sc, 42);
    const auto b = sample_obstacles(sc, 42);
    REQUIRE(a.blockers.size() == b.blockers.size());
    for (std::size_t k = 0; k < a.blockers.size(); ++k)
    {
        CHECK(a.blockers[k].position == b.blockers[k].position);
        CHECK(a.blockers[k].loss_db == b.blockers[k].loss_db);
        CHECK(a.blockers[k].spec_index == b.blockers[k].spec_index);
    }
    for (int s = 0; s < 50; ++s)
        for (const auto &blk : sample_obstacles(sc, s).blockers)
        {
            CHECK(point_in_polygon(blk.position.head<2>(), sc.config.street_region));
            CHECK((blk.loss_db == 28.3 || blk.loss_db == 3.9));
        }
}

TEST_CASE("scenario - Free space gives one line-of-sight path")
{
    const auto sc = build_scenario(fixtures::free_space());
    const Vec3 rx(40.0, 0.0, 1.4);
    const auto paths = trace_paths(sc, {}, rx, 8);
    REQUIRE(paths.size() == 1);
    CHECK(paths[0].is_los);
    CHECK(paths[0].reflection_count == 0);
    CHECK(paths[0].length == Catch::Approx((rx - sc.bs_position).norm()).epsilon(1e-12));
    CHECK(paths[0].penetration_loss_db == 0.0);
}

namespace
{

// BS at the origin facing +x, a glass-fronted block at y in [10, 20] and a
// brick wall across the direct ray.
ScenarioConfig walled_street(bool with_wall)
{
    ScenarioConfig c;
    c.trajectory = {{40.0, 0.0}, {60.0, 0.0}};
    c.bs_xy = {0.0, 0.0};
    c.bs_height = 6.0;
    c.bs_boresight_deg = 0.0;
    c.buildings.push_back({{-10.0, 10.0}, {80.0, 20.0}, 20.0, "glass"});
    if (with_wall)
        c.buildings.push_back({{20.0, -1.0}, {22.0, 1.0}, 10.0, "brick"});
    return c;
}

} // namespace

TEST_CASE("scenario - Brick wall on the direct ray")
{
    const Vec3 rx(50.0, 0.0, 1.4);
    const auto open = trace_all(build_scenario(walled_street(false)), {}, rx, 0.0);
    const auto walled = trace_all(build_scenario(walled_street(true)), {}, rx, 0.0);
    auto los_of = [](const std::vector<TracedPath> &v) {
        for (const auto &t : v)
            if (t.path.is_los)
                return t;
        FAIL("no direct ray");
        return TracedPath{};
    };
    CHECK(los_of(walled).path.penetration_loss_db == Catch::Approx(28.3));
    CHECK(los_of(open).beta_db - los_of(walled).beta_db == Catch::Approx(28.3));

    bool reflected = false;
    for (const auto &t : walled)
        if (t.path.reflection_count == 1 && t.path.penetration_loss_db == 0.0)
            reflected = true;
    CHECK(reflected);
}

TEST_CASE("scenario - Reflection angles match the image source")
{
    // BS and user at the same height, mirror plane y = 5.
    ScenarioConfig c;
    c.trajectory = {{0.0, -5.0}, {10.0, -5.0}};
    c.bs_xy = {0.0, 0.0};
    c.bs_height = 6.0;
    c.bs_boresight_deg = 0.0;
    c.buildings.push_back({{-10.0, 5.0}, {60.0, 15.0}, 20.0, "brick"});
    const auto sc = build_scenario(c);
    const double L = 40.0;
    const Vec3 rx(L, 0.0, 6.0);
    const auto paths = trace_paths(sc, {}, rx, 8, 0.1, 0.0);
    const Path *refl = nullptr;
    for (const auto &p : paths)
        if (p.reflection_count == 1)
            refl = &p;
    REQUIRE(refl != nullptr);
    // Image at (0, 10); the ray hits the wall at (L/2, 5).
    CHECK(refl->length == Catch::Approx(std::hypot(L, 10.0)));
    CHECK(std::abs(rad_to_deg(refl->aod.phi) - rad_to_deg(std::atan2(5.0, L / 2.0))) <= 0.1);
    CHECK(std::abs(rad_to_deg(refl->aoa.phi) - rad_to_deg(std::atan2(5.0, -L / 2.0))) <= 0.1);
    CHECK(std::abs(rad_to_deg(refl->aod.theta) - 90.0) <= 0.1);
    CHECK(std::abs(rad_to_deg(refl->aoa.theta) - 90.0) <= 0.1);
}

TEST_CASE("scenario - Traced paths are sorted, capped and deterministic")
{
    const auto sc = build_scenario(load_scenario_config(fixtures::data_path("default_scenario.json")));
    const auto obs = sample_obstacles(sc, 5);
    const auto &pl = sc.config.radio.path_loss;
    for (int g = 0; g < sc.grid_count(); g += 7)
    {
        const auto rx = sc.ue_position(g);
        const auto a = trace_paths(sc, obs, rx, 4, 0.1, sc.grids[g].heading);
        const auto b = trace_paths(sc, obs, rx, 4, 0.1, sc.grids[g].heading);
        REQUIRE(a.size() == b.size());
        CHECK(a.size() <= 4);
        for (std::size_t k = 0; k < a.size(); ++k)
        {
            CHECK(a[k].aod == b[k].aod);
            CHECK(a[k].length == b[k].length);
            if (k > 0)
                CHECK(large_scale_gain_db(a[k - 1], pl.frequency_hz, pl.los_exponent, pl.nlos_exponent) >=
                      large_scale_gain_db(a[k], pl.frequency_hz, pl.los_exponent, pl.nlos_exponent));
        }
    }
}

TEST_CASE("scenario - Blockers never add power")
{
    const auto sc = build_scenario(load_scenario_config(fixtures::data_path("default_scenario.json")));
    for (int s = 0; s < 20; ++s)
    {
        const auto obs = sample_obstacles(sc, s);
        for (int g = 0; g < sc.grid_count(); g += 5)
        {
            const auto clear = trace_all(sc, {}, sc.ue_position(g), sc.grids[g].heading);
            const auto blocked = trace_all(sc, obs, sc.ue_position(g), sc.grids[g].heading);
            REQUIRE(clear.size() == blocked.size());
            for (std::size_t k = 0; k < clear.size(); ++k)
                CHECK(blocked[k].beta_db <= clear[k].beta_db);
        }
    }
}

TEST_CASE("scenario - Everything below the power floor is an outage")
{
    auto c = fixtures::free_space();
    c.radio.power_floor_dbm = 100.0;
    const auto sc = build_scenario(c);
    CHECK(trace_paths(sc, {}, {40.0, 0.0, 1.4}, 8).empty());
    CHECK_THROWS_AS(trace_paths(sc, {}, {40.0, 0.0, 1.4}, 0), DomainError);
}

TEST_CASE("scenario - JSON round trip")
{
    const auto cfg = load_scenario_config(fixtures::data_path("default_scenario.json"));
    const auto again = scenario_from_json(scenario_to_json(cfg));
    const auto a = build_scenario(cfg), b = build_scenario(again);
    CHECK(a.grid_count() == 50);
    CHECK(a.grid_count() == b.grid_count());
    CHECK(a.bs_position == b.bs_position);
    CHECK(a.bs_yaw == b.bs_yaw);
    CHECK(again.buildings.size() == cfg.buildings.size());

    auto j = scenario_to_json(cfg);
    j["bulidings"] = nlohmann::json::array();
    CHECK_THROWS_AS(scenario_from_json(j), ConfigError);
}
