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

#ifndef MMTRACK_TEST_FIXTURES_HPP
#define MMTRACK_TEST_FIXTURES_HPP

#include "mmtrack/mmtrack.hpp"

#include <random>
#include <string>

namespace fixtures
{

inline std::string data_path(const std::string &name) { return std::string(MMTRACK_DATA_DIR) + "/" + name; }

// Open street along +x with a free-standing mast; no buildings, no blockers.
inline mmtrack::ScenarioConfig free_space(double length = 150.0, double grid = 3.0)
{
    mmtrack::ScenarioConfig c;
    c.trajectory = {{0.0, 0.0}, {length, 0.0}};
    c.grid_size = grid;
    c.bs_xy = {length / 2.0, -20.0};
    c.bs_boresight_deg = 90.0;
    return c;
}

// Shipped map with the walk cut to its first 60 m (20 grids).
inline mmtrack::Scenario desk_scenario()
{
    auto c = mmtrack::load_scenario_config(data_path("default_scenario.json"));
    c.trajectory = {{25.0, 25.0}, {85.0, 25.0}};
    return mmtrack::build_scenario(c);
}

inline mmtrack::CVector random_cvector(int n, std::mt19937_64 &rng)
{
    std::normal_distribution<double> g(0.0, 1.0);
    mmtrack::CVector v(n);
    for (int k = 0; k < n; ++k)
        v(k) = {g(rng), g(rng)};
    return v;
}

inline mmtrack::Direction random_direction(std::mt19937_64 &rng)
{
    std::uniform_real_distribution<double> phi(-mmtrack::pi / 2.0, mmtrack::pi / 2.0), theta(0.2, mmtrack::pi - 0.2);
    return {phi(rng), theta(rng)};
}

} // namespace fixtures

#endif // MMTRACK_TEST_FIXTURES_HPP
