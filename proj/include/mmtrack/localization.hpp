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

#ifndef MMTRACK_LOCALIZATION_HPP
#define MMTRACK_LOCALIZATION_HPP

#include "common.hpp"
#include "rng.hpp"
#include "scenario.hpp"

#include <random>

namespace mmtrack
{

// Bounded horizontal localization error: uniform over the disk of radius r.
struct ErrorModel
{
    double radius = 0.0; // meters
};

// Uniform point in the closed unit disk, by rejection from [-1, 1]^2.
inline Vec2 sample_unit_disk(Rng &rng)
{
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (;;)
    {
        const Vec2 p(u(rng), u(rng));
        if (p.squaredNorm() <= 1.0)
            return p;
    }
}

// Scaling a unit-disk draw keeps the law uniform on E(r) and couples draws
// across radii: the same stream gives errors along the same direction.
inline Vec2 sample_error(const ErrorModel &model, Rng &rng)
{
    if (model.radius < 0.0)
        throw DomainError("sample_error: negative radius");
    return model.radius * sample_unit_disk(rng);
}

struct PerceivedGrid
{
    int grid_id = 0;
    bool out_of_trajectory = false; // estimate projected past an end of the trajectory
};

// Snaps an estimated position to a grid ID via its closest trajectory point.
inline PerceivedGrid perceived_grid_at(const Scenario &sc, const Vec2 &estimate)
{
    const auto proj = project_onto_trajectory(sc, estimate);
    return {sc.grid_of_arc(proj.s), proj.beyond_ends};
}

inline PerceivedGrid perceived_grid(const Vec2 &true_position, const ErrorModel &model, const Scenario &sc, Rng &rng)
{
    return perceived_grid_at(sc, true_position + sample_error(model, rng));
}

} // namespace mmtrack

#endif // MMTRACK_LOCALIZATION_HPP
