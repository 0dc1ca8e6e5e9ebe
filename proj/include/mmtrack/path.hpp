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

#ifndef MMTRACK_PATH_HPP
#define MMTRACK_PATH_HPP

#include "common.hpp"

#include <algorithm>
#include <vector>

namespace mmtrack
{

// Array-local direction. `phi` is the horizontal angle measured from the
// array boresight in [-pi, pi); `theta` is the zenith angle in [0, pi].
struct Direction
{
    double phi = 0.0;
    double theta = pi / 2.0;

    bool operator==(const Direction &) const = default;
};

inline bool is_valid(const Direction &d)
{
    return d.phi >= -pi && d.phi < pi && d.theta >= 0.0 && d.theta <= pi;
}

// Converts a world-frame unit vector into array-local angles for an array
// whose boresight points at horizontal heading `yaw` (radians from +x).
inline Direction to_local(const Vec3 &dir_world, double yaw)
{
    const Vec3 d = dir_world.normalized();
    const double c = std::cos(yaw), s = std::sin(yaw);
    const double lx = c * d.x() + s * d.y();
    const double ly = -s * d.x() + c * d.y();
    Direction out;
    out.theta = std::acos(std::clamp(d.z(), -1.0, 1.0));
    out.phi = (lx == 0.0 && ly == 0.0) ? 0.0 : wrap_angle(std::atan2(ly, lx));
    return out;
}

// Inverse of to_local.
inline Vec3 to_world(const Direction &dir, double yaw)
{
    const double a = dir.phi + yaw;
    return {std::sin(dir.theta) * std::cos(a), std::sin(dir.theta) * std::sin(a), std::cos(dir.theta)};
}

// Rounds both angles to the nearest multiple of `step` radians.
inline Direction quantize(const Direction &d, double step)
{
    if (step <= 0.0)
        return d;
    Direction q;
    q.phi = wrap_angle(std::round(d.phi / step) * step);
    q.theta = std::clamp(std::round(d.theta / step) * step, 0.0, pi);
    return q;
}

// One propagation path between the BS (Tx) and the user (Rx).
struct Path
{
    Direction aod;                    // at the Tx array
    Direction aoa;                    // at the Rx array, pointing back towards the arriving wave
    double length = 0.0;              // meters, unfolded
    bool is_los = false;              // direct ray (possibly through obstacles)
    double penetration_loss_db = 0.0; // sum over intersected obstacles
    int reflection_count = 0;         // 0 or 1
};

// One entry of a path skeleton: the directions of a stored path and its
// large-scale gain (linear).
struct SkeletonPath
{
    Direction aod;
    Direction aoa;
    double beta = 0.0;
};

// The L strongest paths known for one grid ID, strongest first.
struct PathSkeleton
{
    int grid_id = -1;
    std::vector<SkeletonPath> paths;

    std::size_t size() const { return paths.size(); }
    bool empty() const { return paths.empty(); }
};

} // namespace mmtrack

#endif // MMTRACK_PATH_HPP
