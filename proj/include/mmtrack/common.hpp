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

#ifndef MMTRACK_COMMON_HPP
#define MMTRACK_COMMON_HPP

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>

namespace mmtrack
{

using cplx = std::complex<double>;
using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;

inline constexpr const char *version = "0.1.0";

inline constexpr double pi = std::numbers::pi;
inline constexpr double speed_of_light = 3.0e8;

// Malformed or inconsistent configuration. `field()` names the offending key.
class ConfigError : public std::invalid_argument
{
public:
    ConfigError(std::string field, const std::string &what)
        : std::invalid_argument(field + ": " + what), field_(std::move(field))
    {
    }
    const std::string &field() const noexcept { return field_; }

private:
    std::string field_;
};

// Input outside the mathematical domain of an operation.
class DomainError : public std::domain_error
{
public:
    using std::domain_error::domain_error;
};

// Unknown key in a lookup table (e.g. a grid ID with no stored skeleton).
class LookupError : public std::out_of_range
{
public:
    using std::out_of_range::out_of_range;
};

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double lin) { return 10.0 * std::log10(lin); }
inline double dbm_to_watt(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }
inline double watt_to_dbm(double w) { return 10.0 * std::log10(w) + 30.0; }
inline double deg_to_rad(double deg) { return deg * pi / 180.0; }
inline double rad_to_deg(double rad) { return rad * 180.0 / pi; }

// Wraps an angle into [-pi, pi).
inline double wrap_angle(double a)
{
    double w = std::fmod(a + pi, 2.0 * pi);
    if (w < 0.0)
        w += 2.0 * pi;
    return w - pi;
}

} // namespace mmtrack

#endif // MMTRACK_COMMON_HPP
