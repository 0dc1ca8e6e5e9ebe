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

#ifndef MMTRACK_RNG_HPP
#define MMTRACK_RNG_HPP

#include <cstdint>
#include <initializer_list>
#include <random>

namespace mmtrack
{

using Rng = std::mt19937_64;

// Random stream purposes. Every draw in a trial comes from a stream keyed by
// (master seed, trial, purpose, index), so two runs that differ only in T_D,
// r or the controller see identical obstacles, fading and error directions.
enum class Stream : std::uint64_t
{
    obstacles = 1,
    fading = 2,
    localization = 3,
    misc = 4,
};

inline std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> tags)
{
    std::uint64_t s = splitmix64(master);
    for (auto t : tags)
        s = splitmix64(s ^ splitmix64(t + 0x632BE59BD9B4E019ULL));
    return s;
}

inline Rng make_stream(std::uint64_t master, std::uint64_t trial, Stream purpose, std::uint64_t index = 0)
{
    return Rng(derive_seed(master, {trial, static_cast<std::uint64_t>(purpose), index}));
}

} // namespace mmtrack

#endif // MMTRACK_RNG_HPP
