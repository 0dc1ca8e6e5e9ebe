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

#ifndef MMTRACK_MMTRACK_HPP
#define MMTRACK_MMTRACK_HPP

#include "beamforming.hpp"
#include "channel.hpp"
#include "common.hpp"
#include "harness.hpp"
#include "localization.hpp"
#include "optimize.hpp"
#include "path.hpp"
#include "rng.hpp"
#include "scenario.hpp"
#include "scenario_io.hpp"
#include "skeleton.hpp"
#include "trajectory.hpp"

#endif // MMTRACK_MMTRACK_HPP
