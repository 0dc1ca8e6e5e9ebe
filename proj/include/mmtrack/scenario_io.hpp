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

#ifndef MMTRACK_SCENARIO_IO_HPP
#define MMTRACK_SCENARIO_IO_HPP

#include "scenario.hpp"

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <set>
#include <string>

namespace mmtrack
{

namespace json_detail
{

using nlohmann::json;

inline std::string join(const std::string &prefix, const std::string &key)
{
    return prefix.empty() ? key : prefix + "." + key;
}

// Rejects keys outside `allowed` so that typos do not silently fall back to
// defaults.
inline void check_keys(const json &j, const std::string &where, std::initializer_list<const char *> allowed)
{
    if (!j.is_object())
        throw ConfigError(where.empty() ? "<root>" : where, "expected an object");
    std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto &[k, v] : j.items())
        if (!ok.count(k))
            throw ConfigError(join(where, k), "unknown key");
}

template <class T> T get(const json &j, const std::string &key, const std::string &field)
{
    try
    {
        return j.at(key).get<T>();
    }
    catch (const json::exception &e)
    {
        throw ConfigError(field, e.what());
    }
}

template <class T> void get_if(const json &j, const std::string &key, const std::string &field, T &out)
{
    if (j.contains(key))
        out = get<T>(j, key, field);
}

inline Vec2 get_xy(const json &j, const std::string &field)
{
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
        throw ConfigError(field, "expected [x, y]");
    return {j[0].get<double>(), j[1].get<double>()};
}

inline std::vector<Vec2> get_polyline(const json &j, const std::string &field)
{
    if (!j.is_array())
        throw ConfigError(field, "expected a list of [x, y] points");
    std::vector<Vec2> out;
    for (std::size_t k = 0; k < j.size(); ++k)
        out.push_back(get_xy(j[k], field + "[" + std::to_string(k) + "]"));
    return out;
}

inline json xy_json(const Vec2 &p) { return json::array({p.x(), p.y()}); }

} // namespace json_detail

inline ScenarioConfig scenario_from_json(const nlohmann::json &j)
{
    using namespace json_detail;
    check_keys(j, "", {"name", "radio", "materials", "buildings", "bs", "trajectory", "blockers"});
    ScenarioConfig c;
    get_if(j, "name", "name", c.name);

    if (j.contains("radio"))
    {
        const auto &r = j["radio"];
        check_keys(r, "radio",
                   {"frequency_hz", "los_exponent", "nlos_exponent", "tx_power_dbm", "noise_psd_dbm_hz",
                    "bandwidth_hz", "power_floor_dbm", "angular_resolution_deg"});
        get_if(r, "frequency_hz", "radio.frequency_hz", c.radio.path_loss.frequency_hz);
        get_if(r, "los_exponent", "radio.los_exponent", c.radio.path_loss.los_exponent);
        get_if(r, "nlos_exponent", "radio.nlos_exponent", c.radio.path_loss.nlos_exponent);
        get_if(r, "tx_power_dbm", "radio.tx_power_dbm", c.radio.tx_power_dbm);
        get_if(r, "noise_psd_dbm_hz", "radio.noise_psd_dbm_hz", c.radio.noise_psd_dbm_hz);
        get_if(r, "bandwidth_hz", "radio.bandwidth_hz", c.radio.bandwidth_hz);
        get_if(r, "power_floor_dbm", "radio.power_floor_dbm", c.radio.power_floor_dbm);
        get_if(r, "angular_resolution_deg", "radio.angular_resolution_deg", c.radio.angular_resolution_deg);
    }

    if (j.contains("materials"))
    {
        if (!j["materials"].is_object())
            throw ConfigError("materials", "expected {name: loss_db}");
        for (const auto &[k, v] : j["materials"].items())
        {
            if (!v.is_number())
                throw ConfigError("materials." + k, "expected a number (dB)");
            c.materials[k] = v.get<double>();
        }
    }

    if (j.contains("buildings"))
    {
        if (!j["buildings"].is_array())
            throw ConfigError("buildings", "expected a list");
        for (std::size_t k = 0; k < j["buildings"].size(); ++k)
        {
            const auto &b = j["buildings"][k];
            const std::string f = "buildings[" + std::to_string(k) + "]";
            check_keys(b, f, {"min", "max", "height", "material"});
            Building bl;
            if (!b.contains("min") || !b.contains("max") || !b.contains("height"))
                throw ConfigError(f, "needs min, max and height");
            bl.min = get_xy(b["min"], f + ".min");
            bl.max = get_xy(b["max"], f + ".max");
            bl.height = get<double>(b, "height", f + ".height");
            get_if(b, "material", f + ".material", bl.material);
            if (!(bl.max.x() > bl.min.x() && bl.max.y() > bl.min.y() && bl.height > 0.0))
                throw ConfigError(f, "degenerate footprint or height");
            c.buildings.push_back(bl);
        }
    }

    if (!j.contains("bs"))
        throw ConfigError("bs", "missing base-station pose");
    {
        const auto &b = j["bs"];
        check_keys(b, "bs", {"position", "height", "boresight_deg"});
        if (!b.contains("position"))
            throw ConfigError("bs.position", "missing");
        c.bs_xy = get_xy(b["position"], "bs.position");
        get_if(b, "height", "bs.height", c.bs_height);
        if (b.contains("boresight_deg"))
            c.bs_boresight_deg = get<double>(b, "boresight_deg", "bs.boresight_deg");
    }

    if (!j.contains("trajectory"))
        throw ConfigError("trajectory", "missing");
    {
        const auto &t = j["trajectory"];
        check_keys(t, "trajectory", {"points", "grid_size", "speed_kmh", "ue_height"});
        if (!t.contains("points"))
            throw ConfigError("trajectory.points", "missing");
        c.trajectory = get_polyline(t["points"], "trajectory.points");
        get_if(t, "grid_size", "trajectory.grid_size", c.grid_size);
        get_if(t, "speed_kmh", "trajectory.speed_kmh", c.speed_kmh);
        get_if(t, "ue_height", "trajectory.ue_height", c.ue_height);
    }

    if (j.contains("blockers"))
    {
        const auto &b = j["blockers"];
        check_keys(b, "blockers", {"density", "street_region", "types"});
        get_if(b, "density", "blockers.density", c.blocker_density);
        if (b.contains("street_region"))
            c.street_region = get_polyline(b["street_region"], "blockers.street_region");
        if (b.contains("types"))
        {
            if (!b["types"].is_array())
                throw ConfigError("blockers.types", "expected a list");
            for (std::size_t k = 0; k < b["types"].size(); ++k)
            {
                const auto &s = b["types"][k];
                const std::string f = "blockers.types[" + std::to_string(k) + "]";
                check_keys(s, f, {"name", "width", "depth", "height", "weight", "materials"});
                BlockerSpec spec;
                get_if(s, "name", f + ".name", spec.name);
                get_if(s, "width", f + ".width", spec.width);
                get_if(s, "depth", f + ".depth", spec.depth);
                get_if(s, "height", f + ".height", spec.height);
                get_if(s, "weight", f + ".weight", spec.weight);
                get_if(s, "materials", f + ".materials", spec.materials);
                for (const auto &m : spec.materials)
                    if (!c.materials.count(m))
                        throw ConfigError(f + ".materials", "unknown material '" + m + "'");
                c.blocker_specs.push_back(spec);
            }
        }
    }
    for (const auto &b : c.buildings)
        if (!c.materials.count(b.material))
            throw ConfigError("buildings.material", "unknown material '" + b.material + "'");
    return c;
}

inline nlohmann::json scenario_to_json(const ScenarioConfig &c)
{
    using namespace json_detail;
    json j;
    j["name"] = c.name;
    j["radio"] = {{"frequency_hz", c.radio.path_loss.frequency_hz},
                  {"los_exponent", c.radio.path_loss.los_exponent},
                  {"nlos_exponent", c.radio.path_loss.nlos_exponent},
                  {"tx_power_dbm", c.radio.tx_power_dbm},
                  {"noise_psd_dbm_hz", c.radio.noise_psd_dbm_hz},
                  {"bandwidth_hz", c.radio.bandwidth_hz},
                  {"power_floor_dbm", c.radio.power_floor_dbm},
                  {"angular_resolution_deg", c.radio.angular_resolution_deg}};
    j["materials"] = c.materials;
    j["buildings"] = json::array();
    for (const auto &b : c.buildings)
        j["buildings"].push_back(
            {{"min", xy_json(b.min)}, {"max", xy_json(b.max)}, {"height", b.height}, {"material", b.material}});
    j["bs"] = {{"position", xy_json(c.bs_xy)}, {"height", c.bs_height}};
    if (c.bs_boresight_deg)
        j["bs"]["boresight_deg"] = *c.bs_boresight_deg;
    json pts = json::array();
    for (const auto &p : c.trajectory)
        pts.push_back(xy_json(p));
    j["trajectory"] = {
        {"points", pts}, {"grid_size", c.grid_size}, {"speed_kmh", c.speed_kmh}, {"ue_height", c.ue_height}};
    json region = json::array();
    for (const auto &p : c.street_region)
        region.push_back(xy_json(p));
    json types = json::array();
    for (const auto &s : c.blocker_specs)
        types.push_back({{"name", s.name},
                         {"width", s.width},
                         {"depth", s.depth},
                         {"height", s.height},
                         {"weight", s.weight},
                         {"materials", s.materials}});
    j["blockers"] = {{"density", c.blocker_density}, {"street_region", region}, {"types", types}};
    return j;
}

inline nlohmann::json read_json_file(const std::filesystem::path &p, const std::string &field)
{
    std::ifstream in(p);
    if (!in)
        throw ConfigError(field, "cannot open '" + p.string() + "'");
    try
    {
        return nlohmann::json::parse(in);
    }
    catch (const nlohmann::json::parse_error &e)
    {
        throw ConfigError(field, "'" + p.string() + "': " + e.what());
    }
}

inline ScenarioConfig load_scenario_config(const std::filesystem::path &p)
{
    return scenario_from_json(read_json_file(p, "scenario"));
}

} // namespace mmtrack

#endif // MMTRACK_SCENARIO_IO_HPP
