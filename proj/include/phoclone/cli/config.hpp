#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "phoclone/model.hpp"

namespace phoclone::cli {

using json = nlohmann::json;

struct SweepAxis {
    std::string axis;
    double min = 0.0;
    double max = 0.0;
    int points = 1;
    bool log = false;

    std::vector<double> values() const;
    bool operator==(const SweepAxis&) const = default;
};

struct RunConfig {
    std::string command;
    SystemParams system;
    std::vector<SweepAxis> sweeps;
    json protocol = json::object();
    json options = json::object();
    std::string output_dir = "out";
    Tolerance tol;
    std::uint64_t seed = 1;

    const SweepAxis* sweep(const std::string& axis) const;
    json to_json() const;
    bool operator==(const RunConfig& o) const;
};

const std::vector<std::string>& command_names();

// Validates `doc` against the command's schema, fills every default and
// returns the fully specified config. Throws Error(config) on violations.
RunConfig parse_run_config(const json& doc, const std::string& command);

// Canonical hash of the config (FNV-1a 64 of the compact dump).
std::string config_hash(const RunConfig& c);

} // namespace phoclone::cli
