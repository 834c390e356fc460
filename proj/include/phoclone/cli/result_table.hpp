#pragma once

#include <atomic>
#include <filesystem>
#include <functional>
#include <string>
#include <variant>
#include <vector>

#include "phoclone/cli/config.hpp"

namespace phoclone::cli {

using Cell = std::variant<double, std::string>;

struct ResultTable {
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;
    json results = json::object();   // command-specific summary for the sidecar
    json failures = json::array();   // one entry per failed or cancelled cell
};

struct OutputPaths {
    std::filesystem::path csv;
    std::filesystem::path json;
};

std::string format_number(double x);
std::string csv_escape(const std::string& s);

// Writes <command>-<hash>.csv and .json into config.output_dir. The CSV starts
// with two comment lines: the artifact version and the compact config JSON.
OutputPaths write_outputs(const ResultTable& table, const RunConfig& config, double wall_time_s);

// Recovers the RunConfig from the comment header of a CSV written above.
RunConfig read_config_header(const std::filesystem::path& csv);

// Set from a signal handler to stop dispatching further sweep cells.
std::atomic<bool>& cancel_flag();

struct CellStatus {
    bool ok = false;
    std::string error;
};

// Runs fn(i) for i in [0, n) on up to `threads` workers. Each call's outcome
// lands at index i, so aggregation order is independent of scheduling.
std::vector<CellStatus> parallel_for(std::size_t n, int threads,
                                     const std::function<void(std::size_t)>& fn);

} // namespace phoclone::cli
