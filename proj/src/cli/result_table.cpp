#include "phoclone/cli/result_table.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <mutex>
#include <thread>

#include "phoclone/errors.hpp"

namespace phoclone::cli {

std::string format_number(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[64];
    auto r = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, r.ptr);
}

std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

OutputPaths write_outputs(const ResultTable& table, const RunConfig& config, double wall_time_s) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(config.output_dir, ec);
    if (ec) throw Error(ErrorKind::io, "cannot create output directory '" + config.output_dir + "': " + ec.message());
    const std::string stem = config.command + "-" + config_hash(config);
    OutputPaths p{fs::path(config.output_dir) / (stem + ".csv"), fs::path(config.output_dir) / (stem + ".json")};

    std::ofstream csv(p.csv, std::ios::binary);
    if (!csv) throw Error(ErrorKind::io, "cannot write " + p.csv.string());
    csv << "# phoclone " << PHOCLONE_VERSION << "\r\n";
    csv << "# config=" << config.to_json().dump() << "\r\n";
    for (std::size_t i = 0; i < table.columns.size(); ++i)
        csv << (i ? "," : "") << csv_escape(table.columns[i]);
    csv << "\r\n";
    for (const auto& row : table.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) csv << ',';
            if (const double* d = std::get_if<double>(&row[i])) csv << format_number(*d);
            else csv << csv_escape(std::get<std::string>(row[i]));
        }
        csv << "\r\n";
    }
    if (!csv) throw Error(ErrorKind::io, "write failed for " + p.csv.string());

    json meta = {{"artifact", "phoclone"},
                 {"version", PHOCLONE_VERSION},
                 {"command", config.command},
                 {"config_hash", config_hash(config)},
                 {"config", config.to_json()},
                 {"seed", config.seed},
                 {"wall_time_s", wall_time_s},
                 {"units", {{"energy", "omega_m"}, {"time", "1/omega_m"}, {"omega_m_hz", SystemParams::omega_m_hz}}},
                 {"csv", p.csv.filename().string()},
                 {"columns", table.columns},
                 {"row_count", table.rows.size()},
                 {"failures", table.failures},
                 {"results", table.results}};
    std::ofstream js(p.json, std::ios::binary);
    if (!js) throw Error(ErrorKind::io, "cannot write " + p.json.string());
    js << meta.dump(2) << "\n";
    return p;
}

RunConfig read_config_header(const std::filesystem::path& csv) {
    std::ifstream in(csv, std::ios::binary);
    if (!in) throw Error(ErrorKind::io, "cannot read " + csv.string());
    std::string line;
    const std::string key = "# config=";
    while (std::getline(in, line) && line.rfind("#", 0) == 0) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.rfind(key, 0) == 0) {
            const json doc = json::parse(line.substr(key.size()));
            return parse_run_config(doc, doc.at("command").get<std::string>());
        }
    }
    throw Error(ErrorKind::io, "no config header in " + csv.string());
}

std::atomic<bool>& cancel_flag() {
    static std::atomic<bool> flag{false};
    return flag;
}

std::vector<CellStatus> parallel_for(std::size_t n, int threads,
                                     const std::function<void(std::size_t)>& fn) {
    std::vector<CellStatus> status(n);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n) return;
            if (cancel_flag().load()) {
                status[i] = {false, "cancelled"};
                continue;
            }
            try {
                fn(i);
                status[i] = {true, {}};
            } catch (const std::exception& e) {
                status[i] = {false, e.what()};
            }
        }
    };
    const int nt = std::max(1, std::min<int>(threads, static_cast<int>(std::max<std::size_t>(n, 1))));
    if (nt == 1) {
        worker();
        return status;
    }
    std::vector<std::jthread> pool;
    for (int k = 0; k < nt; ++k) pool.emplace_back(worker);
    pool.clear();
    return status;
}

} // namespace phoclone::cli
