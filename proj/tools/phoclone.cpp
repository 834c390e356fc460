#include <chrono>
#include <csignal>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "phoclone/cli/commands.hpp"

using namespace phoclone;
using namespace phoclone::cli;

namespace {

void on_sigint(int) { cancel_flag().store(true); }

int fail(ErrorKind kind, const std::string& message) {
    json e = {{"error", {{"kind", std::string(to_string(kind))}, {"message", message}}}};
    std::cerr << e.dump() << '\n';
    return kind == ErrorKind::config ? 2 : 1;
}

json load_config(const std::string& path) {
    if (path.empty()) return json::object();
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::io, "cannot open config '" + path + "'");
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw Error(ErrorKind::config, std::string("config is not valid JSON: ") + e.what());
    }
}

std::pair<double, double> parse_tolerance(const std::string& s) {
    const auto comma = s.find(',');
    if (comma == std::string::npos) throw Error(ErrorKind::config, "--tolerance expects rel,abs");
    try {
        std::size_t n1 = 0, n2 = 0;
        const std::string a = s.substr(0, comma), b = s.substr(comma + 1);
        const double rel = std::stod(a, &n1), abs = std::stod(b, &n2);
        if (n1 != a.size() || n2 != b.size() || !(rel > 0) || !(abs > 0)) throw std::invalid_argument("");
        return {rel, abs};
    } catch (const std::logic_error&) {
        throw Error(ErrorKind::config, "--tolerance expects two positive numbers rel,abs");
    }
}

struct Flags {
    std::string config, out, tolerance;
    std::uint64_t seed = 0;
    bool has_seed = false;
    int threads = 1;
};

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"photon-phonon cloning simulator"};
    app.set_version_flag("--version", std::string(PHOCLONE_VERSION));
    app.require_subcommand(1);

    Flags f;
    std::vector<CLI::App*> subs;
    for (const auto& name : command_names()) {
        auto* s = app.add_subcommand(name);
        s->add_option("--config", f.config, "JSON run config")->check(CLI::ExistingFile);
        s->add_option("--out", f.out, "output directory");
        s->add_option("--seed", f.seed, "random seed")->each([&](const std::string&) { f.has_seed = true; });
        s->add_option("--threads", f.threads, "worker threads")->check(CLI::Range(1, 1024));
        s->add_option("--tolerance", f.tolerance, "integrator tolerance rel,abs");
        subs.push_back(s);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        return fail(ErrorKind::config, e.what());
    }

    std::string command;
    for (auto* s : subs)
        if (s->parsed()) command = s->get_name();

    std::signal(SIGINT, on_sigint);
    try {
        json doc = load_config(f.config);
        if (!doc.is_object()) throw Error(ErrorKind::config, "config root must be an object");
        if (!f.out.empty()) doc["output_dir"] = f.out;
        if (f.has_seed) doc["seed"] = f.seed;
        if (!f.tolerance.empty()) {
            const auto [rel, abs] = parse_tolerance(f.tolerance);
            doc["tolerance"] = {{"rel", rel}, {"abs", abs}};
        }
        const RunConfig cfg = parse_run_config(doc, command);

        const auto t0 = std::chrono::steady_clock::now();
        const ResultTable table = run_command(cfg, {f.threads});
        const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const auto paths = write_outputs(table, cfg, wall);

        json summary = {{"csv", paths.csv.string()}, {"json", paths.json.string()},
                        {"rows", table.rows.size()}, {"failures", table.failures.size()}};
        std::cout << summary.dump() << '\n';
        if (cancel_flag().load()) return fail(ErrorKind::cancelled, "interrupted; partial results written");
        return 0;
    } catch (const Error& e) {
        return fail(e.kind(), e.what());
    } catch (const std::exception& e) {
        return fail(ErrorKind::io, e.what());
    }
}
