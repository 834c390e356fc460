#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include "phoclone/cli/commands.hpp"

using namespace phoclone;
using namespace phoclone::cli;
namespace fs = std::filesystem;

namespace {

double num(const Cell& c) { return std::get<double>(c); }

int col(const ResultTable& t, const std::string& name) {
    for (std::size_t i = 0; i < t.columns.size(); ++i)
        if (t.columns[i] == name) return int(i);
    FAIL("missing column " << name);
    return -1;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

fs::path scratch(const std::string& name) {
    const fs::path d = fs::temp_directory_path() / ("phoclone_test_" + name);
    fs::remove_all(d);
    return d;
}

// Every failed row must have a failure-log entry.
void check_failures_logged(const ResultTable& t) {
    const auto it = std::find(t.columns.begin(), t.columns.end(), "status");
    if (it == t.columns.end()) return;
    const std::size_t s = it - t.columns.begin();
    std::size_t failed = 0;
    for (const auto& r : t.rows)
        if (std::get<std::string>(r[s]) != "ok") ++failed;
    CHECK(t.failures.size() >= failed);
}

} // namespace

TEST_CASE("config parsing fills defaults and rejects unknown keys") {
    const RunConfig c = parse_run_config(json::object(), "effparams");
    CHECK(c.command == "effparams");
    REQUIRE(c.sweep("V"));
    CHECK(c.sweep("V")->points == 51);
    CHECK(c.system == SystemParams{});
    CHECK_THROWS_AS(parse_run_config(json{{"bogus", 1}}, "effparams"), Error);
    CHECK_THROWS_AS(parse_run_config(json{{"system", {{"omega_x", 1}}}}, "effparams"), Error);
    CHECK_THROWS_AS(parse_run_config(json{{"options", {{"n_states", 3}}}}, "effparams"), Error);
    CHECK_THROWS_AS(parse_run_config(json{{"sweeps", {{{"axis", "kappa"}, {"min", 0}, {"max", 1}, {"points", 3}}}}}, "effparams"), Error);
    CHECK_THROWS_AS(parse_run_config(json::object(), "no-such-command"), Error);
    CHECK_THROWS_AS(parse_run_config(json{{"protocol", {{"name", "pqcm"}}}}, "effparams"), Error);
    CHECK_THROWS_AS(parse_run_config(json{{"protocol", {{"name", "magic"}}}}, "clone"), Error);
    CHECK_THROWS_AS(parse_run_config(json{{"seed", -1}}, "effparams"), Error);
    CHECK_THROWS_AS(parse_run_config(json{{"tolerance", {{"rel", 0}}}}, "effparams"), Error);
}

TEST_CASE("command-specific system defaults") {
    CHECK(parse_run_config(json::object(), "compare-wom").system.V[0] == 0.03);
    const RunConfig m = parse_run_config(json::object(), "mean-field");
    CHECK(m.system.epsilon == 10.0);
    CHECK(m.system.kappa == 0.1);
    CHECK(m.system.n_th[0] == 10.0);
}

TEST_CASE("config JSON round-trips through parse") {
    for (const auto& name : command_names()) {
        const RunConfig c = parse_run_config(json::object(), name);
        CHECK(parse_run_config(c.to_json(), name) == c);
        CHECK(config_hash(parse_run_config(c.to_json(), name)) == config_hash(c));
    }
}

TEST_CASE("CSV quoting") {
    CHECK(csv_escape("plain") == "plain");
    CHECK(csv_escape("a,b") == "\"a,b\"");
    CHECK(csv_escape("say \"hi\"") == "\"say \"\"hi\"\"\"");
    CHECK(format_number(0.1) == "0.1");
    CHECK(format_number(std::nan("")) == "nan");
}

TEST_CASE("effparams table") {
    json doc = {{"sweeps", {{{"axis", "V"}, {"min", 0.0}, {"max", 0.046}, {"points", 3}},
                            {{"axis", "omega_A"}, {"min", 0.998}, {"max", 1.002}, {"points", 5}}}}};
    const RunConfig c = parse_run_config(doc, "effparams");
    const ResultTable t = cmd_effparams(c);
    CHECK(t.rows.size() == 15);
    const int V = col(t, "V"), wA = col(t, "omega_A"), g = col(t, "g_eff"), r = col(t, "g_over_omega");
    bool seen = false;
    for (const auto& row : t.rows) {
        if (num(row[V]) == 0.0) CHECK(num(row[g]) == 0.0);
        if (num(row[V]) == 0.046 && std::abs(num(row[wA]) - 0.998) < 1e-12) {
            CHECK(num(row[r]) == doctest::Approx(0.5).epsilon(0.02));
            seen = true;
        }
    }
    CHECK(seen);
    check_failures_logged(t);
}

TEST_CASE("effparams degenerate cell is logged, not dropped") {
    json doc = {{"system", {{"gamma_A", 1e-5}}},
                {"sweeps", {{{"axis", "V"}, {"min", 0.01}, {"max", 0.01}, {"points", 1}},
                            {{"axis", "omega_A"}, {"min", 0.999}, {"max", 1.001}, {"points", 3}}}}};
    const ResultTable t = cmd_effparams(parse_run_config(doc, "effparams"));
    CHECK(t.rows.size() == 3);
    CHECK(t.failures.size() == 1);
    check_failures_logged(t);
}

TEST_CASE("gate-fidelity markers agree with the analytic curves") {
    json doc = {{"options", {{"n_states", 3}, {"t_max", 7.0}, {"marker_stride", 50}}}};
    const ResultTable t = cmd_gate_fidelity(parse_run_config(doc, "gate-fidelity"));
    CHECK(t.results["max_marker_deviation"].get<double>() <= 1e-10);
    CHECK(t.results["gate_time"]["t_star"].get<double>() == doctest::Approx(std::numbers::pi).epsilon(0.05));
    CHECK(t.results["gate_time"]["f_star"].get<double>() >= 0.999);
}

TEST_CASE("sweep-kappa-nth spot checks") {
    json doc = {{"options", {{"n_random", 8}}},
                {"sweeps", {{{"axis", "kappa"}, {"min", 1e-3}, {"max", 1e-1}, {"points", 3}, {"scale", "log"}},
                            {{"axis", "n_th"}, {"min", 0}, {"max", 10}, {"points", 2}}}}};
    const ResultTable t = cmd_sweep_kappa_nth(parse_run_config(doc, "sweep-kappa-nth"));
    REQUIRE(t.rows.size() == 6);
    const int k = col(t, "kappa"), n = col(t, "n_th"), f = col(t, "avg_fidelity");
    double corner = 0, far = 1;
    double prev = 2;
    for (const auto& r : t.rows) {
        if (num(r[n]) == 0) {
            CHECK(num(r[f]) <= prev + 1e-4);
            prev = num(r[f]);
        }
        if (num(r[n]) == 0 && std::abs(num(r[k]) - 1e-3) < 1e-12) corner = num(r[f]);
        if (num(r[n]) == 10 && std::abs(num(r[k]) - 0.1) < 1e-12) far = num(r[f]);
    }
    CHECK(corner >= 0.99);
    CHECK(far < corner);
    CHECK(t.results["contours"].contains("F_0.99"));
    check_failures_logged(t);
}

TEST_CASE("cancelled sweeps keep every cell with a failure entry") {
    json doc = {{"options", {{"n_random", 1}}},
                {"sweeps", {{{"axis", "kappa"}, {"min", 1e-3}, {"max", 1e-2}, {"points", 2}, {"scale", "log"}},
                            {{"axis", "n_th"}, {"min", 0}, {"max", 1}, {"points", 2}}}}};
    cancel_flag().store(true);
    const ResultTable t = cmd_sweep_kappa_nth(parse_run_config(doc, "sweep-kappa-nth"));
    cancel_flag().store(false);
    CHECK(t.rows.size() == 4);
    CHECK(t.failures.size() == 4);
    for (const auto& r : t.rows) CHECK(std::get<std::string>(r[col(t, "status")]) == "failed");
}

TEST_CASE("parallel_for records outcomes by index") {
    for (int threads : {1, 3}) {
        std::vector<int> hit(20, 0);
        const auto st = parallel_for(20, threads, [&](std::size_t i) {
            hit[i] = 1;
            if (i % 7 == 3) throw Error(ErrorKind::integration_failure, "boom");
        });
        for (std::size_t i = 0; i < 20; ++i) {
            CHECK(hit[i] == 1);
            CHECK(st[i].ok == (i % 7 != 3));
        }
    }
}

TEST_CASE("transmission ordering and Rabi peak") {
    json doc = {{"options", {{"G", {0.0, 0.05, 0.1, 0.15, 0.2}}, {"t_max", 40.0}}}};
    const ResultTable t = cmd_transmission(parse_run_config(doc, "transmission"));
    const int G = col(t, "G"), T = col(t, "T_a_b1");
    for (const auto& r : t.rows)
        if (num(r[G]) == 0.0) CHECK(num(r[T]) == 0.0);
    const auto& peaks = t.results["peaks"];
    double prev = 1e9;
    for (const auto& p : peaks) {
        const double g = p["G"];
        if (g == 0.0) {
            CHECK(p["peak_time"].is_null());
            continue;
        }
        CHECK(p["peak_time_noise_free"].get<double>() ==
              doctest::Approx(std::numbers::pi / (2 * g)).epsilon(0.01));
        CHECK(p["peak_time"].get<double>() < prev);
        prev = p["peak_time"];
    }
}

TEST_CASE("clone ideal outcomes") {
    json pq = {{"protocol", {{"name", "pqcm"}, {"theta", std::numbers::pi / 4}}},
               {"sweeps", {{{"axis", "kappa"}, {"min", 0}, {"max", 0}, {"points", 1}},
                           {{"axis", "n_th"}, {"min", 0}, {"max", 0}, {"points", 1}}}}};
    const ResultTable a = cmd_clone(parse_run_config(pq, "clone"));
    CHECK(a.results["ideal"]["mean_success_probability"].get<double>() == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(a.results["ideal"]["mean_fidelity_b1"].get<double>() == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(a.results["schedule"]["pulse_units"] == 5);
    check_failures_logged(a);

    json rs = {{"protocol", {{"name", "real_state"}}}, {"options", {{"n_inputs", 8}}}, {"sweeps", json::array()}};
    rs["sweeps"] = pq["sweeps"];
    const ResultTable b = cmd_clone(parse_run_config(rs, "clone"));
    CHECK(b.results["ideal"]["mean_fidelity_b1"].get<double>() ==
          doctest::Approx(std::sqrt(0.5 + std::sqrt(0.125))).epsilon(0.01));
    CHECK(b.results["schedule"]["pulse_units"] == 5);

    json uq = {{"protocol", {{"name", "uqcm"}, {"input", {{1, 0}, {0, 0}}}}}};
    uq["sweeps"] = pq["sweeps"];
    const ResultTable c = cmd_clone(parse_run_config(uq, "clone"));
    CHECK(c.results["ideal"]["mean_overlap_b1"].get<double>() == doctest::Approx(5.0 / 6.0).epsilon(1e-9));
    CHECK(c.results["schedule"]["pulse_units"] == 8);
    for (const auto& s : c.results["schedule"]["segments"])
        CHECK(s["duration_units"].get<double>() == doctest::Approx(s["duration"].get<double>() / 6.2));
}

TEST_CASE("compare-wom short run") {
    json doc = {{"options", {{"t_max", 40.0}, {"dt", 1.0}, {"n_states", 2}}}};
    const ResultTable t = cmd_compare_wom(parse_run_config(doc, "compare-wom"));
    CHECK(t.rows.size() == 41);
    for (const auto& r : t.rows)
        for (std::size_t k = 1; k < r.size(); ++k) {
            CHECK(num(r[k]) >= 0.0);
            CHECK(num(r[k]) <= 1.0 + 1e-9);
        }
    CHECK(num(t.rows[0][1]) == doctest::Approx(num(t.rows[0][3])).epsilon(1e-8));
    CHECK(t.results.contains("heff_gate_time"));
    CHECK(t.results["beat_frequency"].get<double>() > 0.0);
}

TEST_CASE("mean-field zero drive and diagnostic column") {
    json doc = {{"system", {{"epsilon", 0.0}}}, {"options", {{"t_end", 20.0}, {"initial", "zero"}}}};
    const ResultTable t = cmd_mean_field(parse_run_config(doc, "mean-field"));
    CHECK(t.rows.size() == 201);
    col(t, "rolling_variance");
    for (const auto& r : t.rows)
        for (std::size_t k = 1; k < r.size(); ++k) CHECK(num(r[k]) == 0.0);
}

TEST_CASE("outputs are deterministic and self-describing") {
    const fs::path d1 = scratch("det1"), d2 = scratch("det2");
    json doc = {{"options", {{"n_states", 2}, {"t_max", 4.0}}}, {"seed", 77}};
    doc["output_dir"] = d1.string();
    const RunConfig c1 = parse_run_config(doc, "gate-fidelity");
    doc["output_dir"] = d2.string();
    const RunConfig c2 = parse_run_config(doc, "gate-fidelity");
    const auto p1 = write_outputs(cmd_gate_fidelity(c1, {1}), c1, 0.1);
    const auto p2 = write_outputs(cmd_gate_fidelity(c2, {1}), c2, 0.2);
    std::string s1 = slurp(p1.csv), s2 = slurp(p2.csv);
    // Tables after the config line are byte-identical.
    s1 = s1.substr(s1.find('\n', s1.find("# config=")));
    s2 = s2.substr(s2.find('\n', s2.find("# config=")));
    CHECK(s1 == s2);
    CHECK(read_config_header(p1.csv) == c1);
    CHECK(p1.csv.filename().string().rfind("gate-fidelity-", 0) == 0);
    const json side = json::parse(slurp(p1.json));
    CHECK(side["seed"] == 77);
    CHECK(side.contains("wall_time_s"));
    CHECK(side.contains("failures"));
    fs::remove_all(d1);
    fs::remove_all(d2);
}

TEST_CASE("thread count does not change results") {
    json doc = {{"options", {{"n_random", 2}}},
                {"sweeps", {{{"axis", "kappa"}, {"min", 1e-3}, {"max", 1e-2}, {"points", 2}, {"scale", "log"}},
                            {{"axis", "n_th"}, {"min", 0}, {"max", 5}, {"points", 2}}}}};
    const RunConfig c = parse_run_config(doc, "sweep-kappa-nth");
    const ResultTable a = cmd_sweep_kappa_nth(c, {1}), b = cmd_sweep_kappa_nth(c, {3});
    REQUIRE(a.rows.size() == b.rows.size());
    for (std::size_t i = 0; i < a.rows.size(); ++i) CHECK(a.rows[i] == b.rows[i]);
}
