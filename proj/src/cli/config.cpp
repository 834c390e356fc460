#include "phoclone/cli/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <set>

#include "phoclone/errors.hpp"

namespace phoclone::cli {

namespace {

[[noreturn]] void fail(const std::string& where, const std::string& msg) {
    throw Error(ErrorKind::config, where + ": " + msg);
}

void only_keys(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
    if (!obj.is_object()) fail(where, "expected an object");
    for (const auto& [k, v] : obj.items())
        if (!allowed.count(k)) fail(where, "unknown key '" + k + "'");
}

double number(const json& v, const std::string& where) {
    if (!v.is_number()) fail(where, "expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) fail(where, "expected a finite number");
    return x;
}

Pair pair_value(const json& v, const std::string& where) {
    if (v.is_number()) return {number(v, where), number(v, where)};
    if (v.is_array() && v.size() == 2) return {number(v[0], where + "[0]"), number(v[1], where + "[1]")};
    fail(where, "expected a number or a two-element array");
}

enum class OptType { number, integer, boolean, string, number_list };

struct OptSpec {
    OptType type;
    json def;
    std::vector<std::string> choices; // string enums
};

using OptTable = std::map<std::string, OptSpec>;

struct CommandSpec {
    std::vector<std::string> axes;
    std::vector<SweepAxis> default_sweeps;
    bool has_protocol = false;
    OptTable options;
    std::function<void(SystemParams&)> system_defaults;
};

const std::map<std::string, CommandSpec>& commands() {
    static const std::map<std::string, CommandSpec> c = [] {
        std::map<std::string, CommandSpec> m;
        m["effparams"] = {{"V", "omega_A"},
                          {{"V", 0.0, 0.1, 51, false}, {"omega_A", 0.99, 1.01, 51, false}},
                          false,
                          {},
                          nullptr};
        m["gate-fidelity"] = {{},
                              {},
                              false,
                              {{"target", {OptType::string, "F1", {"F1", "F2", "F3"}}},
                               {"n_states", {OptType::integer, 6, {}}},
                               {"t_max", {OptType::number, 13.0, {}}},
                               {"dt", {OptType::number, 0.01, {}}},
                               {"marker_stride", {OptType::integer, 100, {}}},
                               {"threshold", {OptType::number, 0.999, {}}}},
                              nullptr};
        m["sweep-kappa-nth"] = {{"kappa", "n_th"},
                                {{"kappa", 1e-4, 1e-1, 31, true}, {"n_th", 0.0, 600.0, 31, false}},
                                false,
                                {{"target", {OptType::string, "F1", {"F1", "F2", "F3"}}},
                                 {"n_random", {OptType::integer, 32, {}}},
                                 {"local_dim", {OptType::integer, 2, {}}},
                                 {"threshold", {OptType::number, 0.999, {}}}},
                                nullptr};
        m["transmission"] = {{},
                             {},
                             false,
                             {{"G", {OptType::number_list, json::array({0.05, 0.1, 0.15, 0.2}), {}}},
                              {"omega_c_eff", {OptType::number, 1.0, {}}},
                              {"omega", {OptType::number, 1.0, {}}},
                              {"kappa", {OptType::number, 0.1, {}}},
                              {"gamma", {OptType::number, 1e-5, {}}},
                              {"n_th", {OptType::number, 10.0, {}}},
                              {"t_max", {OptType::number, 40.0, {}}},
                              {"dt", {OptType::number, 0.05, {}}},
                              {"couple_both", {OptType::boolean, false, {}}}},
                             nullptr};
        m["clone"] = {{"kappa", "n_th"},
                      {{"kappa", 0.0, 0.03, 4, false}, {"n_th", 0.0, 600.0, 3, false}},
                      true,
                      {{"n_inputs", {OptType::integer, 4, {}}},
                       {"local_dim", {OptType::integer, 3, {}}},
                       {"swap_coupling", {OptType::number, 0.0, {}}}},
                      nullptr};
        m["compare-wom"] = {{},
                            {},
                            false,
                            {{"t_max", {OptType::number, 4000.0, {}}},
                             {"dt", {OptType::number, 0.5, {}}},
                             {"kappa", {OptType::number, 0.01, {}}},
                             {"n_states", {OptType::integer, 12, {}}},
                             {"threshold", {OptType::number, 0.99, {}}},
                             {"include_aux_damping", {OptType::boolean, false, {}}}},
                            [](SystemParams& p) { p.V = {0.03, 0.03}; }};
        m["mean-field"] = {{},
                           {},
                           false,
                           {{"t_end", {OptType::number, 3000.0, {}}},
                            {"dt", {OptType::number, 0.1, {}}},
                            {"initial", {OptType::string, "thermal", {"thermal", "zero"}}}},
                           [](SystemParams& p) {
                               p.epsilon = 10.0;
                               p.kappa = 0.1;
                               p.n_th = {10.0, 10.0};
                           }};
        return m;
    }();
    return c;
}

json check_option(const std::string& name, const OptSpec& spec, const json& v) {
    const std::string where = "options." + name;
    switch (spec.type) {
    case OptType::number: return number(v, where);
    case OptType::integer:
        if (!v.is_number_integer()) fail(where, "expected an integer");
        return v;
    case OptType::boolean:
        if (!v.is_boolean()) fail(where, "expected a boolean");
        return v;
    case OptType::string:
        if (!v.is_string()) fail(where, "expected a string");
        if (!spec.choices.empty() &&
            std::find(spec.choices.begin(), spec.choices.end(), v.get<std::string>()) == spec.choices.end())
            fail(where, "unsupported value '" + v.get<std::string>() + "'");
        return v;
    case OptType::number_list: {
        if (!v.is_array() || v.empty()) fail(where, "expected a non-empty array of numbers");
        json out = json::array();
        for (std::size_t i = 0; i < v.size(); ++i) out.push_back(number(v[i], where));
        return out;
    }
    }
    return v;
}

SystemParams parse_system(const json& j, SystemParams p) {
    only_keys(j, {"omega_c", "omega_d", "epsilon", "kappa", "omega_A", "omega_m", "g", "V",
                  "gamma_A", "gamma", "n_th"},
              "system");
    auto num = [&](const char* k, double& dst) {
        if (j.contains(k)) dst = number(j[k], std::string("system.") + k);
    };
    auto pr = [&](const char* k, Pair& dst) {
        if (j.contains(k)) dst = pair_value(j[k], std::string("system.") + k);
    };
    num("omega_c", p.omega_c);
    num("omega_d", p.omega_d);
    num("epsilon", p.epsilon);
    num("kappa", p.kappa);
    pr("omega_A", p.omega_A);
    pr("omega_m", p.omega_m);
    pr("g", p.g);
    pr("V", p.V);
    pr("gamma_A", p.gamma_A);
    pr("gamma", p.gamma);
    pr("n_th", p.n_th);
    try {
        p.validate();
    } catch (const Error& e) {
        fail("system", e.what());
    }
    return p;
}

json system_json(const SystemParams& p) {
    auto pr = [](const Pair& x) { return json::array({x[0], x[1]}); };
    return {{"omega_c", p.omega_c}, {"omega_d", p.omega_d}, {"epsilon", p.epsilon},
            {"kappa", p.kappa},     {"omega_A", pr(p.omega_A)}, {"omega_m", pr(p.omega_m)},
            {"g", pr(p.g)},         {"V", pr(p.V)},         {"gamma_A", pr(p.gamma_A)},
            {"gamma", pr(p.gamma)}, {"n_th", pr(p.n_th)}};
}

SweepAxis parse_axis(const json& j, const std::vector<std::string>& axes, std::size_t i) {
    const std::string where = "sweeps[" + std::to_string(i) + "]";
    only_keys(j, {"axis", "min", "max", "points", "scale"}, where);
    for (const char* k : {"axis", "min", "max", "points"})
        if (!j.contains(k)) fail(where, std::string("missing key '") + k + "'");
    SweepAxis a;
    if (!j["axis"].is_string()) fail(where + ".axis", "expected a string");
    a.axis = j["axis"].get<std::string>();
    if (std::find(axes.begin(), axes.end(), a.axis) == axes.end())
        fail(where + ".axis", "axis '" + a.axis + "' not supported by this command");
    a.min = number(j["min"], where + ".min");
    a.max = number(j["max"], where + ".max");
    if (!j["points"].is_number_integer() || j["points"].get<long>() < 1)
        fail(where + ".points", "expected a positive integer");
    a.points = j["points"].get<int>();
    if (j.contains("scale")) {
        if (!j["scale"].is_string()) fail(where + ".scale", "expected \"linear\" or \"log\"");
        const auto s = j["scale"].get<std::string>();
        if (s != "linear" && s != "log") fail(where + ".scale", "expected \"linear\" or \"log\"");
        a.log = s == "log";
    }
    if (a.max < a.min) fail(where, "max < min");
    if (a.log && !(a.min > 0)) fail(where, "log scale needs min > 0");
    return a;
}

json parse_protocol(const json& j) {
    only_keys(j, {"name", "theta", "member", "s", "t", "input"}, "protocol");
    json out = json::object();
    if (!j.contains("name") || !j["name"].is_string()) fail("protocol.name", "expected a protocol name");
    const auto name = j["name"].get<std::string>();
    if (name != "pqcm" && name != "real_state" && name != "uqcm")
        fail("protocol.name", "unknown protocol '" + name + "'");
    out["name"] = name;
    out["theta"] = j.contains("theta") ? number(j["theta"], "protocol.theta") : 0.5;
    if (j.contains("member")) {
        if (!j["member"].is_number_integer() || std::abs(j["member"].get<int>()) != 1)
            fail("protocol.member", "expected +1 or -1");
        out["member"] = j["member"];
    } else {
        out["member"] = 1;
    }
    const double def = 1.0 / std::sqrt(3.0);
    out["s"] = j.contains("s") ? number(j["s"], "protocol.s") : def;
    out["t"] = j.contains("t") ? number(j["t"], "protocol.t") : def;
    if (j.contains("input") && !j["input"].is_null()) {
        const json& in = j["input"];
        if (!in.is_array() || in.size() != 2) fail("protocol.input", "expected [[re, im], [re, im]]");
        json arr = json::array();
        for (int k = 0; k < 2; ++k) {
            if (!in[k].is_array() || in[k].size() != 2) fail("protocol.input", "expected [[re, im], [re, im]]");
            arr.push_back({number(in[k][0], "protocol.input"), number(in[k][1], "protocol.input")});
        }
        out["input"] = arr;
    } else {
        out["input"] = nullptr;
    }
    return out;
}

} // namespace

std::vector<double> SweepAxis::values() const {
    std::vector<double> v;
    for (int k = 0; k < points; ++k) {
        const double f = points == 1 ? 0.0 : double(k) / double(points - 1);
        v.push_back(log ? std::exp(std::log(min) + f * (std::log(max) - std::log(min)))
                        : min + f * (max - min));
    }
    return v;
}

const SweepAxis* RunConfig::sweep(const std::string& axis) const {
    for (const auto& s : sweeps)
        if (s.axis == axis) return &s;
    return nullptr;
}

json RunConfig::to_json() const {
    json sw = json::array();
    for (const auto& s : sweeps)
        sw.push_back({{"axis", s.axis}, {"min", s.min}, {"max", s.max}, {"points", s.points},
                      {"scale", s.log ? "log" : "linear"}});
    json j = {{"command", command},
              {"system", system_json(system)},
              {"sweeps", sw},
              {"options", options},
              {"output_dir", output_dir},
              {"tolerance", {{"rel", tol.rel}, {"abs", tol.abs}}},
              {"seed", seed}};
    if (!protocol.empty()) j["protocol"] = protocol;
    return j;
}

bool RunConfig::operator==(const RunConfig& o) const {
    return command == o.command && system == o.system && sweeps == o.sweeps &&
           protocol == o.protocol && options == o.options && output_dir == o.output_dir &&
           tol.rel == o.tol.rel && tol.abs == o.tol.abs && seed == o.seed;
}

const std::vector<std::string>& command_names() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> n;
        for (const auto& [k, v] : commands()) n.push_back(k);
        return n;
    }();
    return names;
}

RunConfig parse_run_config(const json& doc, const std::string& command) {
    auto it = commands().find(command);
    if (it == commands().end()) fail("command", "unknown command '" + command + "'");
    const CommandSpec& spec = it->second;
    only_keys(doc, {"command", "system", "sweeps", "protocol", "options", "output_dir", "tolerance", "seed"},
              "config");

    RunConfig c;
    c.command = command;
    if (doc.contains("command") && doc["command"] != command)
        fail("command", "config is for '" + doc["command"].dump() + "', not '" + command + "'");

    SystemParams base;
    if (spec.system_defaults) spec.system_defaults(base);
    c.system = doc.contains("system") ? parse_system(doc["system"], base) : base;

    c.sweeps = spec.default_sweeps;
    if (doc.contains("sweeps")) {
        if (!doc["sweeps"].is_array()) fail("sweeps", "expected an array");
        std::set<std::string> seen;
        for (std::size_t i = 0; i < doc["sweeps"].size(); ++i) {
            SweepAxis a = parse_axis(doc["sweeps"][i], spec.axes, i);
            if (!seen.insert(a.axis).second) fail("sweeps", "axis '" + a.axis + "' given twice");
            for (auto& d : c.sweeps)
                if (d.axis == a.axis) d = a;
        }
    }

    if (doc.contains("protocol")) {
        if (!spec.has_protocol) fail("protocol", "command '" + command + "' takes no protocol block");
        c.protocol = parse_protocol(doc["protocol"]);
    } else if (spec.has_protocol) {
        c.protocol = parse_protocol({{"name", "pqcm"}});
    }

    json opts = doc.contains("options") ? doc["options"] : json::object();
    if (!opts.is_object()) fail("options", "expected an object");
    for (const auto& [k, v] : opts.items())
        if (!spec.options.count(k)) fail("options", "unknown key '" + k + "'");
    for (const auto& [name, os] : spec.options)
        c.options[name] = opts.contains(name) ? check_option(name, os, opts[name]) : os.def;

    if (doc.contains("output_dir")) {
        if (!doc["output_dir"].is_string()) fail("output_dir", "expected a string");
        c.output_dir = doc["output_dir"].get<std::string>();
    }
    if (doc.contains("tolerance")) {
        only_keys(doc["tolerance"], {"rel", "abs"}, "tolerance");
        if (doc["tolerance"].contains("rel")) c.tol.rel = number(doc["tolerance"]["rel"], "tolerance.rel");
        if (doc["tolerance"].contains("abs")) c.tol.abs = number(doc["tolerance"]["abs"], "tolerance.abs");
        if (!(c.tol.rel > 0) || !(c.tol.abs > 0)) fail("tolerance", "tolerances must be > 0");
    }
    if (doc.contains("seed")) {
        if (!doc["seed"].is_number_unsigned() && !(doc["seed"].is_number_integer() && doc["seed"].get<long long>() >= 0))
            fail("seed", "expected a non-negative integer");
        c.seed = doc["seed"].get<std::uint64_t>();
    }
    return c;
}

std::string config_hash(const RunConfig& c) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char ch : c.to_json().dump()) {
        h ^= ch;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

} // namespace phoclone::cli
