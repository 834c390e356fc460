#include "phoclone/cli/commands.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "phoclone/cloning.hpp"
#include "phoclone/dynamics.hpp"
#include "phoclone/gates.hpp"

namespace phoclone::cli {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::vector<double> axis_values(const RunConfig& c, const std::string& axis) {
    const SweepAxis* s = c.sweep(axis);
    if (!s) throw Error(ErrorKind::config, "missing sweep axis '" + axis + "'");
    return s->values();
}

std::vector<double> time_grid(double t_max, double dt) {
    if (!(dt > 0) || !(t_max >= 0)) throw Error(ErrorKind::config, "time grid needs dt > 0 and t_max >= 0");
    const long n = std::lround(std::floor(t_max / dt + 1e-9));
    std::vector<double> t(n + 1);
    for (long k = 0; k <= n; ++k) t[k] = k * dt;
    return t;
}

GateKind gate_kind(const std::string& name) {
    if (name == "F1") return GateKind::cpfg_a_b1;
    if (name == "F2") return GateKind::cpfg_a_b2;
    if (name == "F3") return GateKind::cpfg_a_b1b2;
    throw Error(ErrorKind::config, "unknown gate target '" + name + "'");
}

json nullable(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

void log_failure(ResultTable& t, json where, const std::string& error) {
    where["error"] = error;
    t.failures.push_back(std::move(where));
}

// Amplitudes on (a, b1, b2) qubits embedded into a local dimension.
Vector embed_amplitudes(const Amplitudes& al, const ModeLayout& L) {
    Vector v = Vector::Zero(L.total_dim());
    for (int i = 0; i < 8; ++i) v(L.basis_index({i >> 2, (i >> 1) & 1, i & 1})) = al[i];
    return v;
}

} // namespace

ResultTable cmd_effparams(const RunConfig& c, const RunContext&) {
    ResultTable t;
    t.columns = {"V", "omega_A", "delta", "omega_eff", "g_eff", "gamma_eff",
                 "g_over_omega", "log10_g_over_omega", "g_over_gamma", "status"};
    for (double V : axis_values(c, "V")) {
        for (double wA : axis_values(c, "omega_A")) {
            SystemParams p = c.system;
            p.V = {V, V};
            p.omega_A = {wA, wA};
            try {
                const EffectiveParams e = effective_params(p);
                const double r = e.g_eff[0] / e.omega_eff[0];
                t.rows.push_back({V, wA, e.delta[0], e.omega_eff[0], e.g_eff[0], e.gamma_eff[0], r,
                                  r > 0 ? std::log10(r) : kNaN, e.g_eff[0] / e.gamma_eff[0],
                                  std::string("ok")});
            } catch (const Error& e) {
                t.rows.push_back({V, wA, kNaN, kNaN, kNaN, kNaN, kNaN, kNaN, kNaN,
                                  std::string("failed")});
                log_failure(t, {{"V", V}, {"omega_A", wA}}, e.what());
            }
        }
    }
    t.results["grid"] = {{"V_points", c.sweep("V")->points}, {"omega_A_points", c.sweep("omega_A")->points}};
    return t;
}

ResultTable cmd_gate_fidelity(const RunConfig& c, const RunContext&) {
    const GateTarget target = GateTarget::make(gate_kind(c.options["target"]));
    const EffectiveParams eff = effective_params(c.system);
    const PhaseFactors mu = phase_factors(eff, target.kerr_mask());
    const int n_states = c.options["n_states"];
    const int stride = std::max(1, c.options["marker_stride"].get<int>());
    if (n_states < 1) throw Error(ErrorKind::config, "options.n_states must be >= 1");

    std::mt19937_64 rng(c.seed);
    std::vector<Amplitudes> states;
    for (int k = 0; k < n_states; ++k) states.push_back(random_amplitudes(rng));

    const ModeLayout L = gate_layout(2);
    const Operator H = build_effective_hamiltonian(eff.masked(target.kerr_mask()), L);
    const Matrix Ut = target_unitary(target);

    ResultTable t;
    t.columns = {"series", "state", "t", "fidelity"};
    const auto grid = time_grid(c.options["t_max"], c.options["dt"]);
    double max_dev = 0.0;
    for (int k = 0; k < n_states; ++k) {
        const Vector psi = embed_amplitudes(states[k], L);
        const Vector tgt = Ut * psi;
        for (std::size_t i = 0; i < grid.size(); ++i) {
            const double F = cpfg_fidelity(target, mu, states[k], grid[i]);
            t.rows.push_back({std::string("analytic"), double(k), grid[i], F});
            if (i % stride == 0) {
                const double Fn = std::abs(tgt.dot(unitary_propagator(H, grid[i]) * psi));
                t.rows.push_back({std::string("numeric"), double(k), grid[i], Fn});
                max_dev = std::max(max_dev, std::abs(F - Fn));
            }
        }
    }
    t.results["max_marker_deviation"] = max_dev;
    t.results["mu"] = mu.mu;
    try {
        const auto g = find_gate_time(target, mu, c.options["t_max"], c.options["threshold"], c.seed);
        t.results["gate_time"] = {{"t_star", g.t_star}, {"f_star", g.f_star},
                                  {"period", g.period ? json(*g.period) : json(nullptr)}};
    } catch (const Error& e) {
        t.results["gate_time"] = nullptr;
        t.results["gate_time_error"] = e.what();
    }
    return t;
}

ResultTable cmd_sweep_kappa_nth(const RunConfig& c, const RunContext& ctx) {
    const GateTarget target = GateTarget::make(gate_kind(c.options["target"]));
    const EffectiveParams eff = effective_params(c.system);
    const PhaseFactors mu = phase_factors(eff, target.kerr_mask());
    const auto gt = find_gate_time(target, mu, 20.0, c.options["threshold"]);
    const int dim = c.options["local_dim"];
    if (dim < 2 || dim > 4) throw Error(ErrorKind::config, "options.local_dim must be in [2, 4]");
    const int n_random = c.options["n_random"];
    if (n_random < 0) throw Error(ErrorKind::config, "options.n_random must be >= 0");

    std::mt19937_64 rng(c.seed);
    std::vector<Amplitudes> ens;
    for (int k = 0; k < n_random; ++k) ens.push_back(random_amplitudes(rng));
    for (int k = 0; k < 8; ++k) {
        Amplitudes b{};
        b[k] = 1.0;
        ens.push_back(b);
    }

    const ModeLayout L = gate_layout(dim);
    const Operator H = build_effective_hamiltonian(eff.masked(target.kerr_mask()), L);
    const Matrix Ut8 = target_unitary(target);

    const auto kappas = axis_values(c, "kappa");
    const auto nths = axis_values(c, "n_th");
    const std::size_t cells = kappas.size() * nths.size();
    std::vector<std::pair<double, double>> value(cells, {kNaN, kNaN});

    auto status = parallel_for(cells, ctx.threads, [&](std::size_t i) {
        const double kappa = kappas[i % kappas.size()];
        const double nth = nths[i / kappas.size()];
        std::vector<Channel> ch{decay_channel(L, Mode::a, kappa)};
        for (int j = 0; j < 2; ++j)
            for (auto& x : thermal_channels(L, j ? Mode::b2 : Mode::b1, c.system.gamma[j], nth))
                ch.push_back(std::move(x));
        const auto spec = EvolutionSpec::constant(H, ch, gt.t_star, {}, c.tol);
        double sum = 0, mn = 1;
        for (const auto& al : ens) {
            Amplitudes tgt_al;
            for (int q = 0; q < 8; ++q) tgt_al[q] = Ut8(q, q) * al[q];
            const QuantumState psi = QuantumState::pure(L, embed_amplitudes(al, L));
            const QuantumState tgt = QuantumState::pure(L, embed_amplitudes(tgt_al, L));
            const auto res = evolve_master(spec, psi);
            const double F = fidelity(tgt, res.final_state());
            sum += F;
            mn = std::min(mn, F);
        }
        value[i] = {sum / double(ens.size()), mn};
    });

    ResultTable t;
    t.columns = {"kappa", "n_th", "t_gate", "avg_fidelity", "min_fidelity", "status"};
    // n_th outer, kappa inner.
    for (std::size_t i = 0; i < cells; ++i) {
        const double kappa = kappas[i % kappas.size()], nth = nths[i / kappas.size()];
        t.rows.push_back({kappa, nth, gt.t_star, value[i].first, value[i].second,
                          std::string(status[i].ok ? "ok" : "failed")});
        if (!status[i].ok) log_failure(t, {{"kappa", kappa}, {"n_th", nth}}, status[i].error);
    }

    json contours = json::object();
    for (double level : {0.99, 0.95}) {
        json pts = json::array();
        for (std::size_t r = 0; r < nths.size(); ++r) {
            json kc = nullptr;
            for (std::size_t k = 0; k + 1 < kappas.size(); ++k) {
                const double f0 = value[r * kappas.size() + k].first;
                const double f1 = value[r * kappas.size() + k + 1].first;
                if (std::isfinite(f0) && std::isfinite(f1) && f0 >= level && f1 < level) {
                    const bool lg = c.sweep("kappa")->log;
                    const double x0 = lg ? std::log(kappas[k]) : kappas[k];
                    const double x1 = lg ? std::log(kappas[k + 1]) : kappas[k + 1];
                    const double x = x0 + (f0 - level) / (f0 - f1) * (x1 - x0);
                    kc = lg ? std::exp(x) : x;
                    break;
                }
            }
            pts.push_back({{"n_th", nths[r]}, {"kappa", kc}});
        }
        contours[level == 0.99 ? "F_0.99" : "F_0.95"] = pts;
    }
    t.results["contours"] = contours;
    t.results["gate_time"] = {{"t_star", gt.t_star}, {"f_star", gt.f_star}};
    t.results["ensemble_size"] = ens.size();
    return t;
}

ResultTable cmd_transmission(const RunConfig& c, const RunContext&) {
    const auto grid = time_grid(c.options["t_max"], c.options["dt"]);
    const bool both = c.options["couple_both"];
    const double wc = c.options["omega_c_eff"], w = c.options["omega"];
    const double kappa = c.options["kappa"], gamma = c.options["gamma"];
    ResultTable t;
    t.columns = {"G", "t", "T_a_b1", "T_b1_a", "T_a_b2", "norm_from_a"};
    json peaks = json::array();
    for (const auto& gj : c.options["G"]) {
        const double G = gj.get<double>();
        const auto lp = LinearizedParams::direct({G, both ? G : 0.0}, wc, {w, w}, kappa, {gamma, gamma});
        const auto cur = transfer_dynamics(lp, grid);
        for (std::size_t i = 0; i < grid.size(); ++i)
            t.rows.push_back({G, grid[i], cur.a_to_b[0][i], cur.b_to_a[0][i], cur.a_to_b[1][i],
                              cur.norm_from_a[i]});
        const auto pk = transfer_first_peak(lp, 0, grid.back());
        const auto lp0 = LinearizedParams::direct({G, both ? G : 0.0}, wc, {w, w}, 0.0, {0.0, 0.0});
        const auto pk0 = transfer_first_peak(lp0, 0, grid.back());
        peaks.push_back({{"G", G},
                         {"peak_time", pk ? json(pk->first) : json(nullptr)},
                         {"peak_T", pk ? json(pk->second) : json(nullptr)},
                         {"peak_time_noise_free", pk0 ? json(pk0->first) : json(nullptr)},
                         {"rabi_time", G > 0 ? json(std::numbers::pi / (2 * G)) : json(nullptr)}});
    }
    t.results["peaks"] = peaks;
    t.results["note"] = "amplitude propagation e^{Mt}; n_th does not enter the noise-free propagator";
    t.results["n_th"] = c.options["n_th"];
    return t;
}

namespace {

json action_json(const BoundaryAction& a) {
    return {{"mode", std::string(mode_name(a.mode))}, {"kind", a.project ? "project" : "gate"}, {"label", a.label}};
}

json schedule_json(const PulseSchedule& s, const DissipationModel& m) {
    json segs = json::array();
    for (const auto& seg : s.segments) {
        json acts = json::array();
        for (const auto& a : seg.end_actions) acts.push_back(action_json(a));
        const char* reg = seg.regime == Regime::weak_drive_cpfg ? "weak_drive_cpfg"
                          : seg.regime == Regime::strong_drive_swap ? "strong_drive_swap" : "idle";
        segs.push_back({{"regime", reg},
                        {"duration", seg.duration},
                        {"duration_units", seg.duration / PulseSchedule::unit},
                        {"kerr_mask", seg.kerr_mask},
                        {"coupling_mask", seg.coupling_mask},
                        {"end_actions", acts}});
    }
    json lead = json::array();
    for (const auto& a : s.leading) lead.push_back(action_json(a));
    return {{"leading_actions", lead},
            {"segments", segs},
            {"pulse_units", s.pulse_units()},
            {"unit", PulseSchedule::unit},
            {"total_duration", s.total_duration()},
            {"t_cpfg", s.times.t_cpfg},
            {"t_swap", s.times.t_swap},
            {"swap_coupling", m.swap_coupling},
            {"local_dim", m.local_dim}};
}

std::vector<CloneConfig> clone_configs(const RunConfig& c) {
    const json& p = c.protocol;
    const Protocol proto = protocol_from_name(p["name"].get<std::string>());
    const int n = c.options["n_inputs"];
    if (n < 1) throw Error(ErrorKind::config, "options.n_inputs must be >= 1");
    std::vector<Qubit> inputs;
    if (!p["input"].is_null()) {
        Qubit q{cplx(p["input"][0][0], p["input"][0][1]), cplx(p["input"][1][0], p["input"][1][1])};
        const double nn = std::sqrt(std::norm(q[0]) + std::norm(q[1]));
        if (nn == 0) throw Error(ErrorKind::config, "protocol.input is zero");
        inputs.push_back({q[0] / nn, q[1] / nn});
    } else if (proto == Protocol::real_state) {
        for (int k = 0; k < n; ++k) {
            const double phi = std::numbers::pi * (k + 0.5) / n;
            inputs.push_back({std::cos(phi), std::sin(phi)});
        }
    } else if (proto == Protocol::uqcm) {
        std::mt19937_64 rng(c.seed);
        std::normal_distribution<double> g;
        for (int k = 0; k < n; ++k) {
            Qubit q{cplx(g(rng), g(rng)), cplx(g(rng), g(rng))};
            const double nn = std::sqrt(std::norm(q[0]) + std::norm(q[1]));
            inputs.push_back({q[0] / nn, q[1] / nn});
        }
    }
    std::vector<CloneConfig> out;
    try {
        if (proto == Protocol::pqcm) {
            out.push_back(CloneConfig::pqcm(p["theta"], p["member"]));
        } else {
            for (const auto& q : inputs) {
                CloneConfig cc = proto == Protocol::real_state ? CloneConfig::real_state(q) : CloneConfig::uqcm(q);
                if (proto == Protocol::uqcm) {
                    cc.s = p["s"];
                    cc.t = p["t"];
                }
                cc.validate();
                out.push_back(cc);
            }
        }
    } catch (const Error& e) {
        throw Error(ErrorKind::config, std::string("protocol: ") + e.what());
    }
    return out;
}

} // namespace

ResultTable cmd_clone(const RunConfig& c, const RunContext& ctx) {
    const auto cfgs = clone_configs(c);
    GateTimes times = default_gate_times(c.system);
    const double gs = c.options["swap_coupling"];
    if (gs < 0) throw Error(ErrorKind::config, "options.swap_coupling must be >= 0 (0 = auto)");
    if (gs > 0) times.t_swap = std::numbers::pi / (2 * gs);
    DissipationModel model = default_dissipation_model(c.system, times);
    model.local_dim = c.options["local_dim"];
    if (model.local_dim < 2 || model.local_dim > 4) throw Error(ErrorKind::config, "options.local_dim must be in [2, 4]");
    model.tol = c.tol;

    std::vector<PulseSchedule> sched;
    for (const auto& cc : cfgs) sched.push_back(schedule_from_circuit(cc, times));

    json ideal = json::array();
    double mf1 = 0, mfa = 0, mo1 = 0, moa = 0, mp = 0;
    for (const auto& cc : cfgs) {
        const auto o = clone_ideal(cc);
        ideal.push_back({{"input", {{cc.target()[0].real(), cc.target()[0].imag()}, {cc.target()[1].real(), cc.target()[1].imag()}}},
                         {"success_probability", o.success_probability},
                         {"fidelity_b1", o.fidelity_b1}, {"fidelity_a", o.fidelity_a},
                         {"overlap_b1", o.overlap_b1}, {"overlap_a", o.overlap_a}});
        mf1 += o.fidelity_b1 / cfgs.size();
        mfa += o.fidelity_a / cfgs.size();
        mo1 += o.overlap_b1 / cfgs.size();
        moa += o.overlap_a / cfgs.size();
        mp += o.success_probability / cfgs.size();
    }

    const auto kappas = axis_values(c, "kappa");
    const auto nths = axis_values(c, "n_th");
    const std::size_t cells = kappas.size() * nths.size();
    const std::size_t jobs = cells * cfgs.size();
    std::vector<CloneOutcome> outs(jobs);
    auto status = parallel_for(jobs, ctx.threads, [&](std::size_t i) {
        const std::size_t cell = i / cfgs.size(), k = i % cfgs.size();
        outs[i] = run_dissipative(sched[k], cfgs[k], model, kappas[cell % kappas.size()],
                                  nths[cell / kappas.size()]);
    });

    ResultTable t;
    t.columns = {"kappa", "n_th", "success_probability", "fidelity_b1", "fidelity_a", "overlap_b1", "overlap_a", "status"};
    for (std::size_t cell = 0; cell < cells; ++cell) {
        const double kappa = kappas[cell % kappas.size()], nth = nths[cell / kappas.size()];
        double v[5] = {0, 0, 0, 0, 0};
        std::string err;
        for (std::size_t k = 0; k < cfgs.size(); ++k) {
            const std::size_t i = cell * cfgs.size() + k;
            if (!status[i].ok) {
                err = status[i].error;
                continue;
            }
            v[0] += outs[i].success_probability / cfgs.size();
            v[1] += outs[i].fidelity_b1 / cfgs.size();
            v[2] += outs[i].fidelity_a / cfgs.size();
            v[3] += outs[i].overlap_b1 / cfgs.size();
            v[4] += outs[i].overlap_a / cfgs.size();
        }
        if (!err.empty()) {
            t.rows.push_back({kappa, nth, kNaN, kNaN, kNaN, kNaN, kNaN, std::string("failed")});
            log_failure(t, {{"kappa", kappa}, {"n_th", nth}}, err);
        } else {
            t.rows.push_back({kappa, nth, v[0], v[1], v[2], v[3], v[4], std::string("ok")});
        }
    }
    t.results["protocol"] = c.protocol;
    t.results["ideal"] = {{"per_input", ideal},
                          {"mean_success_probability", mp},
                          {"mean_fidelity_b1", mf1}, {"mean_fidelity_a", mfa},
                          {"mean_overlap_b1", mo1}, {"mean_overlap_a", moa}};
    t.results["schedule"] = schedule_json(sched.front(), model);
    t.results["fidelity_convention"] = "fidelity_* = sqrt(<psi|rho|psi>), overlap_* = <psi|rho|psi>";
    return t;
}

ResultTable cmd_compare_wom(const RunConfig& c, const RunContext& ctx) {
    const auto grid = time_grid(c.options["t_max"], c.options["dt"]);
    const int n_states = c.options["n_states"];
    if (n_states < 1) throw Error(ErrorKind::config, "options.n_states must be >= 1");
    const double kappa = c.options["kappa"];
    const bool aux = c.options["include_aux_damping"];
    const double threshold = c.options["threshold"];

    std::mt19937_64 rng(c.seed);
    std::normal_distribution<double> nd;
    std::vector<Eigen::Vector4cd> states;
    for (int k = 0; k < n_states; ++k) {
        Eigen::Vector4cd v;
        for (int q = 0; q < 4; ++q) v(q) = cplx(nd(rng), nd(rng));
        states.push_back(v / v.norm());
    }
    const Eigen::Vector4cd cz(1, 1, 1, -1);

    SystemParams om = c.system;
    SystemParams wom = c.system;
    wom.V = {0.0, 0.0};

    // Ideal: OM on the full five-mode layout, WOM on (a, b_A1, b_1) with V = 0.
    const ModeLayout L5 = ModeLayout::uniform({Mode::a, Mode::bA1, Mode::bA2, Mode::b1, Mode::b2}, 2);
    const ModeLayout L3 = ModeLayout::uniform({Mode::a, Mode::bA1, Mode::b1}, 2);
    auto embed2 = [](const ModeLayout& L, Mode q, const Eigen::Vector4cd& v) {
        Vector out = Vector::Zero(L.total_dim());
        const int ia = L.index_of(Mode::a), iq = L.index_of(q);
        for (int na = 0; na < 2; ++na)
            for (int nq = 0; nq < 2; ++nq) {
                std::vector<int> occ(L.size(), 0);
                occ[ia] = na;
                occ[iq] = nq;
                out(L.basis_index(occ)) = v(2 * na + nq);
            }
        return out;
    };

    auto ideal_curve = [&](const Operator& H, const ModeLayout& L, Mode q) {
        Eigen::SelfAdjointEigenSolver<Matrix> es(H.matrix);
        std::vector<double> F(grid.size(), 0.0);
        for (const auto& s : states) {
            const Vector p0 = es.eigenvectors().adjoint() * embed2(L, q, s);
            const Vector tg = es.eigenvectors().adjoint() * embed2(L, q, cz.cwiseProduct(s));
            for (std::size_t i = 0; i < grid.size(); ++i) {
                cplx acc = 0;
                for (Eigen::Index k = 0; k < p0.size(); ++k)
                    acc += std::conj(tg(k)) * p0(k) * std::polar(1.0, -es.eigenvalues()(k) * grid[i]);
                F[i] += std::abs(acc) / states.size();
            }
        }
        return F;
    };
    const auto F_om = ideal_curve(build_rwa_hamiltonian(om, L5), L5, Mode::b1);
    const auto F_wom = ideal_curve(build_rwa_hamiltonian(wom, L3), L3, Mode::bA1);

    // Dissipative: three-mode (a, b_A1, b_1) reduction; b_A2, b_2 stay in vacuum.
    std::vector<std::vector<double>> diss(2 * states.size());
    auto status = parallel_for(diss.size(), ctx.threads, [&](std::size_t i) {
        const bool is_om = i < states.size();
        const auto& s = states[i % states.size()];
        const SystemParams& p = is_om ? om : wom;
        const Mode q = is_om ? Mode::b1 : Mode::bA1;
        std::vector<Channel> ch{decay_channel(L3, Mode::a, kappa)};
        for (auto& x : thermal_channels(L3, Mode::b1, p.gamma[0], p.n_th[0])) ch.push_back(std::move(x));
        if (aux) ch.push_back(decay_channel(L3, Mode::bA1, p.gamma_A[0]));
        const auto spec = EvolutionSpec::constant(build_rwa_hamiltonian(p, L3), ch, grid.back(), grid, c.tol);
        const auto res = evolve_master(spec, QuantumState::pure(L3, embed2(L3, q, s)));
        const QuantumState tgt = QuantumState::pure(L3, embed2(L3, q, cz.cwiseProduct(s)));
        diss[i].resize(grid.size());
        for (std::size_t k = 0; k < grid.size(); ++k) diss[i][k] = fidelity(tgt, res.states[k]);
    });

    ResultTable t;
    t.columns = {"t", "F_OM_ideal", "F_WOM_ideal", "F_OM_diss", "F_WOM_diss"};
    std::vector<double> F_om_d(grid.size(), 0.0), F_wom_d(grid.size(), 0.0);
    bool diss_ok = true;
    for (std::size_t i = 0; i < diss.size(); ++i) {
        if (!status[i].ok) {
            diss_ok = false;
            log_failure(t, {{"model", i < states.size() ? "OM" : "WOM"}, {"state", i % states.size()}}, status[i].error);
            continue;
        }
        auto& dst = i < states.size() ? F_om_d : F_wom_d;
        for (std::size_t k = 0; k < grid.size(); ++k) dst[k] += diss[i][k] / states.size();
    }
    if (!diss_ok) std::fill(F_om_d.begin(), F_om_d.end(), kNaN), std::fill(F_wom_d.begin(), F_wom_d.end(), kNaN);
    for (std::size_t k = 0; k < grid.size(); ++k) t.rows.push_back({grid[k], F_om[k], F_wom[k], F_om_d[k], F_wom_d[k]});

    auto peak_after = [&](const std::vector<double>& F, double t_min) {
        double best = -1, tb = kNaN;
        for (std::size_t k = 0; k < grid.size(); ++k)
            if (grid[k] > t_min && F[k] > best) best = F[k], tb = grid[k];
        return json{{"t", nullable(tb)}, {"fidelity", nullable(best)}};
    };
    auto first_crossing = [&](const std::vector<double>& F) {
        for (std::size_t k = 1; k < grid.size(); ++k)
            if (F[k] >= threshold) return grid[k];
        return kNaN;
    };

    // Gate time predicted by adiabatic elimination at the same parameters.
    json heff = nullptr;
    double t_heff = kNaN;
    try {
        const GateTarget f1 = GateTarget::make(GateKind::cpfg_a_b1);
        const auto g = find_gate_time(f1, phase_factors(effective_params(om), f1.kerr_mask()), grid.back(), threshold, c.seed);
        t_heff = g.t_star;
        heff = {{"t_star", g.t_star}, {"f_star", g.f_star}};
    } catch (const Error& e) {
        heff = {{"error", e.what()}};
    }
    const double t_full = first_crossing(F_om);
    t.results["heff_gate_time"] = heff;
    t.results["full_model_gate_time"] = nullable(t_full);
    t.results["relative_deviation"] = nullable(std::abs(t_full - t_heff) / t_heff);
    t.results["peaks_after_t10"] = {{"OM_ideal", peak_after(F_om, 10)}, {"WOM_ideal", peak_after(F_wom, 10)},
                                    {"OM_diss", peak_after(F_om_d, 10)}, {"WOM_diss", peak_after(F_wom_d, 10)}};
    t.results["beat_frequency"] = std::sqrt(std::pow(om.omega_A[0] - om.omega_m[0], 2) + 4 * om.V[0] * om.V[0]);
    t.results["dissipative_model"] = "three-mode (a, b_A1, b_1) reduction of the RWA Hamiltonian";
    return t;
}

ResultTable cmd_mean_field(const RunConfig& c, const RunContext&) {
    const std::string init = c.options["initial"];
    const MeanFieldState s0 = init == "thermal" ? thermal_seed(c.system) : MeanFieldState{};
    const auto tr = mean_field_trajectory(c.system, s0, c.options["t_end"], c.options["dt"], c.tol);
    ResultTable t;
    t.columns = {"t", "alpha_re", "alpha_im", "beta1_re", "beta1_im", "beta_b1_re", "beta_b1_im",
                 "G1_abs", "G2_abs", "rolling_variance"};
    for (std::size_t i = 0; i < tr.states.size(); ++i) {
        const auto& s = tr.states[i];
        t.rows.push_back({s.t, s.alpha.real(), s.alpha.imag(), s.beta[0].real(), s.beta[0].imag(),
                          s.beta_b[0].real(), s.beta_b[0].imag(), tr.G_eff_abs[i][0],
                          tr.G_eff_abs[i][1], tr.rolling_variance[i]});
    }
    t.results["late_mean_G"] = tr.late_mean;
    t.results["late_std_G"] = tr.late_std;
    t.results["band"] = {tr.late_mean - tr.late_std, tr.late_mean + tr.late_std};
    t.results["reference_value"] = 0.05;
    t.results["within_50pct_of_reference"] = std::abs(tr.late_mean - 0.05) <= 0.025;
    t.results["final_rolling_variance"] = tr.rolling_variance.empty() ? 0.0 : tr.rolling_variance.back();
    t.results["initial_condition"] = init;
    t.results["steps"] = {{"accepted", tr.stats.accepted}, {"rejected", tr.stats.rejected}};
    return t;
}

ResultTable run_command(const RunConfig& c, const RunContext& ctx) {
    if (c.command == "effparams") return cmd_effparams(c, ctx);
    if (c.command == "gate-fidelity") return cmd_gate_fidelity(c, ctx);
    if (c.command == "sweep-kappa-nth") return cmd_sweep_kappa_nth(c, ctx);
    if (c.command == "transmission") return cmd_transmission(c, ctx);
    if (c.command == "clone") return cmd_clone(c, ctx);
    if (c.command == "compare-wom") return cmd_compare_wom(c, ctx);
    if (c.command == "mean-field") return cmd_mean_field(c, ctx);
    throw Error(ErrorKind::config, "unknown command '" + c.command + "'");
}

} // namespace phoclone::cli
