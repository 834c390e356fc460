#include "phoclone/cloning.hpp"

#include <cmath>
#include <functional>

namespace phoclone {

namespace {

constexpr double kSqrt2 = std::numbers::sqrt2;

Eigen::Vector2cd qv(const Qubit& q) { return Eigen::Vector2cd(q[0], q[1]); }

Vector embed_qubit(const Qubit& q, int dim) {
    Vector v = Vector::Zero(dim);
    v(0) = q[0];
    v(1) = q[1];
    return v;
}

Matrix embed_local(const Eigen::Matrix2cd& g, int dim) {
    Matrix m = Matrix::Identity(dim, dim);
    m.block(0, 0, 2, 2) = g;
    return m;
}

Matrix projector_local(const Qubit& keep, int dim) {
    Matrix m = Matrix::Zero(dim, dim);
    const Eigen::Vector2cd k = qv(keep);
    m.block(0, 0, 2, 2) = k * k.adjoint();
    return m;
}

// Strips the phase of the larger amplitude.
Qubit strip_global_phase(const Qubit& q) {
    const cplx ref = std::abs(q[0]) >= std::abs(q[1]) ? q[0] : q[1];
    if (std::abs(ref) == 0.0) return q;
    const cplx ph = std::conj(ref) / std::abs(ref);
    return {q[0] * ph, q[1] * ph};
}

Qubit normalized(double c0, double c1) { return {c0, c1}; }

CircuitOp single(Mode m, const Eigen::Matrix2cd& g, std::string label) {
    CircuitOp op;
    op.kind = CircuitOp::Kind::single;
    op.m1 = m;
    op.gate = g;
    op.label = std::move(label);
    return op;
}

CircuitOp two(CircuitOp::Kind k, Mode m1, Mode m2, std::string label) {
    CircuitOp op;
    op.kind = k;
    op.m1 = m1;
    op.m2 = m2;
    op.label = std::move(label);
    return op;
}

void add_cnot(Circuit& c, Mode control, Mode target) {
    c.push_back(single(target, gate_u2(), "U2"));
    c.push_back(two(CircuitOp::Kind::cz, control, target, "CZ"));
    c.push_back(single(target, gate_u2(), "U2"));
}

Matrix cz_matrix(const ModeLayout& L, Mode m1, Mode m2) {
    const int i1 = L.index_of(m1), i2 = L.index_of(m2);
    Matrix U = Matrix::Identity(L.total_dim(), L.total_dim());
    for (long k = 0; k < L.total_dim(); ++k) {
        const auto occ = L.occupations(k);
        if (occ[i1] == 1 && occ[i2] == 1) U(k, k) = -1.0;
    }
    return U;
}

Matrix swap_matrix(const ModeLayout& L, Mode m1, Mode m2) {
    const int i1 = L.index_of(m1), i2 = L.index_of(m2);
    Matrix U = Matrix::Zero(L.total_dim(), L.total_dim());
    for (long k = 0; k < L.total_dim(); ++k) {
        auto occ = L.occupations(k);
        std::swap(occ[i1], occ[i2]);
        U(L.basis_index(occ), k) = 1.0;
    }
    return U;
}

// Acts on either a state vector or a density matrix.
struct Register {
    ModeLayout layout;
    bool pure = true;
    Vector psi;
    Matrix rho;
    double success = 1.0;

    void unitary(const Matrix& U) {
        if (pure) psi = U * psi;
        else rho = U * rho * U.adjoint();
    }
    void project(const Matrix& P) {
        double p;
        if (pure) {
            psi = P * psi;
            p = psi.squaredNorm();
            if (p > 0) psi /= std::sqrt(p);
        } else {
            rho = P * rho * P;
            p = std::real(rho.trace());
            if (p > 0) rho /= p;
        }
        success *= p;
    }
    void action(const BoundaryAction& a) {
        const int d = layout.dim_of(a.mode);
        if (a.project) project(embed(layout, a.mode, projector_local(a.keep, d)).matrix);
        else unitary(embed(layout, a.mode, embed_local(a.gate, d)).matrix);
    }
};

BoundaryAction to_action(const CircuitOp& op) {
    BoundaryAction a;
    a.project = op.kind == CircuitOp::Kind::project;
    a.mode = op.m1;
    a.gate = op.gate;
    a.keep = op.keep;
    a.label = op.label;
    return a;
}

Mode phonon_partner(const CircuitOp& op) {
    if (op.m1 == Mode::a) return op.m2;
    if (op.m2 == Mode::a) return op.m1;
    throw Error(ErrorKind::invalid_argument, "photon-phonon gate without mode a");
}

int mech_index(Mode m) {
    if (m == Mode::b1) return 0;
    if (m == Mode::b2) return 1;
    throw Error(ErrorKind::invalid_argument, "expected a mechanical mode b_1 or b_2");
}

CloneOutcome outcome_from(const Register& r, const CloneConfig& cfg) {
    CloneOutcome out;
    out.config = cfg;
    out.success_probability = r.success;
    const QuantumState st = r.pure ? QuantumState::pure(r.layout, r.psi)
                                   : QuantumState::unchecked_density(r.layout, r.rho);
    const Qubit tgt = cfg.target();
    for (Mode m : {Mode::b1, Mode::a}) {
        const QuantumState red = partial_trace(st, {m});
        const QuantumState ref =
            QuantumState::pure(red.layout(), embed_qubit(tgt, r.layout.dim_of(m)));
        const double ov = std::clamp(overlap(ref, red), 0.0, 1.0);
        (m == Mode::b1 ? out.overlap_b1 : out.overlap_a) = ov;
        (m == Mode::b1 ? out.fidelity_b1 : out.fidelity_a) = std::sqrt(ov);
    }
    return out;
}

} // namespace

std::string_view protocol_name(Protocol p) {
    switch (p) {
    case Protocol::pqcm: return "pqcm";
    case Protocol::real_state: return "real_state";
    case Protocol::uqcm: return "uqcm";
    }
    return "?";
}

Protocol protocol_from_name(std::string_view name) {
    for (Protocol p : {Protocol::pqcm, Protocol::real_state, Protocol::uqcm})
        if (protocol_name(p) == name) return p;
    throw Error(ErrorKind::invalid_argument, "unknown protocol '" + std::string(name) + "'");
}

std::pair<double, double> pqcm_angles(double theta) {
    if (!(theta > 0.0) || theta > std::numbers::pi / 4 + 1e-15)
        throw Error(ErrorKind::invalid_argument, "pqcm theta must lie in (0, pi/4]");
    const double t4 = std::pow(std::tan(theta), 4);
    const double arg1 = std::sqrt((1.0 + t4) / 2.0);
    const double arg2 = 0.5 * (std::sqrt(2.0 / (1.0 + t4)) + std::sqrt(2.0 / (1.0 + 1.0 / t4)));
    if (arg1 > 1.0 + 1e-15 || arg2 > 1.0 + 1e-15)
        throw Error(ErrorKind::invalid_argument, "pqcm theta outside the arcsin domain");
    return {0.5 * std::asin(std::min(arg1, 1.0)), 0.5 * std::asin(std::min(arg2, 1.0))};
}

CloneConfig CloneConfig::pqcm(double theta, int member) {
    CloneConfig c;
    c.protocol = Protocol::pqcm;
    c.theta = theta;
    c.member = member;
    std::tie(c.theta1, c.theta2) = pqcm_angles(theta);
    return c;
}

CloneConfig CloneConfig::real_state(Qubit input) {
    CloneConfig c;
    c.protocol = Protocol::real_state;
    c.theta1 = c.theta2 = std::numbers::pi / 8;
    c.input = input;
    return c;
}

CloneConfig CloneConfig::uqcm(Qubit input) {
    CloneConfig c;
    c.protocol = Protocol::uqcm;
    c.s = c.t = 1.0 / std::sqrt(3.0);
    c.input = input;
    return c;
}

double CloneConfig::nu1() const { return std::numbers::pi / 4 - theta1; }
double CloneConfig::nu2() const { return std::numbers::pi / 4 - theta2; }

Qubit CloneConfig::target() const {
    if (protocol == Protocol::pqcm) return normalized(std::sin(theta), member * std::cos(theta));
    return input;
}

void CloneConfig::validate() const {
    switch (protocol) {
    case Protocol::pqcm: {
        auto [t1, t2] = pqcm_angles(theta);
        if (member != 1 && member != -1)
            throw Error(ErrorKind::invalid_argument, "pqcm member must be +1 or -1");
        if (std::abs(t1 - theta1) > 1e-12 || std::abs(t2 - theta2) > 1e-12)
            throw Error(ErrorKind::invalid_argument, "pqcm theta1/theta2 inconsistent with theta");
        return;
    }
    case Protocol::real_state: {
        const double c = std::sqrt(0.5 + 1.0 / std::sqrt(8.0));
        if (std::abs(std::cos(theta1) - c) > 1e-12 || std::abs(std::cos(theta2) - c) > 1e-12)
            throw Error(ErrorKind::invalid_argument,
                        "real_state needs cos(theta1) = cos(theta2) = sqrt(1/2 + 1/sqrt8)");
        const Qubit q = strip_global_phase(input);
        if (std::abs(q[0].imag()) > 1e-12 || std::abs(q[1].imag()) > 1e-12)
            throw Error(ErrorKind::invalid_argument, "real_state input has complex amplitudes");
        break;
    }
    case Protocol::uqcm: {
        const double n2 = s * s + t * t + s * t;
        if (std::abs(n2 - 1.0) > 1e-10)
            throw Error(ErrorKind::invalid_argument,
                        "uqcm reference state not normalized: s^2 + t^2 + st = " + std::to_string(n2));
        break;
    }
    }
    if (std::abs(std::norm(input[0]) + std::norm(input[1]) - 1.0) > 1e-10)
        throw Error(ErrorKind::invalid_argument, "input state is not normalized");
}

Circuit clone_circuit(const CloneConfig& cfg) {
    cfg.validate();
    Circuit c;
    switch (cfg.protocol) {
    case Protocol::pqcm: {
        c.push_back(two(CircuitOp::Kind::cz, Mode::b1, Mode::a, "CZ"));
        c.push_back(two(CircuitOp::Kind::cz, Mode::b1, Mode::b2, "CZpp"));
        CircuitOp p;
        p.kind = CircuitOp::Kind::project;
        p.m1 = Mode::b2;
        p.keep = normalized(std::sin(cfg.nu1()), std::cos(cfg.nu1()));
        p.label = "P_psi";
        c.push_back(p);
        c.push_back(single(Mode::a, gate_u1(cfg.theta2), "U1"));
        c.push_back(single(Mode::b1, gate_u2(), "U2"));
        c.push_back(two(CircuitOp::Kind::cz, Mode::b1, Mode::a, "CZ"));
        c.push_back(single(Mode::b1, gate_h(), "H"));
        break;
    }
    case Protocol::real_state:
        add_cnot(c, Mode::b1, Mode::a);
        add_cnot(c, Mode::b2, Mode::b1);
        add_cnot(c, Mode::a, Mode::b2);
        break;
    case Protocol::uqcm:
        add_cnot(c, Mode::b1, Mode::b2);
        add_cnot(c, Mode::b1, Mode::a);
        add_cnot(c, Mode::b2, Mode::a);
        add_cnot(c, Mode::a, Mode::b1);
        add_cnot(c, Mode::b2, Mode::a);
        c.push_back(two(CircuitOp::Kind::swap, Mode::a, Mode::b2, "SWAP"));
        break;
    }
    return c;
}

QuantumState clone_initial_state(const CloneConfig& cfg, int dim) {
    cfg.validate();
    const ModeLayout L = gate_layout(dim);
    switch (cfg.protocol) {
    case Protocol::pqcm:
        return QuantumState::product(
            L, {embed_qubit(normalized(std::sin(cfg.nu2()), std::cos(cfg.nu2())), dim),
                embed_qubit(cfg.target(), dim),
                embed_qubit(normalized(std::sin(cfg.nu1()), std::cos(cfg.nu1())), dim)});
    case Protocol::real_state:
        return QuantumState::product(
            L, {embed_qubit(normalized(std::cos(cfg.theta2), std::sin(cfg.theta2)), dim),
                embed_qubit(cfg.input, dim),
                embed_qubit(normalized(std::cos(cfg.theta1), std::sin(cfg.theta1)), dim)});
    case Protocol::uqcm: {
        // (b2, a): s|Phi+> + t|0>|+>
        Vector v = Vector::Zero(L.total_dim());
        for (int x = 0; x < 2; ++x) {
            const cplx in = cfg.input[x];
            auto idx = [&](int na, int nb2) { return L.basis_index({na, x, nb2}); };
            v(idx(0, 0)) += in * (cfg.s / kSqrt2 + cfg.t / kSqrt2);
            v(idx(1, 1)) += in * (cfg.s / kSqrt2);
            v(idx(1, 0)) += in * (cfg.t / kSqrt2);
        }
        return QuantumState::pure(L, v);
    }
    }
    throw Error(ErrorKind::invalid_argument, "unknown protocol");
}

QuantumState run_circuit_ideal(const Circuit& c, const QuantumState& psi0, double* success) {
    Register r{psi0.layout(), psi0.is_pure(), {}, {}, 1.0};
    if (r.pure) r.psi = psi0.vec();
    else r.rho = psi0.density();
    for (const CircuitOp& op : c) {
        switch (op.kind) {
        case CircuitOp::Kind::single:
        case CircuitOp::Kind::project: r.action(to_action(op)); break;
        case CircuitOp::Kind::cz: r.unitary(cz_matrix(r.layout, op.m1, op.m2)); break;
        case CircuitOp::Kind::swap: r.unitary(swap_matrix(r.layout, op.m1, op.m2)); break;
        }
    }
    if (success) *success = r.success;
    return r.pure ? QuantumState::pure(r.layout, r.psi)
                  : QuantumState::unchecked_density(r.layout, r.rho);
}

CloneOutcome clone_ideal(const CloneConfig& cfg) {
    const QuantumState psi0 = clone_initial_state(cfg, 2);
    Register r{psi0.layout(), true, {}, {}, 1.0};
    double p = 1.0;
    r.psi = run_circuit_ideal(clone_circuit(cfg), psi0, &p).vec();
    r.success = p;
    return outcome_from(r, cfg);
}

CloneOutcome pqcm_ideal(const CloneConfig& cfg) {
    if (cfg.protocol != Protocol::pqcm) throw Error(ErrorKind::invalid_argument, "config is not pqcm");
    return clone_ideal(cfg);
}

CloneOutcome real_state_clone_ideal(const CloneConfig& cfg) {
    if (cfg.protocol != Protocol::real_state)
        throw Error(ErrorKind::invalid_argument, "config is not real_state");
    return clone_ideal(cfg);
}

CloneOutcome uqcm_ideal(const CloneConfig& cfg) {
    if (cfg.protocol != Protocol::uqcm) throw Error(ErrorKind::invalid_argument, "config is not uqcm");
    return clone_ideal(cfg);
}

int PulseSchedule::pulse_units() const {
    int n = 0;
    for (const auto& s : segments)
        if (s.regime != Regime::idle) ++n;
    return n;
}

double PulseSchedule::total_duration() const {
    double t = 0;
    for (const auto& s : segments) t += s.duration;
    return t;
}

namespace {

void hash_mix(std::size_t& h, std::size_t v) { h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2); }
void hash_mix(std::size_t& h, double x) { hash_mix(h, std::hash<double>{}(x)); }
void hash_mix(std::size_t& h, const cplx& z) { hash_mix(h, z.real()), hash_mix(h, z.imag()); }
void hash_mix(std::size_t& h, const BoundaryAction& a) {
    hash_mix(h, std::size_t(a.project));
    hash_mix(h, std::size_t(a.mode));
    for (int i = 0; i < 4; ++i) hash_mix(h, a.gate(i));
    hash_mix(h, a.keep[0]), hash_mix(h, a.keep[1]);
    hash_mix(h, std::hash<std::string>{}(a.label));
}

PulseSegment segment(Regime r, double duration, int j) {
    PulseSegment s;
    s.regime = r;
    s.duration = duration;
    if (r == Regime::weak_drive_cpfg) s.kerr_mask[j] = true;
    if (r == Regime::strong_drive_swap) s.coupling_mask[j] = true;
    return s;
}

} // namespace

std::size_t PulseSchedule::hash() const {
    std::size_t h = 0;
    hash_mix(h, times.t_cpfg);
    hash_mix(h, times.t_swap);
    for (const auto& a : leading) hash_mix(h, a);
    for (const auto& s : segments) {
        hash_mix(h, s.duration);
        hash_mix(h, std::size_t(s.regime));
        for (int j = 0; j < 2; ++j)
            hash_mix(h, std::size_t(s.kerr_mask[j])), hash_mix(h, std::size_t(s.coupling_mask[j]));
        for (const auto& a : s.end_actions) hash_mix(h, a);
    }
    return h;
}

PulseSchedule schedule_from_circuit(const Circuit& c, const GateTimes& times) {
    if (!(times.t_cpfg > 0) || !(times.t_swap > 0))
        throw Error(ErrorKind::invalid_argument, "gate times must be > 0");
    PulseSchedule s;
    s.times = times;
    auto attach = [&](BoundaryAction a) {
        if (s.segments.empty()) s.leading.push_back(std::move(a));
        else s.segments.back().end_actions.push_back(std::move(a));
    };
    for (const CircuitOp& op : c) {
        switch (op.kind) {
        case CircuitOp::Kind::single:
        case CircuitOp::Kind::project: attach(to_action(op)); break;
        case CircuitOp::Kind::cz:
            if (op.m1 == Mode::a || op.m2 == Mode::a) {
                s.segments.push_back(segment(Regime::weak_drive_cpfg, times.t_cpfg,
                                             mech_index(phonon_partner(op))));
            } else {
                // Phonon-phonon CZ through the cavity: swap(a,b1) CZ(a,b2) swap(a,b1).
                if (!((op.m1 == Mode::b1 && op.m2 == Mode::b2) || (op.m1 == Mode::b2 && op.m2 == Mode::b1)))
                    throw Error(ErrorKind::invalid_argument, "unsupported two-mode gate");
                s.segments.push_back(segment(Regime::strong_drive_swap, times.t_swap, 0));
                s.segments.push_back(segment(Regime::weak_drive_cpfg, times.t_cpfg, 1));
                s.segments.push_back(segment(Regime::strong_drive_swap, times.t_swap, 0));
            }
            break;
        case CircuitOp::Kind::swap:
            s.segments.push_back(
                segment(Regime::strong_drive_swap, times.t_swap, mech_index(phonon_partner(op))));
            break;
        }
    }
    return s;
}

PulseSchedule schedule_from_circuit(const CloneConfig& cfg, const GateTimes& times) {
    return schedule_from_circuit(clone_circuit(cfg), times);
}

GateTimes default_gate_times(const SystemParams& p) {
    const GateTarget f1 = GateTarget::make(GateKind::cpfg_a_b1);
    const auto r = find_gate_time(f1, phase_factors(effective_params(p), f1.kerr_mask()), 20.0, 0.999);
    return {r.t_star, r.t_star};
}

DissipationModel default_dissipation_model(const SystemParams& p, const GateTimes& times) {
    DissipationModel m;
    m.system = p;
    m.swap_coupling = std::numbers::pi / (2.0 * times.t_swap);
    return m;
}

CloneOutcome run_dissipative(const PulseSchedule& schedule, const CloneConfig& cfg,
                             const DissipationModel& model, double kappa, double n_th) {
    if (!(kappa >= 0) || !(n_th >= 0))
        throw Error(ErrorKind::invalid_argument, "kappa and n_th must be >= 0");
    const int d = model.local_dim;
    const ModeLayout L = gate_layout(d);
    const QuantumState psi0 = clone_initial_state(cfg, d);
    Register r{L, false, {}, psi0.density(), 1.0};

    std::vector<Channel> channels{decay_channel(L, Mode::a, kappa)};
    for (int j = 0; j < 2; ++j)
        for (auto& c : thermal_channels(L, j == 0 ? Mode::b1 : Mode::b2, model.system.gamma[j], n_th))
            channels.push_back(std::move(c));

    const EffectiveParams eff = effective_params(model.system);
    for (const auto& a : schedule.leading) r.action(a);

    for (const PulseSegment& seg : schedule.segments) {
        Operator H;
        std::array<int, 3> dest{0, 1, 2}; // where a single excitation of (a, b1, b2) ends up
        if (seg.regime == Regime::strong_drive_swap) {
            std::array<cplx, 2> G{};
            for (int j = 0; j < 2; ++j)
                if (seg.coupling_mask[j]) {
                    G[j] = model.swap_coupling;
                    std::swap(dest[0], dest[1 + j]);
                }
            const auto lp = LinearizedParams::direct(G, model.swap_frequency,
                                                     {model.swap_frequency, model.swap_frequency},
                                                     kappa, model.system.gamma);
            H = build_linearized_hamiltonian(lp, L);
        } else {
            const std::array<bool, 2> mask =
                seg.regime == Regime::weak_drive_cpfg ? seg.kerr_mask : std::array<bool, 2>{false, false};
            H = build_effective_hamiltonian(eff.masked(mask), L);
        }
        if (seg.duration > 0) {
            auto spec = EvolutionSpec::constant(H, channels, seg.duration, {}, model.tol);
            const auto res = evolve_master(spec, QuantumState::unchecked_density(L, r.rho));
            r.rho = res.final_state().density();
            if (model.phase_correction) {
                const Matrix U = unitary_propagator(H, seg.duration);
                std::array<double, 3> phi{};
                for (int m = 0; m < 3; ++m) {
                    std::vector<int> src(3, 0), dst(3, 0);
                    src[m] = 1;
                    dst[dest[m]] = 1;
                    phi[dest[m]] = -std::arg(U(L.basis_index(dst), L.basis_index(src)));
                }
                Vector D(L.total_dim());
                for (long k = 0; k < L.total_dim(); ++k) {
                    const auto occ = L.occupations(k);
                    D(k) = std::polar(1.0, occ[0] * phi[0] + occ[1] * phi[1] + occ[2] * phi[2]);
                }
                r.unitary(Matrix(D.asDiagonal()));
            }
        }
        for (const auto& a : seg.end_actions) r.action(a);
    }
    CloneOutcome out = outcome_from(r, cfg);
    out.dissipative = true;
    out.kappa = kappa;
    out.n_th = n_th;
    return out;
}

} // namespace phoclone
