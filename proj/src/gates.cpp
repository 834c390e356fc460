#include "phoclone/gates.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <unsupported/Eigen/MatrixFunctions>

namespace phoclone {

GateTarget GateTarget::make(GateKind kind) {
    GateTarget g{kind, {1, 1, 1, 1, 1, 1, 1, 1}};
    switch (kind) {
    case GateKind::cpfg_a_b1: g.sign[6] = g.sign[7] = -1; break;
    case GateKind::cpfg_a_b2: g.sign[5] = g.sign[7] = -1; break;
    case GateKind::cpfg_a_b1b2: g.sign[7] = -1; break;
    case GateKind::swap_a_b1:
    case GateKind::swap_a_b2: break;
    }
    return g;
}

bool GateTarget::is_phase_gate() const {
    return kind == GateKind::cpfg_a_b1 || kind == GateKind::cpfg_a_b2 ||
           kind == GateKind::cpfg_a_b1b2;
}

std::array<bool, 2> GateTarget::kerr_mask() const {
    switch (kind) {
    case GateKind::cpfg_a_b1: return {true, false};
    case GateKind::cpfg_a_b2: return {false, true};
    case GateKind::cpfg_a_b1b2: return {true, true};
    default: return {false, false};
    }
}

PhaseFactors phase_factors(const EffectiveParams& eff, std::array<bool, 2> kerr_on) {
    const EffectiveParams e = eff.masked(kerr_on);
    const double w1 = e.omega_eff[0], w2 = e.omega_eff[1];
    const double g1 = e.g_eff[0], g2 = e.g_eff[1];
    const double dc = e.Delta_c_prime;
    return {{0.0, w2, w1, w1 + w2, dc, dc + w2 - g2, dc + w1 - g1, dc + (w1 - g1) + (w2 - g2)}};
}

double cpfg_fidelity(const GateTarget& target, const PhaseFactors& mu, const Amplitudes& alphas,
                     double t) {
    if (!target.is_phase_gate())
        throw Error(ErrorKind::invalid_argument, "cpfg_fidelity needs a CPFG target");
    double norm = 0.0;
    for (const cplx& a : alphas) norm += std::norm(a);
    if (std::abs(norm - 1.0) > 1e-10)
        throw Error(ErrorKind::invalid_argument, "amplitudes are not normalized");
    cplx F = 0.0;
    for (int j = 0; j < 8; ++j) F += double(target.sign[j]) * std::norm(alphas[j]) * std::polar(1.0, -mu.mu[j] * t);
    return std::abs(F);
}

Amplitudes random_amplitudes(std::mt19937_64& rng) {
    std::normal_distribution<double> n(0.0, 1.0);
    Amplitudes a;
    double s = 0;
    for (auto& x : a) {
        x = cplx(n(rng), n(rng));
        s += std::norm(x);
    }
    for (auto& x : a) x /= std::sqrt(s);
    return a;
}

std::vector<Amplitudes> gate_test_ensemble(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<Amplitudes> out;
    for (int k = 0; k < 32; ++k) out.push_back(random_amplitudes(rng));
    for (int k = 0; k < 8; ++k) {
        Amplitudes b{};
        b[k] = 1.0;
        out.push_back(b);
    }
    return out;
}

double worst_case_fidelity(const GateTarget& target, const PhaseFactors& mu, double t) {
    // F = |sum_j p_j z_j| over probability vectors p: the distance from the
    // origin to the convex hull of the z_j on the unit circle.
    std::array<double, 8> ang;
    for (int j = 0; j < 8; ++j) ang[j] = std::arg(double(target.sign[j]) * std::polar(1.0, -mu.mu[j] * t));
    std::sort(ang.begin(), ang.end());
    double gap = ang[0] + 2 * std::numbers::pi - ang[7];
    for (int j = 1; j < 8; ++j) gap = std::max(gap, ang[j] - ang[j - 1]);
    const double width = 2 * std::numbers::pi - gap;
    return width >= std::numbers::pi ? 0.0 : std::cos(width / 2);
}

GateTimeResult find_gate_time(const GateTarget& target, const PhaseFactors& mu, double t_max,
                              double threshold, std::uint64_t seed) {
    if (!(t_max > 0)) throw Error(ErrorKind::invalid_argument, "t_max must be > 0");
    if (!target.is_phase_gate())
        throw Error(ErrorKind::invalid_argument, "find_gate_time needs a CPFG target");
    const auto ens = gate_test_ensemble(seed);
    std::vector<std::array<double, 8>> w;
    for (const auto& a : ens) {
        std::array<double, 8> x;
        for (int j = 0; j < 8; ++j) x[j] = target.sign[j] * std::norm(a[j]);
        w.push_back(x);
    }
    auto worst = [&](double t) {
        std::array<cplx, 8> ph;
        for (int j = 0; j < 8; ++j) ph[j] = std::polar(1.0, -mu.mu[j] * t);
        double m = 1.0;
        for (const auto& x : w) {
            cplx F = 0;
            for (int j = 0; j < 8; ++j) F += x[j] * ph[j];
            m = std::min(m, std::abs(F));
        }
        return m;
    };

    const double dt = 0.01;
    const long n = static_cast<long>(std::ceil(t_max / dt));
    std::vector<double> f(n + 1);
    for (long k = 0; k <= n; ++k) f[k] = worst(std::min(k * dt, t_max));

    // Local maxima of the worst-case curve, refined; t = 0 excluded.
    std::vector<std::pair<double, double>> peaks;
    for (long k = 1; k < n; ++k) {
        if (f[k] >= f[k - 1] && f[k] > f[k + 1]) {
            // Located on the ensemble, refined on the exact worst case so the
            // result does not depend on the seed.
            auto exact = [&](double t) { return worst_case_fidelity(target, mu, t); };
            auto p = golden_maximize(exact, (k - 1) * dt, std::min((k + 1) * dt, t_max));
            peaks.push_back(p);
        }
    }
    for (std::size_t i = 0; i < peaks.size(); ++i) {
        if (peaks[i].second < threshold) continue;
        GateTimeResult r{peaks[i].first, peaks[i].second, std::nullopt};
        for (std::size_t k = i + 1; k < peaks.size(); ++k)
            if (peaks[k].second >= threshold) {
                r.period = peaks[k].first - peaks[i].first;
                break;
            }
        return r;
    }
    throw Error(ErrorKind::not_found, "no gate time with worst-case fidelity >= threshold up to t_max");
}

ModeLayout gate_layout(int dim) { return ModeLayout::uniform({Mode::a, Mode::b1, Mode::b2}, dim); }

Matrix target_unitary(const GateTarget& target) {
    Matrix U = Matrix::Zero(8, 8);
    for (int i = 0; i < 8; ++i) {
        const int na = i >> 2, n1 = (i >> 1) & 1, n2 = i & 1;
        int j = i;
        if (target.kind == GateKind::swap_a_b1) j = (n1 << 2) | (na << 1) | n2;
        if (target.kind == GateKind::swap_a_b2) j = (n2 << 2) | (n1 << 1) | na;
        U(j, i) = double(target.sign[i]);
    }
    return U;
}

Operator build_linearized_hamiltonian(const LinearizedParams& lp, const ModeLayout& layout) {
    if (layout.size() != 3 || !layout.contains(Mode::a) || !layout.contains(Mode::b1) ||
        !layout.contains(Mode::b2))
        throw Error(ErrorKind::layout_mismatch, "H_lin needs layout (a, b_1, b_2)");
    const Operator a = ladder(layout, Mode::a);
    Operator H = cplx(lp.omega_c_eff) * (a.adjoint() * a);
    const std::array<Mode, 2> mech{Mode::b1, Mode::b2};
    for (int j = 0; j < 2; ++j) {
        const Operator b = ladder(layout, mech[j]);
        const Operator hop = lp.G_eff[j] * (a.adjoint() * b);
        H = H + cplx(lp.omega[j]) * (b.adjoint() * b) + hop + hop.adjoint();
    }
    return H;
}

TransferMatrix transfer_matrix(const LinearizedParams& lp) {
    const cplx I(0, 1);
    TransferMatrix M = TransferMatrix::Zero();
    M(0, 0) = -(I * lp.omega_c_eff + lp.kappa_eff / 2.0);
    for (int j = 0; j < 2; ++j) {
        M(0, 1 + j) = -I * lp.G_eff[j];
        M(1 + j, 0) = -I * std::conj(lp.G_eff[j]);
        M(1 + j, 1 + j) = -(I * lp.omega[j] + lp.gamma_eff[j] / 2.0);
    }
    return M;
}

TransferCurves transfer_dynamics(const LinearizedParams& lp, const std::vector<double>& t_grid) {
    TransferCurves c;
    const TransferMatrix M = transfer_matrix(lp);
    for (double t : t_grid) {
        if (!(t >= 0)) throw Error(ErrorKind::invalid_argument, "time grid must be >= 0");
        const TransferMatrix E = (M * t).exp();
        c.t.push_back(t);
        for (int j = 0; j < 2; ++j) {
            c.a_to_b[j].push_back(std::norm(E(1 + j, 0)));
            c.b_to_a[j].push_back(std::norm(E(0, 1 + j)));
        }
        c.norm_from_a.push_back(E.col(0).squaredNorm());
    }
    return c;
}

std::optional<std::pair<double, double>> transfer_first_peak(const LinearizedParams& lp, int j,
                                                             double t_max, double dt) {
    const TransferMatrix M = transfer_matrix(lp);
    auto T = [&](double t) { return std::norm(TransferMatrix((M * t).exp())(1 + j, 0)); };
    double f0 = T(0), f1 = T(dt);
    for (double t = 2 * dt; t <= t_max + 1e-12; t += dt) {
        const double f2 = T(t);
        if (f1 > f0 && f1 >= f2 && f1 > 1e-12) return golden_maximize(T, t - 2 * dt, t);
        f0 = f1;
        f1 = f2;
    }
    return std::nullopt;
}

Eigen::Matrix2cd gate_u1(double theta) {
    Eigen::Matrix2cd m;
    m << std::cos(theta), std::sin(theta), -std::sin(theta), std::cos(theta);
    return m;
}

Eigen::Matrix2cd gate_u2() {
    Eigen::Matrix2cd m;
    m << 1, 1, 1, -1;
    return m / std::numbers::sqrt2;
}

Eigen::Matrix2cd gate_h() {
    Eigen::Matrix2cd m;
    m << 1, -1, 1, 1;
    return m / std::numbers::sqrt2;
}

SingleQubitGates single_qubit_gates(double theta2) { return {gate_u1(theta2), gate_u2(), gate_h()}; }

} // namespace phoclone
