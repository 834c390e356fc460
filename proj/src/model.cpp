#include "phoclone/model.hpp"

#include <cmath>
#include <sstream>

namespace phoclone {

namespace {

constexpr std::array<Mode, 2> kAux{Mode::bA1, Mode::bA2};
constexpr std::array<Mode, 2> kMech{Mode::b1, Mode::b2};

void require_modes(const ModeLayout& layout, std::initializer_list<Mode> modes) {
    for (Mode m : modes)
        if (!layout.contains(m))
            throw Error(ErrorKind::layout_mismatch,
                        "layout is missing mode " + std::string(mode_name(m)));
}

Operator drive_term(const SystemParams& p, const ModeLayout& layout, Frame frame, double t) {
    const Operator a = ladder(layout, Mode::a);
    if (frame == Frame::drive_rotating) return cplx(p.epsilon) * (a + a.adjoint());
    const cplx ph = std::polar(1.0, -p.omega_d * t);
    return (p.epsilon * ph) * a.adjoint() + (p.epsilon * std::conj(ph)) * a;
}

} // namespace

void SystemParams::validate() const {
    auto bad = [](const char* what) {
        throw Error(ErrorKind::invalid_argument, std::string(what) + " must be finite and >= 0");
    };
    if (!(kappa >= 0) || !std::isfinite(kappa)) bad("kappa");
    for (int j = 0; j < 2; ++j) {
        if (!(gamma_A[j] >= 0) || !std::isfinite(gamma_A[j])) bad("gamma_A");
        if (!(gamma[j] >= 0) || !std::isfinite(gamma[j])) bad("gamma");
        if (!(n_th[j] >= 0) || !std::isfinite(n_th[j])) bad("n_th");
    }
    for (double x : {omega_c, omega_d, epsilon, omega_A[0], omega_A[1], omega_m[0], omega_m[1],
                     g[0], g[1], V[0], V[1]})
        if (!std::isfinite(x)) throw Error(ErrorKind::invalid_argument, "non-finite parameter");
}

Operator build_full_hamiltonian(const SystemParams& p, const ModeLayout& layout, Frame frame,
                                double t) {
    p.validate();
    require_modes(layout, {Mode::a, Mode::bA1, Mode::bA2, Mode::b1, Mode::b2});
    const Operator na = number(layout, Mode::a);
    const double wc = frame == Frame::lab ? p.omega_c : p.omega_c - p.omega_d;
    Operator H = cplx(wc) * na;
    for (int j = 0; j < 2; ++j) {
        const Operator bA = ladder(layout, kAux[j]);
        const Operator b = ladder(layout, kMech[j]);
        const Operator bAd = bA.adjoint();
        // (bA + bA^+)^2 normal ordered before truncation.
        const Operator quad = bA * bA + bAd * bAd + cplx(2.0) * (bAd * bA) +
                              Operator::identity(layout);
        H = H + cplx(p.omega_A[j]) * (bAd * bA) - cplx(p.g[j]) * (na * quad) +
            cplx(p.omega_m[j]) * (b.adjoint() * b) + cplx(p.V[j]) * (bAd * b + b.adjoint() * bA);
    }
    return H + drive_term(p, layout, frame, t);
}

Operator build_rwa_hamiltonian(const SystemParams& p, const ModeLayout& layout, Frame frame,
                               double t) {
    p.validate();
    require_modes(layout, {Mode::a});
    for (int j = 0; j < 2; ++j)
        if (layout.contains(kAux[j]) != layout.contains(kMech[j]))
            throw Error(ErrorKind::layout_mismatch,
                        "RWA layout needs b_Aj and b_j together for each pair");
    const Operator na = number(layout, Mode::a);
    const double wc_prime = p.omega_c - p.g[0] - p.g[1];
    Operator H = cplx(frame == Frame::lab ? wc_prime : wc_prime - p.omega_d) * na;
    for (int j = 0; j < 2; ++j) {
        if (!layout.contains(kAux[j])) continue;
        const Operator bA = ladder(layout, kAux[j]);
        const Operator b = ladder(layout, kMech[j]);
        const Operator nA = bA.adjoint() * bA;
        H = H + cplx(p.omega_A[j]) * nA - cplx(2.0 * p.g[j]) * (na * nA) +
            cplx(p.omega_m[j]) * (b.adjoint() * b) +
            cplx(p.V[j]) * (bA.adjoint() * b + bA * b.adjoint());
    }
    return H + drive_term(p, layout, frame, t);
}

EffectiveParams effective_params(const SystemParams& p) {
    p.validate();
    EffectiveParams e;
    e.Delta_c_prime = p.delta_c_prime();
    for (int j = 0; j < 2; ++j) {
        e.A[j] = cplx((p.gamma_A[j] - p.gamma[j]) / 2.0, p.omega_A[j] - p.omega_m[j]);
        const double a2 = std::norm(e.A[j]);
        if (a2 == 0.0)
            throw Error(ErrorKind::degenerate_elimination,
                        "|A| = 0: omega_A = omega_m and gamma_A = gamma for pair " +
                            std::to_string(j + 1));
        e.delta[j] = p.V[j] * p.V[j] / a2;
        e.omega_eff[j] = p.omega_m[j] - e.delta[j] * (p.omega_A[j] - p.omega_m[j]);
        e.g_eff[j] = 2.0 * e.delta[j] * p.g[j];
        e.gamma_eff[j] = p.gamma[j] + e.delta[j] * (p.gamma_A[j] - p.gamma[j]);
    }
    return e;
}

EffectiveParams EffectiveParams::masked(std::array<bool, 2> kerr_on) const {
    EffectiveParams e = *this;
    for (int j = 0; j < 2; ++j)
        if (!kerr_on[j]) e.g_eff[j] = 0.0;
    return e;
}

Operator build_effective_hamiltonian(const EffectiveParams& eff, const ModeLayout& layout) {
    if (layout.size() != 3) throw Error(ErrorKind::layout_mismatch, "H_eff needs layout (a, b_1, b_2)");
    require_modes(layout, {Mode::a, Mode::b1, Mode::b2});
    const Operator na = number(layout, Mode::a);
    Operator H = cplx(eff.Delta_c_prime) * na;
    for (int j = 0; j < 2; ++j) {
        const Operator nb = number(layout, kMech[j]);
        H = H + cplx(eff.omega_eff[j]) * nb - cplx(eff.g_eff[j]) * (na * nb);
    }
    return H;
}

LinearizedParams LinearizedParams::direct(std::array<cplx, 2> G_eff, double omega_c_eff,
                                          Pair omega, double kappa_eff, Pair gamma_eff) {
    LinearizedParams lp;
    lp.G_eff = G_eff;
    lp.G_eff_exact = G_eff;
    lp.omega_c_eff = omega_c_eff;
    lp.Delta_c = omega_c_eff;
    lp.omega = omega;
    lp.omega_m_shifted = omega;
    lp.kappa_eff = kappa_eff;
    lp.gamma_eff = gamma_eff;
    return lp;
}

LinearizedParams linearized_params(const SystemParams& p, cplx alpha, std::array<cplx, 2> beta) {
    p.validate();
    LinearizedParams lp;
    lp.Delta_c = p.delta_c_prime();
    for (int j = 0; j < 2; ++j) lp.Delta_c -= 2.0 * p.g[j] * std::norm(beta[j]);
    lp.omega_c_eff = lp.Delta_c;
    lp.kappa_eff = p.kappa;
    for (int j = 0; j < 2; ++j) {
        lp.G[j] = 2.0 * alpha * std::conj(beta[j]) * p.g[j];
        const double wmp = p.omega_A[j] - 2.0 * p.g[j] * std::norm(alpha);
        lp.omega_m_shifted[j] = wmp;

        const double dc = wmp - lp.Delta_c;
        const double gc = p.gamma_A[j] - p.kappa;
        const double den_c = dc * dc + gc * gc / 4.0;
        const double G2 = std::norm(lp.G[j]);
        if (G2 > 0.0) {
            if (den_c == 0.0)
                throw Error(ErrorKind::singular_detuning, "omega_m' = Delta_c with no damping");
            lp.omega_c_eff -= G2 * dc / den_c;
            lp.kappa_eff += G2 * gc / den_c;
        }

        const double dm = wmp - p.omega_m[j];
        const double gm = p.gamma_A[j] - p.gamma[j];
        const double den_m = dm * dm + gm * gm / 4.0;
        if (dm == 0.0)
            throw Error(ErrorKind::singular_detuning,
                        "omega_m' = omega_m for pair " + std::to_string(j + 1) +
                            ": G' diverges");
        lp.omega[j] = p.omega_m[j] - p.V[j] * p.V[j] * dm / den_m;
        lp.gamma_eff[j] = p.gamma[j] + p.V[j] * p.V[j] * gm / den_m;
        lp.G_eff[j] = lp.G[j] * p.V[j] / dm;
        lp.G_eff_exact[j] = cplx(0, 1) * lp.G[j] * p.V[j] / cplx(gm / 2.0, dm);
    }
    return lp;
}

MeanFieldState thermal_seed(const SystemParams& p) {
    MeanFieldState s;
    for (int j = 0; j < 2; ++j) {
        s.beta[j] = std::sqrt(p.n_th[j]);
        s.beta_b[j] = std::sqrt(p.n_th[j]);
    }
    return s;
}

MeanFieldTrajectory mean_field_trajectory(const SystemParams& p, const MeanFieldState& initial,
                                          double t_end, double dt, const Tolerance& tol) {
    p.validate();
    if (!(dt > 0)) throw Error(ErrorKind::invalid_argument, "dt must be > 0");
    if (!(t_end >= initial.t)) throw Error(ErrorKind::invalid_argument, "t_end before initial time");

    const cplx I(0, 1);
    const double dcp = p.delta_c_prime();
    auto rhs = [&](double, const Vector& y, Vector& dy) {
        const cplx al = y(0);
        cplx shift = 0.0;
        for (int j = 0; j < 2; ++j) shift += 2.0 * I * p.g[j] * std::norm(y(1 + j));
        dy(0) = -(I * dcp + p.kappa / 2.0) * al + shift * al - I * p.epsilon;
        for (int j = 0; j < 2; ++j) {
            const cplx be = y(1 + j), bb = y(3 + j);
            dy(1 + j) = -(I * p.omega_A[j] + p.gamma_A[j] / 2.0) * be +
                        2.0 * I * p.g[j] * std::norm(al) * be - I * p.V[j] * bb;
            dy(3 + j) = -(I * p.omega_m[j] + p.gamma[j] / 2.0) * bb - I * p.V[j] * be;
        }
    };

    Vector y(5);
    y << initial.alpha, initial.beta[0], initial.beta[1], initial.beta_b[0], initial.beta_b[1];
    std::vector<double> stops;
    const long n = static_cast<long>(std::floor((t_end - initial.t) / dt + 1e-9));
    for (long k = 0; k <= n; ++k) stops.push_back(initial.t + k * dt);

    MeanFieldTrajectory out;
    auto observe = [&](std::size_t, double t, const Vector& v) {
        MeanFieldState s{v(0), {v(1), v(2)}, {v(3), v(4)}, t};
        Pair G{};
        for (int j = 0; j < 2; ++j) {
            const double dm = p.omega_A[j] - 2.0 * p.g[j] * std::norm(s.alpha) - p.omega_m[j];
            if (dm == 0.0)
                throw Error(ErrorKind::singular_detuning, "omega_m' = omega_m along trajectory");
            G[j] = std::abs(2.0 * s.alpha * std::conj(s.beta[j]) * p.g[j] * p.V[j] / dm);
        }
        out.states.push_back(s);
        out.G_eff_abs.push_back(G);
    };
    OdeOptions opts;
    opts.tol = tol;
    try {
        out.stats = integrate_dopri5(rhs, initial.t, y, stops, observe, opts);
    } catch (const Error& e) {
        if (e.kind() != ErrorKind::instability) throw;
        std::ostringstream os;
        os << "mean-field trajectory diverged (epsilon=" << p.epsilon << ", kappa=" << p.kappa
           << ", Delta_c'=" << dcp << ", g=" << p.g[0] << ", V=" << p.V[0]
           << ", omega_A=" << p.omega_A[0] << "): " << e.what();
        throw Error(ErrorKind::instability, os.str());
    }

    const std::size_t N = out.G_eff_abs.size();
    const std::size_t window = std::max<std::size_t>(2, N / 20);
    out.rolling_variance.resize(N, 0.0);
    for (std::size_t i = 0; i < N; ++i) {
        const std::size_t lo = i + 1 >= window ? i + 1 - window : 0;
        double m = 0, m2 = 0;
        for (std::size_t k = lo; k <= i; ++k) m += out.G_eff_abs[k][0];
        m /= double(i - lo + 1);
        for (std::size_t k = lo; k <= i; ++k) m2 += std::pow(out.G_eff_abs[k][0] - m, 2);
        out.rolling_variance[i] = m2 / double(i - lo + 1);
    }
    const std::size_t start = static_cast<std::size_t>(0.7 * double(N));
    double m = 0, m2 = 0;
    for (std::size_t k = start; k < N; ++k) m += out.G_eff_abs[k][0];
    m /= double(std::max<std::size_t>(1, N - start));
    for (std::size_t k = start; k < N; ++k) m2 += std::pow(out.G_eff_abs[k][0] - m, 2);
    out.late_mean = m;
    out.late_std = std::sqrt(m2 / double(std::max<std::size_t>(1, N - start)));
    return out;
}

} // namespace phoclone
