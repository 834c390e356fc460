#pragma once

#include <array>
#include <vector>

#include "phoclone/ode.hpp"
#include "phoclone/operator.hpp"

namespace phoclone {

using Pair = std::array<double, 2>;

// Bare model constants in units of omega_m. Defaults are the CPFG working
// point with Delta_c' = 2 (omega_d = 0 in the rotating frame bookkeeping).
struct SystemParams {
    double omega_c = 2.002;
    double omega_d = 0.0;
    double epsilon = 0.0;
    double kappa = 0.0;
    Pair omega_A{0.998, 0.998};
    Pair omega_m{1.0, 1.0};
    Pair g{1e-3, 1e-3};
    Pair V{0.046, 0.046};
    Pair gamma_A{1e-3, 1e-3};
    Pair gamma{1e-5, 1e-5};
    Pair n_th{0.0, 0.0};

    static constexpr double omega_m_hz = 2e6;

    double delta_c_prime() const { return omega_c - g[0] - g[1] - omega_d; }
    void validate() const;
    bool operator==(const SystemParams&) const = default;
};

struct EffectiveParams {
    Pair delta{};
    Pair omega_eff{};
    Pair g_eff{};
    Pair gamma_eff{};
    double Delta_c_prime = 0.0;
    std::array<cplx, 2> A{};

    // Copy with g_eff zeroed where mask is false.
    EffectiveParams masked(std::array<bool, 2> kerr_on) const;
};

struct LinearizedParams {
    std::array<cplx, 2> G{};
    std::array<cplx, 2> G_eff{};       // dissipation-free form G V / (w_m' - w_m)
    std::array<cplx, 2> G_eff_exact{}; // i G V / (i(w_m' - w_m) + (gA - g)/2)
    double omega_c_eff = 0.0;
    double kappa_eff = 0.0;
    Pair omega{};
    Pair gamma_eff{};
    Pair omega_m_shifted{};
    double Delta_c = 0.0;

    // Working point given directly by the swap coupling.
    static LinearizedParams direct(std::array<cplx, 2> G_eff, double omega_c_eff, Pair omega,
                                   double kappa_eff, Pair gamma_eff);
};

struct MeanFieldState {
    cplx alpha{};
    std::array<cplx, 2> beta{};
    std::array<cplx, 2> beta_b{};
    double t = 0.0;
};

struct MeanFieldTrajectory {
    std::vector<MeanFieldState> states;
    std::vector<Pair> G_eff_abs;           // |G_j'(t)| per record
    std::vector<double> rolling_variance;  // of |G_1'| over a trailing window
    double late_mean = 0.0;                // of |G_1'| over the last 30%
    double late_std = 0.0;
    OdeStats stats;
};

enum class Frame { lab, drive_rotating };

Operator build_full_hamiltonian(const SystemParams& p, const ModeLayout& layout,
                                Frame frame = Frame::drive_rotating, double t = 0.0);
// Layout must contain `a` and any number of complete (b_Aj, b_j) pairs.
Operator build_rwa_hamiltonian(const SystemParams& p, const ModeLayout& layout,
                               Frame frame = Frame::drive_rotating, double t = 0.0);

EffectiveParams effective_params(const SystemParams& p);
Operator build_effective_hamiltonian(const EffectiveParams& eff, const ModeLayout& layout);

LinearizedParams linearized_params(const SystemParams& p, cplx alpha, std::array<cplx, 2> beta);

MeanFieldState thermal_seed(const SystemParams& p);
MeanFieldTrajectory mean_field_trajectory(const SystemParams& p, const MeanFieldState& initial,
                                          double t_end, double dt, const Tolerance& tol = {});

} // namespace phoclone
