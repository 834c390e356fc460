#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "phoclone/model.hpp"

namespace phoclone {

using Amplitudes = std::array<cplx, 8>;

// mu[0..7] correspond to |c1>..|c8>, c_j = |n_a n_b1 n_b2> with index 4 n_a + 2 n_b1 + n_b2.
struct PhaseFactors {
    std::array<double, 8> mu{};
};

enum class GateKind { cpfg_a_b1, cpfg_a_b2, cpfg_a_b1b2, swap_a_b1, swap_a_b2 };

struct GateTarget {
    GateKind kind;
    std::array<int, 8> sign; // -1 on flipped basis states; all +1 for swaps

    static GateTarget make(GateKind kind);
    bool is_phase_gate() const;
    std::array<bool, 2> kerr_mask() const; // which g_j are switched on
};

struct GateTimeResult {
    double t_star = 0.0;
    double f_star = 0.0;
    std::optional<double> period;
};

using TransferMatrix = Eigen::Matrix3cd;

struct TransferCurves {
    std::vector<double> t;
    std::array<std::vector<double>, 2> a_to_b; // |[e^{Mt}]_{bj,a}|^2
    std::array<std::vector<double>, 2> b_to_a; // |[e^{Mt}]_{a,bj}|^2
    std::vector<double> norm_from_a;           // sum_k |[e^{Mt}]_{k,a}|^2
};

struct SingleQubitGates {
    Eigen::Matrix2cd U1, U2, H;
};

PhaseFactors phase_factors(const EffectiveParams& eff, std::array<bool, 2> kerr_on);

double cpfg_fidelity(const GateTarget& target, const PhaseFactors& mu, const Amplitudes& alphas,
                     double t);

// Normalized complex Gaussian amplitudes (Haar distributed on the unit sphere).
Amplitudes random_amplitudes(std::mt19937_64& rng);
// 32 random states from `seed` followed by the 8 basis states.
std::vector<Amplitudes> gate_test_ensemble(std::uint64_t seed = 20240601);

// Minimum of cpfg_fidelity over all normalized states at time t.
double worst_case_fidelity(const GateTarget& target, const PhaseFactors& mu, double t);

GateTimeResult find_gate_time(const GateTarget& target, const PhaseFactors& mu, double t_max,
                              double threshold, std::uint64_t seed = 20240601);

// Layout (a, b1, b2) in that order, any local dimension.
ModeLayout gate_layout(int dim = 2);
// Ideal 8x8 target unitary of a gate on the qubit space of gate_layout(2).
Matrix target_unitary(const GateTarget& target);

Operator build_linearized_hamiltonian(const LinearizedParams& lp, const ModeLayout& layout);
TransferMatrix transfer_matrix(const LinearizedParams& lp);
TransferCurves transfer_dynamics(const LinearizedParams& lp, const std::vector<double>& t_grid);
// First local maximum of T_{a->bj}(t) on a grid of step dt, golden-section refined.
std::optional<std::pair<double, double>> transfer_first_peak(const LinearizedParams& lp, int j,
                                                             double t_max, double dt = 0.01);

Eigen::Matrix2cd gate_u1(double theta);
Eigen::Matrix2cd gate_u2();
Eigen::Matrix2cd gate_h();
SingleQubitGates single_qubit_gates(double theta2);

// Golden-section maximization of f on [lo, hi].
template <class F>
std::pair<double, double> golden_maximize(F&& f, double lo, double hi, double xtol = 1e-12) {
    const double r = 0.6180339887498949;
    double x1 = hi - r * (hi - lo), x2 = lo + r * (hi - lo);
    double f1 = f(x1), f2 = f(x2);
    while (hi - lo > xtol) {
        if (f1 < f2) {
            lo = x1; x1 = x2; f1 = f2;
            x2 = lo + r * (hi - lo); f2 = f(x2);
        } else {
            hi = x2; x2 = x1; f2 = f1;
            x1 = hi - r * (hi - lo); f1 = f(x1);
        }
    }
    const double x = 0.5 * (lo + hi);
    return {x, f(x)};
}

} // namespace phoclone
