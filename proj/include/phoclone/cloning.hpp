#pragma once

#include <array>
#include <cstddef>
#include <numbers>
#include <string>
#include <vector>

#include "phoclone/dynamics.hpp"
#include "phoclone/gates.hpp"
#include "phoclone/model.hpp"

namespace phoclone {

enum class Protocol { pqcm, real_state, uqcm };

std::string_view protocol_name(Protocol p);
Protocol protocol_from_name(std::string_view name);

using Qubit = std::array<cplx, 2>;

struct CloneConfig {
    Protocol protocol = Protocol::pqcm;
    double theta = std::numbers::pi / 4; // pqcm: to-be-cloned angle
    int member = 1;                      // pqcm: +1 or -1 member of the state pair
    double theta1 = 0.0;
    double theta2 = 0.0;
    double s = 0.0;
    double t = 0.0;
    Qubit input{1.0, 0.0}; // real_state / uqcm input

    static CloneConfig pqcm(double theta, int member = 1);
    static CloneConfig real_state(Qubit input = {1.0, 0.0});
    static CloneConfig uqcm(Qubit input = {1.0, 0.0});

    double nu1() const; // from sin nu = (cos th - sin th)/sqrt2
    double nu2() const;
    // State each clone should match: |phi> for pqcm, the input otherwise.
    Qubit target() const;
    void validate() const;
    bool operator==(const CloneConfig&) const = default;
};

// pqcm angles from theta: theta1 = asin(sqrt((1+tan^4)/2))/2 and the
// half-sum form of theta2 (see README).
std::pair<double, double> pqcm_angles(double theta);

struct CircuitOp {
    enum class Kind { single, cz, swap, project };
    Kind kind = Kind::single;
    Mode m1 = Mode::a;  // single/project target; first mode of cz/swap
    Mode m2 = Mode::b1; // second mode of cz/swap
    Eigen::Matrix2cd gate = Eigen::Matrix2cd::Identity();
    Qubit keep{1.0, 0.0}; // project: retained state
    std::string label;
    bool operator==(const CircuitOp&) const = default;
};

using Circuit = std::vector<CircuitOp>;

Circuit clone_circuit(const CloneConfig& cfg);
// 3-qubit initial state on gate_layout(dim) (qubit amplitudes embedded).
QuantumState clone_initial_state(const CloneConfig& cfg, int dim = 2);

struct CloneOutcome {
    double success_probability = 1.0;
    double fidelity_b1 = 0.0; // sqrt(<psi|rho|psi>)
    double fidelity_a = 0.0;
    double overlap_b1 = 0.0;  // <psi|rho|psi>
    double overlap_a = 0.0;
    bool dissipative = false;
    CloneConfig config;
    double kappa = 0.0;
    double n_th = 0.0;
};

CloneOutcome pqcm_ideal(const CloneConfig& cfg);
CloneOutcome real_state_clone_ideal(const CloneConfig& cfg);
CloneOutcome uqcm_ideal(const CloneConfig& cfg);
CloneOutcome clone_ideal(const CloneConfig& cfg);
// Ideal-gate execution of an arbitrary circuit; success probability is the
// product of projection weights. Returns the final normalized state.
QuantumState run_circuit_ideal(const Circuit& c, const QuantumState& psi0, double* success = nullptr);

enum class Regime { weak_drive_cpfg, strong_drive_swap, idle };

struct BoundaryAction {
    bool project = false;
    Mode mode = Mode::a;
    Eigen::Matrix2cd gate = Eigen::Matrix2cd::Identity();
    Qubit keep{1.0, 0.0};
    std::string label;
    bool operator==(const BoundaryAction&) const = default;
};

struct PulseSegment {
    double duration = 0.0;
    Regime regime = Regime::idle;
    std::array<bool, 2> kerr_mask{false, false};     // weak: g_j on
    std::array<bool, 2> coupling_mask{false, false}; // strong: G_j' on
    std::vector<BoundaryAction> end_actions;
    bool operator==(const PulseSegment&) const = default;
};

struct GateTimes {
    double t_cpfg = std::numbers::pi;
    double t_swap = std::numbers::pi;
    bool operator==(const GateTimes&) const = default;
};

struct PulseSchedule {
    std::vector<BoundaryAction> leading;
    std::vector<PulseSegment> segments;
    GateTimes times;

    static constexpr double unit = 6.2; // pulse unit in 1/omega_m
    int pulse_units() const;
    double total_duration() const;
    bool operator==(const PulseSchedule&) const = default;
    std::size_t hash() const;
};

PulseSchedule schedule_from_circuit(const Circuit& c, const GateTimes& times);
PulseSchedule schedule_from_circuit(const CloneConfig& cfg, const GateTimes& times);

struct DissipationModel {
    SystemParams system;      // weak-drive constants (H_eff, gamma_j)
    double swap_coupling = 0.5; // resonant G' on swap segments
    double swap_frequency = 1.0;
    int local_dim = 3;
    Tolerance tol;
    bool phase_correction = true;
};

// t_cpfg from find_gate_time (F1 mask), t_swap = t_cpfg and the matching G'.
GateTimes default_gate_times(const SystemParams& p);
DissipationModel default_dissipation_model(const SystemParams& p, const GateTimes& times);

CloneOutcome run_dissipative(const PulseSchedule& schedule, const CloneConfig& cfg,
                             const DissipationModel& model, double kappa, double n_th);

} // namespace phoclone
