#pragma once

#include <vector>

#include "phoclone/ode.hpp"
#include "phoclone/operator.hpp"

namespace phoclone {

struct Channel {
    Operator op;
    double rate = 0.0;
};

struct EvolutionSegment {
    Operator hamiltonian;
    std::vector<Channel> channels;
    double duration = 0.0;
};

struct EvolutionSpec {
    std::vector<EvolutionSegment> segments;
    Tolerance tol;
    std::vector<double> record_times; // empty: record t_end only
    long max_steps = 5'000'000;

    static EvolutionSpec constant(Operator H, std::vector<Channel> channels, double t_end,
                                  std::vector<double> record_times = {}, Tolerance tol = {});
    double t_end() const;
};

struct EvolutionDiagnostics {
    double trace_drift = 0.0;
    double hermiticity_error = 0.0;
    double min_eigenvalue = 0.0;
    bool positivity_violated = false; // min eigenvalue < -1e-8, flagged only
    long accepted_steps = 0;
    long rejected_steps = 0;
    double error_estimate = 0.0;
};

struct EvolutionResult {
    std::vector<double> times;
    std::vector<QuantumState> states;
    EvolutionDiagnostics diagnostics;
    const QuantumState& final_state() const { return states.back(); }
};

// exp(-i H t) via eigendecomposition of the Hermitian H.
Matrix unitary_propagator(const Operator& H, double t);
QuantumState evolve_unitary(const Operator& H, const QuantumState& psi0, double t);

EvolutionResult evolve_master(const EvolutionSpec& spec, const QuantumState& rho0);

// Column-stacking vectorization: vec(A X B) = (B^T kron A) vec(X).
Matrix liouvillian(const Operator& H, const std::vector<Channel>& channels);
QuantumState steady_state(const EvolutionSpec& spec);

// kappa D_a.
Channel decay_channel(const ModeLayout& layout, Mode mode, double rate);
// gamma (n+1) D_b and gamma n D_b^+.
std::vector<Channel> thermal_channels(const ModeLayout& layout, Mode mode, double gamma, double n_th);

} // namespace phoclone
