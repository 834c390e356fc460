#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "phoclone/cloning.hpp"

using namespace phoclone;

namespace {

constexpr double pi = std::numbers::pi;
const double kFmaxReal = std::sqrt(0.5 + std::sqrt(1.0 / 8.0));

Qubit haar(std::mt19937_64& rng) {
    std::normal_distribution<double> g;
    Qubit q{cplx(g(rng), g(rng)), cplx(g(rng), g(rng))};
    const double n = std::sqrt(std::norm(q[0]) + std::norm(q[1]));
    return {q[0] / n, q[1] / n};
}

Qubit real_input(double phi) { return {std::cos(phi), std::sin(phi)}; }

// Success probability of the projection onto the orthogonal complement.
double failure_probability(const CloneConfig& cfg) {
    Circuit c = clone_circuit(cfg);
    for (auto& op : c)
        if (op.kind == CircuitOp::Kind::project) op.keep = {-std::conj(op.keep[1]), std::conj(op.keep[0])};
    double p = 0;
    run_circuit_ideal(c, clone_initial_state(cfg), &p);
    return p;
}

} // namespace

TEST_CASE("pqcm success probability matches the projection weight") {
    for (double th : {0.2, 0.5, pi / 4})
        for (int member : {1, -1}) {
            const auto o = pqcm_ideal(CloneConfig::pqcm(th, member));
            CHECK(std::abs(o.success_probability - 1.0 / (1.0 + std::cos(2 * th))) <= 1e-10);
            CHECK(std::abs(o.fidelity_b1 - 1.0) <= 1e-10);
            CHECK(std::abs(o.fidelity_a - 1.0) <= 1e-10);
        }
    const auto o = pqcm_ideal(CloneConfig::pqcm(pi / 4));
    CHECK(o.success_probability == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("pqcm branch probabilities sum to one") {
    for (double th : {0.1, 0.3, 0.6})
        for (int member : {1, -1}) {
            const CloneConfig cfg = CloneConfig::pqcm(th, member);
            CHECK(std::abs(pqcm_ideal(cfg).success_probability + failure_probability(cfg) - 1.0) <= 1e-10);
        }
}

TEST_CASE("pqcm success branch is the product of two copies") {
    const CloneConfig cfg = CloneConfig::pqcm(0.4, -1);
    double p = 0;
    const QuantumState out = run_circuit_ideal(clone_circuit(cfg), clone_initial_state(cfg), &p);
    const Qubit phi = cfg.target();
    const QuantumState red = partial_trace(out, {Mode::b1});
    Matrix expect(2, 2);
    expect << std::norm(phi[0]), phi[0] * std::conj(phi[1]), phi[1] * std::conj(phi[0]), std::norm(phi[1]);
    CHECK((red.density() - expect).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("pqcm angle domain") {
    CHECK_THROWS_AS(CloneConfig::pqcm(0.0), Error);
    CHECK_THROWS_AS(CloneConfig::pqcm(1.0), Error);
    CHECK_THROWS_AS(CloneConfig::pqcm(0.5, 2).validate(), Error);
}

TEST_CASE("real-state cloner reaches the optimal fidelity symmetrically") {
    const auto o0 = real_state_clone_ideal(CloneConfig::real_state({1.0, 0.0}));
    CHECK(std::abs(o0.fidelity_b1 - o0.fidelity_a) <= 1e-10);
    double mean = 0;
    const int n = 50;
    for (int k = 0; k < n; ++k) {
        const auto o = real_state_clone_ideal(CloneConfig::real_state(real_input(pi * (k + 0.5) / n)));
        CHECK(std::abs(o.fidelity_b1 - o.fidelity_a) <= 1e-10);
        mean += o.fidelity_b1 / n;
    }
    CHECK(mean == doctest::Approx(kFmaxReal).epsilon(0.01));
}

TEST_CASE("real-state output amplitudes for input |0>") {
    // Oracle: apply CNOT(b1->a), CNOT(b2->b1), CNOT(a->b2) by hand to
    // |c>_a |1 0>_b1 |c>_b2 with ancillas cos(pi/8)|0> + sin(pi/8)|1>.
    const double c = std::cos(pi / 8), s = std::sin(pi / 8);
    std::array<double, 8> in{};
    for (int na = 0; na < 2; ++na)
        for (int nb2 = 0; nb2 < 2; ++nb2) in[4 * na + nb2] = (na ? s : c) * (nb2 ? s : c);
    std::array<double, 8> out{};
    for (int i = 0; i < 8; ++i) {
        int na = i >> 2, n1 = (i >> 1) & 1, n2 = i & 1;
        na ^= n1;
        n1 ^= n2;
        n2 ^= na;
        out[4 * na + 2 * n1 + n2] += in[i];
    }
    const CloneConfig cfg = CloneConfig::real_state({1.0, 0.0});
    const QuantumState st = run_circuit_ideal(clone_circuit(cfg), clone_initial_state(cfg));
    for (int i = 0; i < 8; ++i) CHECK(std::abs(st.vec()(i) - out[i]) <= 1e-12);
    CHECK(std::abs(cfg.theta1 - cfg.theta2) == 0.0);
    CHECK(std::cos(cfg.theta1) == doctest::Approx(std::sqrt(0.5 + 1 / std::sqrt(8.0))).epsilon(1e-14));
}

TEST_CASE("real-state input must be real up to a global phase") {
    CHECK_THROWS_AS(CloneConfig::real_state({1 / std::sqrt(2.0), cplx(0, 1) / std::sqrt(2.0)}).validate(), Error);
    CHECK_NOTHROW(CloneConfig::real_state({cplx(0, 1) * 0.6, cplx(0, 1) * 0.8}).validate());
}

TEST_CASE("uqcm reaches 5/6 for every input") {
    const auto o0 = uqcm_ideal(CloneConfig::uqcm({1.0, 0.0}));
    CHECK(std::abs(o0.overlap_b1 - 5.0 / 6.0) <= 1e-9);
    CHECK(std::abs(o0.overlap_a - 5.0 / 6.0) <= 1e-9);
    std::mt19937_64 rng(2024);
    double m = 0, m2 = 0;
    const int n = 50;
    for (int k = 0; k < n; ++k) {
        const auto o = uqcm_ideal(CloneConfig::uqcm(haar(rng)));
        CHECK(std::abs(o.overlap_b1 - 5.0 / 6.0) <= 1e-6);
        CHECK(std::abs(o.overlap_a - 5.0 / 6.0) <= 1e-6);
        m += o.overlap_b1 / n;
        m2 += o.overlap_b1 * o.overlap_b1 / n;
    }
    CHECK(std::sqrt(std::max(0.0, m2 - m * m)) <= 1e-6);
}

TEST_CASE("uqcm reference normalization is checked") {
    CloneConfig cfg = CloneConfig::uqcm();
    cfg.s = 0.8;
    cfg.t = 0.8;
    CHECK_THROWS_AS(cfg.validate(), Error);
}

TEST_CASE("uqcm with s = 1, t = 0 uses only the entangled reference") {
    // With |Phi+> on (b2, a) the circuit output is fixed; oracle: build the
    // circuit state by hand and compare to the library run.
    CloneConfig cfg = CloneConfig::uqcm({0.6, 0.8});
    cfg.s = 1.0;
    cfg.t = 0.0;
    const QuantumState psi0 = clone_initial_state(cfg);
    Vector expect = Vector::Zero(8);
    for (int x = 0; x < 2; ++x) {
        expect(0 * 4 + 2 * x + 0) += cfg.input[x] / std::sqrt(2.0);
        expect(1 * 4 + 2 * x + 1) += cfg.input[x] / std::sqrt(2.0);
    }
    CHECK((psi0.vec() - expect).norm() <= 1e-14);
    const QuantumState out = run_circuit_ideal(clone_circuit(cfg), psi0);
    CHECK(out.vec().norm() == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("ideal outcomes ignore a global phase on the input") {
    std::mt19937_64 rng(9);
    const Qubit q = haar(rng);
    const cplx ph = std::polar(1.0, 1.234);
    const auto u1 = uqcm_ideal(CloneConfig::uqcm(q)), u2 = uqcm_ideal(CloneConfig::uqcm({ph * q[0], ph * q[1]}));
    CHECK(std::abs(u1.overlap_b1 - u2.overlap_b1) <= 1e-12);
    const Qubit r = real_input(0.7);
    const auto r1 = real_state_clone_ideal(CloneConfig::real_state(r));
    const auto r2 = real_state_clone_ideal(CloneConfig::real_state({ph * r[0], ph * r[1]}));
    CHECK(std::abs(r1.fidelity_b1 - r2.fidelity_b1) <= 1e-12);
    CHECK(std::abs(r1.fidelity_a - r2.fidelity_a) <= 1e-12);
}

TEST_CASE("pulse-unit counts") {
    const GateTimes gt{pi, pi};
    CHECK(schedule_from_circuit(CloneConfig::real_state(), gt).pulse_units() == 5);
    CHECK(schedule_from_circuit(CloneConfig::uqcm(), gt).pulse_units() == 8);
    CHECK(schedule_from_circuit(CloneConfig::pqcm(0.5), gt).pulse_units() == 5);
    const PulseSchedule empty = schedule_from_circuit(Circuit{}, gt);
    CHECK(empty.segments.empty());
    CHECK(empty.total_duration() == 0.0);
}

TEST_CASE("phonon-phonon gate compiles to swap, CPFG, swap") {
    Circuit c;
    CircuitOp op;
    op.kind = CircuitOp::Kind::cz;
    op.m1 = Mode::b1;
    op.m2 = Mode::b2;
    c.push_back(op);
    const PulseSchedule s = schedule_from_circuit(c, {pi, pi});
    REQUIRE(s.segments.size() == 3);
    CHECK(s.segments[0].regime == Regime::strong_drive_swap);
    CHECK(s.segments[1].regime == Regime::weak_drive_cpfg);
    CHECK(s.segments[2].regime == Regime::strong_drive_swap);
}

TEST_CASE("schedules are deterministic") {
    const GateTimes gt{3.1, 3.2};
    const auto a = schedule_from_circuit(CloneConfig::uqcm(), gt), b = schedule_from_circuit(CloneConfig::uqcm(), gt);
    CHECK(a == b);
    CHECK(a.hash() == b.hash());
    CHECK(a.hash() != schedule_from_circuit(CloneConfig::real_state(), gt).hash());
}

TEST_CASE("dissipative runs reproduce the ideal circuit without noise") {
    const SystemParams p;
    const GateTimes gt = default_gate_times(p);
    const DissipationModel m = default_dissipation_model(p, gt);
    const CloneConfig cfg = CloneConfig::pqcm(0.5);
    const auto ideal = pqcm_ideal(cfg);
    const auto o = run_dissipative(schedule_from_circuit(cfg, gt), cfg, m, 0.0, 0.0);
    CHECK(o.dissipative);
    CHECK(std::abs(o.fidelity_b1 - ideal.fidelity_b1) <= 1e-3);
    CHECK(std::abs(o.fidelity_a - ideal.fidelity_a) <= 1e-3);
    CHECK(std::abs(o.success_probability - ideal.success_probability) <= 1e-3);
    const CloneConfig rs = CloneConfig::real_state(real_input(0.3));
    const auto ri = real_state_clone_ideal(rs);
    const auto ro = run_dissipative(schedule_from_circuit(rs, gt), rs, m, 0.0, 0.0);
    CHECK(std::abs(ro.fidelity_b1 - ri.fidelity_b1) <= 1e-3);
    CHECK(std::abs(ro.fidelity_a - ri.fidelity_a) <= 1e-3);
}

TEST_CASE("dissipative pqcm fidelity is monotone in kappa and n_th") {
    const SystemParams p;
    const GateTimes gt = default_gate_times(p);
    const DissipationModel m = default_dissipation_model(p, gt);
    const CloneConfig cfg = CloneConfig::pqcm(0.5);
    const PulseSchedule s = schedule_from_circuit(cfg, gt);
    double prev = 2;
    for (double kappa : {0.0, 0.005, 0.01, 0.02}) {
        const double f = run_dissipative(s, cfg, m, kappa, 0.0).fidelity_b1;
        CHECK(f <= prev + 1e-4);
        prev = f;
    }
    prev = 2;
    for (double nth : {0.0, 100.0, 300.0, 600.0}) {
        const double f = run_dissipative(s, cfg, m, 0.0, nth).fidelity_b1;
        CHECK(f <= prev + 1e-4);
        prev = f;
    }
}
