#include <doctest.h>

#include <cmath>
#include <random>

#include "phoclone/dynamics.hpp"
#include "phoclone/gates.hpp"

using namespace phoclone;

namespace {

Vector random_vector(long n, std::mt19937_64& rng) {
    std::normal_distribution<double> g;
    Vector v(n);
    for (long k = 0; k < n; ++k) v(k) = cplx(g(rng), g(rng));
    return v / v.norm();
}

Operator random_hermitian(const ModeLayout& L, std::mt19937_64& rng) {
    std::normal_distribution<double> g;
    const long n = L.total_dim();
    Matrix A(n, n);
    for (long i = 0; i < n; ++i)
        for (long j = 0; j < n; ++j) A(i, j) = cplx(g(rng), g(rng));
    return {L, 0.5 * (A + A.adjoint())};
}

} // namespace

TEST_CASE("unitary evolution at t = 0 is the identity") {
    std::mt19937_64 rng(3);
    const ModeLayout L = gate_layout(2);
    const QuantumState psi = QuantumState::pure(L, random_vector(8, rng));
    const QuantumState out = evolve_unitary(random_hermitian(L, rng), psi, 0.0);
    CHECK((out.vec() - psi.vec()).norm() < 1e-14);
}

TEST_CASE("basis state c7 picks up the mu7 phase under H_eff") {
    const EffectiveParams e = effective_params(SystemParams{}).masked({true, false});
    const ModeLayout L = gate_layout(2);
    const Operator H = build_effective_hamiltonian(e, L);
    const double mu7 = e.Delta_c_prime + e.omega_eff[0] - e.g_eff[0];
    const double t = 1.234;
    const QuantumState out = evolve_unitary(H, QuantumState::basis(L, {1, 1, 0}), t);
    CHECK(std::abs(out.vec()(6) - std::polar(1.0, -mu7 * t)) < 1e-12);
}

TEST_CASE("unitary evolution preserves the norm") {
    std::mt19937_64 rng(5);
    const ModeLayout L = ModeLayout::uniform({Mode::a, Mode::b1}, 3);
    const Operator H = random_hermitian(L, rng);
    const QuantumState psi = QuantumState::pure(L, random_vector(9, rng));
    for (double t : {0.3, 2.0, 17.5}) CHECK(evolve_unitary(H, psi, t).vec().norm() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("closed-system master equation matches unitary evolution") {
    std::mt19937_64 rng(11);
    const ModeLayout L = gate_layout(2);
    const Operator H = random_hermitian(L, rng);
    const QuantumState psi = QuantumState::pure(L, random_vector(8, rng));
    const auto res = evolve_master(EvolutionSpec::constant(H, {}, 10.0), psi);
    const QuantumState ref = evolve_unitary(H, psi, 10.0);
    CHECK(fidelity(ref, res.final_state()) == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(res.diagnostics.trace_drift <= 1e-8);
    CHECK(res.diagnostics.hermiticity_error <= 1e-8);
}

TEST_CASE("pure cavity decay follows exp(-kappa t)") {
    const ModeLayout L{{Mode::a, 3}};
    const double kappa = 0.3;
    std::vector<double> times;
    for (int k = 1; k <= 10; ++k) times.push_back(k * 0.7);
    const auto res = evolve_master(
        EvolutionSpec::constant(Operator::zero(L), {decay_channel(L, Mode::a, kappa)}, 7.0, times),
        QuantumState::basis(L, {1}));
    const Matrix n = number(L, Mode::a).matrix;
    for (std::size_t k = 0; k < res.times.size(); ++k) {
        const double nbar = (n * res.states[k].density()).trace().real();
        CHECK(nbar == doctest::Approx(std::exp(-kappa * res.times[k])).epsilon(1e-7));
    }
}

TEST_CASE("trace, Hermiticity and positivity are tracked") {
    std::mt19937_64 rng(13);
    const ModeLayout L = gate_layout(2);
    std::vector<Channel> ch{decay_channel(L, Mode::a, 0.05)};
    for (auto& c : thermal_channels(L, Mode::b1, 0.01, 5.0)) ch.push_back(c);
    const auto res = evolve_master(EvolutionSpec::constant(random_hermitian(L, rng), ch, 20.0),
                                   QuantumState::pure(L, random_vector(8, rng)));
    CHECK(res.diagnostics.trace_drift <= 1e-8);
    CHECK(res.diagnostics.hermiticity_error <= 1e-8);
    CHECK(res.diagnostics.min_eigenvalue >= -1e-8);
    CHECK_FALSE(res.diagnostics.positivity_violated);
}

TEST_CASE("splitting a constant generator at an interior time is seamless") {
    std::mt19937_64 rng(17);
    const ModeLayout L = gate_layout(2);
    const Operator H = random_hermitian(L, rng);
    std::vector<Channel> ch{decay_channel(L, Mode::b2, 0.1)};
    const QuantumState psi = QuantumState::pure(L, random_vector(8, rng));
    const auto whole = evolve_master(EvolutionSpec::constant(H, ch, 5.0), psi);
    EvolutionSpec split;
    split.segments = {{H, ch, 2.0}, {H, ch, 3.0}};
    const auto parts = evolve_master(split, psi);
    CHECK((whole.final_state().density() - parts.final_state().density()).cwiseAbs().maxCoeff() < 1e-7);
}

TEST_CASE("halving the tolerance moves the result by less than the error estimate") {
    std::mt19937_64 rng(19);
    const ModeLayout L = gate_layout(2);
    const Operator H = random_hermitian(L, rng);
    std::vector<Channel> ch{decay_channel(L, Mode::a, 0.02)};
    const QuantumState psi = QuantumState::pure(L, random_vector(8, rng));
    const auto coarse = evolve_master(EvolutionSpec::constant(H, ch, 6.0, {}, {1e-6, 1e-8}), psi);
    const auto fine = evolve_master(EvolutionSpec::constant(H, ch, 6.0, {}, {5e-7, 5e-9}), psi);
    const double diff = (coarse.final_state().density() - fine.final_state().density()).norm();
    CHECK(diff <= coarse.diagnostics.error_estimate);
}

TEST_CASE("steady states of decay channels") {
    const ModeLayout L{{Mode::a, 3}};
    const auto vac = steady_state(EvolutionSpec::constant(Operator::zero(L), {decay_channel(L, Mode::a, 0.5)}, 1.0));
    CHECK(std::abs(vac.density()(0, 0) - 1.0) < 1e-10);
    const ModeLayout M{{Mode::b1, 3}};
    const auto ground = steady_state(EvolutionSpec::constant(Operator::zero(M), thermal_channels(M, Mode::b1, 0.2, 0.0), 1.0));
    CHECK(std::abs(ground.density()(0, 0) - 1.0) < 1e-10);
}

TEST_CASE("thermal steady state on dim 3 solves the rate balance") {
    const ModeLayout M{{Mode::b1, 3}};
    const double nbar = 1.0, gamma = 0.1;
    const auto ss = steady_state(EvolutionSpec::constant(Operator::zero(M), thermal_channels(M, Mode::b1, gamma, nbar), 1.0));
    const double r = nbar / (nbar + 1);
    const double Z = 1 + r + r * r;
    const Matrix rho = ss.density();
    CHECK(rho(0, 0).real() == doctest::Approx(1 / Z).epsilon(1e-10));
    CHECK(rho(1, 1).real() == doctest::Approx(r / Z).epsilon(1e-10));
    CHECK(rho(2, 2).real() == doctest::Approx(r * r / Z).epsilon(1e-10));
}

TEST_CASE("long thermal evolution approaches the superoperator null vector") {
    const ModeLayout M{{Mode::b1, 3}};
    const auto ch = thermal_channels(M, Mode::b1, 0.5, 1.0);
    // Oracle: null vector of the brute-force column-stacked Liouvillian.
    const Matrix Lv = liouvillian(Operator::zero(M), ch);
    Eigen::ComplexEigenSolver<Matrix> es(Lv);
    Eigen::Index k0 = 0;
    es.eigenvalues().cwiseAbs().minCoeff(&k0);
    Vector v = es.eigenvectors().col(k0);
    Matrix rho_ss = Eigen::Map<Matrix>(v.data(), 3, 3);
    rho_ss /= rho_ss.trace();
    const auto res = evolve_master(EvolutionSpec::constant(Operator::zero(M), ch, 120.0), QuantumState::basis(M, {2}));
    CHECK((res.final_state().density() - rho_ss).cwiseAbs().maxCoeff() < 1e-8);
    const auto ss = steady_state(EvolutionSpec::constant(Operator::zero(M), ch, 1.0));
    CHECK((ss.density() - rho_ss).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("Liouvillian agrees with the master-equation right-hand side") {
    std::mt19937_64 rng(23);
    const ModeLayout L = ModeLayout::uniform({Mode::a, Mode::b1}, 2);
    const Operator H = random_hermitian(L, rng);
    std::vector<Channel> ch{decay_channel(L, Mode::a, 0.3), decay_channel(L, Mode::b1, 0.1)};
    const Vector psi = random_vector(4, rng);
    const Matrix rho = psi * psi.adjoint();
    Matrix expect = cplx(0, -1) * (H.matrix * rho - rho * H.matrix);
    for (const auto& c : ch) {
        const Matrix& o = c.op.matrix;
        expect += c.rate * (o * rho * o.adjoint() - 0.5 * (o.adjoint() * o * rho + rho * o.adjoint() * o));
    }
    Matrix r = rho;
    const Vector got = liouvillian(H, ch) * Eigen::Map<const Vector>(r.data(), 16);
    CHECK((got - Eigen::Map<const Vector>(expect.data(), 16)).norm() < 1e-13);
}

TEST_CASE("degenerate null space is reported") {
    const ModeLayout L{{Mode::a, 2}};
    try {
        steady_state(EvolutionSpec::constant(Operator::zero(L), {}, 1.0));
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::degenerate_null_space);
    }
}

TEST_CASE("negative rates and mismatched layouts are rejected") {
    const ModeLayout L{{Mode::a, 2}};
    CHECK_THROWS_AS(decay_channel(L, Mode::a, -0.1), Error);
    const ModeLayout M{{Mode::b1, 2}};
    CHECK_THROWS_AS(evolve_master(EvolutionSpec::constant(Operator::zero(L), {}, 1.0), QuantumState::basis(M, {0})), Error);
}
