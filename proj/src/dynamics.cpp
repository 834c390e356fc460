#include "phoclone/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace phoclone {

EvolutionSpec EvolutionSpec::constant(Operator H, std::vector<Channel> channels, double t_end,
                                      std::vector<double> record_times, Tolerance tol) {
    EvolutionSpec s;
    s.segments.push_back({std::move(H), std::move(channels), t_end});
    s.record_times = std::move(record_times);
    s.tol = tol;
    return s;
}

double EvolutionSpec::t_end() const {
    double t = 0;
    for (const auto& s : segments) t += s.duration;
    return t;
}

Matrix unitary_propagator(const Operator& H, double t) {
    if (H.hermiticity_error() > 1e-10)
        throw Error(ErrorKind::invalid_argument, "Hamiltonian is not Hermitian");
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (H.matrix + H.matrix.adjoint()));
    Vector ph(es.eigenvalues().size());
    for (Eigen::Index k = 0; k < ph.size(); ++k) ph(k) = std::polar(1.0, -es.eigenvalues()(k) * t);
    return es.eigenvectors() * ph.asDiagonal() * es.eigenvectors().adjoint();
}

QuantumState evolve_unitary(const Operator& H, const QuantumState& psi0, double t) {
    if (!(H.layout == psi0.layout()))
        throw Error(ErrorKind::layout_mismatch, "Hamiltonian and state on different layouts");
    Vector v = unitary_propagator(H, t) * psi0.vec();
    v /= v.norm();
    return QuantumState::pure(psi0.layout(), std::move(v));
}

Channel decay_channel(const ModeLayout& layout, Mode mode, double rate) {
    if (!(rate >= 0)) throw Error(ErrorKind::invalid_argument, "decay rate must be >= 0");
    return {ladder(layout, mode), rate};
}

std::vector<Channel> thermal_channels(const ModeLayout& layout, Mode mode, double gamma,
                                      double n_th) {
    if (!(gamma >= 0) || !(n_th >= 0))
        throw Error(ErrorKind::invalid_argument, "thermal rate and occupation must be >= 0");
    const Operator b = ladder(layout, mode);
    return {{b, gamma * (n_th + 1.0)}, {b.adjoint(), gamma * n_th}};
}

namespace {

void check_segment(const EvolutionSegment& seg, const ModeLayout& layout) {
    if (!(seg.hamiltonian.layout == layout))
        throw Error(ErrorKind::layout_mismatch, "segment Hamiltonian on a different layout");
    if (!(seg.duration >= 0))
        throw Error(ErrorKind::invalid_argument, "segment duration must be >= 0");
    for (const Channel& c : seg.channels) {
        if (!(c.op.layout == layout))
            throw Error(ErrorKind::layout_mismatch, "collapse operator on a different layout");
        if (!(c.rate >= 0)) throw Error(ErrorKind::invalid_argument, "channel rate must be >= 0");
    }
}

struct Generator {
    Matrix Heff; // H - i/2 sum r L^+ L
    std::vector<std::pair<Matrix, double>> jumps;
};

Generator make_generator(const EvolutionSegment& seg) {
    Generator g;
    g.Heff = seg.hamiltonian.matrix;
    for (const Channel& c : seg.channels) {
        if (c.rate == 0.0) continue;
        g.Heff -= cplx(0, 0.5 * c.rate) * (c.op.matrix.adjoint() * c.op.matrix);
        g.jumps.emplace_back(c.op.matrix, c.rate);
    }
    return g;
}

} // namespace

EvolutionResult evolve_master(const EvolutionSpec& spec, const QuantumState& rho0) {
    const ModeLayout& layout = rho0.layout();
    for (const auto& seg : spec.segments) check_segment(seg, layout);
    const double t_end = spec.t_end();

    std::vector<double> rec = spec.record_times;
    if (rec.empty()) rec.push_back(t_end);
    if (!std::is_sorted(rec.begin(), rec.end()) || rec.front() < 0 ||
        rec.back() > t_end * (1 + 1e-12) + 1e-14)
        throw Error(ErrorKind::invalid_argument, "record_times must be sorted within [0, t_end]");

    const long D = layout.total_dim();
    Matrix rho = rho0.density();
    EvolutionResult res;
    auto record = [&](double t, const Matrix& r) {
        res.times.push_back(t);
        res.states.push_back(QuantumState::unchecked_density(layout, r));
        auto& d = res.diagnostics;
        d.trace_drift = std::max(d.trace_drift, std::abs(r.trace() - cplx(1.0)));
        d.hermiticity_error =
            std::max(d.hermiticity_error, (r - r.adjoint()).cwiseAbs().maxCoeff());
        const double me = res.states.back().min_eigenvalue();
        d.min_eigenvalue = res.states.size() == 1 ? me : std::min(d.min_eigenvalue, me);
        if (me < -1e-8) d.positivity_violated = true;
    };

    std::size_t next = 0;
    while (next < rec.size() && rec[next] <= 0.0) record(0.0, rho), ++next;

    Vector y = Eigen::Map<const Vector>(rho.data(), D * D);
    double t0 = 0.0;
    OdeOptions opts;
    opts.tol = spec.tol;
    for (std::size_t s = 0; s < spec.segments.size(); ++s) {
        const auto& seg = spec.segments[s];
        const double t1 = (s + 1 == spec.segments.size()) ? t_end : t0 + seg.duration;
        if (seg.duration == 0.0) continue;
        const Generator G = make_generator(seg);
        const Matrix HeffDag = G.Heff.adjoint();
        Matrix work(D, D);
        auto rhs = [&](double, const Vector& v, Vector& dv) {
            Eigen::Map<const Matrix> r(v.data(), D, D);
            Eigen::Map<Matrix> dr(dv.data(), D, D);
            dr.noalias() = cplx(0, -1) * (G.Heff * r);
            dr.noalias() += cplx(0, 1) * (r * HeffDag);
            for (const auto& [L, rate] : G.jumps) {
                work.noalias() = r * L.adjoint();
                dr.noalias() += rate * (L * work);
            }
        };
        std::vector<double> stops;
        std::vector<std::size_t> stop_rec;
        while (next < rec.size() && rec[next] <= t1 + 1e-12 * std::max(1.0, t1)) {
            stops.push_back(std::min(std::max(rec[next], t0), t1));
            stop_rec.push_back(next);
            ++next;
        }
        if (stops.empty() || stops.back() < t1) stops.push_back(t1), stop_rec.push_back(SIZE_MAX);
        opts.max_steps = spec.max_steps - res.diagnostics.accepted_steps - res.diagnostics.rejected_steps;
        OdeStats st;
        try {
            st = integrate_dopri5(
                rhs, t0, y, stops,
                [&](std::size_t k, double t, const Vector& v) {
                    if (stop_rec[k] == SIZE_MAX) return;
                    record(t, Eigen::Map<const Matrix>(v.data(), D, D));
                },
                opts);
        } catch (const Error& e) {
            std::ostringstream os;
            os << "master equation failed in segment " << s << " [" << t0 << ", " << t1
               << "], dim " << D << ", tol rel=" << spec.tol.rel << " abs=" << spec.tol.abs
               << ": " << e.what();
            throw Error(ErrorKind::integration_failure, os.str());
        }
        res.diagnostics.accepted_steps += st.accepted;
        res.diagnostics.rejected_steps += st.rejected;
        res.diagnostics.error_estimate += st.error_estimate;
        t0 = t1;
    }
    while (next < rec.size()) record(rec[next], Eigen::Map<const Matrix>(y.data(), D, D)), ++next;
    return res;
}

Matrix liouvillian(const Operator& H, const std::vector<Channel>& channels) {
    const long D = H.layout.total_dim();
    const Matrix I = Matrix::Identity(D, D);
    Matrix L = cplx(0, -1) * (kron(I, H.matrix) - kron(H.matrix.transpose(), I));
    for (const Channel& c : channels) {
        if (c.rate == 0.0) continue;
        const Matrix& o = c.op.matrix;
        const Matrix od = o.adjoint() * o;
        L += c.rate * (kron(o.conjugate(), o) - 0.5 * kron(I, od) - 0.5 * kron(od.transpose(), I));
    }
    return L;
}

QuantumState steady_state(const EvolutionSpec& spec) {
    if (spec.segments.empty()) throw Error(ErrorKind::invalid_argument, "no generator given");
    const auto& seg = spec.segments.front();
    const ModeLayout& layout = seg.hamiltonian.layout;
    check_segment(seg, layout);
    const long D = layout.total_dim();
    const Matrix L = liouvillian(seg.hamiltonian, seg.channels);
    Eigen::BDCSVD<Matrix> svd(L, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues(); // descending
    const Eigen::Index n = sv.size();
    const double scale = std::max(1.0, sv(0));
    if (n >= 2 && sv(n - 2) < 1e-9 * scale)
        throw Error(ErrorKind::degenerate_null_space, "Liouvillian null space is degenerate");
    Vector v = svd.matrixV().col(n - 1);
    Matrix rho = Eigen::Map<Matrix>(v.data(), D, D);
    rho = 0.5 * (rho + rho.adjoint());
    rho /= rho.trace();
    return QuantumState::mixed(layout, rho);
}

} // namespace phoclone
