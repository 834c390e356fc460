#include "phoclone/operator.hpp"

#include <algorithm>
#include <cmath>

namespace phoclone {

std::string_view mode_name(Mode m) {
    switch (m) {
    case Mode::a: return "a";
    case Mode::bA1: return "b_A1";
    case Mode::bA2: return "b_A2";
    case Mode::b1: return "b_1";
    case Mode::b2: return "b_2";
    }
    return "?";
}

Mode mode_from_name(std::string_view name) {
    for (Mode m : {Mode::a, Mode::bA1, Mode::bA2, Mode::b1, Mode::b2})
        if (mode_name(m) == name) return m;
    throw Error(ErrorKind::unknown_label, "unknown mode label '" + std::string(name) + "'");
}

ModeLayout::ModeLayout(std::initializer_list<Entry> modes)
    : ModeLayout(std::vector<Entry>(modes)) {}

ModeLayout::ModeLayout(std::vector<Entry> modes) : modes_(std::move(modes)) {
    if (modes_.empty())
        throw Error(ErrorKind::invalid_argument, "layout needs at least one mode");
    for (std::size_t i = 0; i < modes_.size(); ++i) {
        if (modes_[i].dim < 2)
            throw Error(ErrorKind::invalid_argument, "local dimension must be >= 2");
        for (std::size_t j = 0; j < i; ++j)
            if (modes_[j].mode == modes_[i].mode)
                throw Error(ErrorKind::invalid_argument,
                            "duplicate mode label " + std::string(mode_name(modes_[i].mode)));
    }
    strides_.assign(modes_.size(), 1);
    total_ = 1;
    for (int i = static_cast<int>(modes_.size()) - 1; i >= 0; --i) {
        strides_[i] = total_;
        total_ *= modes_[i].dim;
    }
}

ModeLayout ModeLayout::uniform(std::initializer_list<Mode> modes, int dim) {
    std::vector<Entry> e;
    for (Mode m : modes) e.push_back({m, dim});
    return ModeLayout(std::move(e));
}

bool ModeLayout::contains(Mode m) const {
    return std::any_of(modes_.begin(), modes_.end(), [m](const Entry& e) { return e.mode == m; });
}

int ModeLayout::index_of(Mode m) const {
    for (std::size_t i = 0; i < modes_.size(); ++i)
        if (modes_[i].mode == m) return static_cast<int>(i);
    throw Error(ErrorKind::unknown_label,
                "mode " + std::string(mode_name(m)) + " not in layout");
}

long ModeLayout::basis_index(const std::vector<int>& occ) const {
    if (occ.size() != modes_.size())
        throw Error(ErrorKind::invalid_argument, "occupation list size mismatch");
    long idx = 0;
    for (std::size_t i = 0; i < occ.size(); ++i) {
        if (occ[i] < 0 || occ[i] >= modes_[i].dim)
            throw Error(ErrorKind::invalid_argument, "occupation outside truncation");
        idx += occ[i] * strides_[i];
    }
    return idx;
}

std::vector<int> ModeLayout::occupations(long index) const {
    std::vector<int> occ(modes_.size());
    for (std::size_t i = 0; i < modes_.size(); ++i) {
        occ[i] = static_cast<int>(index / strides_[i]);
        index %= strides_[i];
    }
    return occ;
}

Operator::Operator(ModeLayout l, Matrix m) : layout(std::move(l)), matrix(std::move(m)) {
    if (matrix.rows() != matrix.cols() || matrix.rows() != layout.total_dim())
        throw Error(ErrorKind::layout_mismatch, "operator dimension does not match layout");
}

Operator Operator::zero(const ModeLayout& l) {
    return {l, Matrix::Zero(l.total_dim(), l.total_dim())};
}

Operator Operator::identity(const ModeLayout& l) {
    return {l, Matrix::Identity(l.total_dim(), l.total_dim())};
}

double Operator::hermiticity_error() const {
    return (matrix - matrix.adjoint()).cwiseAbs().maxCoeff();
}

static void require_same(const ModeLayout& x, const ModeLayout& y) {
    if (!(x == y)) throw Error(ErrorKind::layout_mismatch, "operators built on different layouts");
}

Operator operator+(const Operator& x, const Operator& y) {
    require_same(x.layout, y.layout);
    return {x.layout, x.matrix + y.matrix};
}

Operator operator-(const Operator& x, const Operator& y) {
    require_same(x.layout, y.layout);
    return {x.layout, x.matrix - y.matrix};
}

Operator operator*(const Operator& x, const Operator& y) {
    require_same(x.layout, y.layout);
    return {x.layout, x.matrix * y.matrix};
}

Operator operator*(cplx c, const Operator& x) { return {x.layout, c * x.matrix}; }

Operator commutator(const Operator& x, const Operator& y) { return x * y - y * x; }

Matrix kron(const Matrix& x, const Matrix& y) {
    Matrix out(x.rows() * y.rows(), x.cols() * y.cols());
    for (Eigen::Index i = 0; i < x.rows(); ++i)
        for (Eigen::Index j = 0; j < x.cols(); ++j)
            out.block(i * y.rows(), j * y.cols(), y.rows(), y.cols()) = x(i, j) * y;
    return out;
}

Operator embed(const ModeLayout& layout, Mode label, const Matrix& local) {
    const int k = layout.index_of(label);
    const int d = layout.modes()[k].dim;
    if (local.rows() != d || local.cols() != d)
        throw Error(ErrorKind::layout_mismatch, "local operator dimension mismatch");
    Matrix m = Matrix::Identity(1, 1);
    for (int i = 0; i < layout.size(); ++i) {
        const int di = layout.modes()[i].dim;
        m = kron(m, i == k ? local : Matrix(Matrix::Identity(di, di)));
    }
    return {layout, m};
}

Operator ladder(const ModeLayout& layout, Mode label) {
    const int d = layout.dim_of(label);
    Matrix b = Matrix::Zero(d, d);
    for (int n = 1; n < d; ++n) b(n - 1, n) = std::sqrt(static_cast<double>(n));
    return embed(layout, label, b);
}

Operator number(const ModeLayout& layout, Mode label) {
    const int d = layout.dim_of(label);
    Matrix n = Matrix::Zero(d, d);
    for (int k = 0; k < d; ++k) n(k, k) = k;
    return embed(layout, label, n);
}

Operator compose(const ModeLayout& layout, const std::vector<Term>& terms) {
    Operator out = Operator::zero(layout);
    for (const Term& t : terms) {
        Matrix p = Matrix::Identity(layout.total_dim(), layout.total_dim());
        for (const Factor& f : t.product) {
            const Operator b = ladder(layout, f.mode);
            p = p * (f.dagger ? Matrix(b.matrix.adjoint()) : b.matrix);
        }
        out.matrix += t.coeff * p;
    }
    return out;
}

Operator compose(const std::vector<std::pair<cplx, std::vector<Operator>>>& terms) {
    if (terms.empty() || terms.front().second.empty())
        throw Error(ErrorKind::invalid_argument, "compose needs at least one factor");
    const ModeLayout& layout = terms.front().second.front().layout;
    Operator out = Operator::zero(layout);
    for (const auto& [c, factors] : terms) {
        Matrix p = Matrix::Identity(layout.total_dim(), layout.total_dim());
        for (const Operator& f : factors) {
            require_same(layout, f.layout);
            p = p * f.matrix;
        }
        out.matrix += c * p;
    }
    return out;
}

QuantumState QuantumState::pure(ModeLayout layout, Vector psi) {
    if (psi.size() != layout.total_dim())
        throw Error(ErrorKind::layout_mismatch, "state vector dimension does not match layout");
    if (std::abs(psi.norm() - 1.0) > 1e-10)
        throw Error(ErrorKind::invalid_argument, "state vector is not normalized");
    return QuantumState(std::move(layout), Kind::vector, std::move(psi), Matrix());
}

QuantumState QuantumState::unchecked_density(ModeLayout layout, Matrix rho) {
    if (rho.rows() != layout.total_dim() || rho.cols() != layout.total_dim())
        throw Error(ErrorKind::layout_mismatch, "density matrix dimension does not match layout");
    return QuantumState(std::move(layout), Kind::density, Vector(), std::move(rho));
}

QuantumState QuantumState::mixed(ModeLayout layout, Matrix rho) {
    QuantumState s = unchecked_density(std::move(layout), std::move(rho));
    if (s.trace_error() > 1e-8)
        throw Error(ErrorKind::invalid_argument, "density matrix trace is not 1");
    if ((s.rho_ - s.rho_.adjoint()).cwiseAbs().maxCoeff() > 1e-8)
        throw Error(ErrorKind::invalid_argument, "density matrix is not Hermitian");
    if (s.min_eigenvalue() < -1e-8)
        throw Error(ErrorKind::invalid_argument, "density matrix is not positive");
    return s;
}

QuantumState QuantumState::basis(const ModeLayout& layout, const std::vector<int>& occ) {
    Vector v = Vector::Zero(layout.total_dim());
    v(layout.basis_index(occ)) = 1.0;
    return pure(layout, std::move(v));
}

QuantumState QuantumState::product(const ModeLayout& layout, const std::vector<Vector>& locals) {
    if (static_cast<int>(locals.size()) != layout.size())
        throw Error(ErrorKind::layout_mismatch, "need one local vector per mode");
    Matrix v = Matrix::Ones(1, 1);
    for (int i = 0; i < layout.size(); ++i) {
        if (locals[i].size() != layout.modes()[i].dim)
            throw Error(ErrorKind::layout_mismatch, "local vector dimension mismatch");
        v = kron(v, locals[i]);
    }
    return pure(layout, v.col(0));
}

const Vector& QuantumState::vec() const {
    if (kind_ != Kind::vector) throw Error(ErrorKind::invalid_argument, "state is a density matrix");
    return vec_;
}

Matrix QuantumState::density() const {
    if (kind_ == Kind::density) return rho_;
    return vec_ * vec_.adjoint();
}

double QuantumState::trace_error() const {
    if (kind_ == Kind::vector) return std::abs(vec_.squaredNorm() - 1.0);
    return std::abs(rho_.trace() - cplx(1.0));
}

double QuantumState::min_eigenvalue() const {
    if (kind_ == Kind::vector) return 0.0;
    Matrix h = 0.5 * (rho_ + rho_.adjoint());
    Eigen::SelfAdjointEigenSolver<Matrix> es(h, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

QuantumState partial_trace(const QuantumState& state, const std::vector<Mode>& keep) {
    if (keep.empty()) throw Error(ErrorKind::invalid_argument, "partial trace needs a non-empty keep set");
    const ModeLayout& L = state.layout();
    std::vector<bool> kept(L.size(), false);
    for (Mode m : keep) kept[L.index_of(m)] = true;

    std::vector<ModeLayout::Entry> kept_entries;
    for (int i = 0; i < L.size(); ++i)
        if (kept[i]) kept_entries.push_back(L.modes()[i]);
    ModeLayout out_layout(kept_entries);

    const long D = L.total_dim();
    std::vector<long> kept_idx(D), traced_idx(D);
    for (long i = 0; i < D; ++i) {
        auto occ = L.occupations(i);
        long k = 0, t = 0;
        for (int m = 0; m < L.size(); ++m) {
            if (kept[m]) k = k * L.modes()[m].dim + occ[m];
            else t = t * L.modes()[m].dim + occ[m];
        }
        kept_idx[i] = k;
        traced_idx[i] = t;
    }

    const long K = out_layout.total_dim();
    Matrix out = Matrix::Zero(K, K);
    if (state.is_pure()) {
        const Vector& v = state.vec();
        for (long i = 0; i < D; ++i)
            for (long j = 0; j < D; ++j)
                if (traced_idx[i] == traced_idx[j])
                    out(kept_idx[i], kept_idx[j]) += v(i) * std::conj(v(j));
    } else {
        const Matrix rho = state.density();
        for (long i = 0; i < D; ++i)
            for (long j = 0; j < D; ++j)
                if (traced_idx[i] == traced_idx[j]) out(kept_idx[i], kept_idx[j]) += rho(i, j);
    }
    return QuantumState::unchecked_density(out_layout, std::move(out));
}

double overlap(const QuantumState& pure_ref, const QuantumState& s) {
    if (!(pure_ref.layout() == s.layout()))
        throw Error(ErrorKind::layout_mismatch, "fidelity arguments on different layouts");
    const Vector& psi = pure_ref.vec();
    if (s.is_pure()) return std::norm(psi.dot(s.vec()));
    return std::real(psi.dot(s.density() * psi));
}

static double clamp01(double x) { return std::clamp(x, 0.0, 1.0); }

double fidelity(const QuantumState& s1, const QuantumState& s2) {
    if (!(s1.layout() == s2.layout()))
        throw Error(ErrorKind::layout_mismatch, "fidelity arguments on different layouts");
    if (s1.is_pure()) return clamp01(std::sqrt(std::max(0.0, overlap(s1, s2))));
    if (s2.is_pure()) return clamp01(std::sqrt(std::max(0.0, overlap(s2, s1))));

    // Uhlmann root fidelity tr sqrt(sqrt(r) s sqrt(r)).
    Matrix r = s1.density(), s = s2.density();
    Eigen::SelfAdjointEigenSolver<Matrix> er(0.5 * (r + r.adjoint()));
    Eigen::VectorXd lam = er.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    Matrix sr = er.eigenvectors() * lam.asDiagonal() * er.eigenvectors().adjoint();
    Matrix m = sr * s * sr;
    Eigen::SelfAdjointEigenSolver<Matrix> em(0.5 * (m + m.adjoint()), Eigen::EigenvaluesOnly);
    return clamp01(em.eigenvalues().cwiseMax(0.0).cwiseSqrt().sum());
}

} // namespace phoclone
