#pragma once

#include <complex>
#include <initializer_list>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "phoclone/errors.hpp"

namespace phoclone {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

enum class Mode { a, bA1, bA2, b1, b2 };

std::string_view mode_name(Mode m);
Mode mode_from_name(std::string_view name);

// Ordered composite of truncated oscillators. The first mode is the most
// significant Kronecker factor.
class ModeLayout {
public:
    struct Entry {
        Mode mode;
        int dim;
        bool operator==(const Entry&) const = default;
    };

    ModeLayout() = default;
    ModeLayout(std::initializer_list<Entry> modes);
    explicit ModeLayout(std::vector<Entry> modes);

    static ModeLayout uniform(std::initializer_list<Mode> modes, int dim);

    int size() const { return static_cast<int>(modes_.size()); }
    long total_dim() const { return total_; }
    const std::vector<Entry>& modes() const { return modes_; }
    bool contains(Mode m) const;
    int index_of(Mode m) const; // throws unknown_label
    int dim_of(Mode m) const { return modes_[index_of(m)].dim; }
    long stride(int idx) const { return strides_[idx]; }

    // Basis index of the product state with the given occupation per mode.
    long basis_index(const std::vector<int>& occupations) const;
    std::vector<int> occupations(long index) const;

    bool operator==(const ModeLayout& o) const { return modes_ == o.modes_; }

private:
    std::vector<Entry> modes_;
    std::vector<long> strides_;
    long total_ = 1;
};

struct Operator {
    ModeLayout layout;
    Matrix matrix;

    Operator() = default;
    Operator(ModeLayout l, Matrix m);

    static Operator zero(const ModeLayout& l);
    static Operator identity(const ModeLayout& l);

    Operator adjoint() const { return {layout, matrix.adjoint()}; }
    double hermiticity_error() const;
};

Operator operator+(const Operator& x, const Operator& y);
Operator operator-(const Operator& x, const Operator& y);
Operator operator*(const Operator& x, const Operator& y);
Operator operator*(cplx c, const Operator& x);
Operator commutator(const Operator& x, const Operator& y);

// Annihilation operator of `label`, embedded with identities elsewhere.
Operator ladder(const ModeLayout& layout, Mode label);
Operator number(const ModeLayout& layout, Mode label);

// Embeds a local (dim x dim) matrix acting on one mode.
Operator embed(const ModeLayout& layout, Mode label, const Matrix& local);

struct Factor {
    Mode mode;
    bool dagger = false;
};
inline Factor ann(Mode m) { return {m, false}; }
inline Factor cre(Mode m) { return {m, true}; }

struct Term {
    cplx coeff;
    std::vector<Factor> product; // empty product = identity
};

Operator compose(const ModeLayout& layout, const std::vector<Term>& terms);
Operator compose(const std::vector<std::pair<cplx, std::vector<Operator>>>& terms);

class QuantumState {
public:
    enum class Kind { vector, density };

    static QuantumState pure(ModeLayout layout, Vector psi);
    static QuantumState mixed(ModeLayout layout, Matrix rho);
    // No invariant checks; used for intermediate integrator output.
    static QuantumState unchecked_density(ModeLayout layout, Matrix rho);
    static QuantumState basis(const ModeLayout& layout, const std::vector<int>& occupations);
    static QuantumState product(const ModeLayout& layout, const std::vector<Vector>& locals);

    const ModeLayout& layout() const { return layout_; }
    Kind kind() const { return kind_; }
    bool is_pure() const { return kind_ == Kind::vector; }
    const Vector& vec() const; // throws if density
    Matrix density() const;    // promotes vectors

    double trace_error() const;
    double min_eigenvalue() const;

private:
    QuantumState(ModeLayout l, Kind k, Vector v, Matrix r)
        : layout_(std::move(l)), kind_(k), vec_(std::move(v)), rho_(std::move(r)) {}
    ModeLayout layout_;
    Kind kind_ = Kind::vector;
    Vector vec_;
    Matrix rho_;
};

QuantumState partial_trace(const QuantumState& state, const std::vector<Mode>& keep);

double fidelity(const QuantumState& s1, const QuantumState& s2);
// <psi|rho|psi> for a pure reference.
double overlap(const QuantumState& pure_ref, const QuantumState& s);

Matrix kron(const Matrix& x, const Matrix& y);

} // namespace phoclone
