#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

// Core value types for mixed value/derivative quadratic interpolation:
// multi-indices, interpolation data, the natural quadratic monomial basis
// and its closed-form derivatives, and symmetric-matrix vectorization.
//
// Basis ordering used everywhere: [1, x_1..x_n, (1/2)x_1^2, x_1 x_2, ...,
// x_1 x_n, (1/2)x_2^2, ..., x_{n-1} x_n, (1/2)x_n^2] (row-major upper
// triangle). All modules rely on this single ordering.
namespace bdfo {

struct NotPoisedError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SingularMatrixError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Number of natural basis functions for quadratics in n variables, q+1.
inline int basis_size(int n) { return (n + 1) * (n + 2) / 2; }

/// Position of the quadratic monomial for the pair (i, j), i <= j, within
/// the quadratic block (0-based, row-major upper triangle).
inline int quad_pair_index(int n, int i, int j) {
    return i * n - i * (i - 1) / 2 + (j - i);
}

// A vector of nonnegative integers identifying the mixed partial
// derivative operator it represents. Entries are dense; total order <= 2
// for every index handled by this library.
class MultiIndex {
  public:
    explicit MultiIndex(std::vector<int> entries);

    static MultiIndex zero(int n);
    static MultiIndex first(int n, int axis);
    static MultiIndex second(int n, int axis_a, int axis_b);

    int dim() const { return static_cast<int>(entries_.size()); }
    int operator[](int j) const { return entries_[static_cast<std::size_t>(j)]; }
    const std::vector<int>& entries() const { return entries_; }

    int order() const;
    bool is_zero() const { return order() == 0; }

    /// The unique axis k with alpha_k = 1. Requires order() == 1.
    int first_order_axis() const;
    /// The axis pair (k, l), k <= l, with alpha = e_k + e_l. Requires order() == 2.
    std::pair<int, int> second_order_axes() const;

    bool operator==(const MultiIndex& other) const { return entries_ == other.entries_; }
    bool operator!=(const MultiIndex& other) const { return !(*this == other); }
    /// Lexicographic comparison, used only for deterministic tie-breaking.
    bool lex_less(const MultiIndex& other) const { return entries_ < other.entries_; }

    std::string to_string() const;

  private:
    std::vector<int> entries_;
};

/// Ordering used for deterministic iteration: by total order, then lexicographic.
bool order_then_lex_less(const MultiIndex& a, const MultiIndex& b);

// One interpolation condition: the pair (point, multi-index) is inseparable.
struct Datum {
    Eigen::VectorXd point;
    MultiIndex index;

    Datum(Eigen::VectorXd p, MultiIndex a) : point(std::move(p)), index(std::move(a)) {}
};

/// Bit-exact identity of two data (coordinates compared by bit pattern,
/// indices exactly). This is the dedup notion used by oracle accounting.
bool same_datum(const Datum& a, const Datum& b);

// Ordered interpolation data with the model center first. items[0] must be
// (y0, 0); duplicates are permitted.
struct DataSet {
    std::vector<Datum> items;

    DataSet() = default;
    explicit DataSet(std::vector<Datum> data);

    int size() const { return static_cast<int>(items.size()); }
    int dim() const { return static_cast<int>(items.front().point.size()); }
    const Eigen::VectorXd& center() const { return items.front().point; }
};

// The finite set of multi-indices the oracle can serve. Always contains the
// zero index; every member has total order <= 2. Stored sorted by
// (order, lex) so iteration order is deterministic.
class AvailableSet {
  public:
    explicit AvailableSet(std::vector<MultiIndex> indices);

    /// All multi-indices of order <= 2 in n variables.
    static AvailableSet full(int n);
    /// Lagrange-only availability {0}.
    static AvailableSet lagrange_only(int n);
    /// Indices supported on the known coordinate set K (0-based axes).
    static AvailableSet from_known_axes(int n, const std::vector<int>& known);

    const std::vector<MultiIndex>& indices() const { return indices_; }
    bool contains(const MultiIndex& alpha) const;
    int size() const { return static_cast<int>(indices_.size()); }
    int dim() const { return indices_.front().dim(); }

  private:
    std::vector<MultiIndex> indices_;
};

// Quadratic model m(y0 + s) = c + g's + s'Hs/2. The Hessian is stored as
// its packed upper triangle, so symmetry is exact by construction.
class QuadraticModel {
  public:
    QuadraticModel(Eigen::VectorXd center, double c, Eigen::VectorXd g,
                   Eigen::VectorXd h_upper);

    /// Model from the stacked coefficient vector [c; g; vec_upper(H)].
    static QuadraticModel from_coefficients(Eigen::VectorXd center,
                                            const Eigen::VectorXd& coeffs);

    int dim() const { return static_cast<int>(center_.size()); }
    const Eigen::VectorXd& center() const { return center_; }
    double constant() const { return c_; }
    const Eigen::VectorXd& gradient_coeff() const { return g_; }
    const Eigen::VectorXd& hessian_upper() const { return h_upper_; }
    Eigen::MatrixXd hessian() const;

    /// [c; g; vec_upper(H)], the coefficients in the natural basis.
    Eigen::VectorXd coefficients() const;

    /// m(y0 + s).
    double value_at_step(const Eigen::VectorXd& s) const;
    /// m(x) in absolute coordinates.
    double value(const Eigen::VectorXd& x) const;
    /// grad m(x) = g + H (x - y0).
    Eigen::VectorXd gradient(const Eigen::VectorXd& x) const;
    /// d^alpha m evaluated at absolute point x.
    double derivative(const MultiIndex& alpha, const Eigen::VectorXd& x) const;

  private:
    Eigen::VectorXd center_;
    double c_;
    Eigen::VectorXd g_;
    Eigen::VectorXd h_upper_;
};

/// Sum of the multi-index entries.
int total_order(const MultiIndex& alpha);

/// Evaluation of all natural basis functions at y: [1, y, phi_quad(y)].
Eigen::VectorXd phi_vector(const Eigen::VectorXd& y);

/// Entry j equals d^alpha phi_j(y), by closed-form monomial differentiation.
Eigen::VectorXd phi_derivative_vector(const MultiIndex& alpha, const Eigen::VectorXd& y);

/// Upper triangle of a symmetric matrix in the quadratic-basis order.
Eigen::VectorXd vec_upper(const Eigen::MatrixXd& h);

/// Inverse of vec_upper: symmetric matrix from its packed upper triangle.
Eigen::MatrixXd sym_from_upper(int n, const Eigen::VectorXd& upper);

/// w(x, z) with w(x,z) . vec_upper(B) = x'Bz for every symmetric B.
Eigen::VectorXd w_pair(const Eigen::VectorXd& x, const Eigen::VectorXd& z);

// A quadratic in expanded (c, g, H) form; the working representation for
// pivot polynomials and interpolation basis polynomials.
struct QuadCoeffs {
    double c;
    Eigen::VectorXd g;
    Eigen::MatrixXd h;
};

/// Expand a natural-basis coefficient vector into (c, g, H) form.
QuadCoeffs quad_from_coefficients(int n, const Eigen::VectorXd& coeffs);

/// d^alpha of the quadratic with coefficient vector v, evaluated at y.
double derivative_value(const Eigen::VectorXd& coeffs, const MultiIndex& alpha,
                        const Eigen::VectorXd& y);

}  // namespace bdfo
