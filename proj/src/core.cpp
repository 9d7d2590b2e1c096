#include "bdfo/core.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <sstream>

namespace bdfo {

MultiIndex::MultiIndex(std::vector<int> entries) : entries_(std::move(entries)) {
    if (entries_.empty()) throw std::invalid_argument("MultiIndex: empty entry list");
    for (int e : entries_) {
        if (e < 0) throw std::invalid_argument("MultiIndex: negative entry");
    }
}

MultiIndex MultiIndex::zero(int n) { return MultiIndex(std::vector<int>(static_cast<std::size_t>(n), 0)); }

MultiIndex MultiIndex::first(int n, int axis) {
    std::vector<int> e(static_cast<std::size_t>(n), 0);
    e.at(static_cast<std::size_t>(axis)) = 1;
    return MultiIndex(std::move(e));
}

MultiIndex MultiIndex::second(int n, int axis_a, int axis_b) {
    std::vector<int> e(static_cast<std::size_t>(n), 0);
    e.at(static_cast<std::size_t>(axis_a)) += 1;
    e.at(static_cast<std::size_t>(axis_b)) += 1;
    return MultiIndex(std::move(e));
}

int MultiIndex::order() const {
    int s = 0;
    for (int e : entries_) s += e;
    return s;
}

int MultiIndex::first_order_axis() const {
    for (int j = 0; j < dim(); ++j) {
        if ((*this)[j] == 1) return j;
    }
    throw std::logic_error("MultiIndex: no first-order axis");
}

std::pair<int, int> MultiIndex::second_order_axes() const {
    int a = -1, b = -1;
    for (int j = 0; j < dim(); ++j) {
        int e = (*this)[j];
        if (e == 2) return {j, j};
        if (e == 1) {
            if (a < 0)
                a = j;
            else
                b = j;
        }
    }
    if (a < 0 || b < 0) throw std::logic_error("MultiIndex: not a second-order index");
    return {a, b};
}

std::string MultiIndex::to_string() const {
    std::ostringstream os;
    os << '[';
    for (int j = 0; j < dim(); ++j) {
        if (j > 0) os << ',';
        os << (*this)[j];
    }
    os << ']';
    return os.str();
}

bool order_then_lex_less(const MultiIndex& a, const MultiIndex& b) {
    if (a.order() != b.order()) return a.order() < b.order();
    return a.lex_less(b);
}

bool same_datum(const Datum& a, const Datum& b) {
    if (a.index != b.index) return false;
    if (a.point.size() != b.point.size()) return false;
    for (Eigen::Index j = 0; j < a.point.size(); ++j) {
        if (std::bit_cast<std::uint64_t>(a.point[j]) != std::bit_cast<std::uint64_t>(b.point[j]))
            return false;
    }
    return true;
}

DataSet::DataSet(std::vector<Datum> data) : items(std::move(data)) {
    if (items.empty()) throw std::invalid_argument("DataSet: empty");
    if (!items.front().index.is_zero())
        throw std::invalid_argument("DataSet: first datum must carry the zero multi-index");
    for (const Datum& d : items) {
        if (!d.point.allFinite()) throw std::invalid_argument("DataSet: non-finite point");
        if (d.index.order() > 2) throw std::invalid_argument("DataSet: multi-index order > 2");
    }
}

AvailableSet::AvailableSet(std::vector<MultiIndex> indices) : indices_(std::move(indices)) {
    if (indices_.empty()) throw std::invalid_argument("AvailableSet: empty");
    std::sort(indices_.begin(), indices_.end(), order_then_lex_less);
    indices_.erase(std::unique(indices_.begin(), indices_.end()), indices_.end());
    if (!indices_.front().is_zero())
        throw std::invalid_argument("AvailableSet: must contain the zero multi-index");
    for (const MultiIndex& a : indices_) {
        if (a.order() > 2) throw std::invalid_argument("AvailableSet: order > 2");
    }
}

AvailableSet AvailableSet::full(int n) {
    std::vector<int> all(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) all[static_cast<std::size_t>(j)] = j;
    return from_known_axes(n, all);
}

AvailableSet AvailableSet::lagrange_only(int n) {
    return AvailableSet({MultiIndex::zero(n)});
}

AvailableSet AvailableSet::from_known_axes(int n, const std::vector<int>& known) {
    std::vector<MultiIndex> idx;
    idx.push_back(MultiIndex::zero(n));
    for (int k : known) idx.push_back(MultiIndex::first(n, k));
    for (std::size_t a = 0; a < known.size(); ++a) {
        for (std::size_t b = a; b < known.size(); ++b) {
            idx.push_back(MultiIndex::second(n, known[a], known[b]));
        }
    }
    return AvailableSet(std::move(idx));
}

bool AvailableSet::contains(const MultiIndex& alpha) const {
    return std::any_of(indices_.begin(), indices_.end(),
                       [&](const MultiIndex& a) { return a == alpha; });
}

QuadraticModel::QuadraticModel(Eigen::VectorXd center, double c, Eigen::VectorXd g,
                               Eigen::VectorXd h_upper)
    : center_(std::move(center)), c_(c), g_(std::move(g)), h_upper_(std::move(h_upper)) {
    const int n = dim();
    if (g_.size() != n || h_upper_.size() != n * (n + 1) / 2)
        throw std::invalid_argument("QuadraticModel: inconsistent sizes");
}

QuadraticModel QuadraticModel::from_coefficients(Eigen::VectorXd center,
                                                 const Eigen::VectorXd& coeffs) {
    const int n = static_cast<int>(center.size());
    if (coeffs.size() != basis_size(n))
        throw std::invalid_argument("QuadraticModel: coefficient vector has wrong length");
    return QuadraticModel(std::move(center), coeffs[0], coeffs.segment(1, n),
                          coeffs.tail(n * (n + 1) / 2));
}

Eigen::MatrixXd QuadraticModel::hessian() const { return sym_from_upper(dim(), h_upper_); }

Eigen::VectorXd QuadraticModel::coefficients() const {
    const int n = dim();
    Eigen::VectorXd v(basis_size(n));
    v[0] = c_;
    v.segment(1, n) = g_;
    v.tail(n * (n + 1) / 2) = h_upper_;
    return v;
}

double QuadraticModel::value_at_step(const Eigen::VectorXd& s) const {
    return coefficients().dot(phi_vector(s));
}

double QuadraticModel::value(const Eigen::VectorXd& x) const { return value_at_step(x - center_); }

Eigen::VectorXd QuadraticModel::gradient(const Eigen::VectorXd& x) const {
    return g_ + hessian() * (x - center_);
}

double QuadraticModel::derivative(const MultiIndex& alpha, const Eigen::VectorXd& x) const {
    return coefficients().dot(phi_derivative_vector(alpha, x - center_));
}

int total_order(const MultiIndex& alpha) { return alpha.order(); }

Eigen::VectorXd phi_vector(const Eigen::VectorXd& y) {
    const int n = static_cast<int>(y.size());
    Eigen::VectorXd v = Eigen::VectorXd::Zero(basis_size(n));
    v[0] = 1.0;
    v.segment(1, n) = y;
    for (int i = 0; i < n; ++i) {
        for (int j = i; j < n; ++j) {
            const double m = (i == j) ? 0.5 * y[i] * y[i] : y[i] * y[j];
            v[n + 1 + quad_pair_index(n, i, j)] = m;
        }
    }
    return v;
}

Eigen::VectorXd phi_derivative_vector(const MultiIndex& alpha, const Eigen::VectorXd& y) {
    const int n = static_cast<int>(y.size());
    if (alpha.dim() != n) throw std::invalid_argument("phi_derivative_vector: dimension mismatch");
    const int ord = alpha.order();
    if (ord == 0) return phi_vector(y);

    Eigen::VectorXd v = Eigen::VectorXd::Zero(basis_size(n));
    if (ord == 1) {
        const int k = alpha.first_order_axis();
        v[1 + k] = 1.0;
        for (int i = 0; i < n; ++i) {
            for (int j = i; j < n; ++j) {
                double d = 0.0;
                if (i == j) {
                    if (i == k) d = y[i];
                } else {
                    if (i == k) d = y[j];
                    if (j == k) d = y[i];
                }
                v[n + 1 + quad_pair_index(n, i, j)] = d;
            }
        }
        return v;
    }
    if (ord == 2) {
        auto [k, l] = alpha.second_order_axes();
        v[n + 1 + quad_pair_index(n, k, l)] = 1.0;
        return v;
    }
    throw std::invalid_argument("phi_derivative_vector: order > 2");
}

Eigen::VectorXd vec_upper(const Eigen::MatrixXd& h) {
    const int n = static_cast<int>(h.rows());
    Eigen::VectorXd v(n * (n + 1) / 2);
    for (int i = 0; i < n; ++i) {
        for (int j = i; j < n; ++j) v[quad_pair_index(n, i, j)] = h(i, j);
    }
    return v;
}

Eigen::MatrixXd sym_from_upper(int n, const Eigen::VectorXd& upper) {
    Eigen::MatrixXd h(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = i; j < n; ++j) {
            const double e = upper[quad_pair_index(n, i, j)];
            h(i, j) = e;
            h(j, i) = e;
        }
    }
    return h;
}

Eigen::VectorXd w_pair(const Eigen::VectorXd& x, const Eigen::VectorXd& z) {
    const int n = static_cast<int>(x.size());
    Eigen::VectorXd v(n * (n + 1) / 2);
    for (int i = 0; i < n; ++i) {
        for (int j = i; j < n; ++j) {
            v[quad_pair_index(n, i, j)] = (i == j) ? x[i] * z[i] : x[i] * z[j] + x[j] * z[i];
        }
    }
    return v;
}

QuadCoeffs quad_from_coefficients(int n, const Eigen::VectorXd& coeffs) {
    if (coeffs.size() != basis_size(n))
        throw std::invalid_argument("quad_from_coefficients: wrong length");
    return QuadCoeffs{coeffs[0], coeffs.segment(1, n),
                      sym_from_upper(n, coeffs.tail(n * (n + 1) / 2))};
}

double derivative_value(const Eigen::VectorXd& coeffs, const MultiIndex& alpha,
                        const Eigen::VectorXd& y) {
    return coeffs.dot(phi_derivative_vector(alpha, y));
}

}  // namespace bdfo
