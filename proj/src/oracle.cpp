#include "bdfo/oracle.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <numeric>
#include <random>

namespace bdfo::oracle {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Portable bounded draw (std::uniform_int_distribution is not reproducible
// across standard libraries).
std::uint64_t bounded(std::mt19937_64& rng, std::uint64_t m) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % m;
    std::uint64_t v;
    do {
        v = rng();
    } while (v >= limit);
    return v % m;
}

VectorXd vec(std::initializer_list<double> v) {
    VectorXd x(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double e : v) x[i++] = e;
    return x;
}

// Sum-of-squares helper: f = sum r_k^2 given residuals, their gradients and
// Hessians.
struct Residuals {
    VectorXd r;
    MatrixXd jac;                 // row k = grad r_k
    std::vector<MatrixXd> hess;   // Hessians of the residuals
};

double sos_value(const Residuals& s) { return s.r.squaredNorm(); }

VectorXd sos_grad(const Residuals& s) { return 2.0 * s.jac.transpose() * s.r; }

MatrixXd sos_hess(const Residuals& s) {
    MatrixXd h = 2.0 * s.jac.transpose() * s.jac;
    for (Eigen::Index k = 0; k < s.r.size(); ++k) h += 2.0 * s.r[k] * s.hess[static_cast<std::size_t>(k)];
    return h;
}

Problem make_sphere(const std::string& name, int n) {
    return Problem{
        name, n, [](const VectorXd& x) { return x.squaredNorm(); },
        [](const VectorXd& x) { return VectorXd(2.0 * x); },
        [n](const VectorXd&) { return MatrixXd(2.0 * MatrixXd::Identity(n, n)); },
        VectorXd::Ones(n), 0.0};
}

Problem make_quadratic2_cond10() {
    const MatrixXd q = (MatrixXd(2, 2) << 1.0, 0.0, 0.0, 10.0).finished();
    const VectorXd b = vec({1.0, -2.0});
    return Problem{"quadratic2_cond10", 2,
                   [q, b](const VectorXd& x) { return 0.5 * x.dot(q * x) + b.dot(x); },
                   [q, b](const VectorXd& x) { return VectorXd(q * x + b); },
                   [q](const VectorXd&) { return q; }, VectorXd::Zero(2), -0.7};
}

Problem make_booth2() {
    return Problem{
        "booth2", 2,
        [](const VectorXd& x) {
            const double r1 = x[0] + 2.0 * x[1] - 7.0, r2 = 2.0 * x[0] + x[1] - 5.0;
            return r1 * r1 + r2 * r2;
        },
        [](const VectorXd& x) {
            const double r1 = x[0] + 2.0 * x[1] - 7.0, r2 = 2.0 * x[0] + x[1] - 5.0;
            return VectorXd(vec({2.0 * r1 + 4.0 * r2, 4.0 * r1 + 2.0 * r2}));
        },
        [](const VectorXd&) { return MatrixXd((MatrixXd(2, 2) << 10.0, 8.0, 8.0, 10.0).finished()); },
        VectorXd::Zero(2), 0.0};
}

Problem make_matyas2() {
    return Problem{
        "matyas2", 2,
        [](const VectorXd& x) { return 0.26 * x.squaredNorm() - 0.48 * x[0] * x[1]; },
        [](const VectorXd& x) {
            return VectorXd(vec({0.52 * x[0] - 0.48 * x[1], 0.52 * x[1] - 0.48 * x[0]}));
        },
        [](const VectorXd&) {
            return MatrixXd((MatrixXd(2, 2) << 0.52, -0.48, -0.48, 0.52).finished());
        },
        VectorXd::Ones(2), 0.0};
}

Problem make_trid4() {
    const int n = 4;
    return Problem{
        "trid4", n,
        [n](const VectorXd& x) {
            double s = 0.0;
            for (int i = 0; i < n; ++i) s += (x[i] - 1.0) * (x[i] - 1.0);
            for (int i = 1; i < n; ++i) s -= x[i] * x[i - 1];
            return s;
        },
        [n](const VectorXd& x) {
            VectorXd g(n);
            for (int i = 0; i < n; ++i) {
                g[i] = 2.0 * (x[i] - 1.0);
                if (i > 0) g[i] -= x[i - 1];
                if (i + 1 < n) g[i] -= x[i + 1];
            }
            return g;
        },
        [n](const VectorXd&) {
            MatrixXd h = 2.0 * MatrixXd::Identity(n, n);
            for (int i = 1; i < n; ++i) {
                h(i, i - 1) = -1.0;
                h(i - 1, i) = -1.0;
            }
            return h;
        },
        VectorXd::Zero(n), -4.0 * 8.0 * 3.0 / 6.0};
}

Problem make_rosenbrock(const std::string& name, int n, const VectorXd& x0) {
    return Problem{
        name, n,
        [n](const VectorXd& x) {
            double s = 0.0;
            for (int i = 0; i + 1 < n; ++i) {
                const double a = x[i + 1] - x[i] * x[i];
                s += 100.0 * a * a + (1.0 - x[i]) * (1.0 - x[i]);
            }
            return s;
        },
        [n](const VectorXd& x) {
            VectorXd g = VectorXd::Zero(n);
            for (int i = 0; i + 1 < n; ++i) {
                const double a = x[i + 1] - x[i] * x[i];
                g[i] += -400.0 * x[i] * a - 2.0 * (1.0 - x[i]);
                g[i + 1] += 200.0 * a;
            }
            return g;
        },
        [n](const VectorXd& x) {
            MatrixXd h = MatrixXd::Zero(n, n);
            for (int i = 0; i + 1 < n; ++i) {
                h(i, i) += -400.0 * (x[i + 1] - 3.0 * x[i] * x[i]) + 2.0;
                h(i, i + 1) += -400.0 * x[i];
                h(i + 1, i) += -400.0 * x[i];
                h(i + 1, i + 1) += 200.0;
            }
            return h;
        },
        x0, 0.0};
}

Problem make_cube2() {
    return Problem{
        "cube2", 2,
        [](const VectorXd& x) {
            const double a = x[1] - x[0] * x[0] * x[0];
            return 100.0 * a * a + (1.0 - x[0]) * (1.0 - x[0]);
        },
        [](const VectorXd& x) {
            const double a = x[1] - x[0] * x[0] * x[0];
            return VectorXd(
                vec({-600.0 * x[0] * x[0] * a - 2.0 * (1.0 - x[0]), 200.0 * a}));
        },
        [](const VectorXd& x) {
            const double a = x[1] - x[0] * x[0] * x[0];
            MatrixXd h(2, 2);
            h(0, 0) = -1200.0 * x[0] * a + 1800.0 * std::pow(x[0], 4) + 2.0;
            h(0, 1) = h(1, 0) = -600.0 * x[0] * x[0];
            h(1, 1) = 200.0;
            return h;
        },
        vec({-1.2, 1.0}), 0.0};
}

Residuals beale_residuals(const VectorXd& x) {
    const double c[3] = {1.5, 2.25, 2.625};
    Residuals s{VectorXd(3), MatrixXd(3, 2), {}};
    for (int k = 1; k <= 3; ++k) {
        const double p = std::pow(x[1], k);
        s.r[k - 1] = c[k - 1] - x[0] * (1.0 - p);
        s.jac(k - 1, 0) = -(1.0 - p);
        s.jac(k - 1, 1) = x[0] * k * std::pow(x[1], k - 1);
        MatrixXd h = MatrixXd::Zero(2, 2);
        h(0, 1) = h(1, 0) = k * std::pow(x[1], k - 1);
        h(1, 1) = x[0] * k * (k - 1) * ((k >= 2) ? std::pow(x[1], k - 2) : 0.0);
        s.hess.push_back(h);
    }
    return s;
}

Problem make_beale2() {
    return Problem{"beale2", 2,
                   [](const VectorXd& x) { return sos_value(beale_residuals(x)); },
                   [](const VectorXd& x) { return sos_grad(beale_residuals(x)); },
                   [](const VectorXd& x) { return sos_hess(beale_residuals(x)); },
                   VectorXd::Ones(2), 0.0};
}

Residuals himmelblau_residuals(const VectorXd& x) {
    Residuals s{VectorXd(2), MatrixXd(2, 2), {}};
    s.r[0] = x[0] * x[0] + x[1] - 11.0;
    s.r[1] = x[0] + x[1] * x[1] - 7.0;
    s.jac << 2.0 * x[0], 1.0, 1.0, 2.0 * x[1];
    MatrixXd h0 = MatrixXd::Zero(2, 2);
    h0(0, 0) = 2.0;
    MatrixXd h1 = MatrixXd::Zero(2, 2);
    h1(1, 1) = 2.0;
    s.hess = {h0, h1};
    return s;
}

Problem make_himmelblau2() {
    return Problem{"himmelblau2", 2,
                   [](const VectorXd& x) { return sos_value(himmelblau_residuals(x)); },
                   [](const VectorXd& x) { return sos_grad(himmelblau_residuals(x)); },
                   [](const VectorXd& x) { return sos_hess(himmelblau_residuals(x)); },
                   VectorXd::Ones(2), 0.0};
}

Problem make_powell4() {
    return Problem{
        "powell4", 4,
        [](const VectorXd& x) {
            const double a = x[0] + 10.0 * x[1], b = x[2] - x[3], c = x[1] - 2.0 * x[2],
                         d = x[0] - x[3];
            return a * a + 5.0 * b * b + std::pow(c, 4) + 10.0 * std::pow(d, 4);
        },
        [](const VectorXd& x) {
            const double a = x[0] + 10.0 * x[1], b = x[2] - x[3], c = x[1] - 2.0 * x[2],
                         d = x[0] - x[3];
            VectorXd g(4);
            g[0] = 2.0 * a + 40.0 * d * d * d;
            g[1] = 20.0 * a + 4.0 * c * c * c;
            g[2] = 10.0 * b - 8.0 * c * c * c;
            g[3] = -10.0 * b - 40.0 * d * d * d;
            return g;
        },
        [](const VectorXd& x) {
            const double c = x[1] - 2.0 * x[2], d = x[0] - x[3];
            MatrixXd h = MatrixXd::Zero(4, 4);
            h(0, 0) = 2.0 + 120.0 * d * d;
            h(0, 1) = h(1, 0) = 20.0;
            h(0, 3) = h(3, 0) = -120.0 * d * d;
            h(1, 1) = 200.0 + 12.0 * c * c;
            h(1, 2) = h(2, 1) = -24.0 * c * c;
            h(2, 2) = 10.0 + 48.0 * c * c;
            h(2, 3) = h(3, 2) = -10.0;
            h(3, 3) = 10.0 + 120.0 * d * d;
            return h;
        },
        vec({3.0, -1.0, 0.0, 1.0}), 0.0};
}

Problem make_wood4() {
    return Problem{
        "wood4", 4,
        [](const VectorXd& x) {
            const double a = x[1] - x[0] * x[0], b = x[3] - x[2] * x[2];
            return 100.0 * a * a + (1.0 - x[0]) * (1.0 - x[0]) + 90.0 * b * b +
                   (1.0 - x[2]) * (1.0 - x[2]) +
                   10.1 * ((x[1] - 1.0) * (x[1] - 1.0) + (x[3] - 1.0) * (x[3] - 1.0)) +
                   19.8 * (x[1] - 1.0) * (x[3] - 1.0);
        },
        [](const VectorXd& x) {
            const double a = x[1] - x[0] * x[0], b = x[3] - x[2] * x[2];
            VectorXd g(4);
            g[0] = -400.0 * x[0] * a - 2.0 * (1.0 - x[0]);
            g[1] = 200.0 * a + 20.2 * (x[1] - 1.0) + 19.8 * (x[3] - 1.0);
            g[2] = -360.0 * x[2] * b - 2.0 * (1.0 - x[2]);
            g[3] = 180.0 * b + 20.2 * (x[3] - 1.0) + 19.8 * (x[1] - 1.0);
            return g;
        },
        [](const VectorXd& x) {
            MatrixXd h = MatrixXd::Zero(4, 4);
            h(0, 0) = -400.0 * (x[1] - 3.0 * x[0] * x[0]) + 2.0;
            h(0, 1) = h(1, 0) = -400.0 * x[0];
            h(1, 1) = 220.2;
            h(1, 3) = h(3, 1) = 19.8;
            h(2, 2) = -360.0 * (x[3] - 3.0 * x[2] * x[2]) + 2.0;
            h(2, 3) = h(3, 2) = -360.0 * x[2];
            h(3, 3) = 200.2;
            return h;
        },
        vec({-3.0, -1.0, -3.0, -1.0}), 0.0};
}

Residuals trigonometric_residuals(const VectorXd& x) {
    const int n = static_cast<int>(x.size());
    Residuals s{VectorXd(n), MatrixXd::Zero(n, n), {}};
    double cos_sum = 0.0;
    for (int j = 0; j < n; ++j) cos_sum += std::cos(x[j]);
    for (int i = 0; i < n; ++i) {
        const double ii = i + 1.0;
        s.r[i] = n - cos_sum + ii * (1.0 - std::cos(x[i])) - std::sin(x[i]);
        for (int j = 0; j < n; ++j) s.jac(i, j) = std::sin(x[j]);
        s.jac(i, i) += ii * std::sin(x[i]) - std::cos(x[i]);
        MatrixXd h = MatrixXd::Zero(n, n);
        for (int j = 0; j < n; ++j) h(j, j) = std::cos(x[j]);
        h(i, i) += ii * std::cos(x[i]) + std::sin(x[i]);
        s.hess.push_back(h);
    }
    return s;
}

Problem make_trigonometric(const std::string& name, int n) {
    return Problem{name, n,
                   [](const VectorXd& x) { return sos_value(trigonometric_residuals(x)); },
                   [](const VectorXd& x) { return sos_grad(trigonometric_residuals(x)); },
                   [](const VectorXd& x) { return sos_hess(trigonometric_residuals(x)); },
                   VectorXd::Constant(n, 1.0 / n), 0.0};
}

Residuals broyden_residuals(const VectorXd& x) {
    const int n = static_cast<int>(x.size());
    Residuals s{VectorXd(n), MatrixXd::Zero(n, n), {}};
    for (int i = 0; i < n; ++i) {
        const double left = (i > 0) ? x[i - 1] : 0.0;
        const double right = (i + 1 < n) ? x[i + 1] : 0.0;
        s.r[i] = (3.0 - 2.0 * x[i]) * x[i] - left - 2.0 * right + 1.0;
        s.jac(i, i) = 3.0 - 4.0 * x[i];
        if (i > 0) s.jac(i, i - 1) = -1.0;
        if (i + 1 < n) s.jac(i, i + 1) = -2.0;
        MatrixXd h = MatrixXd::Zero(n, n);
        h(i, i) = -4.0;
        s.hess.push_back(h);
    }
    return s;
}

Problem make_broyden(const std::string& name, int n) {
    return Problem{name, n,
                   [](const VectorXd& x) { return sos_value(broyden_residuals(x)); },
                   [](const VectorXd& x) { return sos_grad(broyden_residuals(x)); },
                   [](const VectorXd& x) { return sos_hess(broyden_residuals(x)); },
                   VectorXd::Constant(n, -1.0), 0.0};
}

Problem make_exp1() {
    return Problem{"exp1", 1, [](const VectorXd& x) { return std::exp(x[0]); },
                   [](const VectorXd& x) { return VectorXd(vec({std::exp(x[0])})); },
                   [](const VectorXd& x) {
                       return MatrixXd(MatrixXd::Constant(1, 1, std::exp(x[0])));
                   },
                   VectorXd::Zero(1), std::nullopt};
}

}  // namespace

std::vector<int> Mask::known_labels() const {
    std::vector<int> labels;
    labels.reserve(known_axes.size());
    for (int k : known_axes) labels.push_back(k + 1);
    return labels;
}

Mask make_mask(int n, double fraction, std::uint64_t seed) {
    if (n < 1) throw std::invalid_argument("make_mask: n must be >= 1");
    if (!(fraction > 0.0) || fraction > 1.0)
        throw std::invalid_argument("make_mask: fraction must lie in (0, 1]");
    const int k = std::max(1, static_cast<int>(std::ceil(fraction * n - 1e-9)));

    std::mt19937_64 rng(seed);
    std::vector<int> idx(static_cast<std::size_t>(n));
    std::iota(idx.begin(), idx.end(), 0);
    for (int i = 0; i < k; ++i) {
        const int j = i + static_cast<int>(bounded(rng, static_cast<std::uint64_t>(n - i)));
        std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
    }
    std::vector<int> known(idx.begin(), idx.begin() + k);
    std::sort(known.begin(), known.end());
    return Mask{known, AvailableSet::from_known_axes(n, known)};
}

Mask full_mask(int n) {
    std::vector<int> known(static_cast<std::size_t>(n));
    std::iota(known.begin(), known.end(), 0);
    return Mask{known, AvailableSet::full(n)};
}

std::string QueryLedger::key(const Eigen::VectorXd& x, const MultiIndex& alpha) {
    std::string k;
    k.reserve(static_cast<std::size_t>(x.size()) * 8 + alpha.entries().size());
    for (Eigen::Index j = 0; j < x.size(); ++j) {
        const auto bits = std::bit_cast<std::uint64_t>(x[j]);
        k.append(reinterpret_cast<const char*>(&bits), 8);
    }
    for (int e : alpha.entries()) k.push_back(static_cast<char>(e));
    return k;
}

bool QueryLedger::lookup(const Eigen::VectorXd& x, const MultiIndex& alpha, double& value) const {
    const auto it = cache_.find(key(x, alpha));
    if (it == cache_.end()) return false;
    value = it->second;
    return true;
}

void QueryLedger::store(const Eigen::VectorXd& x, const MultiIndex& alpha, double value) {
    cache_.emplace(key(x, alpha), value);
}

double query(QueryLedger& ledger, const Problem& problem, const Mask& mask,
             const Eigen::VectorXd& x, const MultiIndex& alpha) {
    if (!mask.available.contains(alpha))
        throw UnavailableQueryError("query: multi-index " + alpha.to_string() +
                                    " is not in the available set");
    double value = 0.0;
    if (ledger.lookup(x, alpha, value)) return value;

    switch (alpha.order()) {
        case 0:
            value = problem.f(x);
            break;
        case 1:
            value = problem.grad(x)[alpha.first_order_axis()];
            break;
        case 2: {
            auto [k, l] = alpha.second_order_axes();
            value = problem.hess(x)(k, l);
            break;
        }
        default:
            throw std::invalid_argument("query: order > 2");
    }
    ledger.store(x, alpha, value);
    return value;
}

std::vector<Datum> hermite_expand(const Eigen::VectorXd& x, const AvailableSet& available) {
    std::vector<Datum> out;
    out.reserve(static_cast<std::size_t>(available.size()));
    for (const MultiIndex& alpha : available.indices()) out.emplace_back(x, alpha);
    return out;
}

const std::vector<Problem>& problem_suite() {
    static const std::vector<Problem> suite = [] {
        std::vector<Problem> p;
        p.push_back(make_sphere("sphere2", 2));
        p.push_back(make_sphere("sphere5", 5));
        p.push_back(make_quadratic2_cond10());
        p.push_back(make_booth2());
        p.push_back(make_matyas2());
        p.push_back(make_trid4());
        p.push_back(make_rosenbrock("rosenbrock2", 2, vec({-1.2, 1.0})));
        p.push_back(make_rosenbrock("rosenbrock4", 4, vec({-1.2, 1.0, -1.2, 1.0})));
        p.push_back(make_cube2());
        p.push_back(make_beale2());
        p.push_back(make_himmelblau2());
        p.push_back(make_powell4());
        p.push_back(make_wood4());
        p.push_back(make_trigonometric("trigonometric5", 5));
        p.push_back(make_broyden("broyden_tridiagonal5", 5));
        p.push_back(make_exp1());
        return p;
    }();
    return suite;
}

const Problem& find_problem(const std::string& name) {
    for (const Problem& p : problem_suite()) {
        if (p.name == name) return p;
    }
    throw std::out_of_range("unknown problem: " + name);
}

}  // namespace bdfo::oracle
