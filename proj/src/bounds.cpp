#include "bdfo/bounds.hpp"

#include "bdfo/interp.hpp"
#include "bdfo/linalg.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <random>

namespace bdfo::bounds {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

DataSet sorted_by_order(const DataSet& data) {
    std::vector<Datum> items = data.items;
    std::stable_sort(items.begin(), items.end(),
                     [](const Datum& a, const Datum& b) { return a.index.order() < b.index.order(); });
    return DataSet(std::move(items));
}

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

double matrix_2norm(const MatrixXd& m) {
    Eigen::JacobiSVD<MatrixXd> svd(m);
    return svd.singularValues().maxCoeff();
}

// Deterministic points in the closed unit ball.
std::vector<VectorXd> unit_ball_samples(int n, int count, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    auto uniform01 = [&rng] { return (rng() >> 11) * 0x1.0p-53; };
    std::vector<VectorXd> pts;
    pts.reserve(static_cast<std::size_t>(count));
    while (static_cast<int>(pts.size()) < count) {
        VectorXd x(n);
        for (int j = 0; j < n; ++j) x[j] = 2.0 * uniform01() - 1.0;
        if (x.norm() <= 1.0) pts.push_back(std::move(x));
    }
    return pts;
}

}  // namespace

OrderCounts count_orders(const DataSet& data) {
    OrderCounts c{0, 0, 0};
    for (const Datum& d : data.items) {
        switch (d.index.order()) {
            case 0: ++c.n0; break;
            case 1: ++c.n1; break;
            default: ++c.n2; break;
        }
    }
    return c;
}

FullyQuadraticConstants constants(const DataSet& data, double lipschitz) {
    if (lipschitz < 0.0) throw std::invalid_argument("constants: Lipschitz bound must be >= 0");
    const interp::NormalizedSystem sys = interp::build_normalized(data);
    double inv_norm = 0.0;
    try {
        inv_norm = linalg::spectral_norm_inverse(sys.mhat);
    } catch (const SingularMatrixError& e) {
        throw NotPoisedError(e.what());
    }
    const OrderCounts c = count_orders(data);
    const double s = std::sqrt(2.25 * c.n0 + 4.0 * c.n1 + 4.0 * c.n2);
    const double kappa_eh = std::sqrt(2.0) * s * lipschitz * inv_norm;
    const double kappa_eg = (1.0 + std::sqrt(2.0)) * s * lipschitz * inv_norm;
    const double kappa_ef =
        (4.0 / 3.0 + 2.0 * (1.0 + 2.0 * std::sqrt(2.0)) * s * inv_norm) * lipschitz;
    return FullyQuadraticConstants{kappa_ef, kappa_eg, kappa_eh, c.n0, c.n1, c.n2, inv_norm};
}

ErrorSystem error_system(const DataSet& data) {
    const DataSet sorted = sorted_by_order(data);
    const int n = sorted.dim();
    const int q1 = sorted.size();
    const OrderCounts c = count_orders(sorted);
    const interp::NormalizedSystem sys = interp::build_normalized(sorted);
    const double r = sys.radius;
    const VectorXd& y0 = sorted.center();

    // Unscaled rows, one per condition past the center.
    MatrixXd q_raw(q1 - 1, n + n * (n + 1) / 2);
    for (int i = 1; i < q1; ++i) {
        const Datum& d = sorted.items[static_cast<std::size_t>(i)];
        const VectorXd dy = d.point - y0;
        VectorXd row_t(n);
        VectorXd row_h(n * (n + 1) / 2);
        switch (d.index.order()) {
            case 0:
                row_t = dy;
                row_h = 0.5 * w_pair(dy, dy);
                break;
            case 1: {
                const int k = d.index.first_order_axis();
                row_t = VectorXd::Unit(n, k);
                row_h = w_pair(VectorXd::Unit(n, k), dy);
                break;
            }
            default: {
                auto [k, l] = d.index.second_order_axes();
                row_t = VectorXd::Zero(n);
                row_h = w_pair(VectorXd::Unit(n, k), VectorXd::Unit(n, l));
                break;
            }
        }
        q_raw.row(i - 1) << row_t.transpose(), row_h.transpose();
    }

    // Row scaling r^{|alpha_i|}, column scaling (r^-1, r^-2) as in the proof,
    // with r = Delta(Y) so the block identity against Mhat is exact.
    MatrixXd qhat = q_raw;
    for (int i = 1; i < q1; ++i) {
        const int ord = sorted.items[static_cast<std::size_t>(i)].index.order();
        qhat.row(i - 1) *= std::pow(r, ord);
    }
    qhat.leftCols(n) /= r;
    qhat.rightCols(n * (n + 1) / 2) /= (r * r);

    // Mhat = [[1, 0], [z, Qhat]] with n0 - 1 leading ones in z.
    bool ok = sys.mhat(0, 0) == 1.0 && sys.mhat.row(0).tail(q1 - 1).isZero(0.0);
    for (int i = 1; i < q1 && ok; ++i) {
        const double z_expected = (i < c.n0) ? 1.0 : 0.0;
        if (sys.mhat(i, 0) != z_expected) ok = false;
        if ((sys.mhat.row(i).tail(q1 - 1) - qhat.row(i - 1)).cwiseAbs().maxCoeff() > 1e-14)
            ok = false;
    }

    double m_inv = 0.0, q_inv = 0.0;
    try {
        m_inv = linalg::spectral_norm_inverse(sys.mhat);
        q_inv = linalg::spectral_norm_inverse(qhat);
    } catch (const SingularMatrixError& e) {
        throw NotPoisedError(e.what());
    }
    return ErrorSystem{std::move(qhat), q_inv, m_inv, ok};
}

std::vector<ErrorScanRow> error_scan(const oracle::Problem& target, const DataSet& norm_template,
                                     const std::vector<double>& deltas, double lipschitz,
                                     int samples, std::uint64_t seed) {
    const int n = norm_template.dim();
    const VectorXd y0 = norm_template.center();
    const std::vector<VectorXd> dirs = unit_ball_samples(n, samples, seed);

    std::vector<ErrorScanRow> rows;
    for (const double delta : deltas) {
        // Scale the template geometry to radius delta.
        std::vector<Datum> items;
        for (const Datum& d : norm_template.items)
            items.emplace_back(y0 + delta * (d.point - y0), d.index);
        const DataSet geom(std::move(items));

        VectorXd rhs(geom.size());
        for (int i = 0; i < geom.size(); ++i) {
            const Datum& d = geom.items[static_cast<std::size_t>(i)];
            switch (d.index.order()) {
                case 0: rhs[i] = target.f(d.point); break;
                case 1: rhs[i] = target.grad(d.point)[d.index.first_order_axis()]; break;
                default: {
                    auto [k, l] = d.index.second_order_axes();
                    rhs[i] = target.hess(d.point)(k, l);
                    break;
                }
            }
        }
        const QuadraticModel model = interp::solve_model(geom, rhs);

        auto err_f = [&](const VectorXd& x) { return std::abs(model.value(x) - target.f(x)); };
        auto err_g = [&](const VectorXd& x) { return (model.gradient(x) - target.grad(x)).norm(); };
        auto err_h = [&](const VectorXd& x) { return matrix_2norm(model.hessian() - target.hess(x)); };

        // Sampled maxima plus a little coordinate-wise polishing around the
        // incumbent; the scan's purpose is rate estimation, not certified
        // global optimization.
        auto maximize = [&](auto&& fn) {
            double best = 0.0;
            VectorXd best_x = y0;
            for (const VectorXd& d : dirs) {
                const VectorXd x = y0 + delta * d;
                const double v = fn(x);
                if (v > best) {
                    best = v;
                    best_x = x;
                }
            }
            double step = 0.25 * delta;
            for (int round = 0; round < 30; ++round) {
                bool moved = false;
                for (int j = 0; j < n; ++j) {
                    for (const double sgn : {1.0, -1.0}) {
                        VectorXd x = best_x;
                        x[j] += sgn * step;
                        if ((x - y0).norm() > delta) {
                            x = y0 + delta * (x - y0).normalized();
                        }
                        const double v = fn(x);
                        if (v > best) {
                            best = v;
                            best_x = x;
                            moved = true;
                        }
                    }
                }
                if (!moved) step *= 0.5;
                if (step < 1e-6 * delta) break;
            }
            return best;
        };

        const FullyQuadraticConstants k = constants(geom, lipschitz);
        rows.push_back(ErrorScanRow{delta, maximize(err_f), maximize(err_g), maximize(err_h),
                                    k.kappa_ef * delta * delta * delta,
                                    k.kappa_eg * delta * delta, k.kappa_eh * delta});
    }
    return rows;
}

void write_error_scan_csv(const std::vector<ErrorScanRow>& rows, std::ostream& os) {
    os << "# bdfo errscan csv v1\n";
    os << "delta,err_f,err_g,err_h,bound_f,bound_g,bound_h\n";
    for (const ErrorScanRow& r : rows) {
        os << fmt_double(r.delta) << ',' << fmt_double(r.err_f) << ',' << fmt_double(r.err_g)
           << ',' << fmt_double(r.err_h) << ',' << fmt_double(r.bound_f) << ','
           << fmt_double(r.bound_g) << ',' << fmt_double(r.bound_h) << '\n';
    }
}

}  // namespace bdfo::bounds
