#include "bdfo/linalg.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>

namespace bdfo::linalg {

namespace {

constexpr double kPivotRel = 1e-14;
constexpr int kSecularMaxIter = 100;
constexpr double kSecularTol = 1e-12;

double inf_norm(const Eigen::MatrixXd& m) {
    if (m.size() == 0) return 0.0;
    return m.cwiseAbs().rowwise().sum().maxCoeff();
}

void check_pivots(const Eigen::PartialPivLU<Eigen::MatrixXd>& lu, const Eigen::MatrixXd& m) {
    const double scale = inf_norm(m);
    const double floor = kPivotRel * (scale > 0 ? scale : 1.0);
    if (lu.matrixLU().diagonal().cwiseAbs().minCoeff() < floor)
        throw SingularMatrixError("solve_square: pivot below threshold, data not poised");
}

double lu_rcond(const Eigen::PartialPivLU<Eigen::MatrixXd>& lu) {
    const Eigen::VectorXd d = lu.matrixLU().diagonal().cwiseAbs();
    const double dmax = d.maxCoeff();
    if (dmax == 0.0) return 0.0;
    return d.minCoeff() / dmax;
}

// ||s(mu)||^2 with s_i = -gbar_i / (lam_i + mu); +inf when a denominator
// vanishes against a nonzero component.
double shifted_norm2(const Eigen::VectorXd& gbar, const Eigen::VectorXd& lam, double mu) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < gbar.size(); ++i) {
        const double den = lam[i] + mu;
        if (den == 0.0) {
            if (gbar[i] != 0.0) return std::numeric_limits<double>::infinity();
            continue;
        }
        const double t = gbar[i] / den;
        acc += t * t;
    }
    return acc;
}

}  // namespace

SquareSolution solve_square(const Eigen::MatrixXd& m, const Eigen::VectorXd& b) {
    if (m.rows() != m.cols() || m.rows() != b.size())
        throw std::invalid_argument("solve_square: shape mismatch");
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(m);
    check_pivots(lu, m);
    return SquareSolution{lu.solve(b), lu_rcond(lu)};
}

Eigen::MatrixXd solve_square_multi(const Eigen::MatrixXd& m, const Eigen::MatrixXd& b,
                                   double* rcond_out) {
    if (m.rows() != m.cols() || m.rows() != b.rows())
        throw std::invalid_argument("solve_square_multi: shape mismatch");
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(m);
    check_pivots(lu, m);
    if (rcond_out) *rcond_out = lu_rcond(lu);
    return lu.solve(b);
}

TrsSolution min_quadratic_ball(const Eigen::VectorXd& g, const Eigen::MatrixXd& h, double radius) {
    if (radius <= 0.0) throw std::invalid_argument("min_quadratic_ball: radius must be positive");
    const int n = static_cast<int>(g.size());

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
    const Eigen::VectorXd lam = es.eigenvalues();
    const Eigen::MatrixXd v = es.eigenvectors();
    const Eigen::VectorXd gbar = v.transpose() * g;
    const double lam_min = lam.minCoeff();
    const double lam_scale = std::max(lam.cwiseAbs().maxCoeff(), 1.0);

    auto assemble = [&](const Eigen::VectorXd& sbar, double mu) {
        Eigen::VectorXd s = v * sbar;
        const double val = g.dot(s) + 0.5 * s.dot(h * s);
        return TrsSolution{std::move(s), val, mu};
    };

    // Interior solution when H is positive definite and the Newton step fits.
    if (lam_min > 0.0) {
        Eigen::VectorXd sbar = -gbar.cwiseQuotient(lam);
        if (sbar.norm() <= radius) return assemble(sbar, 0.0);
    }

    const double mu_lo = std::max(0.0, -lam_min);
    const double cluster_tol = 1e-12 * lam_scale;

    // Hard case: no gradient component along the minimal eigenspace and the
    // limiting step fits strictly inside the ball.
    bool cluster_clean = true;
    double limit_norm2 = 0.0;
    for (int i = 0; i < n; ++i) {
        if (lam[i] <= lam_min + cluster_tol) {
            if (std::abs(gbar[i]) > 1e-11 * std::max(1.0, gbar.norm())) cluster_clean = false;
        } else {
            const double t = gbar[i] / (lam[i] - lam_min);
            limit_norm2 += t * t;
        }
    }
    if (lam_min <= 0.0 && cluster_clean && limit_norm2 <= radius * radius) {
        Eigen::VectorXd sbar = Eigen::VectorXd::Zero(n);
        int cluster_axis = -1;
        for (int i = 0; i < n; ++i) {
            if (lam[i] <= lam_min + cluster_tol) {
                if (cluster_axis < 0) cluster_axis = i;
            } else {
                sbar[i] = -gbar[i] / (lam[i] - lam_min);
            }
        }
        sbar[cluster_axis] += std::sqrt(std::max(0.0, radius * radius - limit_norm2));
        return assemble(sbar, -lam_min);
    }

    // Boundary solution: find mu > mu_lo with ||s(mu)|| = radius via a
    // Newton iteration on 1/||s|| - 1/radius, bisection-safeguarded.
    double lo = mu_lo;
    double hi = std::max(mu_lo + lam_scale, gbar.norm() / radius - lam_min);
    while (shifted_norm2(gbar, lam, hi) > radius * radius) hi = mu_lo + 2.0 * (hi - mu_lo) + 1.0;

    double mu = std::min(std::max(0.5 * (lo + hi), lo + 1e-300), hi);
    for (int it = 0; it < kSecularMaxIter; ++it) {
        const double n2 = shifted_norm2(gbar, lam, mu);
        const double norm = std::sqrt(n2);
        if (!std::isfinite(norm)) {
            lo = mu;
            mu = 0.5 * (lo + hi);
            continue;
        }
        if (std::abs(norm - radius) <= kSecularTol * radius) break;
        if (norm > radius)
            lo = mu;
        else
            hi = mu;
        // d/dmu ||s||^2 = -2 sum gbar_i^2/(lam_i+mu)^3
        double dn2 = 0.0;
        for (int i = 0; i < n; ++i) {
            const double den = lam[i] + mu;
            if (den != 0.0) dn2 -= 2.0 * gbar[i] * gbar[i] / (den * den * den);
        }
        const double dnorm = dn2 / (2.0 * norm);
        const double psi = 1.0 / norm - 1.0 / radius;
        const double dpsi = -dnorm / n2;
        double next = (dpsi != 0.0) ? mu - psi / dpsi : 0.5 * (lo + hi);
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        mu = next;
    }

    Eigen::VectorXd sbar(n);
    for (int i = 0; i < n; ++i) {
        const double den = lam[i] + mu;
        sbar[i] = (den != 0.0) ? -gbar[i] / den : 0.0;
    }
    return assemble(sbar, mu);
}

BallExtremum max_abs_quadratic_ball(double c, const Eigen::VectorXd& g, const Eigen::MatrixXd& h,
                                    double radius) {
    const TrsSolution lo = min_quadratic_ball(g, h, radius);
    const TrsSolution hi = min_quadratic_ball(-g, -h, radius);
    const double at_lo = std::abs(c + lo.value);
    const double at_hi = std::abs(c - hi.value);  // max of q is -min of -q
    if (at_lo >= at_hi) return BallExtremum{lo.point, at_lo};
    return BallExtremum{hi.point, at_hi};
}

BallExtremum max_abs_derivative_ball(const QuadCoeffs& u, const MultiIndex& alpha, double radius) {
    const int n = static_cast<int>(u.g.size());
    const int ord = alpha.order();
    if (ord == 0) return max_abs_quadratic_ball(u.c, u.g, u.h, radius);
    if (ord == 1) {
        const int k = alpha.first_order_axis();
        const Eigen::VectorXd row = u.h.row(k).transpose();
        const double row_norm = row.norm();
        if (row_norm == 0.0)
            return BallExtremum{Eigen::VectorXd::Zero(n), std::abs(u.g[k])};
        const double sign = (u.g[k] >= 0.0) ? 1.0 : -1.0;
        Eigen::VectorXd s = sign * (radius / row_norm) * row;
        return BallExtremum{std::move(s), std::abs(u.g[k]) + radius * row_norm};
    }
    if (ord == 2) {
        auto [k, l] = alpha.second_order_axes();
        return BallExtremum{Eigen::VectorXd::Zero(n), std::abs(u.h(k, l))};
    }
    throw std::invalid_argument("max_abs_derivative_ball: order > 2");
}

double eig_min_symmetric(const Eigen::MatrixXd& h) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

double spectral_norm_inverse(const Eigen::MatrixXd& m) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
    const Eigen::VectorXd sv = svd.singularValues();
    const double smin = sv.minCoeff();
    const double smax = sv.maxCoeff();
    if (smin <= kPivotRel * smax)
        throw SingularMatrixError("spectral_norm_inverse: numerically singular matrix");
    return 1.0 / smin;
}

double abs_determinant(const Eigen::MatrixXd& m) {
    return std::abs(Eigen::PartialPivLU<Eigen::MatrixXd>(m).determinant());
}

}  // namespace bdfo::linalg
