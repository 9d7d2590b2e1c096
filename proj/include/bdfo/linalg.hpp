#pragma once

#include "bdfo/core.hpp"

#include <Eigen/Core>

// Dense kernels used by the interpolation and trust-region machinery:
// pivoted square solves with a conditioning estimate, an exact small-scale
// trust-region subproblem solver, and exact extremization of |quadratic|
// and |derivative of quadratic| over a ball.
namespace bdfo::linalg {

struct SquareSolution {
    Eigen::VectorXd x;
    double rcond;  // reciprocal condition estimate of the factorization
};

/// Solve Mx = b by row-pivoted LU. Throws SingularMatrixError when a pivot
/// falls below 1e-14 * ||M||_inf.
SquareSolution solve_square(const Eigen::MatrixXd& m, const Eigen::VectorXd& b);

/// Solve MX = B for a matrix right-hand side, same pivot policy.
Eigen::MatrixXd solve_square_multi(const Eigen::MatrixXd& m, const Eigen::MatrixXd& b,
                                   double* rcond_out = nullptr);

struct TrsSolution {
    Eigen::VectorXd point;
    double value;
    double multiplier;  // KKT multiplier of the ball constraint
};

/// Global minimizer of g's + s'Hs/2 over ||s|| <= radius, handling the hard
/// case, by eigendecomposition plus a secular-equation root find.
TrsSolution min_quadratic_ball(const Eigen::VectorXd& g, const Eigen::MatrixXd& h, double radius);

struct BallExtremum {
    Eigen::VectorXd point;
    double value;  // the achieved |.| value, nonnegative
};

/// argmax of |c + g's + s'Hs/2| over ||s|| <= radius: the better of the two
/// signed trust-region solves.
BallExtremum max_abs_quadratic_ball(double c, const Eigen::VectorXd& g, const Eigen::MatrixXd& h,
                                    double radius);

/// argmax of |d^alpha u(s)| over ||s|| <= radius for a quadratic u.
/// Order 0 delegates to max_abs_quadratic_ball; order 1 is affine with a
/// closed-form extremum; order 2 is constant.
BallExtremum max_abs_derivative_ball(const QuadCoeffs& u, const MultiIndex& alpha, double radius);

/// Smallest eigenvalue of a symmetric matrix.
double eig_min_symmetric(const Eigen::MatrixXd& h);

/// ||M^{-1}||_2 via singular values. Throws SingularMatrixError when M is
/// numerically singular.
double spectral_norm_inverse(const Eigen::MatrixXd& m);

/// |det M| via the LU factorization (no singularity check; 0 for singular M).
double abs_determinant(const Eigen::MatrixXd& m);

}  // namespace bdfo::linalg
