#pragma once

#include "bdfo/core.hpp"

#include <Eigen/Core>

// Assembly and solution of mixed value/derivative interpolation systems in
// the scaled frame, and the associated basis polynomials whose coefficient
// vectors are the columns of the inverse system matrix.
namespace bdfo::interp {

struct NormalizedSystem {
    Eigen::MatrixXd mhat;    // row i = phi_derivative_vector(alpha_i, (y_i - y0)/radius)
    double radius;           // the scale actually used (1 when all points coincide)
    Eigen::VectorXd center;  // y0
};

/// Max distance of any datum point from the center, Delta(Y).
double radius(const DataSet& data);

/// Build the row-and-column scaled square system for |D| = q+1 conditions.
/// A coincident set (Delta(Y) = 0) is normalized with scale 1 so that
/// pure-derivative-at-center sets stay representable.
NormalizedSystem build_normalized(const DataSet& data);

/// Coefficients of the interpolation basis polynomials in the normalized
/// frame; column i of `coeffs` solves d^{alpha_i'} lambda_i(yhat_i') = delta_{ii'}.
struct BirkhoffPolynomials {
    Eigen::MatrixXd coeffs;
    double radius;
    Eigen::VectorXd center;
};

/// Solve the scaled system with right-hand side entries radius^{|alpha_i|} * rhs_i
/// and map back to unscaled model coefficients. Throws NotPoisedError when the
/// factorization's reciprocal condition estimate falls below 1e-12.
QuadraticModel solve_model(const DataSet& data, const Eigen::VectorXd& rhs);

BirkhoffPolynomials birkhoff_polynomials(const DataSet& data);

/// Model as the weighted combination of basis polynomials,
/// m(x) = sum_i radius^{|alpha_i|} rhs_i lambda_i((x - y0)/radius).
QuadraticModel model_from_polynomials(const DataSet& data, const Eigen::VectorXd& rhs,
                                      const BirkhoffPolynomials& polys);

}  // namespace bdfo::interp
