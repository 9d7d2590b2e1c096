#pragma once

#include "bdfo/core.hpp"
#include "bdfo/oracle.hpp"

#include <Eigen/Core>

#include <iosfwd>
#include <vector>

// Fully-quadratic error machinery: the explicit error constants, the reduced
// error system embedded inside the interpolation matrix, and empirical
// error-decay scans against those bounds.
namespace bdfo::bounds {

struct OrderCounts {
    int n0, n1, n2;
};

/// Conditions counted by total derivative order; n0 + n1 + n2 = q + 1.
OrderCounts count_orders(const DataSet& data);

struct FullyQuadraticConstants {
    double kappa_ef, kappa_eg, kappa_eh;
    int n0, n1, n2;
    double inv_norm_used;  // ||Mhat^{-1}||_2 of the data
};

/// Error constants for a model on B(y0, Delta): value error <= kappa_ef Delta^3,
/// gradient error <= kappa_eg Delta^2, Hessian error <= kappa_eh Delta, where
/// `lipschitz` bounds the Hessian's Lipschitz constant.
FullyQuadraticConstants constants(const DataSet& data, double lipschitz);

struct ErrorSystem {
    Eigen::MatrixXd qhat;   // scaled error-system matrix, (q) x (q)
    double q_inv_norm;      // ||Qhat^{-1}||_2
    double m_inv_norm;      // ||Mhat^{-1}||_2 of the same (sorted) data
    bool embedding_ok;      // Mhat == [[1, 0], [z, Qhat]] reproduced exactly
};

/// Assemble the reduced error system for data sorted by nondecreasing order
/// (sorting is applied internally, center kept first) and verify the block
/// embedding into the interpolation matrix.
ErrorSystem error_system(const DataSet& data);

struct ErrorScanRow {
    double delta;
    double err_f, err_g, err_h;        // measured maxima over the ball
    double bound_f, bound_g, bound_h;  // kappa_ef d^3, kappa_eg d^2, kappa_eh d
};

/// For each radius, scale the normalized template geometry to that radius,
/// interpolate the target, and maximize the value/gradient/Hessian errors
/// over sampled ball points with local polishing.
std::vector<ErrorScanRow> error_scan(const oracle::Problem& target, const DataSet& norm_template,
                                     const std::vector<double>& deltas, double lipschitz,
                                     int samples = 10000, std::uint64_t seed = 20240901);

void write_error_scan_csv(const std::vector<ErrorScanRow>& rows, std::ostream& os);

}  // namespace bdfo::bounds
