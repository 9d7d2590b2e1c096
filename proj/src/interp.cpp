#include "bdfo/interp.hpp"

#include "bdfo/linalg.hpp"

#include <cmath>

namespace bdfo::interp {

namespace {

constexpr double kPoisedRcond = 1e-12;

double effective_radius(const DataSet& data) {
    const double r = radius(data);
    return (r > 0.0) ? r : 1.0;
}

// Scale entries radius^{|alpha_i|} rhs_i of the normalized right-hand side.
Eigen::VectorXd scaled_rhs(const DataSet& data, const Eigen::VectorXd& rhs, double r) {
    Eigen::VectorXd b(rhs.size());
    for (int i = 0; i < data.size(); ++i)
        b[i] = std::pow(r, data.items[static_cast<std::size_t>(i)].index.order()) * rhs[i];
    return b;
}

// Map normalized coefficients [c, r g, r^2 vec(H)] back to model scale.
QuadraticModel unscale(const DataSet& data, const Eigen::VectorXd& xhat, double r) {
    const int n = data.dim();
    Eigen::VectorXd coeffs(xhat.size());
    coeffs[0] = xhat[0];
    coeffs.segment(1, n) = xhat.segment(1, n) / r;
    coeffs.tail(n * (n + 1) / 2) = xhat.tail(n * (n + 1) / 2) / (r * r);
    return QuadraticModel::from_coefficients(data.center(), coeffs);
}

}  // namespace

double radius(const DataSet& data) {
    double r = 0.0;
    for (const Datum& d : data.items) r = std::max(r, (d.point - data.center()).norm());
    return r;
}

NormalizedSystem build_normalized(const DataSet& data) {
    const int q1 = basis_size(data.dim());
    if (data.size() != q1)
        throw std::invalid_argument("build_normalized: need exactly q+1 conditions");
    const double r = effective_radius(data);
    Eigen::MatrixXd mhat(q1, q1);
    for (int i = 0; i < q1; ++i) {
        const Datum& d = data.items[static_cast<std::size_t>(i)];
        mhat.row(i) = phi_derivative_vector(d.index, (d.point - data.center()) / r).transpose();
    }
    return NormalizedSystem{std::move(mhat), r, data.center()};
}

QuadraticModel solve_model(const DataSet& data, const Eigen::VectorXd& rhs) {
    const NormalizedSystem sys = build_normalized(data);
    try {
        const linalg::SquareSolution sol = linalg::solve_square(sys.mhat, scaled_rhs(data, rhs, sys.radius));
        if (sol.rcond < kPoisedRcond)
            throw NotPoisedError("solve_model: reciprocal condition estimate below 1e-12");
        return unscale(data, sol.x, sys.radius);
    } catch (const SingularMatrixError& e) {
        throw NotPoisedError(e.what());
    }
}

BirkhoffPolynomials birkhoff_polynomials(const DataSet& data) {
    const NormalizedSystem sys = build_normalized(data);
    const int q1 = sys.mhat.rows();
    try {
        double rcond = 0.0;
        Eigen::MatrixXd inv =
            linalg::solve_square_multi(sys.mhat, Eigen::MatrixXd::Identity(q1, q1), &rcond);
        if (rcond < kPoisedRcond)
            throw NotPoisedError("birkhoff_polynomials: reciprocal condition estimate below 1e-12");
        return BirkhoffPolynomials{std::move(inv), sys.radius, sys.center};
    } catch (const SingularMatrixError& e) {
        throw NotPoisedError(e.what());
    }
}

QuadraticModel model_from_polynomials(const DataSet& data, const Eigen::VectorXd& rhs,
                                      const BirkhoffPolynomials& polys) {
    const Eigen::VectorXd xhat = polys.coeffs * scaled_rhs(data, rhs, polys.radius);
    return unscale(data, xhat, polys.radius);
}

}  // namespace bdfo::interp
