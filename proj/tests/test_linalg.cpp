#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "bdfo/linalg.hpp"
#include "test_util.hpp"

#include <Eigen/Dense>

using namespace bdfo;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {
VectorXd vec(std::initializer_list<double> v) {
    VectorXd x(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double e : v) x[i++] = e;
    return x;
}
}  // namespace

TEST_CASE("solve_square identity and singular") {
    const auto sol = linalg::solve_square(MatrixXd::Identity(3, 3), vec({1, 2, 3}));
    CHECK(sol.x.isApprox(vec({1, 2, 3}), 0.0));
    CHECK(sol.rcond == doctest::Approx(1.0));

    MatrixXd dup(2, 2);
    dup << 1, 2, 1, 2;
    CHECK_THROWS_AS(linalg::solve_square(dup, vec({1, 1})), SingularMatrixError);
}

TEST_CASE("solve_square on the 1-d worked system") {
    MatrixXd m(3, 3);
    m << 1, 0, 0, 1, 1, 0.5, 0, 1, 1;
    // conditions f(0)=0, f(1)=1, f'(1)=2 for f(x)=x^2: coefficients (0,0,2)
    const auto sol = linalg::solve_square(m, vec({0, 1, 2}));
    CHECK(sol.x.isApprox(vec({0, 0, 2}), 1e-14));
}

TEST_CASE("min_quadratic_ball basic cases") {
    SUBCASE("interior Newton step") {
        const auto s = linalg::min_quadratic_ball(vec({1, 0}), MatrixXd::Identity(2, 2), 10.0);
        CHECK(s.point.isApprox(vec({-1, 0}), 1e-10));
        CHECK(s.multiplier == doctest::Approx(0.0));
    }
    SUBCASE("linear model to boundary") {
        const auto s = linalg::min_quadratic_ball(vec({1, 0}), MatrixXd::Zero(2, 2), 1.0);
        CHECK(s.point.isApprox(vec({-1, 0}), 1e-9));
        CHECK(s.value == doctest::Approx(-1.0).epsilon(1e-9));
    }
    SUBCASE("hard case: indefinite with zero gradient") {
        MatrixXd h(2, 2);
        h << -1, 0, 0, 1;
        const auto s = linalg::min_quadratic_ball(VectorXd::Zero(2), h, 1.0);
        CHECK(s.value == doctest::Approx(-0.5).epsilon(1e-10));
        CHECK(std::abs(s.point[0]) == doctest::Approx(1.0).epsilon(1e-10));
        // oracle: dense sampling of the circle never beats it
        double best = 0.0;
        for (int i = 0; i < 3600; ++i) {
            const double t = i * 3.14159265358979323846 / 1800.0;
            const VectorXd p = vec({std::cos(t), std::sin(t)});
            best = std::min(best, 0.5 * p.dot(h * p));
        }
        CHECK(s.value <= best + 1e-9);
    }
}

TEST_CASE("min_quadratic_ball KKT residuals and oracle dominance") {
    testutil::Rng rng(21);
    for (int trial = 0; trial < 500; ++trial) {
        const int n = rng.uniform_int(1, 4);
        const VectorXd g = rng.vector(n, -2.0, 2.0);
        const MatrixXd h = rng.symmetric(n, 3.0);
        const double radius = rng.uniform(0.1, 3.0);
        const auto s = linalg::min_quadratic_ball(g, h, radius);

        const double scale = g.norm() + h.norm() * radius;
        CHECK(((h + s.multiplier * MatrixXd::Identity(n, n)) * s.point + g).norm() <=
              1e-8 * (scale + 1e-12));
        CHECK(s.multiplier * (radius - s.point.norm()) <= 1e-8 * radius + 1e-12);
        CHECK(s.multiplier >= -1e-12);
        CHECK(linalg::eig_min_symmetric(h + s.multiplier * MatrixXd::Identity(n, n)) >=
              -1e-8 * std::max(1.0, h.norm()));
        CHECK(s.point.norm() <= radius * (1.0 + 1e-9));

        double best = 0.0;  // s = 0 is feasible
        for (int k = 0; k < 10000; ++k) {
            const VectorXd p = rng.ball_point(n, radius);
            best = std::min(best, g.dot(p) + 0.5 * p.dot(h * p));
        }
        CHECK(s.value <= best + 1e-9 * (1.0 + std::abs(best)));
    }
}

TEST_CASE("max_abs_quadratic_ball") {
    SUBCASE("linear") {
        const auto e = linalg::max_abs_quadratic_ball(0.0, vec({1, 0}), MatrixXd::Zero(2, 2), 1.0);
        CHECK(e.value == doctest::Approx(1.0).epsilon(1e-9));
    }
    SUBCASE("1-d cap at center") {
        // |1 - s^2| on [-1, 1]: max 1 at s = 0 (basis Hessian -2 gives -s^2)
        const auto e = linalg::max_abs_quadratic_ball(1.0, VectorXd::Zero(1),
                                                      -2.0 * MatrixXd::Identity(1, 1), 1.0);
        CHECK(e.value == doctest::Approx(1.0).epsilon(1e-9));
        double best = 0.0;  // oracle: grid scan
        for (int i = -1000; i <= 1000; ++i) {
            const double s = i / 1000.0;
            best = std::max(best, std::abs(1.0 - s * s));
        }
        CHECK(e.value == doctest::Approx(best).epsilon(1e-9));
    }
    SUBCASE("convex bowl boundary") {
        const auto e = linalg::max_abs_quadratic_ball(0.0, VectorXd::Zero(2),
                                                      MatrixXd::Identity(2, 2), 2.0);
        CHECK(e.value == doctest::Approx(2.0).epsilon(1e-9));
        CHECK(e.point.norm() == doctest::Approx(2.0).epsilon(1e-9));
    }
}

TEST_CASE("max_abs_derivative_ball per order") {
    SUBCASE("constant first derivative") {
        const QuadCoeffs u{0.0, vec({2, 0}), MatrixXd::Zero(2, 2)};
        const auto e = linalg::max_abs_derivative_ball(u, MultiIndex({1, 0}), 1.0);
        CHECK(e.value == doctest::Approx(2.0));
        CHECK(e.point.norm() == 0.0);
    }
    SUBCASE("second derivative is constant") {
        MatrixXd h(2, 2);
        h << 1, 0, 0, 0;
        const QuadCoeffs u{0.0, VectorXd::Zero(2), h};
        const auto e = linalg::max_abs_derivative_ball(u, MultiIndex({2, 0}), 5.0);
        CHECK(e.value == doctest::Approx(1.0));
        CHECK(e.point.norm() == 0.0);
    }
    SUBCASE("affine first derivative, grid-scan oracle") {
        MatrixXd h(2, 2);
        h << 1, 0, 0, 0;
        const QuadCoeffs u{0.0, vec({1, 0}), h};
        const auto e = linalg::max_abs_derivative_ball(u, MultiIndex({1, 0}), 1.0);
        CHECK(e.value == doctest::Approx(2.0).epsilon(1e-12));
        CHECK(e.point.isApprox(vec({1, 0}), 1e-12));
        double best = 0.0;
        for (int i = -100; i <= 100; ++i) {
            for (int j = -100; j <= 100; ++j) {
                const VectorXd s = vec({i / 100.0, j / 100.0});
                if (s.norm() > 1.0) continue;
                best = std::max(best, std::abs(1.0 + s[0]));
            }
        }
        CHECK(e.value >= best - 1e-12);
    }
}

TEST_CASE("order-1 closed form on random quadratics") {
    testutil::Rng rng(5);
    for (int trial = 0; trial < 200; ++trial) {
        const int n = rng.uniform_int(1, 4);
        const QuadCoeffs u{rng.uniform(-1, 1), rng.vector(n, -2, 2), rng.symmetric(n, 2.0)};
        const double radius = rng.uniform(0.1, 2.0);
        const int k = rng.uniform_int(0, n - 1);
        const auto e = linalg::max_abs_derivative_ball(u, MultiIndex::first(n, k), radius);
        const double expected = std::abs(u.g[k]) + radius * u.h.row(k).norm();
        CHECK(e.value == doctest::Approx(expected).epsilon(1e-13));
        // achieved at the returned point
        CHECK(std::abs(u.g[k] + u.h.row(k).dot(e.point)) ==
              doctest::Approx(expected).epsilon(1e-12));
    }
}

TEST_CASE("eig_min_symmetric") {
    CHECK(linalg::eig_min_symmetric((MatrixXd(2, 2) << 1, 0, 0, 2).finished()) ==
          doctest::Approx(1.0));
    CHECK(linalg::eig_min_symmetric((MatrixXd(2, 2) << -3, 0, 0, 2).finished()) ==
          doctest::Approx(-3.0));
    CHECK(linalg::eig_min_symmetric((MatrixXd(2, 2) << 0, 1, 1, 0).finished()) ==
          doctest::Approx(-1.0));
}

TEST_CASE("spectral_norm_inverse") {
    CHECK(linalg::spectral_norm_inverse(MatrixXd::Identity(4, 4)) == doctest::Approx(1.0));
    CHECK(linalg::spectral_norm_inverse((MatrixXd(2, 2) << 2, 0, 0, 0.5).finished()) ==
          doctest::Approx(2.0));
    // frozen from an independent SVD of the 1-d worked system
    MatrixXd m(3, 3);
    m << 1, 0, 0, 1, 1, 0.5, 0, 1, 1;
    CHECK(linalg::spectral_norm_inverse(m) == doctest::Approx(4.583613745677844).epsilon(1e-10));
    CHECK_THROWS_AS(linalg::spectral_norm_inverse(MatrixXd::Zero(2, 2)), SingularMatrixError);
}
