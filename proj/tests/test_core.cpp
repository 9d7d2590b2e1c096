#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "bdfo/core.hpp"
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

TEST_CASE("total order") {
    CHECK(total_order(MultiIndex({0, 0, 0})) == 0);
    CHECK(total_order(MultiIndex({1, 1, 0})) == 2);
    CHECK(total_order(MultiIndex({2, 0, 0})) == 2);
}

TEST_CASE("multi-index validation and accessors") {
    CHECK_THROWS_AS(MultiIndex({-1, 0}), std::invalid_argument);
    CHECK(MultiIndex::first(3, 1).first_order_axis() == 1);
    CHECK(MultiIndex::second(3, 0, 2).second_order_axes() == std::pair<int, int>{0, 2});
    CHECK(MultiIndex::second(3, 1, 1).second_order_axes() == std::pair<int, int>{1, 1});
}

TEST_CASE("phi vector") {
    CHECK(phi_vector(vec({0.0, 0.0})).isApprox(vec({1, 0, 0, 0, 0, 0}), 0.0));
    CHECK(phi_vector(vec({1.0, 2.0})).isApprox(vec({1, 1, 2, 0.5, 2, 2}), 1e-15));
    CHECK(phi_vector(vec({3.0})).isApprox(vec({1, 3, 4.5}), 1e-15));
}

TEST_CASE("phi derivative vector closed forms") {
    const VectorXd y = vec({0.7, -1.3});
    CHECK(phi_derivative_vector(MultiIndex::zero(2), y).isApprox(phi_vector(y), 0.0));
    CHECK(phi_derivative_vector(MultiIndex({1, 0}), y).isApprox(vec({0, 1, 0, 0.7, -1.3, 0}), 1e-15));
    CHECK(phi_derivative_vector(MultiIndex({1, 1}), vec({5.0, 9.0}))
              .isApprox(vec({0, 0, 0, 0, 1, 0}), 0.0));
}

TEST_CASE("phi derivatives match central finite differences") {
    testutil::Rng rng(11);
    const double h = 1e-5;
    for (int trial = 0; trial < 20; ++trial) {
        const int n = rng.uniform_int(1, 4);
        const VectorXd y = rng.vector(n, -2.0, 2.0);
        const AvailableSet full = AvailableSet::full(n);
        for (const MultiIndex& alpha : full.indices()) {
            const VectorXd exact = phi_derivative_vector(alpha, y);
            VectorXd fd(exact.size());
            if (alpha.order() == 0) {
                fd = phi_vector(y);
            } else if (alpha.order() == 1) {
                const int k = alpha.first_order_axis();
                VectorXd yp = y, ym = y;
                yp[k] += h;
                ym[k] -= h;
                fd = (phi_vector(yp) - phi_vector(ym)) / (2.0 * h);
            } else {
                // difference the (exact) order-1 vector once more; a double
                // difference of phi itself would drown in roundoff at this h
                auto [k, l] = alpha.second_order_axes();
                const MultiIndex lower = MultiIndex::first(n, l);
                VectorXd yp = y, ym = y;
                yp[k] += h;
                ym[k] -= h;
                fd = (phi_derivative_vector(lower, yp) - phi_derivative_vector(lower, ym)) /
                     (2.0 * h);
            }
            const double scale = std::max(1.0, exact.cwiseAbs().maxCoeff());
            CHECK((exact - fd).cwiseAbs().maxCoeff() <= 1e-6 * scale);
        }
    }
}

TEST_CASE("vec_upper") {
    MatrixXd h(2, 2);
    h << 2, 3, 3, 4;
    CHECK(vec_upper(h).isApprox(vec({2, 3, 4}), 0.0));
    CHECK(vec_upper(MatrixXd::Zero(2, 2)).isApprox(vec({0, 0, 0}), 0.0));
    CHECK(vec_upper(MatrixXd::Identity(3, 3)).isApprox(vec({1, 0, 0, 1, 0, 1}), 0.0));
    CHECK(sym_from_upper(2, vec({2, 3, 4})).isApprox(h, 0.0));
}

TEST_CASE("w_pair examples") {
    CHECK(w_pair(vec({1, 0}), vec({0, 1})).isApprox(vec({0, 1, 0}), 0.0));
    CHECK(w_pair(vec({1, 1}), vec({1, 1})).isApprox(vec({1, 2, 1}), 0.0));
    CHECK(w_pair(vec({0, 0, 0}), vec({3, -1, 2})).norm() == 0.0);
}

TEST_CASE("w_pair bilinear identity on random inputs") {
    testutil::Rng rng(7);
    for (int trial = 0; trial < 1000; ++trial) {
        const int n = rng.uniform_int(1, 6);
        const VectorXd x = rng.vector(n, -3.0, 3.0);
        const VectorXd z = rng.vector(n, -3.0, 3.0);
        const MatrixXd b = rng.symmetric(n, 2.0);
        const double lhs = w_pair(x, z).dot(vec_upper(b));
        const double rhs = x.dot(b * z);
        CHECK(std::abs(lhs - rhs) <= 1e-12 * (1.0 + x.norm() * z.norm() * b.norm()));
    }
}

TEST_CASE("model evaluation equals coefficient inner product") {
    testutil::Rng rng(3);
    for (int trial = 0; trial < 50; ++trial) {
        const int n = rng.uniform_int(1, 5);
        const VectorXd center = rng.vector(n, -1.0, 1.0);
        const VectorXd g = rng.vector(n, -2.0, 2.0);
        const MatrixXd h = rng.symmetric(n, 2.0);
        const double c = rng.uniform(-5.0, 5.0);
        const QuadraticModel m(center, c, g, vec_upper(h));
        const VectorXd s = rng.vector(n, -2.0, 2.0);
        const double direct = c + g.dot(s) + 0.5 * s.dot(h * s);
        CHECK(m.value_at_step(s) == doctest::Approx(direct).epsilon(1e-14));
        CHECK(m.value_at_step(s) == m.coefficients().dot(phi_vector(s)));
    }
}

TEST_CASE("dataset invariants") {
    CHECK_THROWS_AS(DataSet({Datum{vec({1.0}), MultiIndex({1})}}), std::invalid_argument);
    const Datum center{vec({0.0}), MultiIndex({0})};
    DataSet d({center, Datum{vec({1.0}), MultiIndex({0})}, Datum{vec({1.0}), MultiIndex({0})}});
    CHECK(d.size() == 3);  // duplicates permitted
}

TEST_CASE("available set") {
    const AvailableSet full2 = AvailableSet::full(2);
    CHECK(full2.size() == 6);
    CHECK(full2.contains(MultiIndex({1, 1})));
    CHECK_THROWS_AS(AvailableSet({MultiIndex({1, 0})}), std::invalid_argument);
    const AvailableSet masked = AvailableSet::from_known_axes(2, {0});
    CHECK(masked.size() == 3);
    CHECK(!masked.contains(MultiIndex({0, 1})));
    // sorted by (order, lex): iteration order is deterministic
    CHECK(full2.indices().front().is_zero());
    CHECK(full2.indices().back().order() == 2);
}

TEST_CASE("datum bit-exact identity") {
    const Datum a{vec({0.1, 0.2}), MultiIndex({1, 0})};
    const Datum b{vec({0.1, 0.2}), MultiIndex({1, 0})};
    CHECK(same_datum(a, b));
    const Datum c{vec({std::nextafter(0.1, 1.0), 0.2}), MultiIndex({1, 0})};
    CHECK(!same_datum(a, c));  // one ulp apart is a different query
    const Datum d{vec({0.1, 0.2}), MultiIndex({0, 1})};
    CHECK(!same_datum(a, d));
}
