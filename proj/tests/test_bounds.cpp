#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "bdfo/bounds.hpp"

#include "bdfo/interp.hpp"
#include "bdfo/linalg.hpp"
#include "bdfo/poise.hpp"
#include "test_util.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <sstream>

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

DataSet worked_set_1d() {
    return DataSet({Datum{vec({0.0}), MultiIndex({0})}, Datum{vec({1.0}), MultiIndex({0})},
                    Datum{vec({1.0}), MultiIndex({1})}});
}

// A well-poised 2-d value-only template in the unit ball (center first).
DataSet lagrange_template_2d() {
    const double r = std::sqrt(0.5);
    return DataSet({Datum{vec({0.0, 0.0}), MultiIndex({0, 0})},
                    Datum{vec({1.0, 0.0}), MultiIndex({0, 0})},
                    Datum{vec({0.0, 1.0}), MultiIndex({0, 0})},
                    Datum{vec({-1.0, 0.0}), MultiIndex({0, 0})},
                    Datum{vec({0.0, -1.0}), MultiIndex({0, 0})},
                    Datum{vec({r, r}), MultiIndex({0, 0})}});
}

}  // namespace

TEST_CASE("count_orders") {
    const auto c1 = bounds::count_orders(worked_set_1d());
    CHECK(c1.n0 == 2);
    CHECK(c1.n1 == 1);
    CHECK(c1.n2 == 0);

    const auto c2 = bounds::count_orders(lagrange_template_2d());
    CHECK(c2.n0 == 6);
    CHECK(c2.n1 + c2.n2 == 0);

    // hermite expansion of one point under full availability in 2-d
    const auto items = oracle::hermite_expand(vec({0.0, 0.0}), AvailableSet::full(2));
    const auto c3 = bounds::count_orders(DataSet(items));
    CHECK(c3.n0 == 1);
    CHECK(c3.n1 == 2);
    CHECK(c3.n2 == 3);
}

TEST_CASE("constants formulas") {
    SUBCASE("all-Lagrange closed form") {
        const DataSet d = lagrange_template_2d();
        const double inv_norm =
            linalg::spectral_norm_inverse(interp::build_normalized(d).mhat);
        const double lips = 2.5;
        const auto k = bounds::constants(d, lips);
        const int q1 = d.size();
        CHECK(k.kappa_eh ==
              doctest::Approx(std::sqrt(2.0) * 1.5 * std::sqrt(double(q1)) * lips * inv_norm));
        CHECK(k.inv_norm_used == doctest::Approx(inv_norm));
        CHECK(k.n0 + k.n1 + k.n2 == q1);
    }
    SUBCASE("zero Lipschitz bound zeroes every constant") {
        const auto k = bounds::constants(worked_set_1d(), 0.0);
        CHECK(k.kappa_ef == 0.0);
        CHECK(k.kappa_eg == 0.0);
        CHECK(k.kappa_eh == 0.0);
    }
    SUBCASE("worked 1-d numbers from independent re-evaluation") {
        const auto k = bounds::constants(worked_set_1d(), 1.0);
        const double inv_norm = 4.583613745677844;  // frozen independent SVD value
        const double s = std::sqrt(2.25 * 2 + 4.0 * 1);
        CHECK(k.kappa_eh == doctest::Approx(std::sqrt(2.0) * s * inv_norm).epsilon(1e-10));
        CHECK(k.kappa_eg == doctest::Approx((1.0 + std::sqrt(2.0)) * s * inv_norm).epsilon(1e-10));
        CHECK(k.kappa_ef ==
              doctest::Approx(4.0 / 3.0 + 2.0 * (1.0 + 2.0 * std::sqrt(2.0)) * s * inv_norm)
                  .epsilon(1e-10));
    }
}

TEST_CASE("error system of the worked 1-d set") {
    const auto es = bounds::error_system(worked_set_1d());
    REQUIRE(es.qhat.rows() == 2);
    // hand assembly: value row [1, 0.5], derivative row [1, 1]
    MatrixXd expected(2, 2);
    expected << 1.0, 0.5, 1.0, 1.0;
    CHECK(es.qhat.isApprox(expected, 1e-14));
    CHECK(es.embedding_ok);
    CHECK(es.q_inv_norm <= es.m_inv_norm + 1e-12);
    CHECK(es.q_inv_norm == doctest::Approx(3.5615528128088307).epsilon(1e-10));
}

TEST_CASE("error system rows for a value-only set") {
    const DataSet d = lagrange_template_2d();
    const auto es = bounds::error_system(d);
    for (int i = 1; i < d.size(); ++i) {
        const VectorXd dy = d.items[static_cast<std::size_t>(i)].point - d.center();
        VectorXd row(5);
        row << dy, 0.5 * w_pair(dy, dy);
        CHECK(es.qhat.row(i - 1).isApprox(row.transpose(), 1e-12));
    }
    CHECK(es.embedding_ok);
}

TEST_CASE("Qhat inverse norm never exceeds Mhat inverse norm (50 random sets)") {
    testutil::Rng rng(83);
    int built = 0;
    while (built < 50) {
        const int n = rng.uniform_int(1, 3);
        const AvailableSet a = testutil::random_available(rng, n);
        const auto data = testutil::random_poised_set(rng, n, a);
        if (!data) continue;
        ++built;
        const auto es = bounds::error_system(*data);
        CHECK(es.embedding_ok);
        CHECK(es.q_inv_norm <= es.m_inv_norm * (1.0 + 1e-10));
    }
}

TEST_CASE("error scan: quadratic targets are reproduced exactly") {
    const oracle::Problem quad{
        "quad", 2, [](const VectorXd& x) { return 1.0 + x[0] + 0.5 * x[1] * x[1] + x[0] * x[1]; },
        [](const VectorXd& x) { return VectorXd(vec({1.0 + x[1], x[1] + x[0]})); },
        [](const VectorXd&) { return MatrixXd((MatrixXd(2, 2) << 0, 1, 1, 1).finished()); },
        VectorXd::Zero(2), std::nullopt};
    const auto rows = bounds::error_scan(quad, lagrange_template_2d(), {1.0, 0.1}, 0.0, 2000);
    for (const auto& r : rows) {
        CHECK(r.err_f <= 1e-10);
        CHECK(r.err_g <= 1e-10);
        CHECK(r.err_h <= 1e-10);
    }
}

TEST_CASE("error scan on exp(x1): halving ratios and domination") {
    const oracle::Problem& e1 = oracle::find_problem("exp1");
    // 1-d template with a mixed derivative condition
    const DataSet tmpl({Datum{vec({0.0}), MultiIndex({0})}, Datum{vec({1.0}), MultiIndex({0})},
                        Datum{vec({-1.0}), MultiIndex({1})}});
    std::vector<double> deltas;
    for (int k = 0; k <= 5; ++k) deltas.push_back(0.1 / std::pow(2.0, k));
    const double lips = std::exp(0.1);
    const auto rows = bounds::error_scan(e1, tmpl, deltas, lips, 4000);
    REQUIRE(rows.size() == deltas.size());

    std::vector<double> rf, rg, rh;
    for (std::size_t i = 0; i + 1 < rows.size(); ++i) {
        rf.push_back(rows[i].err_f / rows[i + 1].err_f);
        rg.push_back(rows[i].err_g / rows[i + 1].err_g);
        rh.push_back(rows[i].err_h / rows[i + 1].err_h);
    }
    auto median = [](std::vector<double> v) {
        std::sort(v.begin(), v.end());
        return v[v.size() / 2];
    };
    CHECK(median(rf) == doctest::Approx(8.0).epsilon(0.35));
    CHECK(median(rg) == doctest::Approx(4.0).epsilon(0.35));
    CHECK(median(rh) == doctest::Approx(2.0).epsilon(0.35));

    for (const auto& r : rows) {
        CHECK(r.err_f <= r.bound_f);
        CHECK(r.err_g <= r.bound_g);
        CHECK(r.err_h <= r.bound_h);
    }
}

TEST_CASE("corollary form with the lambda bound dominates") {
    testutil::Rng rng(89);
    int built = 0;
    while (built < 20) {
        const int n = rng.uniform_int(1, 2);
        const AvailableSet a = testutil::random_available(rng, n);
        const auto data = testutil::random_poised_set(rng, n, a);
        if (!data) continue;
        ++built;
        const double q1 = data->size();
        const double region = std::max(interp::radius(*data), 1e-6);
        const double lambda = poise::lambda_poisedness(*data, a, region);
        const auto k = bounds::constants(*data, 1.0);
        const double c_lambda = 4.0 * q1 * lambda;  // (q+1)/sigma_inf * Lambda
        CHECK(k.inv_norm_used <= c_lambda * (1.0 + 1e-9));
        const double s = std::sqrt(2.25 * k.n0 + 4.0 * k.n1 + 4.0 * k.n2);
        CHECK(std::sqrt(2.0) * s * c_lambda >= k.kappa_eh * (1.0 - 1e-12));
    }
}

TEST_CASE("csv writer") {
    std::ostringstream os;
    bounds::write_error_scan_csv({{0.1, 1e-5, 1e-4, 1e-3, 2e-5, 2e-4, 2e-3}}, os);
    const std::string s = os.str();
    CHECK(s.find("# bdfo errscan csv v1") == 0);
    CHECK(s.find("delta,err_f,err_g,err_h,bound_f,bound_g,bound_h") != std::string::npos);
}
