#pragma once

#include "bdfo/core.hpp"
#include "bdfo/interp.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

// Deterministic generators shared by the test suites. Uniform doubles are
// derived from raw mt19937_64 output so results do not depend on the
// standard library's distribution implementations.
namespace testutil {

class Rng {
  public:
    explicit Rng(std::uint64_t seed) : rng_(seed) {}

    double uniform01() { return (rng_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }
    int uniform_int(int lo, int hi) {  // inclusive bounds
        return lo + static_cast<int>(rng_() % static_cast<std::uint64_t>(hi - lo + 1));
    }
    double normal() {
        // Box-Muller; fresh draws every call keep replay simple.
        const double u = std::max(uniform01(), 1e-300);
        const double v = uniform01();
        return std::sqrt(-2.0 * std::log(u)) * std::cos(6.283185307179586 * v);
    }

    Eigen::VectorXd vector(int n, double lo, double hi) {
        Eigen::VectorXd x(n);
        for (int i = 0; i < n; ++i) x[i] = uniform(lo, hi);
        return x;
    }

    Eigen::VectorXd ball_point(int n, double radius) {
        for (;;) {
            Eigen::VectorXd x = vector(n, -1.0, 1.0);
            if (x.norm() <= 1.0) return radius * x;
        }
    }

    Eigen::MatrixXd symmetric(int n, double scale) {
        Eigen::MatrixXd a(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) a(i, j) = uniform(-scale, scale);
        return 0.5 * (a + a.transpose());
    }

  private:
    std::mt19937_64 rng_;
};

// A random available set containing the zero index: either mask-shaped
// (supported on a random coordinate subset) or an arbitrary subset of the
// order <= 2 indices.
inline bdfo::AvailableSet random_available(Rng& rng, int n) {
    using bdfo::MultiIndex;
    if (rng.uniform01() < 0.5) {
        std::vector<int> known;
        for (int j = 0; j < n; ++j)
            if (rng.uniform01() < 0.6) known.push_back(j);
        if (known.empty()) known.push_back(rng.uniform_int(0, n - 1));
        return bdfo::AvailableSet::from_known_axes(n, known);
    }
    std::vector<MultiIndex> all = bdfo::AvailableSet::full(n).indices();
    std::vector<MultiIndex> chosen{MultiIndex::zero(n)};
    for (const MultiIndex& a : all) {
        if (!a.is_zero() && rng.uniform01() < 0.5) chosen.push_back(a);
    }
    return bdfo::AvailableSet(std::move(chosen));
}

// Rejection-sample a poised mixed data set: center first, points in the unit
// ball around the center, indices drawn from the available set. Falls back
// to a pure value-condition set if mixing keeps producing singular systems.
inline std::optional<bdfo::DataSet> random_poised_set(Rng& rng, int n,
                                                      const bdfo::AvailableSet& available,
                                                      double rcond_floor = 1e-6) {
    using bdfo::Datum;
    using bdfo::MultiIndex;
    const int q1 = bdfo::basis_size(n);
    const Eigen::VectorXd center = rng.vector(n, -2.0, 2.0);
    for (int attempt = 0; attempt < 60; ++attempt) {
        std::vector<Datum> items;
        items.emplace_back(center, MultiIndex::zero(n));
        const bool lagrange_fallback = attempt >= 40;
        for (int i = 1; i < q1; ++i) {
            const Eigen::VectorXd y = center + rng.ball_point(n, 1.0);
            const int pick = lagrange_fallback ? 0 : rng.uniform_int(0, available.size() - 1);
            items.emplace_back(y, available.indices()[static_cast<std::size_t>(pick)]);
        }
        bdfo::DataSet data(std::move(items));
        const bdfo::interp::NormalizedSystem sys = bdfo::interp::build_normalized(data);
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(sys.mhat);
        const Eigen::VectorXd sv = svd.singularValues();
        if (sv.minCoeff() > rcond_floor * sv.maxCoeff()) return data;
    }
    return std::nullopt;
}

}  // namespace testutil
