#pragma once

#include "bdfo/core.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

// Analytic test problems, derivative-availability masks, and the cached
// partial-derivative oracle whose distinct-query count is the benchmark
// cost measure.
namespace bdfo::oracle {

struct UnavailableQueryError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Problem {
    std::string name;
    int n;
    std::function<double(const Eigen::VectorXd&)> f;
    std::function<Eigen::VectorXd(const Eigen::VectorXd&)> grad;
    std::function<Eigen::MatrixXd(const Eigen::VectorXd&)> hess;
    Eigen::VectorXd x0;
    std::optional<double> fmin;
};

struct Mask {
    std::vector<int> known_axes;  // 0-based coordinate indices
    AvailableSet available;

    /// 1-based known-variable labels, the convention used in run metadata.
    std::vector<int> known_labels() const;
};

/// Draw |K| = max(1, ceil(fraction*n)) known variables uniformly without
/// replacement, reproducibly from the seed.
Mask make_mask(int n, double fraction, std::uint64_t seed);

/// All derivatives available.
Mask full_mask(int n);

// Cache of distinct (point, multi-index) queries. Keys compare coordinates
// bit-exactly; repeated requests are served from the cache and do not
// increment the distinct count.
class QueryLedger {
  public:
    std::size_t distinct_count() const { return cache_.size(); }
    bool lookup(const Eigen::VectorXd& x, const MultiIndex& alpha, double& value) const;
    void store(const Eigen::VectorXd& x, const MultiIndex& alpha, double value);

  private:
    static std::string key(const Eigen::VectorXd& x, const MultiIndex& alpha);
    std::unordered_map<std::string, double> cache_;
};

/// d^alpha f(x) from the problem's analytic derivatives, cached in the
/// ledger. Throws UnavailableQueryError when alpha is outside the mask.
double query(QueryLedger& ledger, const Problem& problem, const Mask& mask,
             const Eigen::VectorXd& x, const MultiIndex& alpha);

/// Every available derivative condition at x, for the Hermite baseline.
std::vector<Datum> hermite_expand(const Eigen::VectorXd& x, const AvailableSet& available);

/// The native analytic suite standing in for an external problem collection.
const std::vector<Problem>& problem_suite();

/// Registry lookup by name. Throws std::out_of_range for unknown names.
const Problem& find_problem(const std::string& name);

}  // namespace bdfo::oracle
