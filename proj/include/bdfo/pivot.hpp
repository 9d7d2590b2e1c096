#pragma once

#include "bdfo/core.hpp"

#include <Eigen/Core>

#include <functional>
#include <optional>
#include <vector>

// Greedy pivot-polynomial completion of interpolation data to a poised set,
// and one-condition geometry improvement. Completion seeds the output with
// the center value condition, then repeatedly selects the condition with the
// largest pivot-polynomial derivative, falling back to exact extremization
// over the trust ball when the history offers nothing above threshold.
namespace bdfo::pivot {

struct Params {
    double xi_acc = 1e-4;
    double xi_imp = 2.0;
    /// Optional positive, bounded condition weight. Pivot magnitudes are
    /// divided by it before selection and threshold comparisons.
    std::function<double(const Eigen::VectorXd&, const MultiIndex&)> weight;
    /// Compatibility mode: pair pivot i with forced_alphas[i] instead of
    /// selecting the multi-index per pivot.
    std::optional<std::vector<MultiIndex>> forced_alphas;
    /// Number of conditions to select, center included (default q+1).
    int num_conditions = -1;
};

struct CompletionResult {
    DataSet data;                  // selected conditions, center first
    Eigen::VectorXd final_pivot;   // last pivot polynomial, normalized frame
    Eigen::VectorXd pivot_values;  // accepted (weighted) pivot magnitudes
    std::vector<Datum> new_evals;  // conditions not drawn from the history
    double norm_radius;            // Delta(Y) fixed from the input data
};

/// Model completion with pivot polynomials. Returns nullopt with the
/// interpretation "xi_acc too high" when even the ball extremum of some
/// pivot polynomial stays below threshold.
std::optional<CompletionResult> complete(const std::vector<Datum>& history,
                                         const Eigen::VectorXd& y0, double trust_radius,
                                         const AvailableSet& available,
                                         const Params& params = {});

struct ImproveOutcome {
    CompletionResult result;
    bool improved;  // false certifies no one-condition switch beats xi_imp
};

/// Model improvement: complete, then test whether swapping the last-pivoted
/// condition for the ball extremum of the final pivot polynomial improves it
/// by more than a factor xi_imp. A swap is recertified by re-running
/// completion on the swapped set; nullopt propagates completion failure.
std::optional<ImproveOutcome> improve(const std::vector<Datum>& history,
                                      const Eigen::VectorXd& y0, double trust_radius,
                                      const AvailableSet& available, const Params& params = {});

}  // namespace bdfo::pivot
