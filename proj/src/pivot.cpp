#include "bdfo/pivot.hpp"

#include "bdfo/linalg.hpp"

#include <algorithm>
#include <cmath>

namespace bdfo::pivot {

namespace {

double apply_weight(const Params& params, const Eigen::VectorXd& point, const MultiIndex& alpha,
                    double raw) {
    if (!params.weight) return raw;
    const double w = params.weight(point, alpha);
    if (!(w > 0.0)) throw std::invalid_argument("pivot weight must be positive");
    return raw / w;
}

struct GeometryPick {
    Eigen::VectorXd point;  // absolute coordinates
    MultiIndex alpha;
    double weighted;
    double raw;
};

// Exact argmax of the (weighted) pivot derivative over the trust ball and
// the admissible multi-indices. Candidates are visited in (order, lex)
// order, so ties resolve toward lower derivative orders.
GeometryPick extremize_on_ball(const Eigen::VectorXd& u, const Eigen::VectorXd& y0,
                               double norm_radius, double ball_radius,
                               const std::vector<MultiIndex>& alphas, const Params& params) {
    const int n = static_cast<int>(y0.size());
    const QuadCoeffs uq = quad_from_coefficients(n, u);
    GeometryPick best{y0, alphas.front(), -1.0, 0.0};
    for (const MultiIndex& alpha : alphas) {
        const linalg::BallExtremum ext = linalg::max_abs_derivative_ball(uq, alpha, ball_radius);
        Eigen::VectorXd z = y0 + norm_radius * ext.point;
        const double weighted = apply_weight(params, z, alpha, ext.value);
        if (weighted > best.weighted) best = GeometryPick{std::move(z), alpha, weighted, ext.value};
    }
    return best;
}

}  // namespace

std::optional<CompletionResult> complete(const std::vector<Datum>& history,
                                         const Eigen::VectorXd& y0, double trust_radius,
                                         const AvailableSet& available, const Params& params) {
    if (trust_radius <= 0.0) throw std::invalid_argument("complete: trust radius must be positive");
    if (params.xi_acc <= 0.0) throw std::invalid_argument("complete: xi_acc must be positive");
    const int n = static_cast<int>(y0.size());
    const int q1 = basis_size(n);
    const int count = (params.num_conditions < 0) ? q1 : params.num_conditions;
    if (count < 1 || count > q1) throw std::invalid_argument("complete: bad condition count");
    if (params.forced_alphas && static_cast<int>(params.forced_alphas->size()) < count)
        throw std::invalid_argument("complete: forced alpha list too short");

    const Datum center_datum{y0, MultiIndex::zero(n)};

    // Candidate pool: history points within the trust ball (boundary kept),
    // minus exact copies of the seeded center condition.
    std::vector<Datum> pool;
    for (const Datum& d : history) {
        if ((d.point - y0).norm() > trust_radius) continue;
        if (same_datum(d, center_datum)) continue;
        pool.push_back(d);
    }

    // The normalization radius is fixed from the inputted data for the whole
    // run; a center-only input falls back to the trust radius.
    double norm_radius = 0.0;
    for (const Datum& d : pool) norm_radius = std::max(norm_radius, (d.point - y0).norm());
    if (norm_radius == 0.0) norm_radius = trust_radius;
    const double ball_radius = trust_radius / norm_radius;

    // Pivot basis, one coefficient column per polynomial, natural basis start.
    Eigen::MatrixXd basis = Eigen::MatrixXd::Identity(q1, q1);

    std::vector<Datum> selected;
    std::vector<bool> from_history;
    Eigen::VectorXd pivot_values(count);

    auto eliminate_after = [&](int i, const Eigen::VectorXd& zhat, const MultiIndex& beta) {
        const double d = derivative_value(basis.col(i), beta, zhat);
        basis.col(i) /= d;  // unit pivot
        for (int j = i + 1; j < q1; ++j) {
            const double dj = derivative_value(basis.col(j), beta, zhat);
            if (dj != 0.0) basis.col(j) -= dj * basis.col(i);
        }
    };

    // Pivot 0: the center value condition, seeded unconditionally.
    selected.push_back(center_datum);
    from_history.push_back(true);
    pivot_values[0] =
        std::abs(derivative_value(basis.col(0), center_datum.index, Eigen::VectorXd::Zero(n)));
    eliminate_after(0, Eigen::VectorXd::Zero(n), center_datum.index);

    for (int i = 1; i < count; ++i) {
        const std::optional<MultiIndex> forced =
            params.forced_alphas ? std::optional<MultiIndex>((*params.forced_alphas)[i])
                                 : std::nullopt;

        // Largest pivot magnitude over the remaining history; ties prefer
        // lower derivative order, then earlier history position.
        int best_idx = -1;
        double best_weighted = -1.0;
        int best_order = 3;
        for (std::size_t p = 0; p < pool.size(); ++p) {
            const Datum& d = pool[p];
            if (forced && d.index != *forced) continue;
            const Eigen::VectorXd yhat = (d.point - y0) / norm_radius;
            const double raw = std::abs(derivative_value(basis.col(i), d.index, yhat));
            const double weighted = apply_weight(params, d.point, d.index, raw);
            const bool better = best_idx < 0 || weighted > best_weighted ||
                                (weighted == best_weighted && d.index.order() < best_order);
            if (better) {
                best_idx = static_cast<int>(p);
                best_weighted = weighted;
                best_order = d.index.order();
            }
        }

        if (best_idx >= 0 && best_weighted > params.xi_acc) {
            const Datum chosen = pool[static_cast<std::size_t>(best_idx)];
            pool.erase(pool.begin() + best_idx);
            const Eigen::VectorXd zhat = (chosen.point - y0) / norm_radius;
            pivot_values[i] = best_weighted;
            selected.push_back(chosen);
            from_history.push_back(true);
            eliminate_after(i, zhat, chosen.index);
            continue;
        }

        // Geometry branch: exact extremization over the ball and the
        // admissible multi-indices.
        const std::vector<MultiIndex> alphas =
            forced ? std::vector<MultiIndex>{*forced} : available.indices();
        const GeometryPick pick =
            extremize_on_ball(basis.col(i), y0, norm_radius, ball_radius, alphas, params);
        if (pick.weighted < params.xi_acc) return std::nullopt;  // xi_acc too high

        pivot_values[i] = pick.weighted;
        const Eigen::VectorXd zhat = (pick.point - y0) / norm_radius;
        selected.push_back(Datum{pick.point, pick.alpha});
        from_history.push_back(false);
        eliminate_after(i, zhat, pick.alpha);
    }

    CompletionResult result{DataSet(selected), basis.col(count - 1), std::move(pivot_values),
                            {}, norm_radius};
    for (std::size_t i = 0; i < selected.size(); ++i) {
        if (from_history[i]) continue;
        const bool in_history = std::any_of(history.begin(), history.end(), [&](const Datum& h) {
            return same_datum(h, selected[i]);
        });
        if (!in_history) result.new_evals.push_back(selected[i]);
    }
    return result;
}

std::optional<ImproveOutcome> improve(const std::vector<Datum>& history,
                                      const Eigen::VectorXd& y0, double trust_radius,
                                      const AvailableSet& available, const Params& params) {
    if (params.xi_imp <= 1.0) throw std::invalid_argument("improve: xi_imp must exceed 1");
    std::optional<CompletionResult> comp = complete(history, y0, trust_radius, available, params);
    if (!comp) return std::nullopt;

    const double ball_radius = trust_radius / comp->norm_radius;
    const GeometryPick pick = extremize_on_ball(comp->final_pivot, y0, comp->norm_radius,
                                                ball_radius, available.indices(), params);

    // The final pivot polynomial has unit magnitude at its own condition, so
    // the improvement test compares against the (weighted) unit.
    const Datum& last = comp->data.items.back();
    const double threshold = params.xi_imp * apply_weight(params, last.point, last.index, 1.0);
    if (!(pick.weighted > threshold)) return ImproveOutcome{std::move(*comp), false};

    std::vector<Datum> swapped(comp->data.items.begin(), comp->data.items.end() - 1);
    swapped.push_back(Datum{pick.point, pick.alpha});

    std::optional<CompletionResult> recert = complete(swapped, y0, trust_radius, available, params);
    if (!recert) return std::nullopt;  // swap failed recertification

    recert->new_evals.clear();
    for (const Datum& d : recert->data.items) {
        const bool in_history = std::any_of(history.begin(), history.end(),
                                            [&](const Datum& h) { return same_datum(h, d); });
        if (!in_history) recert->new_evals.push_back(d);
    }
    return ImproveOutcome{std::move(*recert), true};
}

}  // namespace bdfo::pivot
