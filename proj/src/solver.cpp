#include "bdfo/solver.hpp"

#include "bdfo/interp.hpp"
#include "bdfo/linalg.hpp"
#include "bdfo/pivot.hpp"

#include <Eigen/Dense>

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

namespace bdfo::solver {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

constexpr int kCompletionRetries = 10;
constexpr double kBoundaryTol = 1e-8;

struct Built {
    DataSet data;
    QuadraticModel model;
    double sigma;
};

double stationarity_measure(const QuadraticModel& model) {
    return std::max(model.gradient_coeff().norm(),
                    -linalg::eig_min_symmetric(model.hessian()));
}

// Shared run state: oracle access with budget enforcement and the point/
// condition history the model strategies draw from.
struct RunContext {
    const oracle::Problem& problem;
    const oracle::Mask& mask;
    const SolverParams& params;
    oracle::QueryLedger& ledger;
    bool budget_hit = false;

    bool would_exceed_budget(const VectorXd& x, const MultiIndex& alpha) {
        double cached;
        if (ledger.lookup(x, alpha, cached)) return false;
        return ledger.distinct_count() >= params.budget;
    }

    // Query with budget enforcement; false means the budget is exhausted.
    bool query(const VectorXd& x, const MultiIndex& alpha, double& value) {
        if (would_exceed_budget(x, alpha)) {
            budget_hit = true;
            return false;
        }
        value = oracle::query(ledger, problem, mask, x, alpha);
        return true;
    }

    bool query_all(const DataSet& data, VectorXd& rhs) {
        rhs.resize(data.size());
        for (int i = 0; i < data.size(); ++i) {
            const Datum& d = data.items[static_cast<std::size_t>(i)];
            if (!query(d.point, d.index, rhs[i])) return false;
        }
        return true;
    }
};

void append_unique(std::vector<Datum>& history, const Datum& d) {
    for (const Datum& h : history) {
        if (same_datum(h, d)) return;
    }
    history.push_back(d);
}

// Retain the most recent 50(q+1) data plus everything within 2*delta of the
// center; order (and therefore selection determinism) is preserved.
void prune_history(std::vector<Datum>& history, const VectorXd& center, double delta, int q1) {
    const std::size_t keep_recent = static_cast<std::size_t>(50 * q1);
    if (history.size() <= keep_recent) return;
    std::vector<Datum> kept;
    const std::size_t recent_begin = history.size() - keep_recent;
    for (std::size_t i = 0; i < history.size(); ++i) {
        if (i >= recent_begin || (history[i].point - center).norm() <= 2.0 * delta)
            kept.push_back(history[i]);
    }
    history.swap(kept);
}

class ModelStrategy {
  public:
    explicit ModelStrategy(RunContext& ctx) : ctx_(ctx) {}
    virtual ~ModelStrategy() = default;

    virtual std::optional<Built> build(const VectorXd& x, double delta) = 0;
    // One improvement pass plus rebuild; `improved` reports whether the
    // working set actually changed, which doubles as the certificate used by
    // the stationarity stop.
    virtual std::optional<Built> improve_and_rebuild(const VectorXd& x, double delta,
                                                     bool& improved) = 0;
    // Geometry-only improvement after a rejected step; no model rebuild.
    virtual void improve_geometry(const VectorXd& x, double delta) = 0;
    virtual void note_trial(const VectorXd& trial) = 0;
    virtual void prune(const VectorXd& center, double delta) = 0;

  protected:
    RunContext& ctx_;
};

// ------------------------------------------------------------------
// Birkhoff mode: pivot completion over the condition history.
class BirkhoffStrategy final : public ModelStrategy {
  public:
    BirkhoffStrategy(RunContext& ctx, const VectorXd& x0) : ModelStrategy(ctx) {
        history_.emplace_back(x0, MultiIndex::zero(static_cast<int>(x0.size())));
    }

    std::optional<Built> build(const VectorXd& x, double delta) override {
        std::optional<pivot::CompletionResult> comp = complete_with_retry(x, delta);
        if (!comp) return std::nullopt;
        return materialize(std::move(comp->data));
    }

    std::optional<Built> improve_and_rebuild(const VectorXd& x, double delta,
                                             bool& improved) override {
        pivot::Params p = pivot_params();
        std::optional<pivot::ImproveOutcome> out;
        for (int attempt = 0; attempt <= kCompletionRetries && !out; ++attempt) {
            out = pivot::improve(history_, x, delta, ctx_.mask.available, p);
            p.xi_acc *= 0.5;
        }
        if (!out) return std::nullopt;
        improved = out->improved;
        for (const Datum& d : out->result.new_evals) append_unique(history_, d);
        return materialize(std::move(out->result.data));
    }

    void improve_geometry(const VectorXd& x, double delta) override {
        bool improved = false;
        pivot::Params p = pivot_params();
        std::optional<pivot::ImproveOutcome> out =
            pivot::improve(history_, x, delta, ctx_.mask.available, p);
        if (out) {
            improved = out->improved;
            if (improved) {
                for (const Datum& d : out->result.new_evals) append_unique(history_, d);
            }
        }
        (void)improved;
    }

    void note_trial(const VectorXd& trial) override {
        append_unique(history_, Datum{trial, MultiIndex::zero(static_cast<int>(trial.size()))});
    }

    void prune(const VectorXd& center, double delta) override {
        prune_history(history_, center, delta, basis_size(static_cast<int>(center.size())));
    }

  private:
    pivot::Params pivot_params() const {
        pivot::Params p;
        p.xi_acc = ctx_.params.xi_acc;
        p.xi_imp = ctx_.params.xi_imp;
        return p;
    }

    std::optional<pivot::CompletionResult> complete_with_retry(const VectorXd& x, double delta) {
        pivot::Params p = pivot_params();
        for (int attempt = 0; attempt <= kCompletionRetries; ++attempt) {
            std::optional<pivot::CompletionResult> comp =
                pivot::complete(history_, x, delta, ctx_.mask.available, p);
            if (comp) return comp;
            p.xi_acc *= 0.5;
        }
        return std::nullopt;
    }

    std::optional<Built> materialize(DataSet data) {
        for (const Datum& d : data.items) append_unique(history_, d);
        VectorXd rhs;
        if (!ctx_.query_all(data, rhs)) return std::nullopt;
        try {
            QuadraticModel model = interp::solve_model(data, rhs);
            if (ctx_.params.debug_checks) check_residuals(data, rhs, model);
            const double sigma = stationarity_measure(model);
            return Built{std::move(data), std::move(model), sigma};
        } catch (const NotPoisedError&) {
            return std::nullopt;
        }
    }

    static void check_residuals(const DataSet& data, const VectorXd& rhs,
                                const QuadraticModel& model) {
        double scale = 1.0;
        for (int i = 0; i < data.size(); ++i) scale = std::max(scale, std::abs(rhs[i]));
        for (int i = 0; i < data.size(); ++i) {
            const Datum& d = data.items[static_cast<std::size_t>(i)];
            const double r = std::abs(model.derivative(d.index, d.point) - rhs[i]);
            if (r > 1e-8 * scale)
                throw std::logic_error("model interpolation residual exceeds tolerance");
        }
    }

    std::vector<Datum> history_;
};

// ------------------------------------------------------------------
// Hermite baseline: a point set queried with every available derivative,
// fitted in the least-squares sense. Points are selected (and generated)
// by a partial value-only pivot completion over the point history.
class HermiteStrategy final : public ModelStrategy {
  public:
    HermiteStrategy(RunContext& ctx, const VectorXd& x0)
        : ModelStrategy(ctx),
          n_(static_cast<int>(x0.size())),
          lagrange_(AvailableSet::lagrange_only(n_)) {
        const int q1 = basis_size(n_);
        const int block = ctx.mask.available.size();
        base_count_ = (q1 + block - 1) / block;  // ceil((q+1)/|A|)
        point_history_.emplace_back(x0, MultiIndex::zero(n_));
    }

    std::optional<Built> build(const VectorXd& x, double delta) override {
        return build_with_count(x, delta, base_count_);
    }

    std::optional<Built> improve_and_rebuild(const VectorXd& x, double delta,
                                             bool& improved) override {
        const std::size_t before = point_history_.size();
        std::optional<Built> b = build_with_count(x, delta, base_count_ + 1);
        improved = point_history_.size() > before;
        return b;
    }

    void improve_geometry(const VectorXd& x, double delta) override {
        // Generate (without evaluating) one fresh well-placed point.
        select_points(x, delta, base_count_ + 1);
    }

    void note_trial(const VectorXd& trial) override {
        append_unique(point_history_, Datum{trial, MultiIndex::zero(n_)});
    }

    void prune(const VectorXd& center, double delta) override {
        prune_history(point_history_, center, delta, basis_size(n_));
    }

  private:
    std::optional<std::vector<VectorXd>> select_points(const VectorXd& x, double delta,
                                                       int count) {
        const int q1 = basis_size(n_);
        count = std::min(count, q1);
        pivot::Params p;
        p.xi_acc = ctx_.params.xi_acc;
        p.xi_imp = ctx_.params.xi_imp;
        p.num_conditions = count;
        for (int attempt = 0; attempt <= kCompletionRetries; ++attempt) {
            std::optional<pivot::CompletionResult> comp =
                pivot::complete(point_history_, x, delta, lagrange_, p);
            if (comp) {
                for (const Datum& d : comp->new_evals) append_unique(point_history_, d);
                std::vector<VectorXd> pts;
                for (const Datum& d : comp->data.items) pts.push_back(d.point);
                return pts;
            }
            p.xi_acc *= 0.5;
        }
        return std::nullopt;
    }

    std::optional<Built> build_with_count(const VectorXd& x, double delta, int count) {
        const int q1 = basis_size(n_);
        for (; count <= q1; ++count) {
            std::optional<std::vector<VectorXd>> pts = select_points(x, delta, count);
            if (!pts) return std::nullopt;
            std::optional<Built> b = fit(x, *pts);
            if (b) return b;
            if (ctx_.budget_hit) return std::nullopt;
            // rank-deficient stack: geometry improvement by adding a point
        }
        return std::nullopt;
    }

    std::optional<Built> fit(const VectorXd& x, const std::vector<VectorXd>& pts) {
        const int q1 = basis_size(n_);
        std::vector<Datum> conditions;
        for (const VectorXd& y : pts) {
            for (Datum& d : oracle::hermite_expand(y, ctx_.mask.available))
                conditions.push_back(std::move(d));
        }
        DataSet data(std::move(conditions));

        VectorXd rhs;
        if (!ctx_.query_all(data, rhs)) return std::nullopt;

        double r = 0.0;
        for (const VectorXd& y : pts) r = std::max(r, (y - x).norm());
        if (r == 0.0) r = 1.0;

        MatrixXd a(data.size(), q1);
        VectorXd b(data.size());
        for (int i = 0; i < data.size(); ++i) {
            const Datum& d = data.items[static_cast<std::size_t>(i)];
            a.row(i) = phi_derivative_vector(d.index, (d.point - x) / r).transpose();
            b[i] = std::pow(r, d.index.order()) * rhs[i];
        }
        Eigen::ColPivHouseholderQR<MatrixXd> qr(a);
        qr.setThreshold(1e-12);
        if (qr.rank() < q1) return std::nullopt;  // rank-deficient
        const VectorXd xhat = qr.solve(b);

        VectorXd coeffs(q1);
        coeffs[0] = xhat[0];
        coeffs.segment(1, n_) = xhat.segment(1, n_) / r;
        coeffs.tail(n_ * (n_ + 1) / 2) = xhat.tail(n_ * (n_ + 1) / 2) / (r * r);
        QuadraticModel model = QuadraticModel::from_coefficients(x, coeffs);
        const double sigma = stationarity_measure(model);
        return Built{std::move(data), std::move(model), sigma};
    }

    int n_;
    AvailableSet lagrange_;
    int base_count_;
    std::vector<Datum> point_history_;
};

// ------------------------------------------------------------------
// The trust-region driver shared by both modes.
SolveResult run_loop(const oracle::Problem& problem, const VectorXd& x0,
                     const SolverParams& params, RunContext& ctx, ModelStrategy& strategy) {
    params.validate();
    const int n = static_cast<int>(x0.size());
    const MultiIndex zero = MultiIndex::zero(n);

    SolveResult result{x0, std::numeric_limits<double>::quiet_NaN(), {}, Termination::budget};
    VectorXd x = x0;
    double delta = params.delta0;
    double f_x = std::numeric_limits<double>::quiet_NaN();

    auto record = [&](int k, double sigma, double rho, double step_norm,
                      const QuadraticModel* model, const std::string& event) {
        IterateRecord rec;
        rec.k = k;
        rec.x = x;
        rec.f = f_x;
        rec.delta = delta;
        rec.sigma = sigma;
        rec.rho = rho;
        rec.step_norm = step_norm;
        rec.model_c = model ? model->constant() : 0.0;
        rec.model_gnorm = model ? model->gradient_coeff().norm() : 0.0;
        rec.model_hnorm = model ? model->hessian().norm() : 0.0;
        rec.units = ctx.ledger.distinct_count();
        rec.event = event;
        result.trace.push_back(std::move(rec));
    };

    auto finish = [&](Termination t) {
        result.termination = t;
        result.x_final = x;
        result.f_final = f_x;
        return result;
    };

    if (!ctx.query(x, zero, f_x)) {
        record(0, 0.0, 0.0, 0.0, nullptr, "budget");
        return finish(Termination::budget);
    }

    for (int k = 0; k < params.max_iterations; ++k) {
        strategy.prune(x, delta);

        std::optional<Built> built = strategy.build(x, delta);
        if (!built) {
            record(k, 0.0, 0.0, 0.0, nullptr, ctx.budget_hit ? "budget" : "failure");
            return finish(ctx.budget_hit ? Termination::budget : Termination::unrecoverable);
        }
        std::string tags;

        // Stationarity stop: needs a certificate that one improvement pass
        // cannot change the working set. A flat model (constant objective)
        // carries no curvature information and is left to the radius stop.
        const bool flat_model =
            std::max(built->model.gradient_coeff().norm(), built->model.hessian().norm()) <=
            1e-13 * (1.0 + std::abs(built->model.constant()));
        if (built->sigma <= params.stop_sigma && !flat_model) {
            bool improved = false;
            std::optional<Built> better = strategy.improve_and_rebuild(x, delta, improved);
            if (!better) {
                record(k, built->sigma, 0.0, 0.0, &built->model,
                       ctx.budget_hit ? "budget" : "failure");
                return finish(ctx.budget_hit ? Termination::budget : Termination::unrecoverable);
            }
            if (!improved && better->sigma <= params.stop_sigma) {
                record(k, better->sigma, 0.0, 0.0, &better->model, "stationary");
                return finish(Termination::sigma_small);
            }
            built = std::move(better);
            tags += "improve ";
        }

        // Criticality step: the model looks nearly stationary relative to
        // the radius, so improve the geometry and contract toward beta*sigma.
        if (!(built->sigma > params.eps_c || delta <= params.mu * built->sigma)) {
            bool improved = false;
            std::optional<Built> better = strategy.improve_and_rebuild(x, delta, improved);
            if (!better) {
                record(k, built->sigma, 0.0, 0.0, &built->model,
                       ctx.budget_hit ? "budget" : "failure");
                return finish(ctx.budget_hit ? Termination::budget : Termination::unrecoverable);
            }
            built = std::move(better);
            const double delta_tilde = interp::radius(built->data);
            delta = std::min(std::max(delta_tilde, params.beta * built->sigma), delta);
            tags += "criticality ";
        }

        // Step calculation.
        const linalg::TrsSolution trs =
            linalg::min_quadratic_ball(built->model.gradient_coeff(), built->model.hessian(), delta);
        const VectorXd& s = trs.point;
        const double step_norm = s.norm();
        const double predicted = -trs.value;  // m(x) - m(x+s)

        const VectorXd trial = x + s;
        double f_trial;
        if (!ctx.query(trial, zero, f_trial)) {
            record(k, built->sigma, 0.0, step_norm, &built->model, "budget");
            return finish(Termination::budget);
        }
        strategy.note_trial(trial);

        // Guarded acceptance ratio.
        const double guard = 1e-14 * (1.0 + std::abs(f_x));
        bool accepted = false;
        double rho = 0.0;
        bool degenerate_shrink = false;
        if (predicted <= guard) {
            if (f_x - f_trial >= 0.0 && step_norm <= 1e-14 * (1.0 + x.norm())) {
                degenerate_shrink = true;  // flat model, zero step: contract
            } else {
                rho = -std::numeric_limits<double>::infinity();
            }
        } else {
            rho = (f_x - f_trial) / predicted;
            accepted = rho >= params.eta;
        }

        const double delta_before = delta;
        if (degenerate_shrink) {
            delta = params.gamma_dec * delta;
            tags += "degenerate ";
        } else if (accepted) {
            x = trial;
            f_x = f_trial;
            if (step_norm >= delta_before * (1.0 - kBoundaryTol)) {
                delta = params.literal_radius_increase
                            ? std::max(params.gamma_inc * delta_before, params.delta_max)
                            : std::min(params.gamma_inc * delta_before, params.delta_max);
            }
        } else {
            strategy.improve_geometry(x, delta);
            bool all_inside = true;
            for (const Datum& d : built->data.items) {
                if ((d.point - x).norm() > delta_before * (1.0 + kBoundaryTol)) {
                    all_inside = false;
                    break;
                }
            }
            if (all_inside) delta = params.gamma_dec * delta_before;
            tags += "improve ";
        }

        const double rho_recorded = std::isfinite(rho) ? rho : -1.0;
        record(k, built->sigma, rho_recorded, step_norm, &built->model,
               tags + (accepted ? "accept" : "reject"));

        if (delta <= params.stop_delta) return finish(Termination::delta_small);
        if (ctx.ledger.distinct_count() >= params.budget) return finish(Termination::budget);
    }
    return finish(Termination::budget);
}

}  // namespace

void SolverParams::validate() const {
    if (!(eta >= 0.0 && eta < 1.0)) throw std::invalid_argument("params: need 0 <= eta < 1");
    if (!(gamma_dec > 0.0 && gamma_dec < 1.0 && gamma_inc > 1.0))
        throw std::invalid_argument("params: need 0 < gamma_dec < 1 < gamma_inc");
    if (!(eps_c > 0.0)) throw std::invalid_argument("params: need eps_c > 0");
    if (!(mu > beta && beta > 0.0)) throw std::invalid_argument("params: need mu > beta > 0");
    if (!(delta0 > 0.0 && delta0 < delta_max))
        throw std::invalid_argument("params: need 0 < delta0 < delta_max");
    if (!(xi_acc > 0.0 && xi_imp > 1.0))
        throw std::invalid_argument("params: need xi_acc > 0 and xi_imp > 1");
}

std::string termination_name(Termination t) {
    switch (t) {
        case Termination::sigma_small: return "sigma_small";
        case Termination::delta_small: return "delta_small";
        case Termination::budget: return "budget";
        default: return "unrecoverable";
    }
}

SolveResult solve(const oracle::Problem& problem, const oracle::Mask& mask,
                  const Eigen::VectorXd& x0, const SolverParams& params,
                  oracle::QueryLedger* ledger) {
    oracle::QueryLedger local;
    RunContext ctx{problem, mask, params, ledger ? *ledger : local};
    BirkhoffStrategy strategy(ctx, x0);
    return run_loop(problem, x0, params, ctx, strategy);
}

SolveResult hermite_solve(const oracle::Problem& problem, const oracle::Mask& mask,
                          const Eigen::VectorXd& x0, const SolverParams& params,
                          oracle::QueryLedger* ledger) {
    oracle::QueryLedger local;
    RunContext ctx{problem, mask, params, ledger ? *ledger : local};
    HermiteStrategy strategy(ctx, x0);
    return run_loop(problem, x0, params, ctx, strategy);
}

bool check_stationarity(const oracle::Problem& problem, const Eigen::VectorXd& x, double tau) {
    return problem.grad(x).norm() <= tau;
}

nlohmann::json params_json(const SolverParams& p) {
    return nlohmann::json{{"eta", p.eta},
                          {"gamma_dec", p.gamma_dec},
                          {"gamma_inc", p.gamma_inc},
                          {"eps_c", p.eps_c},
                          {"beta", p.beta},
                          {"mu", p.mu},
                          {"delta0", p.delta0},
                          {"delta_max", p.delta_max},
                          {"xi_acc", p.xi_acc},
                          {"xi_imp", p.xi_imp},
                          {"budget", p.budget == SIZE_MAX ? -1 : static_cast<long long>(p.budget)},
                          {"stop_sigma", p.stop_sigma},
                          {"stop_delta", p.stop_delta},
                          {"max_iterations", p.max_iterations},
                          {"literal_radius_increase", p.literal_radius_increase}};
}

nlohmann::json run_json(const oracle::Problem& problem, const oracle::Mask& mask, double fraction,
                        std::uint64_t seed, const std::string& solver_name,
                        const SolverParams& params, const SolveResult& result) {
    nlohmann::json trace = nlohmann::json::array();
    for (const IterateRecord& r : result.trace) {
        trace.push_back(nlohmann::json{
            {"k", r.k},
            {"x", std::vector<double>(r.x.data(), r.x.data() + r.x.size())},
            {"f", r.f},
            {"delta", r.delta},
            {"sigma", r.sigma},
            {"rho", r.rho},
            {"step_norm", r.step_norm},
            {"model", {{"c", r.model_c}, {"gnorm", r.model_gnorm}, {"hnorm", r.model_hnorm}}},
            {"units", r.units},
            {"event", r.event}});
    }
    const std::size_t units = result.trace.empty() ? 0 : result.trace.back().units;
    return nlohmann::json{
        {"schema", "bdfo/run/v1"},
        {"problem", problem.name},
        {"n", problem.n},
        {"mask", {{"fraction", fraction}, {"seed", seed}, {"K", mask.known_labels()}}},
        {"solver", solver_name},
        {"params", params_json(params)},
        {"trace", trace},
        {"termination", termination_name(result.termination)},
        {"x_final",
         std::vector<double>(result.x_final.data(), result.x_final.data() + result.x_final.size())},
        {"f_final", result.f_final},
        {"distinct_queries", units},
        {"normalized_units", static_cast<double>(units) / (problem.n + 1)}};
}

}  // namespace bdfo::solver
