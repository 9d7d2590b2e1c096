#pragma once

#include "bdfo/core.hpp"
#include "bdfo/oracle.hpp"

#include <Eigen/Core>

#include <nlohmann/json_fwd.hpp>

#include <cstdint>
#include <string>
#include <vector>

// The trust-region method with some available derivatives, plus the
// Hermite-regression baseline that queries every available derivative at
// every interpolation point.
namespace bdfo::solver {

struct SolverParams {
    double eta = 0.1;         // acceptance threshold, 0 <= eta < 1
    double gamma_dec = 0.5;   // radius decrease, in (0, 1)
    double gamma_inc = 2.0;   // radius increase, > 1
    double eps_c = 1e-2;      // criticality trigger
    double beta = 1.0;        // radius-to-sigma coupling, 0 < beta < mu
    double mu = 2.0;
    double delta0 = 1.0;
    double delta_max = 1e3;
    double xi_acc = 1e-4;
    double xi_imp = 2.0;
    std::size_t budget = SIZE_MAX;  // max distinct oracle queries
    double stop_sigma = 1e-9;
    double stop_delta = 1e-13;
    int max_iterations = 100000;
    /// Reproduce the radius increase exactly as printed (pins the radius at
    /// delta_max after the first expansion) instead of capping at delta_max.
    bool literal_radius_increase = false;
    /// Spot-check interpolation residuals of every model used for a step.
    bool debug_checks = false;

    void validate() const;
};

enum class Termination { sigma_small, delta_small, budget, unrecoverable };

std::string termination_name(Termination t);

struct IterateRecord {
    int k;
    Eigen::VectorXd x;  // iterate after this iteration's update
    double f;           // objective at x (cached oracle value)
    double delta;       // radius after this iteration's update
    double sigma;
    double rho;
    double step_norm;
    double model_c, model_gnorm, model_hnorm;
    std::size_t units;  // cumulative distinct oracle queries
    std::string event;  // accept / reject / criticality / improve / budget / failure
};

struct SolveResult {
    Eigen::VectorXd x_final;
    double f_final;
    std::vector<IterateRecord> trace;
    Termination termination;
};

/// Trust-region minimization with selectively incorporated derivatives.
/// The ledger (optional) records the distinct-query accounting for the run.
SolveResult solve(const oracle::Problem& problem, const oracle::Mask& mask,
                  const Eigen::VectorXd& x0, const SolverParams& params,
                  oracle::QueryLedger* ledger = nullptr);

/// Baseline: at every interpolation point query all available derivatives,
/// with the minimal point count giving at least q+1 conditions, and fit the
/// model in the least-squares sense. Trust-region loop otherwise identical.
SolveResult hermite_solve(const oracle::Problem& problem, const oracle::Mask& mask,
                          const Eigen::VectorXd& x0, const SolverParams& params,
                          oracle::QueryLedger* ledger = nullptr);

/// True gradient test ||grad f(x)|| <= tau; benchmarking only, never visible
/// to the solver.
bool check_stationarity(const oracle::Problem& problem, const Eigen::VectorXd& x, double tau);

nlohmann::json params_json(const SolverParams& params);

/// Full run serialization: problem, mask, params, trace rows, termination.
nlohmann::json run_json(const oracle::Problem& problem, const oracle::Mask& mask, double fraction,
                        std::uint64_t seed, const std::string& solver_name,
                        const SolverParams& params, const SolveResult& result);

}  // namespace bdfo::solver
