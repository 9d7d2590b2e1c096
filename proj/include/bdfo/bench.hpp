#pragma once

#include "bdfo/solver.hpp"

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

// Benchmark harness: fan a (problem x fraction x seed x solver) matrix out
// to a worker pool, convert run traces into units-to-solve numbers, and emit
// data-profile curves.
namespace bdfo::bench {

struct RunConfig {
    std::vector<std::string> problems;
    std::vector<double> fractions = {0.25, 0.5, 0.75};
    std::vector<std::uint64_t> seeds = {1, 2, 3};
    std::vector<std::string> solvers = {"birkhoff"};
    std::vector<double> taus = {1e-2};
    double budget_multiplier = 500.0;  // budget = multiplier * (n+1) distinct queries
    solver::SolverParams params;
    int workers = 0;  // 0 = logical cores

    void validate() const;
};

/// The suite problems used when a config names none (the bounded-below
/// benchmark set; utility targets like exp1 are excluded).
std::vector<std::string> default_benchmark_problems();

struct RunOutcome {
    std::string problem;
    double fraction;
    std::uint64_t seed;
    std::string solver;
    int n;
    std::size_t distinct_queries;
    std::string termination;
    /// tau -> normalized units at which the true-gradient test first held;
    /// +inf when the run never reached it within budget.
    std::map<double, double> units_to_solve;
};

/// Execute every run in the matrix; results are ordered by
/// (problem, fraction, seed, solver) key order regardless of pool size.
std::vector<RunOutcome> run_matrix(const RunConfig& config);

struct ProfileCurve {
    std::string solver;
    double fraction;
    double tau;
    int runs;
    std::vector<std::pair<double, double>> points;  // (normalized_units, fraction_solved)
};

std::vector<ProfileCurve> profile_curves(const RunConfig& config,
                                         const std::vector<RunOutcome>& outcomes);

/// Median normalized units-to-solve across runs for one (solver, fraction, tau);
/// unsolved runs count as +inf.
double median_units(const std::vector<RunOutcome>& outcomes, const std::string& solver,
                    double fraction, double tau);

void write_profile_csv(const ProfileCurve& curve, std::ostream& os);
void write_outcomes_json(const RunConfig& config, const std::vector<RunOutcome>& outcomes,
                         std::ostream& os);

/// Flat key/value config document ("key = value" lines, '#' comments,
/// comma-separated list values). Unknown keys are an error.
RunConfig parse_config(std::istream& is);

}  // namespace bdfo::bench
