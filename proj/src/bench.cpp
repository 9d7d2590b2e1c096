#include "bdfo/bench.hpp"

#include "bdfo/oracle.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <thread>

namespace bdfo::bench {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

RunOutcome execute_run(const RunConfig& config, const std::string& problem_name, double fraction,
                       std::uint64_t seed, const std::string& solver_name) {
    const oracle::Problem& problem = oracle::find_problem(problem_name);
    const oracle::Mask mask = oracle::make_mask(problem.n, fraction, seed);

    solver::SolverParams params = config.params;
    params.budget = static_cast<std::size_t>(config.budget_multiplier * (problem.n + 1));

    oracle::QueryLedger ledger;
    const solver::SolveResult result =
        (solver_name == "hermite")
            ? solver::hermite_solve(problem, mask, problem.x0, params, &ledger)
            : solver::solve(problem, mask, problem.x0, params, &ledger);

    RunOutcome out{problem_name, fraction,       seed, solver_name, problem.n,
                   ledger.distinct_count(), solver::termination_name(result.termination),
                   {}};
    for (const double tau : config.taus) {
        double solved_at = kInf;
        if (solver::check_stationarity(problem, problem.x0, tau)) {
            solved_at = 0.0;
        } else {
            for (const solver::IterateRecord& rec : result.trace) {
                if (solver::check_stationarity(problem, rec.x, tau)) {
                    solved_at = static_cast<double>(rec.units) / (problem.n + 1);
                    break;
                }
            }
        }
        out.units_to_solve[tau] = solved_at;
    }
    return out;
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    for (std::string& t : out) {
        const auto b = t.find_first_not_of(" \t");
        const auto e = t.find_last_not_of(" \t");
        t = (b == std::string::npos) ? "" : t.substr(b, e - b + 1);
    }
    out.erase(std::remove(out.begin(), out.end(), std::string()), out.end());
    return out;
}

}  // namespace

void RunConfig::validate() const {
    if (problems.empty() || fractions.empty() || seeds.empty() || solvers.empty() || taus.empty())
        throw std::invalid_argument("run config: empty list");
    for (double f : fractions) {
        if (!(f > 0.0) || f > 1.0)
            throw std::invalid_argument("run config: fractions must lie in (0, 1]");
    }
    for (const std::string& s : solvers) {
        if (s != "birkhoff" && s != "hermite")
            throw std::invalid_argument("run config: unknown solver " + s);
    }
}

std::vector<std::string> default_benchmark_problems() {
    std::vector<std::string> names;
    for (const oracle::Problem& p : oracle::problem_suite()) {
        if (p.fmin.has_value()) names.push_back(p.name);
    }
    return names;
}

std::vector<RunOutcome> run_matrix(const RunConfig& config_in) {
    RunConfig config = config_in;
    if (config.problems.empty()) config.problems = default_benchmark_problems();
    config.validate();

    struct Job {
        std::string problem;
        double fraction;
        std::uint64_t seed;
        std::string solver;
    };
    std::vector<Job> jobs;
    for (const std::string& p : config.problems)
        for (const double f : config.fractions)
            for (const std::uint64_t s : config.seeds)
                for (const std::string& sol : config.solvers) jobs.push_back(Job{p, f, s, sol});

    std::vector<RunOutcome> outcomes(jobs.size());
    const int workers = config.workers > 0
                            ? config.workers
                            : std::max(1u, std::thread::hardware_concurrency());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= jobs.size()) return;
            const Job& j = jobs[i];
            outcomes[i] = execute_run(config, j.problem, j.fraction, j.seed, j.solver);
        }
    };
    std::vector<std::thread> pool;
    for (int w = 1; w < workers; ++w) pool.emplace_back(worker);
    worker();
    for (std::thread& t : pool) t.join();
    return outcomes;
}

std::vector<ProfileCurve> profile_curves(const RunConfig& config,
                                         const std::vector<RunOutcome>& outcomes) {
    std::vector<ProfileCurve> curves;
    for (const std::string& sol : config.solvers) {
        for (const double frac : config.fractions) {
            for (const double tau : config.taus) {
                std::vector<double> solved;
                int runs = 0;
                for (const RunOutcome& o : outcomes) {
                    if (o.solver != sol || o.fraction != frac) continue;
                    ++runs;
                    const auto it = o.units_to_solve.find(tau);
                    if (it != o.units_to_solve.end() && std::isfinite(it->second))
                        solved.push_back(it->second);
                }
                std::sort(solved.begin(), solved.end());
                ProfileCurve curve{sol, frac, tau, runs, {}};
                curve.points.emplace_back(0.0, 0.0);
                int count = 0;
                for (std::size_t i = 0; i < solved.size(); ++i) {
                    ++count;
                    if (i + 1 < solved.size() && solved[i + 1] == solved[i]) continue;
                    curve.points.emplace_back(solved[i], static_cast<double>(count) / runs);
                }
                if (!solved.empty() && solved.front() == 0.0)
                    curve.points.erase(curve.points.begin());
                curves.push_back(std::move(curve));
            }
        }
    }
    return curves;
}

double median_units(const std::vector<RunOutcome>& outcomes, const std::string& solver,
                    double fraction, double tau) {
    std::vector<double> units;
    for (const RunOutcome& o : outcomes) {
        if (o.solver != solver || o.fraction != fraction) continue;
        const auto it = o.units_to_solve.find(tau);
        units.push_back(it == o.units_to_solve.end() ? kInf : it->second);
    }
    if (units.empty()) return kInf;
    std::sort(units.begin(), units.end());
    const std::size_t m = units.size();
    return (m % 2 == 1) ? units[m / 2] : 0.5 * (units[m / 2 - 1] + units[m / 2]);
}

void write_profile_csv(const ProfileCurve& curve, std::ostream& os) {
    os << "# bdfo profile csv v1\n";
    os << "# suite=native desk-scale surrogate (reference protocol used 89 CUTEst problems)\n";
    os << "# solver=" << curve.solver << " fraction=" << fmt_double(curve.fraction)
       << " tau=" << fmt_double(curve.tau) << " runs=" << curve.runs << '\n';
    os << "normalized_units,fraction_solved\n";
    for (const auto& [units, frac] : curve.points)
        os << fmt_double(units) << ',' << fmt_double(frac) << '\n';
}

void write_outcomes_json(const RunConfig& config, const std::vector<RunOutcome>& outcomes,
                         std::ostream& os) {
    nlohmann::json j;
    j["schema"] = "bdfo/profile/v1";
    j["suite"] = "native desk-scale surrogate";
    j["problems"] = config.problems.empty() ? default_benchmark_problems() : config.problems;
    j["fractions"] = config.fractions;
    j["seeds"] = config.seeds;
    j["solvers"] = config.solvers;
    j["taus"] = config.taus;
    j["budget_multiplier"] = config.budget_multiplier;
    nlohmann::json runs = nlohmann::json::array();
    for (const RunOutcome& o : outcomes) {
        nlohmann::json uts;
        for (const auto& [tau, units] : o.units_to_solve)
            uts[fmt_double(tau)] = std::isfinite(units) ? nlohmann::json(units)
                                                        : nlohmann::json(nullptr);
        runs.push_back(nlohmann::json{{"problem", o.problem},
                                      {"fraction", o.fraction},
                                      {"seed", o.seed},
                                      {"solver", o.solver},
                                      {"n", o.n},
                                      {"distinct_queries", o.distinct_queries},
                                      {"termination", o.termination},
                                      {"units_to_solve", uts}});
    }
    j["runs"] = runs;
    nlohmann::json medians = nlohmann::json::array();
    for (const std::string& sol : config.solvers) {
        for (const double tau : config.taus) {
            for (const double frac : config.fractions) {
                const double m = median_units(outcomes, sol, frac, tau);
                medians.push_back(nlohmann::json{
                    {"solver", sol},
                    {"tau", tau},
                    {"fraction", frac},
                    {"median_units", std::isfinite(m) ? nlohmann::json(m) : nlohmann::json(nullptr)}});
            }
        }
    }
    j["median_units_to_solve"] = medians;
    os << j.dump(2) << '\n';
}

RunConfig parse_config(std::istream& is) {
    RunConfig config;
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        const auto b = line.find_first_not_of(" \t\r");
        if (b == std::string::npos) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config line " + std::to_string(lineno) +
                                        ": expected key = value");
        auto trim = [](std::string s) {
            const auto x = s.find_first_not_of(" \t\r");
            const auto y = s.find_last_not_of(" \t\r");
            return (x == std::string::npos) ? std::string() : s.substr(x, y - x + 1);
        };
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        const std::vector<std::string> list = split_list(value);

        auto as_doubles = [&] {
            std::vector<double> v;
            for (const std::string& t : list) v.push_back(std::stod(t));
            return v;
        };
        if (key == "problems") {
            config.problems = list;
        } else if (key == "fractions") {
            config.fractions = as_doubles();
        } else if (key == "seeds") {
            config.seeds.clear();
            for (const std::string& t : list) config.seeds.push_back(std::stoull(t));
        } else if (key == "solvers") {
            config.solvers = list;
        } else if (key == "taus") {
            config.taus = as_doubles();
        } else if (key == "budget_multiplier") {
            config.budget_multiplier = std::stod(value);
        } else if (key == "workers") {
            config.workers = std::stoi(value);
        } else if (key == "eta") {
            config.params.eta = std::stod(value);
        } else if (key == "gamma_dec") {
            config.params.gamma_dec = std::stod(value);
        } else if (key == "gamma_inc") {
            config.params.gamma_inc = std::stod(value);
        } else if (key == "eps_c") {
            config.params.eps_c = std::stod(value);
        } else if (key == "beta") {
            config.params.beta = std::stod(value);
        } else if (key == "mu") {
            config.params.mu = std::stod(value);
        } else if (key == "delta0") {
            config.params.delta0 = std::stod(value);
        } else if (key == "delta_max") {
            config.params.delta_max = std::stod(value);
        } else if (key == "xi_acc") {
            config.params.xi_acc = std::stod(value);
        } else if (key == "xi_imp") {
            config.params.xi_imp = std::stod(value);
        } else if (key == "stop_sigma") {
            config.params.stop_sigma = std::stod(value);
        } else if (key == "stop_delta") {
            config.params.stop_delta = std::stod(value);
        } else if (key == "max_iterations") {
            config.params.max_iterations = std::stoi(value);
        } else {
            throw std::invalid_argument("config line " + std::to_string(lineno) +
                                        ": unknown key '" + key + "'");
        }
    }
    return config;
}

}  // namespace bdfo::bench
