#include "bdfo/bench.hpp"
#include "bdfo/bounds.hpp"
#include "bdfo/oracle.hpp"
#include "bdfo/poise.hpp"
#include "bdfo/solver.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

namespace {

constexpr int kExitUsage = 64;
constexpr int kExitUnrecoverable = 2;

std::uint64_t default_seed() {
    if (const char* env = std::getenv("BDFO_SEED")) return std::stoull(env);
    return 1;
}

bdfo::MultiIndex parse_alpha(const nlohmann::json& j) {
    std::vector<int> e;
    for (const auto& v : j) e.push_back(v.get<int>());
    return bdfo::MultiIndex(std::move(e));
}

Eigen::VectorXd parse_point(const nlohmann::json& j) {
    Eigen::VectorXd x(static_cast<Eigen::Index>(j.size()));
    Eigen::Index i = 0;
    for (const auto& v : j) x[i++] = v.get<double>();
    return x;
}

std::vector<bdfo::Datum> parse_data_items(const nlohmann::json& j) {
    std::vector<bdfo::Datum> items;
    for (const auto& e : j) items.emplace_back(parse_point(e.at("point")), parse_alpha(e.at("alpha")));
    return items;
}

nlohmann::json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open file: " + path);
    nlohmann::json j;
    in >> j;
    return j;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::invalid_argument("cannot write file: " + path);
    return out;
}

struct SolveArgs {
    std::string problem;
    double fraction = 1.0;
    std::uint64_t seed = default_seed();
    std::string solver = "birkhoff";
    double budget_multiplier = 500.0;
    std::string out;
    bdfo::solver::SolverParams params;
};

int cmd_solve(const SolveArgs& args) {
    const bdfo::oracle::Problem& problem = bdfo::oracle::find_problem(args.problem);
    const bdfo::oracle::Mask mask = bdfo::oracle::make_mask(problem.n, args.fraction, args.seed);

    bdfo::solver::SolverParams params = args.params;
    params.budget = static_cast<std::size_t>(args.budget_multiplier * (problem.n + 1));

    bdfo::oracle::QueryLedger ledger;
    const bdfo::solver::SolveResult result =
        (args.solver == "hermite")
            ? bdfo::solver::hermite_solve(problem, mask, problem.x0, params, &ledger)
            : bdfo::solver::solve(problem, mask, problem.x0, params, &ledger);

    const nlohmann::json j = bdfo::solver::run_json(problem, mask, args.fraction, args.seed,
                                                    args.solver, params, result);
    if (args.out.empty()) {
        std::cout << j.dump(2) << '\n';
    } else {
        open_out(args.out) << j.dump(2) << '\n';
    }
    return result.termination == bdfo::solver::Termination::unrecoverable ? kExitUnrecoverable : 0;
}

int cmd_profile(bdfo::bench::RunConfig config, const std::string& out_dir) {
    const std::vector<bdfo::bench::RunOutcome> outcomes = bdfo::bench::run_matrix(config);
    if (config.problems.empty()) config.problems = bdfo::bench::default_benchmark_problems();

    std::filesystem::create_directories(out_dir);
    for (const bdfo::bench::ProfileCurve& curve : bdfo::bench::profile_curves(config, outcomes)) {
        char name[160];
        std::snprintf(name, sizeof name, "profile_%s_f%g_tau%g.csv", curve.solver.c_str(),
                      curve.fraction, curve.tau);
        auto os = open_out((std::filesystem::path(out_dir) / name).string());
        bdfo::bench::write_profile_csv(curve, os);
    }
    auto os = open_out((std::filesystem::path(out_dir) / "runs.json").string());
    bdfo::bench::write_outcomes_json(config, outcomes, os);

    for (const std::string& sol : config.solvers) {
        for (const double tau : config.taus) {
            std::cout << "median normalized units to solve (" << sol << ", tau=" << tau << "):";
            for (const double frac : config.fractions) {
                const double m = bdfo::bench::median_units(outcomes, sol, frac, tau);
                std::cout << "  f=" << frac << " -> " << m;
            }
            std::cout << '\n';
        }
    }
    return 0;
}

int cmd_heatmap(const std::string& config_path, int resolution_override, double radius_override,
                const std::string& out_base) {
    const nlohmann::json j = load_json(config_path);
    const bdfo::DataSet base(parse_data_items(j.at("base")));
    std::vector<bdfo::MultiIndex> additions;
    for (const auto& a : j.at("additions")) additions.push_back(parse_alpha(a));
    std::vector<bdfo::MultiIndex> avail;
    for (const auto& a : j.at("available")) avail.push_back(parse_alpha(a));
    const bdfo::AvailableSet available{std::move(avail)};

    const double radius = radius_override > 0 ? radius_override : j.value("radius", 1.0);
    const int resolution = resolution_override > 0 ? resolution_override : j.value("resolution", 64);

    const bdfo::poise::HeatmapGrid grid =
        bdfo::poise::heatmap_grid(base, additions, available, radius, resolution);
    if (out_base.empty()) {
        bdfo::poise::write_heatmap_csv(grid, std::cout);
    } else {
        auto csv = open_out(out_base + ".csv");
        bdfo::poise::write_heatmap_csv(grid, csv);
        auto js = open_out(out_base + ".json");
        bdfo::poise::write_heatmap_json(grid, js);
    }
    return 0;
}

int cmd_errscan(const std::string& function_name, const std::string& geometry_path,
                std::vector<double> deltas, double lipschitz, int samples, std::uint64_t seed,
                const std::string& out) {
    const bdfo::oracle::Problem& target = bdfo::oracle::find_problem(function_name);
    const nlohmann::json j = load_json(geometry_path);
    const bdfo::DataSet geometry(parse_data_items(j.at("items")));
    if (deltas.empty()) deltas = {1e-1, 5e-2, 2.5e-2, 1.25e-2, 6.25e-3, 3.125e-3};

    const std::vector<bdfo::bounds::ErrorScanRow> rows =
        bdfo::bounds::error_scan(target, geometry, deltas, lipschitz, samples, seed);
    if (out.empty()) {
        bdfo::bounds::write_error_scan_csv(rows, std::cout);
    } else {
        auto os = open_out(out);
        bdfo::bounds::write_error_scan_csv(rows, os);
    }
    return 0;
}

int cmd_list_problems() {
    for (const bdfo::oracle::Problem& p : bdfo::oracle::problem_suite()) {
        std::cout << p.name << "  n=" << p.n;
        if (p.fmin) std::cout << "  fmin=" << *p.fmin;
        std::cout << '\n';
    }
    return 0;
}

void add_param_options(CLI::App* app, bdfo::solver::SolverParams& params) {
    app->add_option("--eta", params.eta, "acceptance threshold");
    app->add_option("--gamma-dec", params.gamma_dec, "radius decrease factor");
    app->add_option("--gamma-inc", params.gamma_inc, "radius increase factor");
    app->add_option("--eps-c", params.eps_c, "criticality trigger");
    app->add_option("--beta", params.beta, "radius-sigma coupling");
    app->add_option("--mu", params.mu, "criticality radius multiple");
    app->add_option("--delta0", params.delta0, "initial trust radius");
    app->add_option("--delta-max", params.delta_max, "maximum trust radius");
    app->add_option("--xi-acc", params.xi_acc, "pivot acceptance threshold");
    app->add_option("--xi-imp", params.xi_imp, "pivot improvement factor");
    app->add_option("--stop-sigma", params.stop_sigma, "stationarity stop");
    app->add_option("--stop-delta", params.stop_delta, "radius stop");
    app->add_option("--max-iterations", params.max_iterations, "iteration cap");
    app->add_flag("--literal-radius-increase", params.literal_radius_increase,
                  "radius increase rule exactly as printed");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"bdfo: trust-region optimization with some available derivatives"};
    app.require_subcommand(1);

    SolveArgs solve_args;
    CLI::App* solve = app.add_subcommand("solve", "run one solver instance");
    solve->add_option("--problem", solve_args.problem, "problem name")->required();
    solve->add_option("--fraction", solve_args.fraction, "fraction of known variables");
    solve->add_option("--seed", solve_args.seed, "mask seed");
    solve->add_option("--solver", solve_args.solver, "birkhoff | hermite")
        ->check(CLI::IsMember({"birkhoff", "hermite"}));
    solve->add_option("--budget-multiplier", solve_args.budget_multiplier,
                      "budget = multiplier * (n+1) distinct queries");
    solve->add_option("--out", solve_args.out, "write run JSON here instead of stdout");
    add_param_options(solve, solve_args.params);

    std::string profile_config_path, profile_out = "profiles";
    bdfo::bench::RunConfig profile_config;
    CLI::App* profile = app.add_subcommand("profile", "run the benchmark matrix, emit data profiles");
    profile->add_option("--config", profile_config_path, "flat key = value config file");
    profile->add_option("--out-dir", profile_out, "output directory");
    profile->add_option("--problems", profile_config.problems, "problem names");
    profile->add_option("--fractions", profile_config.fractions, "derivative fractions");
    profile->add_option("--seeds", profile_config.seeds, "mask seeds");
    profile->add_option("--solvers", profile_config.solvers, "birkhoff and/or hermite");
    profile->add_option("--taus", profile_config.taus, "stationarity tolerances");
    profile->add_option("--budget-multiplier", profile_config.budget_multiplier,
                        "budget = multiplier * (n+1)");
    profile->add_option("--workers", profile_config.workers, "worker pool size (0 = cores)");

    std::string heatmap_config, heatmap_out;
    int heatmap_resolution = 0;
    double heatmap_radius = 0.0;
    CLI::App* heatmap = app.add_subcommand("heatmap", "poisedness heatmap over a grid");
    heatmap->add_option("--config", heatmap_config, "JSON configuration file")->required();
    heatmap->add_option("--resolution", heatmap_resolution, "grid resolution override");
    heatmap->add_option("--radius", heatmap_radius, "region radius override");
    heatmap->add_option("--out", heatmap_out, "output base name (.csv and .json)");

    std::string err_function, err_geometry, err_out;
    std::vector<double> err_deltas;
    double err_lipschitz = 1.0;
    int err_samples = 10000;
    std::uint64_t err_seed = 20240901;
    CLI::App* errscan = app.add_subcommand("errscan", "error-decay scan against the bounds");
    errscan->add_option("--function", err_function, "target function (problem registry name)")
        ->required();
    errscan->add_option("--geometry", err_geometry, "JSON normalized geometry file")->required();
    errscan->add_option("--deltas", err_deltas, "radii to scan");
    errscan->add_option("--lipschitz", err_lipschitz, "Hessian Lipschitz bound of the target");
    errscan->add_option("--samples", err_samples, "ball sample count");
    errscan->add_option("--seed", err_seed, "sampling seed");
    errscan->add_option("--out", err_out, "output CSV path");

    CLI::App* list = app.add_subcommand("list-problems", "print the problem registry");

    CLI11_PARSE(app, argc, argv);

    try {
        if (solve->parsed()) return cmd_solve(solve_args);
        if (profile->parsed()) {
            if (!profile_config_path.empty()) {
                std::ifstream in(profile_config_path);
                if (!in) throw std::invalid_argument("cannot open config: " + profile_config_path);
                bdfo::bench::RunConfig from_file = bdfo::bench::parse_config(in);
                // CLI flags override file values.
                if (profile->count("--problems") == 0) profile_config.problems = from_file.problems;
                if (profile->count("--fractions") == 0) profile_config.fractions = from_file.fractions;
                if (profile->count("--seeds") == 0) profile_config.seeds = from_file.seeds;
                if (profile->count("--solvers") == 0) profile_config.solvers = from_file.solvers;
                if (profile->count("--taus") == 0) profile_config.taus = from_file.taus;
                if (profile->count("--budget-multiplier") == 0)
                    profile_config.budget_multiplier = from_file.budget_multiplier;
                if (profile->count("--workers") == 0) profile_config.workers = from_file.workers;
                profile_config.params = from_file.params;
            }
            return cmd_profile(profile_config, profile_out);
        }
        if (heatmap->parsed())
            return cmd_heatmap(heatmap_config, heatmap_resolution, heatmap_radius, heatmap_out);
        if (errscan->parsed())
            return cmd_errscan(err_function, err_geometry, err_deltas, err_lipschitz, err_samples,
                               err_seed, err_out);
        if (list->parsed()) return cmd_list_problems();
    } catch (const std::out_of_range& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "error: malformed input file: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
