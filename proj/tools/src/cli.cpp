#include "sketchdesc/cli.hpp"

#include "sketchdesc/diagnostics.hpp"
#include "sketchdesc/error.hpp"
#include "sketchdesc/experiments.hpp"
#include "sketchdesc/problem_io.hpp"
#include "sketchdesc/solvers.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace sketchdesc {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct AssumptionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct CommonFlags {
    std::string problem = "builtin:example6";
    std::string sketch = "random-pairs";
    Index p = 2;
    std::uint64_t seed = 0;
    std::uint64_t problem_seed = 0;
    std::optional<Index> n;
    std::optional<double> delta;
    std::optional<std::string> smoothness;
    std::string out = ".";
    bool force = false;
    Index mc_samples = 2000;
};

struct SolveFlags {
    std::string algo = "rsd";
    Index iters = 1000;
    std::optional<double> tol;
    std::optional<double> nu;
    std::optional<double> sigma;
    Index record_every = 1;
    bool timing = false;
};

struct ExperimentFlags {
    std::string name;
    std::optional<std::uint64_t> seeds;
    std::optional<Index> n;
    std::vector<double> deltas;
    std::vector<Index> p_grid;
    std::optional<Index> iters;
    std::optional<double> tol;
    std::optional<Index> record_every;
    unsigned threads = 0;
    std::string out = "results";
    std::optional<std::string> mu_csv, sigma_csv, classes_csv;
    std::uint64_t problem_seed = 0;
};

void add_common(CLI::App* app, CommonFlags& f) {
    app->add_option("--problem", f.problem, "JSON file or builtin:<name>");
    app->add_option("--sketch", f.sketch, "Sketch family")
        ->check(CLI::IsMember(sketch_kind_names()));
    app->add_option("--p", f.p, "Sketch width")->check(CLI::PositiveNumber);
    app->add_option("--seed", f.seed, "Sketch stream seed");
    app->add_option("--problem-seed", f.problem_seed, "Seed for randomly generated builtin problems");
    app->add_option("--n", f.n, "Dimension override for builtin problems")->check(CLI::PositiveNumber);
    app->add_option("--delta", f.delta, "Conditioning parameter for builtin problems");
    app->add_option("--smoothness", f.smoothness, "Smoothness matrix choice")
        ->check(CLI::IsMember({"full", "scaled-identity", "per-sketch"}));
    app->add_option("--out", f.out, "Output directory");
    app->add_option("--mc-samples", f.mc_samples, "Monte-Carlo samples for continuous sketch families")
        ->check(CLI::PositiveNumber);
    app->add_flag("--force", f.force, "Continue when Z is not positive definite on ker(A)");
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorCode::Io, "cannot write " + path.string());
    out << text;
}

json nullable(const std::optional<double>& v) {
    return v && std::isfinite(*v) ? json(*v) : json(nullptr);
}

struct Setup {
    ConstrainedProblem problem;
    std::optional<SketchDistribution> dist;
    std::optional<Diagnostics> diagnostics;
};

Setup prepare(const CommonFlags& f, bool need_nu) {
    Setup s;
    s.problem = load_problem(f.problem, BuiltinOptions{f.n, f.delta, f.problem_seed});
    if (f.smoothness) apply_smoothness_choice(s.problem, *f.smoothness);
    s.dist = make_sketch(SketchSpec{f.sketch, f.p, f.seed}, s.problem);

    const Index m = s.problem.constraints();
    const bool dense_family = f.sketch == "gaussian" || f.sketch == "uniform";
    if (dense_family && f.p <= m && !f.force) {
        throw AssumptionError(f.sketch + " sketch with p = " + std::to_string(f.p) + " and m = " +
                              std::to_string(m) + " constraints: A S has full column rank almost surely, so " +
                              "ker(AS) = {0} and every step is zero; Assumption 2 requires p > m");
    }

    DiagnosticsOptions dopt;
    dopt.mc_samples = f.mc_samples;
    dopt.mc_seed = Rng::mix(f.seed ^ 0x5d1a9e3bULL);
    dopt.compute_nu = need_nu;
    s.diagnostics = diagnose(s.problem, *s.dist, dopt);
    return s;
}

void check_assumption(const Setup& s, const CommonFlags& f) {
    const auto& a = s.diagnostics->report.assumption;
    if (!a.holds && !f.force) {
        throw AssumptionError("Z = E[Z_S] is not positive definite on ker(A) (lambda_min = " +
                              format_double(a.lambda_min) + "); pass --force to run anyway");
    }
}

int cmd_solve(const CommonFlags& f, const SolveFlags& sf, std::ostream& out) {
    const Algorithm algo = parse_algorithm(sf.algo);
    Setup s = prepare(f, is_accelerated(algo) && !sf.nu);
    const fs::path dir(f.out);
    fs::create_directories(dir);
    write_text(dir / "diagnostics.json", to_json(s.diagnostics->report) + "\n");
    check_assumption(s, f);

    SolverConfig c;
    c.algorithm = algo;
    c.max_iters = sf.iters;
    c.seed = f.seed;
    c.record_every = sf.record_every;
    c.timing = sf.timing;
    c.nu = sf.nu;
    c.sigma = sf.sigma;
    const auto& r = s.diagnostics->report;
    if (is_accelerated(algo) && !c.nu && r.nu_max) c.nu = *r.nu_max + 3.0 * r.nu_std_error.value_or(0.0);
    if (sf.tol) {
        if (s.problem.f_star) {
            c.stop_relative_gap = *sf.tol;
        } else {
            c.stop_tolerance = *sf.tol;
        }
    }
    const bool have_z = r.assumption.holds && !r.assumption.degenerate;
    const ExpectedOperator* z = have_z ? &s.diagnostics->z : nullptr;
    const ResolvedParameters params = resolve_parameters(s.problem, *s.dist, c, z);
    const RunTrace t = run(s.problem, *s.dist, c, z);

    write_trace_csv(dir / "trace.csv", t.rows);

    const double f_final = s.problem.objective->value(t.x_final);
    json sum;
    sum["problem"] = s.problem.name;
    sum["sketch"] = s.dist->describe();
    sum["algorithm"] = to_string(algo);
    sum["seed"] = f.seed;
    sum["iterations"] = t.stats.steps;
    sum["stopped_early"] = t.stopped_early;
    sum["final_f"] = f_final;
    sum["f_star"] = nullable(s.problem.f_star);
    sum["gap"] = s.problem.f_star ? nullable(f_final - *s.problem.f_star) : json(nullptr);
    sum["feasibility_inf"] = s.problem.feasibility(t.x_final);
    sum["nu"] = nullable(params.nu);
    sum["nu_source"] = params.nu_source;
    sum["sigma"] = nullable(params.sigma);
    sum["sigma_source"] = params.sigma_source;
    sum["ns_per_iter"] = sf.timing ? json(t.ns_per_iter) : json(nullptr);
    sum["stats"] = {{"zero_steps", t.stats.zero_steps},         {"rebases", t.stats.rebases},
                    {"dense_steps", t.stats.dense_steps},       {"step_dense_ops", t.stats.step_dense_ops},
                    {"rebase_dense_ops", t.stats.rebase_dense_ops}, {"record_dense_ops", t.stats.record_dense_ops},
                    {"oracle_refreshes", t.stats.oracle_refreshes}, {"alpha_clamps", t.stats.alpha_clamps}};
    json warnings = t.warnings;
    for (const auto& w : params.warnings) warnings.push_back(w);
    sum["warnings"] = warnings;
    write_text(dir / "summary.json", sum.dump(2) + "\n");

    out << "f = " << format_double(f_final);
    if (s.problem.f_star) out << "  gap = " << format_double(f_final - *s.problem.f_star);
    out << "  feas = " << format_double(s.problem.feasibility(t.x_final)) << "  steps = " << t.stats.steps << '\n';
    return exit_code::kOk;
}

int cmd_diagnose(const CommonFlags& f, std::ostream& out) {
    Setup s = prepare(f, true);
    const fs::path dir(f.out);
    fs::create_directories(dir);
    const std::string text = to_json(s.diagnostics->report);
    write_text(dir / "diagnostics.json", text + "\n");
    out << text << '\n';
    check_assumption(s, f);
    return exit_code::kOk;
}

int cmd_experiment(const ExperimentFlags& ef, std::ostream& out) {
    ExperimentOptions o;
    o.name = ef.name;
    o.out_dir = ef.out;
    if (ef.seeds) {
        for (std::uint64_t i = 0; i < *ef.seeds; ++i) o.seeds.push_back(i);
    }
    o.n = ef.n;
    o.deltas = ef.deltas;
    o.p_grid = ef.p_grid;
    o.max_iters = ef.iters;
    o.tolerance = ef.tol;
    o.record_every = ef.record_every;
    o.threads = ef.threads;
    if (ef.mu_csv) o.mu_csv = *ef.mu_csv;
    if (ef.sigma_csv) o.sigma_csv = *ef.sigma_csv;
    if (ef.classes_csv) o.classes_csv = *ef.classes_csv;
    o.problem_seed = ef.problem_seed;

    const AggregateReport report = run_experiment(o);
    out << "cell,median_iterations,median_wall_ns,median_ns_per_iter\n";
    for (const auto& c : report.cells) {
        if (c.failed) {
            out << c.cell << ",failed: " << c.reason << '\n';
            continue;
        }
        out << c.cell << ',' << format_double(c.median_iterations) << ',' << format_double(c.median_wall_ns) << ','
            << format_double(c.median_ns_per_iter) << '\n';
    }
    return exit_code::kOk;
}

int report_error(std::ostream& err, int code, std::string_view kind, const std::string& message) {
    json j;
    j["error"] = kind;
    j["message"] = message;
    j["exit_code"] = code;
    err << j.dump() << '\n';
    return code;
}

int exit_for(ErrorCode code) {
    switch (code) {
    case ErrorCode::Io:
    case ErrorCode::InvalidConfig:
    case ErrorCode::InvalidInput:
        return exit_code::kUsage;
    default:
        return exit_code::kFailure;
    }
}

}  // namespace

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Random sketch descent for linearly constrained smooth optimization", "sketchdesc"};
    app.require_subcommand(1);

    CommonFlags solve_common, diag_common;
    SolveFlags sf;
    ExperimentFlags ef;

    auto* solve = app.add_subcommand("solve", "Run one solver and write trace.csv, diagnostics.json, summary.json");
    add_common(solve, solve_common);
    solve->add_option("--algo", sf.algo, "Algorithm")
        ->check(CLI::IsMember({"rsd", "arsd-cvx", "arsd-sc", "arsd-eff-cvx", "arsd-eff-sc"}));
    solve->add_option("--iters", sf.iters, "Iteration count")->check(CLI::NonNegativeNumber);
    solve->add_option("--tol", sf.tol, "Stop at this relative gap (optimality measure when f* is unknown)");
    solve->add_option("--nu", sf.nu, "Override nu")->check(CLI::PositiveNumber);
    solve->add_option("--sigma", sf.sigma, "Override sigma")->check(CLI::PositiveNumber);
    solve->add_option("--record-every", sf.record_every, "Trace stride")->check(CLI::PositiveNumber);
    solve->add_flag("--timing", sf.timing, "Record wall time in trace rows");

    auto* diag = app.add_subcommand("diagnose", "Report Z, sigma_Z and nu estimates");
    add_common(diag, diag_common);

    auto* exp = app.add_subcommand("experiment", "Run a predefined experiment grid");
    exp->add_option("name", ef.name, "exp1, exp2 or exp3")->required()->check(CLI::IsMember({"exp1", "exp2", "exp3"}));
    exp->add_option("--seeds", ef.seeds, "Number of seeds (0..N-1)")->check(CLI::PositiveNumber);
    exp->add_option("--n", ef.n, "Problem dimension")->check(CLI::PositiveNumber);
    exp->add_option("--delta", ef.deltas, "Conditioning parameter(s)");
    exp->add_option("--p", ef.p_grid, "Sketch widths");
    exp->add_option("--iters", ef.iters, "Iteration cap per run")->check(CLI::PositiveNumber);
    exp->add_option("--tol", ef.tol, "Relative gap target");
    exp->add_option("--record-every", ef.record_every, "Trace stride")->check(CLI::PositiveNumber);
    exp->add_option("--threads", ef.threads, "Worker count (default: SKETCHDESC_THREADS or all cores)");
    exp->add_option("--out", ef.out, "Output root");
    exp->add_option("--mu-csv", ef.mu_csv, "Portfolio mean returns");
    exp->add_option("--sigma-csv", ef.sigma_csv, "Portfolio covariance");
    exp->add_option("--classes-csv", ef.classes_csv, "Portfolio asset classes");
    exp->add_option("--problem-seed", ef.problem_seed, "Seed for generated problems");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return exit_code::kOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return exit_code::kOk;
    } catch (const CLI::ParseError& e) {
        return report_error(err, exit_code::kUsage, "usage", e.what());
    }

    try {
        if (*solve) return cmd_solve(solve_common, sf, out);
        if (*diag) return cmd_diagnose(diag_common, out);
        return cmd_experiment(ef, out);
    } catch (const AssumptionError& e) {
        return report_error(err, exit_code::kAssumption, "assumption", e.what());
    } catch (const Error& e) {
        return report_error(err, exit_for(e.code()), to_string(e.code()), e.what());
    } catch (const std::exception& e) {
        return report_error(err, exit_code::kFailure, "internal", e.what());
    }
}

int cli_main(int argc, const char* const* argv) { return cli_main(argc, argv, std::cout, std::cerr); }

}  // namespace sketchdesc
