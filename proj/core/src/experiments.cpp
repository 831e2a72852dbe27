#include "sketchdesc/experiments.hpp"

#include "sketchdesc/error.hpp"
#include "sketchdesc/problem_io.hpp"
#include "sketchdesc/problems.hpp"

#include "json.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

namespace sketchdesc {

const CellResult* AggregateReport::find(const std::string& cell) const {
    for (const auto& c : cells) {
        if (c.cell == cell) return &c;
    }
    return nullptr;
}

unsigned default_worker_count() {
    if (const char* env = std::getenv("SKETCHDESC_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v > 0) return static_cast<unsigned>(v);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t count, unsigned workers, const std::function<void(std::size_t)>& job) {
    workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::size_t>(count, 1))));
    if (workers == 1) {
        for (std::size_t i = 0; i < count; ++i) job(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= count) return;
                try {
                    job(i);
                } catch (...) {
                    const std::lock_guard<std::mutex> lock(error_mutex);
                    if (!first_error) first_error = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

namespace {

struct CellSetup {
    ConstrainedProblem problem;
    std::optional<SketchDistribution> dist;
    SolverConfig config;
    std::optional<Diagnostics> diagnostics;
};

struct CellPlan {
    std::string label;
    std::function<CellSetup()> build;
};

struct Defaults {
    Index max_iters;
    double tolerance;
    Index record_every;
    std::vector<std::uint64_t> seeds;
};

std::vector<std::uint64_t> seed_range(std::uint64_t count) {
    std::vector<std::uint64_t> s(count);
    for (std::uint64_t i = 0; i < count; ++i) s[i] = i;
    return s;
}

// ν from diagnostics, padded by three standard errors when estimated by sampling.
void set_accelerated_params(SolverConfig& c, const DiagnosticsReport& r) {
    if (!r.nu_max || !r.sigma_Z) fail(ErrorCode::DegenerateMetric, "constants unavailable for accelerated run");
    c.nu = *r.nu_max + 3.0 * r.nu_std_error.value_or(0.0);
    c.sigma = std::min(*r.sigma_Z, *c.nu);
}

std::vector<CellPlan> exp1_cells(const ExperimentOptions& o, const Defaults& d, std::vector<std::string>& axes) {
    axes = {"problem", "sketch", "algorithm"};
    const Index n = o.n.value_or(100);
    const double delta = o.deltas.empty() ? 0.01 : o.deltas.front();
    std::vector<CellPlan> plans;
    for (const auto variant : {Exp1Variant::Structured, Exp1Variant::RandomRankDeficient}) {
        const std::string pname = variant == Exp1Variant::Structured ? "structured" : "random";
        for (const std::string sketch : {"fixed", "random-pairs", "gaussian"}) {
            for (const auto algo : {Algorithm::RSD, Algorithm::ARSD_StronglyConvex}) {
                const std::string label = pname + "/" + sketch + "/" + std::string(to_string(algo));
                plans.push_back({label, [=, &d] {
                                     CellSetup s;
                                     s.problem = make_exp1_problem(n, delta, variant, o.problem_seed);
                                     s.dist = make_sketch({sketch, 2, 0}, s.problem);
                                     DiagnosticsOptions dopt;
                                     dopt.check_span = false;
                                     dopt.mc_seed = o.problem_seed + 1;
                                     s.diagnostics = diagnose(s.problem, *s.dist, dopt);
                                     s.config.algorithm = algo;
                                     s.config.max_iters = d.max_iters;
                                     s.config.record_every = d.record_every;
                                     if (is_accelerated(algo)) set_accelerated_params(s.config, s.diagnostics->report);
                                     return s;
                                 }});
            }
        }
    }
    return plans;
}

std::vector<CellPlan> exp2_cells(const ExperimentOptions& o, const Defaults& d, std::vector<std::string>& axes) {
    axes = {"delta", "metric", "p"};
    const Index n = o.n.value_or(100);
    const std::vector<double> deltas = o.deltas.empty() ? std::vector<double>{0.01, 0.5} : o.deltas;
    const std::vector<Index> ps = o.p_grid.empty() ? std::vector<Index>{2, 4, 8, 16} : o.p_grid;
    std::vector<CellPlan> plans;
    for (double delta : deltas) {
        std::ostringstream dl;
        dl << "delta=" << delta;
        const std::vector<std::pair<std::string, std::optional<Exp2Metric>>> metrics = {
            {"B", Exp2Metric::Exact},
            {"lambda-max", Exp2Metric::ScaledIdentity},
            {"per-sketch", Exp2Metric::PerSketch},
            {"gaussian-B", std::nullopt},
        };
        for (const auto& [mname, metric] : metrics) {
            for (Index p : ps) {
                const std::string label = dl.str() + "/" + mname + "/p=" + std::to_string(p);
                plans.push_back({label, [=, &d] {
                                     CellSetup s;
                                     auto e2 = make_exp2_problem(n, delta, o.problem_seed);
                                     s.problem = std::move(e2.problem);
                                     s.problem.smoothness = exp2_smoothness(e2.B, metric.value_or(Exp2Metric::Exact));
                                     s.dist = metric ? SketchDistribution::random_tuples(n, p)
                                                     : SketchDistribution::gaussian(n, p);
                                     if (s.problem.smoothness.is_fixed()) {
                                         DiagnosticsOptions dopt;
                                         dopt.check_span = false;
                                         dopt.compute_nu = false;
                                         dopt.mc_seed = o.problem_seed + 1;
                                         s.diagnostics = diagnose(s.problem, *s.dist, dopt);
                                     }
                                     s.config.algorithm = Algorithm::RSD;
                                     s.config.max_iters = d.max_iters;
                                     s.config.record_every = d.record_every;
                                     return s;
                                 }});
            }
        }
    }
    return plans;
}

std::vector<CellPlan> exp3_cells(const ExperimentOptions& o, const Defaults& d, std::vector<std::string>& axes) {
    axes = {"p"};
    const std::vector<Index> ps = o.p_grid.empty() ? std::vector<Index>{16, 32, 64, 128} : o.p_grid;
    const bool csv = o.mu_csv && o.sigma_csv && o.classes_csv;
    if (!csv && (o.mu_csv || o.sigma_csv || o.classes_csv)) {
        fail(ErrorCode::InvalidConfig, "portfolio CSV input needs mu, sigma and classes files");
    }
    auto shared = std::make_shared<std::optional<ConstrainedProblem>>();
    auto once = std::make_shared<std::once_flag>();
    const auto problem = [=] {
        std::call_once(*once, [&] {
            if (csv) {
                const auto data = read_portfolio_csv(*o.mu_csv, *o.sigma_csv, *o.classes_csv);
                *shared = make_portfolio_problem(data, data.mu.mean(), proportional_allocations(data.classes));
            } else {
                const Index n = o.n.value_or(500);
                const auto data = synth_portfolio_data(n, std::min<Index>(11, n), o.problem_seed);
                *shared = make_portfolio_problem(data, data.mu.mean(), proportional_allocations(data.classes));
            }
        });
        return **shared;
    };
    std::vector<CellPlan> plans;
    for (Index p : ps) {
        plans.push_back({"p=" + std::to_string(p), [=, &d] {
                             CellSetup s;
                             s.problem = problem();
                             s.dist = SketchDistribution::gaussian(s.problem.dim(), p);
                             s.config.algorithm = Algorithm::RSD;
                             s.config.max_iters = d.max_iters;
                             s.config.record_every = d.record_every;
                             return s;
                         }});
    }
    return plans;
}

std::optional<Index> hitting_index(const std::vector<TraceRow>& rows, double f_star, double tol, std::size_t* at) {
    if (rows.empty()) return std::nullopt;
    const double gap0 = rows.front().f - f_star;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (gap0 <= 0.0 || (rows[i].f - f_star) / gap0 <= tol) {
            if (at) *at = i;
            return rows[i].k;
        }
    }
    return std::nullopt;
}

double censored_median(const std::vector<std::optional<double>>& v) {
    std::vector<double> vals;
    vals.reserve(v.size());
    for (const auto& x : v) vals.push_back(x.value_or(std::numeric_limits<double>::infinity()));
    if (vals.empty()) return std::numeric_limits<double>::quiet_NaN();
    std::sort(vals.begin(), vals.end());
    const std::size_t m = vals.size();
    if (m % 2 == 1) return vals[m / 2];
    const double a = vals[m / 2 - 1];
    const double b = vals[m / 2];
    if (std::isinf(a) || std::isinf(b)) return std::isinf(a) ? a : b;
    return 0.5 * (a + b);
}

}  // namespace

AggregateReport run_experiment(const ExperimentOptions& o) {
    Defaults d{};
    if (o.name == "exp1") {
        d = {200000, 1e-6, 10, seed_range(20)};
    } else if (o.name == "exp2") {
        d = {100000, 1e-6, 10, seed_range(20)};
    } else if (o.name == "exp3") {
        d = {100000, 1e-4, 5, seed_range(5)};
    } else {
        fail(ErrorCode::InvalidConfig, "unknown experiment '" + o.name + "' (expected exp1, exp2 or exp3)");
    }
    if (o.max_iters) d.max_iters = *o.max_iters;
    if (o.tolerance) d.tolerance = *o.tolerance;
    if (o.record_every) d.record_every = *o.record_every;
    if (!o.seeds.empty()) d.seeds = o.seeds;
    if (d.seeds.empty()) fail(ErrorCode::InvalidConfig, "experiment needs at least one seed");

    AggregateReport report;
    report.experiment = o.name;
    report.tolerance = d.tolerance;
    std::vector<CellPlan> plans = o.name == "exp1"   ? exp1_cells(o, d, report.axes)
                                  : o.name == "exp2" ? exp2_cells(o, d, report.axes)
                                                     : exp3_cells(o, d, report.axes);

    const unsigned workers = o.threads > 0 ? o.threads : default_worker_count();
    std::vector<std::optional<CellSetup>> setups(plans.size());
    report.cells.resize(plans.size());
    parallel_for(plans.size(), workers, [&](std::size_t i) {
        auto& cell = report.cells[i];
        cell.cell = plans[i].label;
        try {
            setups[i] = plans[i].build();
            if (setups[i]->diagnostics) cell.diagnostics = setups[i]->diagnostics->report;
            cell.f_star = setups[i]->problem.f_star;
        } catch (const std::exception& e) {
            cell.failed = true;
            cell.reason = e.what();
        }
    });

    const std::size_t ns = d.seeds.size();
    std::vector<std::optional<RunTrace>> traces(plans.size() * ns);
    std::vector<std::string> run_errors(plans.size() * ns);
    parallel_for(traces.size(), workers, [&](std::size_t j) {
        const std::size_t ci = j / ns;
        if (!setups[ci]) return;
        const auto& s = *setups[ci];
        SolverConfig c = s.config;
        c.seed = d.seeds[j % ns];
        c.timing = true;
        if (s.problem.f_star) c.stop_relative_gap = d.tolerance;
        try {
            const ExpectedOperator* z = s.diagnostics ? &s.diagnostics->z : nullptr;
            traces[j] = run(s.problem, *s.dist, c, z);
        } catch (const Error& e) {
            run_errors[j] = std::string(to_string(e.code())) + ": " + e.what();
        } catch (const std::exception& e) {
            run_errors[j] = e.what();
        }
    });

    for (std::size_t ci = 0; ci < plans.size(); ++ci) {
        auto& cell = report.cells[ci];
        if (cell.failed) continue;
        std::vector<std::vector<TraceRow>> rows;
        std::vector<std::optional<double>> iters, walls;
        std::vector<double> per_iter;
        for (std::size_t si = 0; si < ns; ++si) {
            const std::size_t j = ci * ns + si;
            if (!traces[j]) {
                cell.failed = true;
                cell.reason = "seed " + std::to_string(d.seeds[si]) + ": " + run_errors[j];
                break;
            }
            const auto& t = *traces[j];
            rows.push_back(t.rows);
            per_iter.push_back(t.ns_per_iter);
            std::optional<Index> hit;
            std::size_t at = 0;
            if (cell.f_star) hit = hitting_index(t.rows, *cell.f_star, d.tolerance, &at);
            cell.iterations_to_tol.push_back(hit);
            iters.push_back(hit ? std::optional<double>(double(*hit)) : std::nullopt);
            const auto wall = hit ? std::optional<double>(double(t.rows[at].wall_ns)) : std::nullopt;
            cell.wall_ns_to_tol.push_back(wall);
            walls.push_back(wall);
            cell.stats.steps += t.stats.steps;
            cell.stats.zero_steps += t.stats.zero_steps;
            cell.stats.rebases += t.stats.rebases;
            cell.stats.alpha_clamps += t.stats.alpha_clamps;
        }
        if (cell.failed) continue;
        cell.aggregate = aggregate_traces(rows);
        cell.median_iterations = censored_median(iters);
        cell.median_wall_ns = censored_median(walls);
        cell.median_ns_per_iter = percentile(per_iter, 0.5);
    }

    if (!o.out_dir.empty()) write_report(report, o.out_dir / o.name);
    return report;
}

void write_report(const AggregateReport& report, const std::filesystem::path& dir) {
    using nlohmann::json;
    std::filesystem::create_directories(dir / "plot");
    const auto open = [](const std::filesystem::path& p) {
        std::ofstream out(p, std::ios::binary);
        if (!out) fail(ErrorCode::Io, "cannot write " + p.string());
        return out;
    };
    const auto num = [](double v) -> json { return std::isfinite(v) ? json(v) : json(nullptr); };

    {
        auto out = open(dir / "aggregate.csv");
        bool header = true;
        for (const auto& c : report.cells) {
            if (c.failed) continue;
            write_aggregate_csv(out, c.cell, c.aggregate, header);
            header = false;
        }
        if (header) out << "cell," << kAggregateHeader << '\n';
    }
    {
        json diag = json::array();
        for (const auto& c : report.cells) {
            json e;
            e["cell"] = c.cell;
            e["diagnostics"] = c.diagnostics ? json::parse(to_json(*c.diagnostics)) : json(nullptr);
            diag.push_back(e);
        }
        auto out = open(dir / "diagnostics.json");
        out << diag.dump(2) << '\n';
    }
    {
        json s;
        s["experiment"] = report.experiment;
        s["tolerance"] = report.tolerance;
        s["axes"] = report.axes;
        json cells = json::array();
        for (const auto& c : report.cells) {
            json e;
            e["cell"] = c.cell;
            e["failed"] = c.failed;
            if (c.failed) {
                e["reason"] = c.reason;
                cells.push_back(e);
                continue;
            }
            e["median_iterations_to_tol"] = num(c.median_iterations);
            e["median_wall_ns_to_tol"] = num(c.median_wall_ns);
            e["median_ns_per_iter"] = num(c.median_ns_per_iter);
            json per_seed = json::array();
            for (const auto& it : c.iterations_to_tol) per_seed.push_back(it ? json(*it) : json(nullptr));
            e["iterations_to_tol"] = per_seed;
            e["zero_steps"] = c.stats.zero_steps;
            e["rebases"] = c.stats.rebases;
            e["alpha_clamps"] = c.stats.alpha_clamps;
            cells.push_back(e);
        }
        s["cells"] = cells;
        auto out = open(dir / "summary.json");
        out << s.dump(2) << '\n';
    }
    {
        auto out = open(dir / "iterations.csv");
        out << "cell,median_iterations,median_wall_ns,median_ns_per_iter\n";
        for (const auto& c : report.cells) {
            if (c.failed) {
                out << c.cell << ",failed,failed,failed\n";
                continue;
            }
            out << c.cell << ',' << format_double(c.median_iterations) << ',' << format_double(c.median_wall_ns) << ','
                << format_double(c.median_ns_per_iter) << '\n';
        }
    }
    {
        auto out = open(dir / "plot" / "constants.dat");
        out << "# cell sigma_Z sqrt_sigma_over_nu\n";
        for (const auto& c : report.cells) {
            if (!c.diagnostics) continue;
            const auto& r = *c.diagnostics;
            out << '"' << c.cell << "\" " << format_double(r.sigma_Z.value_or(std::nan(""))) << ' '
                << format_double(r.accelerated_rate.value_or(std::nan(""))) << '\n';
        }
    }
    for (const auto& c : report.cells) {
        if (c.failed) continue;
        std::string file = c.cell;
        std::replace(file.begin(), file.end(), '/', '_');
        auto out = open(dir / "plot" / (file + ".dat"));
        const double fs = c.f_star.value_or(0.0);
        out << "# " << c.cell << "\n# k gap_mean gap_median gap_p10 gap_p90\n";
        for (const auto& r : c.aggregate) {
            out << r.k << ' ' << format_double(r.f_mean - fs) << ' ' << format_double(r.f_median - fs) << ' '
                << format_double(r.f_p10 - fs) << ' ' << format_double(r.f_p90 - fs) << '\n';
        }
    }
}

}  // namespace sketchdesc
