#pragma once

#include "sketchdesc/diagnostics.hpp"
#include "sketchdesc/solvers.hpp"
#include "sketchdesc/trace.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace sketchdesc {

struct ExperimentOptions {
    /// exp1, exp2 or exp3
    std::string name = "exp1";
    /// Artifacts go to out_dir/<name>; empty writes nothing.
    std::filesystem::path out_dir;
    std::vector<std::uint64_t> seeds;
    std::optional<Index> n;
    std::vector<double> deltas;
    std::vector<Index> p_grid;
    std::optional<Index> max_iters;
    std::optional<double> tolerance;
    std::optional<Index> record_every;
    /// 0: SKETCHDESC_THREADS, else hardware concurrency.
    unsigned threads = 0;
    /// Portfolio CSV inputs for exp3 (all three or none).
    std::optional<std::filesystem::path> mu_csv, sigma_csv, classes_csv;
    std::uint64_t problem_seed = 0;
};

struct CellResult {
    std::string cell;
    bool failed = false;
    std::string reason;
    std::vector<AggregateRow> aggregate;
    std::optional<DiagnosticsReport> diagnostics;
    std::optional<double> f_star;
    /// First recorded k with relative gap ≤ tolerance, per seed.
    std::vector<std::optional<Index>> iterations_to_tol;
    std::vector<std::optional<double>> wall_ns_to_tol;
    /// Median over seeds; +inf when the median run never reached the tolerance.
    double median_iterations = 0.0;
    double median_wall_ns = 0.0;
    double median_ns_per_iter = 0.0;
    RunStats stats;
};

struct AggregateReport {
    std::string experiment;
    double tolerance = 0.0;
    std::vector<std::string> axes;
    std::vector<CellResult> cells;

    const CellResult* find(const std::string& cell) const;
};

/// Worker count: SKETCHDESC_THREADS when set, else hardware concurrency (at least 1).
unsigned default_worker_count();

/// Runs jobs 0..count-1 on a bounded pool; results must be written to per-job slots.
void parallel_for(std::size_t count, unsigned workers, const std::function<void(std::size_t)>& job);

AggregateReport run_experiment(const ExperimentOptions& options);

/// aggregate.csv, diagnostics.json, summary.json, iterations.csv and gnuplot .dat files.
void write_report(const AggregateReport& report, const std::filesystem::path& dir);

}  // namespace sketchdesc
