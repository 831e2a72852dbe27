#pragma once

#include "sketchdesc/linalg.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace sketchdesc {

struct TraceRow {
    Index k = 0;
    double f = 0.0;
    double feas_inf = 0.0;
    /// NaN when no expected operator was supplied.
    double opt_measure = 0.0;
    std::int64_t wall_ns = 0;

    bool operator==(const TraceRow&) const = default;
};

/// Counters a run accumulates. Dense ops are full-length vector operations.
struct RunStats {
    std::uint64_t steps = 0;
    std::uint64_t zero_steps = 0;
    std::uint64_t rebases = 0;
    std::uint64_t dense_steps = 0;
    std::uint64_t step_dense_ops = 0;
    std::uint64_t rebase_dense_ops = 0;
    std::uint64_t record_dense_ops = 0;
    std::uint64_t oracle_refreshes = 0;
    std::uint64_t alpha_clamps = 0;
};

struct RunTrace {
    std::vector<TraceRow> rows;
    RunStats stats;
    Vector x_final;
    bool stopped_early = false;
    /// Mean wall time per iteration, recording excluded.
    double ns_per_iter = 0.0;
    std::vector<std::string> warnings;
};

inline constexpr const char* kTraceHeader = "k,f,feas_inf,opt_measure,wall_ns";
inline constexpr const char* kAggregateHeader = "k,f_mean,f_median,f_p10,f_p90";

/// Shortest round-trip representation.
std::string format_double(double v);
double parse_double(std::string_view s);

void write_trace_csv(std::ostream& out, const std::vector<TraceRow>& rows);
void write_trace_csv(const std::filesystem::path& path, const std::vector<TraceRow>& rows);
std::vector<TraceRow> read_trace_csv(std::istream& in);
std::vector<TraceRow> read_trace_csv(const std::filesystem::path& path);

struct AggregateRow {
    Index k = 0;
    double f_mean = 0.0;
    double f_median = 0.0;
    double f_p10 = 0.0;
    double f_p90 = 0.0;
};

/// Linear-interpolation percentile of unsorted values, q in [0, 1].
double percentile(std::vector<double> values, double q);

/// Aggregates f across seeds on the union of recorded k. A run that stopped
/// early contributes its last recorded value at later k.
std::vector<AggregateRow> aggregate_traces(const std::vector<std::vector<TraceRow>>& runs);

void write_aggregate_csv(std::ostream& out, const std::vector<AggregateRow>& rows);
/// Rows prefixed with a cell label; header `cell,k,f_mean,f_median,f_p10,f_p90`.
void write_aggregate_csv(std::ostream& out, const std::string& cell, const std::vector<AggregateRow>& rows,
                         bool header);

}  // namespace sketchdesc
