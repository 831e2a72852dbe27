#pragma once

#include "sketchdesc/operators.hpp"
#include "sketchdesc/problem.hpp"
#include "sketchdesc/sketch.hpp"

#include <optional>
#include <string>
#include <vector>

namespace sketchdesc {

struct DiagnosticsOptions {
    /// Finite families with at most this many atoms are enumerated; others are sampled.
    std::uint64_t max_exact_atoms = 20000;
    Index mc_samples = 2000;
    std::uint64_t mc_seed = 0;
    bool compute_nu = true;
    bool check_span = true;
    Index span_samples = 1000;
};

struct DiagnosticsReport {
    std::string sketch;
    std::string smoothness;
    bool monte_carlo = false;
    Index samples = 0;
    AssumptionReport assumption;
    std::optional<SpanReport> span;
    std::optional<double> sigma_Z;
    std::optional<double> nu_max;
    std::optional<double> nu_std_error;
    std::optional<double> nu_upper_bound;
    std::optional<double> lambda_max_MZM;
    /// √(σ_Z/ν_max)
    std::optional<double> accelerated_rate;
    std::vector<std::string> notes;
};

struct Diagnostics {
    ExpectedOperator z;
    DiagnosticsReport report;
};

Estimation pick_estimation(const SketchDistribution& dist, const DiagnosticsOptions& options);

Diagnostics diagnose(const ConstrainedProblem& problem, const SketchDistribution& dist,
                     const DiagnosticsOptions& options = {});

std::string to_json(const DiagnosticsReport& report);

}  // namespace sketchdesc
