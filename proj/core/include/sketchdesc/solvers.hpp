#pragma once

#include "sketchdesc/operators.hpp"
#include "sketchdesc/problem.hpp"
#include "sketchdesc/schedule.hpp"
#include "sketchdesc/sketch.hpp"
#include "sketchdesc/trace.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace sketchdesc {

enum class Algorithm {
    RSD,
    ARSD_Convex,
    ARSD_StronglyConvex,
    ARSD_EfficientConvex,
    ARSD_EfficientStronglyConvex,
};

/// rsd, arsd-cvx, arsd-sc, arsd-eff-cvx, arsd-eff-sc
std::string_view to_string(Algorithm a) noexcept;
Algorithm parse_algorithm(std::string_view name);
bool is_accelerated(Algorithm a) noexcept;
bool is_strongly_convex(Algorithm a) noexcept;

struct SolverConfig {
    Algorithm algorithm = Algorithm::RSD;
    Index max_iters = 1000;
    std::uint64_t seed = 0;
    std::optional<double> nu;
    std::optional<double> sigma;
    Index record_every = 1;
    /// Stop once the optimality measure drops to this value; needs Z. Non-finite disables.
    std::optional<double> stop_tolerance;
    /// Stop once (f - f*)/(f(x0) - f*) drops to this value; needs f*.
    std::optional<double> stop_relative_gap;
    /// Efficient strongly convex form: rebase when cond(B) exceeds this.
    double rebase_condition = 1e6;
    /// Efficient convex form: rebase when b drops below this.
    double rebase_floor = 1e-300;
    /// Quadratic objectives: recompute cached Hessian products this often.
    Index refresh_every = 1024;
    /// Write cumulative wall time into trace rows (otherwise 0, keeping traces reproducible).
    bool timing = false;
};

struct SolverParams {
    double nu = 0.0;
    double sigma = 0.0;
    double rebase_condition = 1e6;
    double rebase_floor = 1e-300;
    Index refresh_every = 1024;
};

/// Iterate bundle of one algorithm. Thread-confined.
class Solver {
public:
    virtual ~Solver() = default;

    /// One iteration. With `materialize` set, x() holds x^{k+1} afterwards;
    /// otherwise the efficient forms leave x() stale.
    virtual void step(bool materialize) = 0;

    /// Last materialized primal iterate.
    virtual Vector x() const = 0;
    /// Point of the next gradient evaluation (x for RSD).
    virtual Vector y() const = 0;
    virtual Vector v() const = 0;

    Index iteration() const noexcept { return k_; }
    const RunStats& stats() const noexcept { return stats_; }

protected:
    Index k_ = 0;
    RunStats stats_;
};

std::unique_ptr<Solver> make_solver(const ConstrainedProblem& problem, SketchDistribution dist, Algorithm algorithm,
                                    const SolverParams& params = {});

struct ResolvedParameters {
    std::optional<double> nu;
    std::optional<double> sigma;
    std::string nu_source;
    std::string sigma_source;
    std::vector<std::string> warnings;
};

/// ν and σ for accelerated runs: explicit values win; otherwise exact ν_max
/// (finite families), the λ_max(M^{-1/2}Z†M^{-1/2}) bound, and σ_Z from G.
ResolvedParameters resolve_parameters(const ConstrainedProblem& problem, const SketchDistribution& dist,
                                      const SolverConfig& config, const ExpectedOperator* z);

/// Runs config.max_iters steps from problem.x0 with dist reseeded by config.seed.
RunTrace run(const ConstrainedProblem& problem, const SketchDistribution& dist, const SolverConfig& config,
             const ExpectedOperator* z = nullptr);

}  // namespace sketchdesc
