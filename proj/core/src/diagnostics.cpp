#include "sketchdesc/diagnostics.hpp"

#include "sketchdesc/error.hpp"

#include "json.hpp"

#include <cmath>

namespace sketchdesc {

Estimation pick_estimation(const SketchDistribution& dist, const DiagnosticsOptions& options) {
    if (dist.is_finite() && dist.support_size() <= options.max_exact_atoms) return Estimation::exact();
    return Estimation::monte_carlo(options.mc_samples, options.mc_seed);
}

Diagnostics diagnose(const ConstrainedProblem& problem, const SketchDistribution& dist,
                     const DiagnosticsOptions& options) {
    const Estimation mode = pick_estimation(dist, options);
    DiagnosticsReport r;
    r.sketch = dist.describe();
    r.smoothness = std::string(to_string(problem.smoothness.kind()));
    r.monte_carlo = !mode.is_exact();
    ExpectedOperator z = expected_Z(dist, problem.A, problem.smoothness, mode);
    r.samples = z.atoms();
    r.assumption = check_assumption_Z(z);
    if (options.check_span && (dist.is_finite() ? mode.is_exact() : true)) {
        r.span = check_span_condition(dist, problem.A, options.span_samples);
    }
    if (!r.assumption.holds) {
        r.notes.push_back("Z is not positive definite on ker(A); constants are undefined");
        return {std::move(z), std::move(r)};
    }
    if (r.assumption.degenerate) {
        r.notes.push_back("ker(A) is trivial; the feasible set is a single point");
        return {std::move(z), std::move(r)};
    }
    const auto m = problem.smoothness.matrix();
    if (!m) r.notes.push_back("per-sketch smoothness: sigma_Z and nu_max are reported for fixed M only");
    if (m && problem.G) r.sigma_Z = sigma_Z(z, *problem.G);
    if (m && options.compute_nu) {
        Estimation nu_mode = mode;
        if (!mode.is_exact()) nu_mode.seed = Rng::mix(mode.seed);
        const auto nu = nu_max(dist, z, problem.smoothness, nu_mode);
        r.nu_max = nu.value;
        if (nu.monte_carlo) r.nu_std_error = nu.std_error;
    }
    if (m) {
        r.nu_upper_bound = nu_upper_bound(z, *m);
        r.lambda_max_MZM = lambda_max_MZM(z, *m);
    }
    if (r.sigma_Z && r.nu_max && *r.nu_max > 0.0) r.accelerated_rate = std::sqrt(std::max(0.0, *r.sigma_Z) / *r.nu_max);
    return {std::move(z), std::move(r)};
}

std::string to_json(const DiagnosticsReport& r) {
    using nlohmann::json;
    const auto opt = [](const std::optional<double>& v) -> json { return v ? json(*v) : json(nullptr); };
    json j;
    j["sketch"] = r.sketch;
    j["smoothness"] = r.smoothness;
    j["estimation"] = r.monte_carlo ? "monte-carlo" : "exact";
    j["samples"] = r.samples;
    j["assumption_2"] = {{"holds", r.assumption.holds},
                         {"degenerate", r.assumption.degenerate},
                         {"lambda_min", r.assumption.lambda_min}};
    if (r.span) {
        j["span_condition"] = {{"holds", r.span->holds},
                               {"span_dim", r.span->span_dim},
                               {"kernel_dim", r.span->kernel_dim},
                               {"monte_carlo", r.span->monte_carlo},
                               {"samples", r.span->samples}};
    } else {
        j["span_condition"] = nullptr;
    }
    j["sigma_Z"] = opt(r.sigma_Z);
    j["nu_max"] = opt(r.nu_max);
    j["nu_std_error"] = opt(r.nu_std_error);
    j["nu_upper_bound"] = opt(r.nu_upper_bound);
    j["lambda_max_MZM"] = opt(r.lambda_max_MZM);
    j["sqrt_sigma_over_nu"] = opt(r.accelerated_rate);
    j["notes"] = r.notes;
    return j.dump(2);
}

}  // namespace sketchdesc
