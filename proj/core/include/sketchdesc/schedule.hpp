#pragma once

#include <cstddef>
#include <vector>

namespace sketchdesc {

/// γ₀ = 1/ν, γ_{k+1} = (1/ν + √(1/ν² + 4γ_k²)) / 2, for k = 0..k_max.
std::vector<double> gamma_schedule(double nu, std::size_t k_max);

/// One step of the γ recursion.
double next_gamma(double gamma, double nu);

struct StepParams {
    double alpha = 1.0;
    double beta = 1.0;
    double gamma = 0.0;
};

/// Parameters (α_k, β_k, γ_k) for accelerated descent.
///
/// Convex: α_k = 1/(γ_k ν), β_k = 1, γ_k from the recursion.
/// Strongly convex: γ = 1/√(σν), α = γσ/(1+γσ), β = 1 - γσ.
/// α is clamped to 1 (counted in clamps()); β outside [0, 1] is a Schedule error.
class Schedule {
public:
    static Schedule convex(double nu);
    static Schedule strongly_convex(double sigma, double nu);

    bool is_convex() const noexcept { return convex_; }
    double nu() const noexcept { return nu_; }
    double sigma() const noexcept { return sigma_; }

    /// Parameters at k; calls must be made with k = 0, 1, 2, ... in order.
    StepParams next();
    std::size_t position() const noexcept { return k_; }
    std::size_t clamps() const noexcept { return clamps_; }

private:
    Schedule(bool convex, double sigma, double nu);

    bool convex_;
    double sigma_;
    double nu_;
    double gamma_;
    std::size_t k_ = 0;
    std::size_t clamps_ = 0;
};

}  // namespace sketchdesc
