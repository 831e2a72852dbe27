#pragma once

#include "sketchdesc/problem.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <utility>
#include <vector>

namespace sketchdesc {

enum class Exp1Variant { Structured, RandomRankDeficient };

/// Structured: f(x) = xᵀ(I + (1-δ)(e₁eₙᵀ + eₙe₁ᵀ))x s.t. eᵀx = 0, x0 a seeded unit
/// vector in ker(eᵀ). Random: f = ½xᵀMx with M = M₀ + δI, M₀ = WᵀW of rank n/2,
/// A = v₂ᵀ and x0 = v₁ (top two eigenvectors of M). Both have x* = 0, f* = 0.
ConstrainedProblem make_exp1_problem(Index n, double delta, Exp1Variant variant, std::uint64_t seed = 0);

struct Exp2Problem {
    ConstrainedProblem problem;
    /// f(x) = xᵀBx, so the Hessian is 2B.
    Matrix B;
};

/// f(x) = xᵀ(δI + (1-δ)eeᵀ)x s.t. eᵀx = 0.
Exp2Problem make_exp2_problem(Index n, double delta, std::uint64_t seed = 0);

enum class Exp2Metric { Exact, ScaledIdentity, PerSketch };

/// M = 2B, 2λ_max(B)·I, or the per-sketch rule on 2B.
Smoothness exp2_smoothness(const Matrix& b, Exp2Metric metric);

/// f(x) = ½‖Ex - x‖² s.t. eᵀx = 1 with E = Ē diag(Ēᵀe)⁻¹.
ConstrainedProblem make_pagerank_problem(const Matrix& adjacency);
/// Directed edges (from, to); Ē(to, from) = 1.
ConstrainedProblem make_pagerank_problem(Index nodes, const std::vector<std::pair<Index, Index>>& edges);

enum class Loss { Ridge, Hinge, Absolute };

/// min (1/n) Σ φ*ᵢ(xᵢ) s.t. [a₁ ⋯ aₙ] x = 0, features m x n.
ConstrainedProblem make_dual_erm_problem(const Matrix& features, const Vector& labels, Loss loss = Loss::Ridge);

struct PortfolioData {
    Vector mu;
    Matrix sigma;
    std::vector<Index> classes;
    /// Σ = FᵀF + ridge·I when known; enables the factored Hessian.
    std::optional<Matrix> factor;
    double ridge = 0.0;
};

/// min xᵀΣx s.t. eᵀx = 1, μᵀx = r, Σ_{i∈c} xᵢ = a_c. x0 = A†b.
ConstrainedProblem make_portfolio_problem(const Vector& mu, const Matrix& sigma, double target_return,
                                          const std::vector<Index>& classes, const Vector& allocations);
ConstrainedProblem make_portfolio_problem(const PortfolioData& data, double target_return, const Vector& allocations);

PortfolioData synth_portfolio_data(Index n, Index num_classes, std::uint64_t seed = 0);

/// Number of classes (max id + 1).
Index class_count(const std::vector<Index>& classes);
/// a_c proportional to class sizes.
Vector proportional_allocations(const std::vector<Index>& classes);

/// mu.csv: one value per line; sigma.csv: n rows of n values; classes.csv: asset_id,class_id.
PortfolioData read_portfolio_csv(const std::filesystem::path& mu, const std::filesystem::path& sigma,
                                 const std::filesystem::path& classes);

}  // namespace sketchdesc
