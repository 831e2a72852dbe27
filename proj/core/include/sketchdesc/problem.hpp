#pragma once

#include "sketchdesc/linalg.hpp"
#include "sketchdesc/objective.hpp"
#include "sketchdesc/smoothness.hpp"

#include <memory>
#include <optional>
#include <string>

namespace sketchdesc {

/// min f(x) s.t. Ax = b, with curvature bound M and optional strong-convexity matrix G.
struct ConstrainedProblem {
    std::string name;
    Matrix A;
    Vector b;
    std::shared_ptr<const Objective> objective;
    Smoothness smoothness;
    std::optional<Matrix> G;
    std::optional<double> f_star;
    std::optional<Vector> x_star;
    Vector x0;

    Index dim() const noexcept { return A.cols(); }
    Index constraints() const noexcept { return A.rows(); }

    /// Shapes agree, entries are finite and A x0 = b within 1e-10 (relative to 1 + ‖b‖∞).
    void validate() const;

    double feasibility(const Vector& x) const;
};

struct KktSolution {
    Vector x;
    Vector lambda;
    /// ‖Hx + c + Aᵀλ‖∞ + ‖Ax - b‖∞
    double residual = 0.0;
};

/// Solves [H Aᵀ; A 0][x; λ] = [-c; b]; rank-deficient A is allowed.
KktSolution solve_kkt(const Matrix& h, const Vector& c, const Matrix& a, const Vector& b);

/// Fills f_star and x_star from a KKT solve when the objective is quadratic.
void attach_kkt_optimum(ConstrainedProblem& problem);

/// Least-norm solution A†b; Infeasible when the residual exceeds 1e-10 (1 + ‖b‖∞).
Vector least_norm_point(const Matrix& a, const Vector& b);

}  // namespace sketchdesc
