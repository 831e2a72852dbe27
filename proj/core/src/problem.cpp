#include "sketchdesc/problem.hpp"

#include "sketchdesc/error.hpp"

#include <cmath>
#include <string>

namespace sketchdesc {

namespace {

double inf_norm(const Vector& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

}  // namespace

void ConstrainedProblem::validate() const {
    const Index n = dim();
    if (n < 1) fail(ErrorCode::InvalidShape, "problem dimension must be positive");
    if (b.size() != A.rows()) fail(ErrorCode::InvalidShape, "b must have one entry per row of A");
    if (!objective) fail(ErrorCode::InvalidInput, "problem has no objective");
    if (objective->dim() != n) fail(ErrorCode::InvalidShape, "objective dimension does not match A");
    if (smoothness.dim() != n) fail(ErrorCode::InvalidShape, "smoothness dimension does not match A");
    if (x0.size() != n) fail(ErrorCode::InvalidShape, "x0 has wrong length");
    if (G && (G->rows() != n || G->cols() != n)) fail(ErrorCode::InvalidShape, "G must be n x n");
    linalg::require_finite(A, "A");
    linalg::require_finite(b, "b");
    linalg::require_finite(x0, "x0");
    const double res = feasibility(x0);
    if (res > 1e-10 * (1.0 + inf_norm(b))) {
        fail(ErrorCode::Infeasible, "x0 violates Ax = b (residual " + std::to_string(res) + ")");
    }
}

double ConstrainedProblem::feasibility(const Vector& x) const {
    if (A.rows() == 0) return 0.0;
    return inf_norm(A * x - b);
}

KktSolution solve_kkt(const Matrix& h, const Vector& c, const Matrix& a, const Vector& b) {
    const Index n = h.rows();
    const Index m = a.rows();
    if (h.cols() != n || a.cols() != n || b.size() != m || c.size() != n) {
        fail(ErrorCode::InvalidShape, "KKT system: inconsistent shapes");
    }
    Matrix k = Matrix::Zero(n + m, n + m);
    k.topLeftCorner(n, n) = h;
    k.topRightCorner(n, m) = a.transpose();
    k.bottomLeftCorner(m, n) = a;
    Vector rhs(n + m);
    rhs << -c, b;
    const Eigen::CompleteOrthogonalDecomposition<Matrix> cod(k);
    const Vector sol = cod.solve(rhs);
    KktSolution out;
    out.x = sol.head(n);
    out.lambda = sol.tail(m);
    out.residual = inf_norm(h * out.x + c + a.transpose() * out.lambda) + (m ? inf_norm(a * out.x - b) : 0.0);
    return out;
}

void attach_kkt_optimum(ConstrainedProblem& problem) {
    const auto* q = problem.objective ? problem.objective->as_quadratic() : nullptr;
    if (!q) fail(ErrorCode::InvalidInput, "KKT optimum requires a quadratic objective");
    auto sol = solve_kkt(q->hessian(), q->linear(), problem.A, problem.b);
    problem.f_star = q->value(sol.x);
    problem.x_star = std::move(sol.x);
}

Vector least_norm_point(const Matrix& a, const Vector& b) {
    if (a.rows() != b.size()) fail(ErrorCode::InvalidShape, "least-norm point: b length mismatch");
    if (a.rows() == 0) return Vector::Zero(a.cols());
    const Vector x = linalg::pseudo_inverse(a).apply(b);
    const double res = inf_norm(a * x - b);
    if (res > 1e-10 * (1.0 + inf_norm(b))) {
        fail(ErrorCode::Infeasible, "constraint system is inconsistent (residual " + std::to_string(res) + ")");
    }
    return x;
}

}  // namespace sketchdesc
