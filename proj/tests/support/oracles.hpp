#pragma once

// Straight-line reference computations used by the tests. None of these go
// through the library's factored code paths.

#include "sketchdesc/linalg.hpp"
#include "sketchdesc/objective.hpp"
#include "sketchdesc/problem.hpp"
#include "sketchdesc/smoothness.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <random>

namespace oracle {

using sketchdesc::Index;
using sketchdesc::Matrix;
using sketchdesc::Vector;

inline Matrix pinv(const Matrix& b, double tol = 1e-10) {
    Eigen::CompleteOrthogonalDecomposition<Matrix> cod(b);
    cod.setThreshold(tol);
    return cod.pseudoInverse();
}

/// S P (P Sᵀ M S P)† P Sᵀ with P = I - (AS)†(AS).
inline Matrix z_s(const Matrix& s, const Matrix& a, const Matrix& m) {
    const Matrix as = a * s;
    const Matrix p = Matrix::Identity(s.cols(), s.cols()) - pinv(as) * as;
    return s * p * pinv(p * s.transpose() * m * s * p) * p * s.transpose();
}

/// Identity columns as a dense n x p matrix.
inline Matrix columns(Index n, std::initializer_list<Index> idx) {
    Matrix s = Matrix::Zero(n, static_cast<Index>(idx.size()));
    Index j = 0;
    for (Index i : idx) s(i, j++) = 1.0;
    return s;
}

/// Projector onto ker(A) from the normal equations, A assumed full row rank.
inline Matrix kernel_projector(const Matrix& a) {
    const Index n = a.cols();
    return Matrix::Identity(n, n) - a.transpose() * (a * a.transpose()).inverse() * a;
}

inline Matrix random_matrix(Index r, Index c, std::mt19937_64& rng) {
    std::normal_distribution<double> nd;
    Matrix m(r, c);
    for (Index j = 0; j < c; ++j)
        for (Index i = 0; i < r; ++i) m(i, j) = nd(rng);
    return m;
}

inline Vector random_vector(Index n, std::mt19937_64& rng) { return random_matrix(n, 1, rng).col(0); }

/// W Wᵀ + shift I.
inline Matrix random_spd(Index n, double shift, std::mt19937_64& rng) {
    const Matrix w = random_matrix(n, n, rng);
    return w * w.transpose() / double(n) + shift * Matrix::Identity(n, n);
}

/// f = ½ xᵀHx + cᵀx with constraints A x = b, x0 = A†b, optimum from the KKT system.
inline sketchdesc::ConstrainedProblem random_quadratic(Index n, Index m, double shift, std::mt19937_64& rng,
                                                       bool with_linear = true) {
    sketchdesc::ConstrainedProblem p;
    p.name = "random";
    const Matrix h = random_spd(n, shift, rng);
    const Vector c = with_linear ? random_vector(n, rng) : Vector(Vector::Zero(n));
    p.A = random_matrix(m, n, rng);
    p.b = random_vector(m, rng);
    p.objective = sketchdesc::QuadraticObjective::dense(h, c);
    p.smoothness = sketchdesc::Smoothness::full(h);
    p.G = h;
    p.x0 = pinv(p.A) * p.b;
    Matrix kkt = Matrix::Zero(n + m, n + m);
    kkt.topLeftCorner(n, n) = h;
    kkt.topRightCorner(n, m) = p.A.transpose();
    kkt.bottomLeftCorner(m, n) = p.A;
    Vector rhs(n + m);
    rhs << -c, p.b;
    const Vector sol = kkt.fullPivLu().solve(rhs);
    p.x_star = sol.head(n);
    p.f_star = 0.5 * p.x_star->dot(h * *p.x_star) + c.dot(*p.x_star);
    return p;
}

inline double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace oracle
