#include "sketchdesc/linalg.hpp"

#include "sketchdesc/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace sketchdesc::linalg {

namespace {

void require_rel_tol(double rel_tol) {
    if (!(rel_tol > 0.0 && rel_tol < 1.0)) {
        fail(ErrorCode::InvalidInput, "rank tolerance must lie in (0, 1), got " + std::to_string(rel_tol));
    }
}

// Number of leading (descending) singular values above the cutoff.
Index count_above(const Vector& descending, double cutoff) {
    Index r = 0;
    while (r < descending.size() && descending[r] > cutoff) ++r;
    return r;
}

}  // namespace

void require_finite(const Matrix& m, std::string_view what) {
    if (!m.allFinite()) fail(ErrorCode::InvalidInput, std::string(what) + " contains non-finite entries");
}

void require_finite(const Vector& v, std::string_view what) {
    if (!v.allFinite()) fail(ErrorCode::InvalidInput, std::string(what) + " contains non-finite entries");
}

PseudoInverse PseudoInverse::compute(const Matrix& b, double rel_tol) {
    require_rel_tol(rel_tol);
    require_finite(b, "pseudo-inverse input");
    PseudoInverse out;
    if (b.size() == 0) {
        out.left_ = Matrix(b.rows(), 0);
        out.right_ = Matrix(b.cols(), 0);
        return out;
    }
    Eigen::BDCSVD<Matrix> svd(b, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Vector& s = svd.singularValues();
    out.cutoff_ = rel_tol * s[0];
    const Index r = count_above(s, out.cutoff_);
    out.left_ = svd.matrixU().leftCols(r);
    out.right_ = svd.matrixV().leftCols(r);
    out.values_ = s.head(r);
    return out;
}

PseudoInverse PseudoInverse::compute_symmetric(const Matrix& b, double rel_tol) {
    require_rel_tol(rel_tol);
    require_finite(b, "pseudo-inverse input");
    if (b.rows() != b.cols()) fail(ErrorCode::InvalidShape, "symmetric pseudo-inverse needs a square matrix");
    PseudoInverse out;
    out.symmetric_ = true;
    if (b.size() == 0) {
        out.left_ = out.right_ = Matrix(0, 0);
        return out;
    }
    Eigen::SelfAdjointEigenSolver<Matrix> eig(symmetrize(b));
    const Vector& ev = eig.eigenvalues();
    const double scale = ev.cwiseAbs().maxCoeff();
    out.cutoff_ = rel_tol * scale;
    std::vector<Index> keep;
    for (Index i = ev.size() - 1; i >= 0; --i) {
        if (std::abs(ev[i]) > out.cutoff_) keep.push_back(i);
    }
    const auto r = static_cast<Index>(keep.size());
    out.left_.resize(b.rows(), r);
    out.values_.resize(r);
    for (Index j = 0; j < r; ++j) {
        out.left_.col(j) = eig.eigenvectors().col(keep[j]);
        out.values_[j] = ev[keep[j]];
    }
    out.right_ = out.left_;
    return out;
}

Matrix PseudoInverse::matrix() const {
    return right_ * values_.cwiseInverse().asDiagonal() * left_.transpose();
}

Vector PseudoInverse::apply(const Vector& x) const {
    return right_ * (values_.cwiseInverse().asDiagonal() * (left_.transpose() * x));
}

SubspaceBasis::SubspaceBasis(Index ambient_dim, Matrix columns)
    : n_(ambient_dim), columns_(std::move(columns)) {
    if (columns_.rows() != n_) fail(ErrorCode::InvalidShape, "basis rows must match ambient dimension");
}

Vector SubspaceBasis::project(const Vector& x) const {
    if (empty()) return Vector::Zero(n_);
    return columns_ * (columns_.transpose() * x);
}

Index numerical_rank(const Matrix& b, double rel_tol, double scale) {
    require_rel_tol(rel_tol);
    if (b.size() == 0) return 0;
    Eigen::BDCSVD<Matrix> svd(b);
    const Vector& s = svd.singularValues();
    if (s[0] == 0.0) return 0;
    return count_above(s, rel_tol * std::max(s[0], scale));
}

SubspaceBasis null_space(const Matrix& b, double rel_tol, double scale) {
    require_rel_tol(rel_tol);
    require_finite(b, "matrix");
    const Index n = b.cols();
    if (b.rows() == 0 || n == 0) return SubspaceBasis(n, Matrix::Identity(n, n));
    Eigen::BDCSVD<Matrix> svd(b, Eigen::ComputeFullV);
    const Vector& s = svd.singularValues();
    const Index r = s[0] == 0.0 ? 0 : count_above(s, rel_tol * std::max(s[0], scale));
    return SubspaceBasis(n, svd.matrixV().rightCols(n - r));
}

SubspaceBasis range_space(const Matrix& b, double rel_tol) {
    require_rel_tol(rel_tol);
    require_finite(b, "matrix");
    const Index m = b.rows();
    if (b.size() == 0) return SubspaceBasis(m, Matrix(m, 0));
    Eigen::BDCSVD<Matrix> svd(b, Eigen::ComputeThinU);
    const Vector& s = svd.singularValues();
    const Index r = s[0] == 0.0 ? 0 : count_above(s, rel_tol * s[0]);
    return SubspaceBasis(m, svd.matrixU().leftCols(r));
}

SubspaceBasis kernel_basis(const Matrix& a, double rel_tol) {
    if (a.rows() > a.cols()) {
        fail(ErrorCode::InvalidShape, "kernel_basis expects m <= n, got " + std::to_string(a.rows()) + "x" +
                                          std::to_string(a.cols()));
    }
    return null_space(a, rel_tol);
}

std::pair<double, double> generalized_eig_extremes(const Matrix& p, const Matrix& q, const SubspaceBasis& basis) {
    const Index n = basis.ambient_dim();
    if (p.rows() != n || p.cols() != n || q.rows() != n || q.cols() != n) {
        fail(ErrorCode::InvalidShape, "generalized eigenproblem: P and Q must be n x n");
    }
    if (basis.empty()) fail(ErrorCode::DegenerateMetric, "generalized eigenproblem on an empty subspace");
    const Matrix& u = basis.columns();
    return generalized_eig_extremes_reduced(u.transpose() * p * u, u.transpose() * q * u);
}

std::pair<double, double> generalized_eig_extremes_reduced(const Matrix& p_reduced, const Matrix& q_reduced) {
    if (p_reduced.rows() != p_reduced.cols() || q_reduced.rows() != q_reduced.cols() ||
        p_reduced.rows() != q_reduced.rows()) {
        fail(ErrorCode::InvalidShape, "generalized eigenproblem: reduced forms must be square and equal size");
    }
    if (p_reduced.rows() == 0) fail(ErrorCode::DegenerateMetric, "generalized eigenproblem on an empty subspace");
    const Matrix pr = symmetrize(p_reduced);
    const Matrix qr = symmetrize(q_reduced);
    const Vector qev = symmetric_eigenvalues(qr);
    const double qmax = qev.cwiseAbs().maxCoeff();
    if (!(qev[0] > 1e-12 * std::max(1.0, qmax))) {
        fail(ErrorCode::DegenerateMetric,
             "restricted metric is singular (lambda_min = " + std::to_string(qev[0]) + ")");
    }
    Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> ges(pr, qr, Eigen::EigenvaluesOnly);
    const Vector& ev = ges.eigenvalues();
    return {ev[0], ev[ev.size() - 1]};
}

Vector symmetric_eigenvalues(const Matrix& s) {
    if (s.size() == 0) return Vector();
    Eigen::SelfAdjointEigenSolver<Matrix> eig(symmetrize(s), Eigen::EigenvaluesOnly);
    return eig.eigenvalues();
}

double min_eigenvalue(const Matrix& s) {
    const Vector ev = symmetric_eigenvalues(s);
    return ev.size() ? ev[0] : 0.0;
}

double max_eigenvalue(const Matrix& s) {
    const Vector ev = symmetric_eigenvalues(s);
    return ev.size() ? ev[ev.size() - 1] : 0.0;
}

Matrix symmetric_sqrt(const Matrix& s) {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(symmetrize(s));
    const Vector root = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return eig.eigenvectors() * root.asDiagonal() * eig.eigenvectors().transpose();
}

Matrix symmetrize(const Matrix& s) {
    return 0.5 * (s + s.transpose());
}

double relative_frobenius_error(const Matrix& actual, const Matrix& expected) {
    const double denom = std::max(expected.norm(), 1e-300);
    return (actual - expected).norm() / denom;
}

}  // namespace sketchdesc::linalg
