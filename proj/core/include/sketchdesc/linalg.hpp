#pragma once

#include <Eigen/Dense>

#include <string_view>
#include <utility>

namespace sketchdesc {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

namespace linalg {

/// Relative singular-value cutoff used when no explicit tolerance is given.
inline constexpr double kDefaultRankTol = 1e-12;

void require_finite(const Matrix& m, std::string_view what);
void require_finite(const Vector& v, std::string_view what);

/// Moore-Penrose pseudo-inverse in factored form B† = V diag(1/s) Uᵀ.
///
/// Only the retained (above-cutoff) spectral pairs are stored. For the
/// symmetric path `left() == right()` and `values()` carries signed
/// eigenvalues.
class PseudoInverse {
public:
    PseudoInverse() = default;

    /// General matrices via SVD. Singular values below rel_tol * s_max are dropped.
    static PseudoInverse compute(const Matrix& b, double rel_tol = kDefaultRankTol);

    /// Symmetric matrices via a self-adjoint eigendecomposition.
    static PseudoInverse compute_symmetric(const Matrix& b, double rel_tol = kDefaultRankTol);

    Index rows() const noexcept { return right_.rows(); }
    Index cols() const noexcept { return left_.rows(); }
    Index rank() const noexcept { return values_.size(); }
    double cutoff() const noexcept { return cutoff_; }
    bool symmetric() const noexcept { return symmetric_; }

    const Matrix& left() const noexcept { return left_; }
    const Matrix& right() const noexcept { return right_; }
    const Vector& values() const noexcept { return values_; }

    /// Dense B†.
    Matrix matrix() const;
    Vector apply(const Vector& x) const;

private:
    Matrix left_;
    Matrix right_;
    Vector values_;
    double cutoff_ = 0.0;
    bool symmetric_ = false;
};

inline PseudoInverse pseudo_inverse(const Matrix& b, double rel_tol = kDefaultRankTol) {
    return PseudoInverse::compute(b, rel_tol);
}

/// Orthonormal set of columns spanning a subspace of R^n.
class SubspaceBasis {
public:
    SubspaceBasis() = default;
    SubspaceBasis(Index ambient_dim, Matrix columns);

    Index ambient_dim() const noexcept { return n_; }
    Index dim() const noexcept { return columns_.cols(); }
    bool empty() const noexcept { return columns_.cols() == 0; }
    const Matrix& columns() const noexcept { return columns_; }

    /// Orthogonal projection U Uᵀ x.
    Vector project(const Vector& x) const;

private:
    Index n_ = 0;
    Matrix columns_;
};

/// Numerical rank: count of singular values above rel_tol * max(s_max, scale).
///
/// `scale` lets callers anchor the cutoff to the magnitude of the factors a
/// product was formed from, so a product that vanishes up to round-off is
/// reported as rank zero.
Index numerical_rank(const Matrix& b, double rel_tol = kDefaultRankTol, double scale = 0.0);

/// Orthonormal basis of ker(B) for any shape; cutoff as in numerical_rank.
SubspaceBasis null_space(const Matrix& b, double rel_tol = kDefaultRankTol, double scale = 0.0);

/// Orthonormal basis of range(B).
SubspaceBasis range_space(const Matrix& b, double rel_tol = kDefaultRankTol);

/// Orthonormal basis of ker(A) for a constraint matrix with m <= n.
SubspaceBasis kernel_basis(const Matrix& a, double rel_tol = kDefaultRankTol);

/// Extreme eigenvalues of (UᵀPU) w = λ (UᵀQU) w over the given basis.
std::pair<double, double> generalized_eig_extremes(const Matrix& p, const Matrix& q,
                                                   const SubspaceBasis& basis);
/// Same, for forms already restricted to the subspace.
std::pair<double, double> generalized_eig_extremes_reduced(const Matrix& p_reduced, const Matrix& q_reduced);

/// Eigenvalues (ascending) of a symmetric matrix.
Vector symmetric_eigenvalues(const Matrix& s);
double min_eigenvalue(const Matrix& s);
double max_eigenvalue(const Matrix& s);

/// Principal square root of a symmetric PSD matrix; negative round-off
/// eigenvalues are clipped to zero.
Matrix symmetric_sqrt(const Matrix& s);

/// Symmetric part ½(S + Sᵀ).
Matrix symmetrize(const Matrix& s);

double relative_frobenius_error(const Matrix& actual, const Matrix& expected);

}  // namespace linalg
}  // namespace sketchdesc
