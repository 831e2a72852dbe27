#include "sketchdesc/smoothness.hpp"

#include "sketchdesc/error.hpp"

#include <cmath>
#include <string>

namespace sketchdesc {

namespace {

void require_symmetric_psd(const Matrix& m, const char* what) {
    if (m.rows() != m.cols()) fail(ErrorCode::InvalidShape, std::string(what) + " must be square");
    linalg::require_finite(m, what);
    const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale) {
        fail(ErrorCode::InvalidSmoothness, std::string(what) + " is not symmetric");
    }
    const double lmin = linalg::min_eigenvalue(linalg::symmetrize(m));
    if (lmin < -1e-8) {
        fail(ErrorCode::InvalidSmoothness,
             std::string(what) + " is not positive semidefinite (min eigenvalue " + std::to_string(lmin) + ")");
    }
}

}  // namespace

std::string_view to_string(SmoothnessKind kind) noexcept {
    switch (kind) {
        case SmoothnessKind::Full: return "full";
        case SmoothnessKind::ScaledIdentity: return "scaled-identity";
        case SmoothnessKind::PerSketch: return "per-sketch";
        case SmoothnessKind::Factored: return "factored";
    }
    return "unknown";
}

Smoothness Smoothness::full(Matrix m) {
    require_symmetric_psd(m, "smoothness matrix M");
    Smoothness s(SmoothnessKind::Full, m.rows());
    s.base_ = std::make_shared<const Matrix>(linalg::symmetrize(m));
    return s;
}

Smoothness Smoothness::scaled_identity(Index n, double lambda) {
    if (n < 1) fail(ErrorCode::InvalidShape, "scaled identity needs n >= 1");
    if (!std::isfinite(lambda) || lambda < 0.0) {
        fail(ErrorCode::InvalidSmoothness, "scaled identity needs a finite lambda >= 0");
    }
    Smoothness s(SmoothnessKind::ScaledIdentity, n);
    s.lambda_ = lambda;
    return s;
}

Smoothness Smoothness::per_sketch(Matrix b) {
    require_symmetric_psd(b, "per-sketch base matrix B");
    Smoothness s(SmoothnessKind::PerSketch, b.rows());
    s.base_ = std::make_shared<const Matrix>(linalg::symmetrize(b));
    return s;
}

Smoothness Smoothness::factored(Matrix mbar, double shift) {
    linalg::require_finite(mbar, "smoothness factor");
    if (!std::isfinite(shift) || shift < 0.0) fail(ErrorCode::InvalidSmoothness, "factored shift must be >= 0");
    Smoothness s(SmoothnessKind::Factored, mbar.cols());
    s.lambda_ = shift;
    s.base_ = std::make_shared<const Matrix>(std::move(mbar));
    return s;
}

const Matrix& Smoothness::base() const {
    if (!base_) fail(ErrorCode::InvalidConfig, "scaled identity smoothness has no base matrix");
    return *base_;
}

Matrix Smoothness::sketched(const SketchSample& s) const {
    if (s.dim() != n_) fail(ErrorCode::InvalidShape, "sketch dimension does not match smoothness dimension");
    switch (kind_) {
        case SmoothnessKind::Full:
            return s.congruence(*base_);
        case SmoothnessKind::ScaledIdentity:
            return lambda_ * s.gram();
        case SmoothnessKind::PerSketch: {
            const double l = std::max(0.0, linalg::max_eigenvalue(s.congruence(*base_)));
            return l * Matrix::Identity(s.width(), s.width());
        }
        case SmoothnessKind::Factored: {
            const Matrix ms = s.right_multiply(*base_);
            Matrix out = ms.transpose() * ms;
            if (lambda_ != 0.0) out += lambda_ * s.gram();
            return out;
        }
    }
    return {};
}

Vector Smoothness::diagonal() const {
    switch (kind_) {
        case SmoothnessKind::Full:
        case SmoothnessKind::PerSketch:
            return base_->diagonal();
        case SmoothnessKind::ScaledIdentity:
            return Vector::Constant(n_, lambda_);
        case SmoothnessKind::Factored: {
            Vector d = base_->colwise().squaredNorm().transpose();
            d.array() += lambda_;
            return d;
        }
    }
    return {};
}

std::optional<Matrix> Smoothness::matrix() const {
    switch (kind_) {
        case SmoothnessKind::Full:
            return *base_;
        case SmoothnessKind::ScaledIdentity:
            return Matrix(lambda_ * Matrix::Identity(n_, n_));
        case SmoothnessKind::Factored: {
            Matrix m = base_->transpose() * *base_;
            m.diagonal().array() += lambda_;
            return m;
        }
        case SmoothnessKind::PerSketch:
            return std::nullopt;
    }
    return std::nullopt;
}

}  // namespace sketchdesc
