#pragma once

#include "sketchdesc/linalg.hpp"
#include "sketchdesc/sketch.hpp"

#include <memory>
#include <optional>
#include <string_view>

namespace sketchdesc {

enum class SmoothnessKind { Full, ScaledIdentity, PerSketch, Factored };

std::string_view to_string(SmoothnessKind kind) noexcept;

/// The matrix M bounding the curvature of f, or a rule producing the sketched
/// block SᵀMS per sample.
///
/// PerSketch replaces SᵀMS by λ_max(SᵀBS)·I_p. Factored stores M = M̄ᵀM̄ + shift·I
/// so SᵀMS costs O(p̄ p) for coordinate sketches.
class Smoothness {
public:
    /// Zero scaled identity on R^0; placeholder until assigned.
    Smoothness() : kind_(SmoothnessKind::ScaledIdentity), n_(0) {}

    /// Throws InvalidSmoothness unless m is symmetric with λ_min ≥ -1e-8.
    static Smoothness full(Matrix m);
    static Smoothness scaled_identity(Index n, double lambda);
    static Smoothness per_sketch(Matrix b);
    static Smoothness factored(Matrix mbar, double shift = 0.0);

    SmoothnessKind kind() const noexcept { return kind_; }
    Index dim() const noexcept { return n_; }
    bool is_fixed() const noexcept { return kind_ != SmoothnessKind::PerSketch; }

    /// The p x p block the operator inverts.
    Matrix sketched(const SketchSample& s) const;

    /// Dense M for the fixed kinds.
    std::optional<Matrix> matrix() const;

    /// diag(M); for PerSketch, diag(B).
    Vector diagonal() const;

    double lambda() const noexcept { return lambda_; }
    /// B for PerSketch, M for Full, M̄ for Factored.
    const Matrix& base() const;

private:
    Smoothness(SmoothnessKind kind, Index n) : kind_(kind), n_(n) {}

    SmoothnessKind kind_;
    Index n_;
    double lambda_ = 0.0;  // scale for ScaledIdentity, shift for Factored
    std::shared_ptr<const Matrix> base_;
};

}  // namespace sketchdesc
