#pragma once

#include "sketchdesc/linalg.hpp"
#include "sketchdesc/sketch.hpp"
#include "sketchdesc/smoothness.hpp"

#include <cstdint>
#include <optional>

namespace sketchdesc {

/// Relative rank cutoff for AS when forming P_S.
inline constexpr double kOperatorRankTol = 1e-10;

/// Factored Z_S = S P_S (P_Sᵀ SᵀMS P_S)† P_Sᵀ Sᵀ.
///
/// P_S is kept as an orthonormal basis N of ker(AS), so P_S = N Nᵀ and the
/// p x p middle factor (P_S SᵀMS P_S)† equals N (Nᵀ SᵀMS N)† Nᵀ. Nothing here
/// is larger than p x p or m x p; Z_S g costs one Sᵀg, one p x p product and
/// one S d.
class SketchOperator {
public:
    SketchOperator(SketchSample s, const Matrix& a, const Smoothness& m, double rel_tol = linalg::kDefaultRankTol);

    const SketchSample& sample() const noexcept { return s_; }
    const Matrix& as() const noexcept { return as_; }
    /// Orthonormal basis of ker(AS), p x r.
    const Matrix& kernel() const noexcept { return n_; }
    /// P_S = I_p - (AS)†(AS).
    Matrix projector() const;
    /// (P_Sᵀ SᵀMS P_S)†, p x p.
    const Matrix& inner() const noexcept { return inner_; }

    /// Z_S = 0 for this sample.
    bool is_null() const noexcept { return null_; }

    /// d = inner · (Sᵀ g) given Sᵀ g; Z_S g = S d.
    Vector coefficients(const Vector& st_g) const;
    Vector apply(const Vector& g) const;
    /// x += scale · Z_S g.
    void add_apply(Vector& x, const Vector& g, double scale) const;

    /// Dense n x n Z_S. Diagnostics and tests only.
    Matrix materialize() const;

private:
    SketchSample s_;
    Matrix as_;
    Matrix n_;
    Matrix inner_;
    bool null_ = false;
};

SketchOperator build_sketch_operator(const SketchSample& s, const Matrix& a, const Smoothness& m);
Vector apply_Z_S(const SketchOperator& op, const Vector& g);

struct Estimation {
    enum class Mode { Exact, MonteCarlo };
    Mode mode = Mode::Exact;
    Index samples = 0;
    std::uint64_t seed = 0;

    static Estimation exact() { return {}; }
    static Estimation monte_carlo(Index samples, std::uint64_t seed = 0) { return {Mode::MonteCarlo, samples, seed}; }
    bool is_exact() const noexcept { return mode == Mode::Exact; }
};

/// Z = E[Z_S] with its pseudo-inverse and the kernel basis of A.
class ExpectedOperator {
public:
    ExpectedOperator(Matrix z, Matrix a, Estimation source, Index atoms);

    const Matrix& Z() const noexcept { return z_; }
    const Matrix& Z_pinv() const noexcept { return z_pinv_; }
    Index rank() const noexcept { return rank_; }
    const Matrix& A() const noexcept { return a_; }
    const linalg::SubspaceBasis& kernel() const noexcept { return kernel_; }
    const Estimation& source() const noexcept { return source_; }
    /// Support atoms summed (Exact) or samples averaged (MonteCarlo).
    Index atoms() const noexcept { return atoms_; }
    Index dim() const noexcept { return z_.rows(); }

private:
    Matrix z_;
    Matrix z_pinv_;
    Index rank_ = 0;
    Matrix a_;
    linalg::SubspaceBasis kernel_;
    Estimation source_;
    Index atoms_ = 0;
};

/// Relative cutoff for Z†.
inline constexpr double kZPinvTol = 1e-10;

ExpectedOperator expected_Z(const SketchDistribution& dist, const Matrix& a, const Smoothness& m,
                            Estimation mode = Estimation::exact());

struct AssumptionReport {
    bool holds = false;
    /// ker(A) = {0}; the verdict is vacuous.
    bool degenerate = false;
    double lambda_min = 0.0;
};

/// Z positive definite on ker(A): λ_min(UᵀZU) > 1e-10.
AssumptionReport check_assumption_Z(const ExpectedOperator& z);

/// √(uᵀZu).
double primal_norm(const ExpectedOperator& z, const Vector& u);
/// √(xᵀZ†x) for x ∈ ker(A); Domain error otherwise.
double dual_norm(const ExpectedOperator& z, const Vector& x);

/// λ_min of (UᵀGU) w = σ (UᵀZ†U) w over U = ker(A).
double sigma_Z(const ExpectedOperator& z, const Matrix& g);

struct NuEstimate {
    double value = 0.0;
    /// Batch-means standard error; zero in exact mode.
    double std_error = 0.0;
    Index samples = 0;
    bool monte_carlo = false;
};

/// λ_max of (UᵀWU) w = ν (UᵀZU) w with W = E[Z_S Z† Z_S].
NuEstimate nu_max(const SketchDistribution& dist, const ExpectedOperator& z, const Smoothness& m,
                  Estimation mode = Estimation::exact());

/// λ_max(M^{-1/2} Z† M^{-1/2}). For singular M the quotient is taken over ker(A).
double nu_upper_bound(const ExpectedOperator& z, const Matrix& m);
/// λ_max(M^{1/2} Z M^{1/2}).
double lambda_max_MZM(const ExpectedOperator& z, const Matrix& m);

struct ConvergenceConstants {
    double sigma_Z = 0.0;
    double nu_max = 0.0;
    double nu_std_error = 0.0;
    std::optional<double> nu_upper_bound;
    std::optional<double> lambda_max_MZM;
};

/// ‖P_ker(A) g‖_Z.
double optimality_measure(const ExpectedOperator& z, const Vector& grad);

}  // namespace sketchdesc
