#include "sketchdesc/operators.hpp"

#include "sketchdesc/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace sketchdesc {

// ---------------------------------------------------------------------------
// SketchOperator

SketchOperator::SketchOperator(SketchSample s, const Matrix& a, const Smoothness& m, double rel_tol)
    : s_(std::move(s)) {
    const Index n = s_.dim();
    if (a.cols() != n) fail(ErrorCode::InvalidShape, "sketch operator: A must have n columns");
    if (m.dim() != n) fail(ErrorCode::InvalidShape, "sketch operator: M must be n x n");
    as_ = s_.right_multiply(a);
    n_ = linalg::null_space(as_, kOperatorRankTol, product_scale(s_, a)).columns();
    const Index p = s_.width();
    if (n_.cols() == 0) {
        inner_ = Matrix::Zero(p, p);
        null_ = true;
        return;
    }
    const Matrix mss = m.sketched(s_);
    const Matrix reduced = linalg::symmetrize(n_.transpose() * mss * n_);
    const auto k = linalg::PseudoInverse::compute_symmetric(reduced, rel_tol);
    if (k.rank() == 0) {
        inner_ = Matrix::Zero(p, p);
        null_ = true;
        return;
    }
    const Matrix nk = n_ * k.left();
    inner_ = nk * k.values().cwiseInverse().asDiagonal() * nk.transpose();
}

Matrix SketchOperator::projector() const { return n_ * n_.transpose(); }

Vector SketchOperator::coefficients(const Vector& st_g) const {
    if (null_) return Vector::Zero(inner_.rows());
    return inner_ * st_g;
}

Vector SketchOperator::apply(const Vector& g) const {
    if (null_) return Vector::Zero(s_.dim());
    return s_.times(coefficients(s_.transpose_times(g)));
}

void SketchOperator::add_apply(Vector& x, const Vector& g, double scale) const {
    if (null_) return;
    s_.add_times(x, coefficients(s_.transpose_times(g)), scale);
}

Matrix SketchOperator::materialize() const {
    const Matrix s = s_.to_dense();
    return s * inner_ * s.transpose();
}

SketchOperator build_sketch_operator(const SketchSample& s, const Matrix& a, const Smoothness& m) {
    return SketchOperator(s, a, m);
}

Vector apply_Z_S(const SketchOperator& op, const Vector& g) { return op.apply(g); }

// ---------------------------------------------------------------------------
// Expected operator

namespace {

// acc += w · S X Sᵀ
void accumulate_congruence(Matrix& acc, const SketchSample& s, const Matrix& x, double w) {
    if (s.is_coordinate()) {
        const auto& idx = s.indices();
        const auto p = static_cast<Index>(idx.size());
        for (Index j = 0; j < p; ++j) {
            for (Index i = 0; i < p; ++i) acc(idx[std::size_t(i)], idx[std::size_t(j)]) += w * x(i, j);
        }
        return;
    }
    const Matrix sd = s.to_dense();
    acc.noalias() += w * (sd * x * sd.transpose());
}

std::vector<WeightedSample> draw(const SketchDistribution& dist, const Estimation& mode) {
    if (mode.is_exact()) return dist.enumerate_support();
    if (mode.samples < 1) fail(ErrorCode::InvalidConfig, "Monte-Carlo estimation needs at least one sample");
    SketchDistribution local = dist.reseeded(mode.seed);
    std::vector<WeightedSample> out;
    out.reserve(static_cast<std::size_t>(mode.samples));
    const double w = 1.0 / static_cast<double>(mode.samples);
    for (Index i = 0; i < mode.samples; ++i) out.push_back({local.sample(), w});
    return out;
}

}  // namespace

ExpectedOperator::ExpectedOperator(Matrix z, Matrix a, Estimation source, Index atoms)
    : z_(linalg::symmetrize(z)), a_(std::move(a)), source_(source), atoms_(atoms) {
    const auto pinv = linalg::PseudoInverse::compute_symmetric(z_, kZPinvTol);
    z_pinv_ = linalg::symmetrize(pinv.matrix());
    rank_ = pinv.rank();
    kernel_ = linalg::kernel_basis(a_);
}

ExpectedOperator expected_Z(const SketchDistribution& dist, const Matrix& a, const Smoothness& m, Estimation mode) {
    const Index n = dist.dim();
    if (a.cols() != n) fail(ErrorCode::InvalidShape, "expected_Z: A must have n columns");
    const auto atoms = draw(dist, mode);
    Matrix z = Matrix::Zero(n, n);
    for (const auto& ws : atoms) {
        if (ws.probability == 0.0) continue;
        const SketchOperator op(ws.sample, a, m);
        if (op.is_null()) continue;
        accumulate_congruence(z, ws.sample, op.inner(), ws.probability);
    }
    return ExpectedOperator(std::move(z), a, mode, static_cast<Index>(atoms.size()));
}

AssumptionReport check_assumption_Z(const ExpectedOperator& z) {
    AssumptionReport r;
    const auto& ker = z.kernel();
    if (ker.empty()) {
        r.holds = true;
        r.degenerate = true;
        return r;
    }
    const Matrix& u = ker.columns();
    r.lambda_min = linalg::min_eigenvalue(u.transpose() * z.Z() * u);
    r.holds = r.lambda_min > 1e-10;
    return r;
}

double primal_norm(const ExpectedOperator& z, const Vector& u) {
    if (u.size() != z.dim()) fail(ErrorCode::InvalidShape, "primal_norm: dimension mismatch");
    return std::sqrt(std::max(0.0, u.dot(z.Z() * u)));
}

double dual_norm(const ExpectedOperator& z, const Vector& x) {
    if (x.size() != z.dim()) fail(ErrorCode::InvalidShape, "dual_norm: dimension mismatch");
    const Matrix& a = z.A();
    if (a.rows() > 0) {
        const double a_inf = a.cwiseAbs().rowwise().sum().maxCoeff();
        const double res = (a * x).cwiseAbs().maxCoeff();
        if (res > 1e-8 * a_inf * std::max(1.0, x.cwiseAbs().maxCoeff())) {
            fail(ErrorCode::Domain, "dual_norm: argument is not in ker(A) (residual " + std::to_string(res) + ")");
        }
    }
    return std::sqrt(std::max(0.0, x.dot(z.Z_pinv() * x)));
}

double sigma_Z(const ExpectedOperator& z, const Matrix& g) {
    if (g.rows() != z.dim() || g.cols() != z.dim()) fail(ErrorCode::InvalidShape, "sigma_Z: G must be n x n");
    if (!check_assumption_Z(z).holds) fail(ErrorCode::DegenerateMetric, "sigma_Z: Z is not positive definite on ker(A)");
    return linalg::generalized_eig_extremes(g, z.Z_pinv(), z.kernel()).first;
}

NuEstimate nu_max(const SketchDistribution& dist, const ExpectedOperator& z, const Smoothness& m, Estimation mode) {
    if (!check_assumption_Z(z).holds) fail(ErrorCode::DegenerateMetric, "nu_max: Z is not positive definite on ker(A)");
    const auto& ker = z.kernel();
    if (ker.empty()) fail(ErrorCode::DegenerateMetric, "nu_max: ker(A) is trivial");
    const Matrix ut = ker.columns().transpose();
    const Matrix zr = ut * z.Z() * ut.transpose();
    const Index r = ker.dim();

    const auto atoms = draw(dist, mode);
    constexpr Index kBatches = 10;
    const bool batched = !mode.is_exact() && static_cast<Index>(atoms.size()) >= kBatches;
    std::vector<Matrix> batch(batched ? kBatches : 1, Matrix::Zero(r, r));
    for (std::size_t i = 0; i < atoms.size(); ++i) {
        const auto& ws = atoms[i];
        if (ws.probability == 0.0) continue;
        const SketchOperator op(ws.sample, z.A(), m);
        if (op.is_null()) continue;
        const Matrix t = ws.sample.congruence(z.Z_pinv());
        const Matrix inner = op.inner() * t * op.inner();
        const Matrix us = ws.sample.right_multiply(ut);
        const std::size_t slot = batched ? i % kBatches : 0;
        batch[slot].noalias() += ws.probability * (us * inner * us.transpose());
    }
    Matrix w = Matrix::Zero(r, r);
    for (const auto& b : batch) w += b;

    NuEstimate out;
    out.value = linalg::generalized_eig_extremes_reduced(w, zr).second;
    out.samples = static_cast<Index>(atoms.size());
    out.monte_carlo = !mode.is_exact();
    if (batched) {
        // Each batch holds 1/kBatches of the total weight.
        Vector nus(kBatches);
        for (Index b = 0; b < kBatches; ++b) {
            nus[b] = linalg::generalized_eig_extremes_reduced(double(kBatches) * batch[std::size_t(b)], zr).second;
        }
        const double mean = nus.mean();
        const double var = (nus.array() - mean).square().sum() / double(kBatches - 1);
        out.std_error = std::sqrt(var / double(kBatches));
    }
    return out;
}

double nu_upper_bound(const ExpectedOperator& z, const Matrix& m) {
    if (m.rows() != z.dim() || m.cols() != z.dim()) fail(ErrorCode::InvalidShape, "nu_upper_bound: M must be n x n");
    const Vector ev = linalg::symmetric_eigenvalues(m);
    const double scale = std::max(1.0, ev.cwiseAbs().maxCoeff());
    if (ev[0] > 1e-12 * scale) {
        const linalg::SubspaceBasis all(z.dim(), Matrix::Identity(z.dim(), z.dim()));
        return linalg::generalized_eig_extremes(z.Z_pinv(), m, all).second;
    }
    return linalg::generalized_eig_extremes(z.Z_pinv(), m, z.kernel()).second;
}

double lambda_max_MZM(const ExpectedOperator& z, const Matrix& m) {
    if (m.rows() != z.dim() || m.cols() != z.dim()) fail(ErrorCode::InvalidShape, "lambda_max_MZM: M must be n x n");
    const Matrix root = linalg::symmetric_sqrt(m);
    return linalg::max_eigenvalue(root * z.Z() * root);
}

double optimality_measure(const ExpectedOperator& z, const Vector& grad) {
    if (z.kernel().empty()) return 0.0;
    return primal_norm(z, z.kernel().project(grad));
}

}  // namespace sketchdesc
