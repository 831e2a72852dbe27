#include "sketchdesc/solvers.hpp"

#include "sketchdesc/error.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>

namespace sketchdesc {

std::string_view to_string(Algorithm a) noexcept {
    switch (a) {
        case Algorithm::RSD: return "rsd";
        case Algorithm::ARSD_Convex: return "arsd-cvx";
        case Algorithm::ARSD_StronglyConvex: return "arsd-sc";
        case Algorithm::ARSD_EfficientConvex: return "arsd-eff-cvx";
        case Algorithm::ARSD_EfficientStronglyConvex: return "arsd-eff-sc";
    }
    return "unknown";
}

Algorithm parse_algorithm(std::string_view name) {
    for (auto a : {Algorithm::RSD, Algorithm::ARSD_Convex, Algorithm::ARSD_StronglyConvex,
                   Algorithm::ARSD_EfficientConvex, Algorithm::ARSD_EfficientStronglyConvex}) {
        if (to_string(a) == name) return a;
    }
    fail(ErrorCode::InvalidConfig, "unknown algorithm '" + std::string(name) + "'");
}

bool is_accelerated(Algorithm a) noexcept { return a != Algorithm::RSD; }

bool is_strongly_convex(Algorithm a) noexcept {
    return a == Algorithm::ARSD_StronglyConvex || a == Algorithm::ARSD_EfficientStronglyConvex;
}

namespace {

// out += scale · H S d
void add_hessian_sketch(const QuadraticObjective& q, Vector& out, const SketchSample& s, const Vector& d, double scale) {
    if (s.is_coordinate()) {
        q.add_hessian_columns(out, s.indices(), scale * d);
        return;
    }
    out.noalias() += scale * q.hessian_times(s.times(d));
}

// Sᵀ g for g = α·a + β·b + c without forming g when S selects coordinates.
Vector sketch_combination(const SketchSample& s, double alpha, const Vector& a, double beta, const Vector& b,
                          const Vector& c) {
    const auto& idx = s.indices();
    Vector out(static_cast<Index>(idx.size()));
    for (std::size_t j = 0; j < idx.size(); ++j) {
        const Index i = idx[j];
        out[Index(j)] = alpha * a[i] + beta * b[i] + c[i];
    }
    return out;
}

class SolverCommon : public Solver {
protected:
    SolverCommon(const ConstrainedProblem& p, SketchDistribution dist, const SolverParams& params)
        : problem_(p), dist_(std::move(dist)), params_(params), quad_(p.objective->as_quadratic()) {
        if (dist_.dim() != p.dim()) fail(ErrorCode::InvalidShape, "sketch dimension does not match the problem");
    }

    SketchOperator draw() {
        SketchOperator op(dist_.sample(), problem_.A, problem_.smoothness);
        if (op.is_null()) ++stats_.zero_steps;
        ++stats_.steps;
        return op;
    }

    bool refresh_due() const { return params_.refresh_every > 0 && k_ % params_.refresh_every == 0; }

    const ConstrainedProblem& problem_;
    SketchDistribution dist_;
    SolverParams params_;
    const QuadraticObjective* quad_;
};

// ---------------------------------------------------------------------------

class RsdSolver final : public SolverCommon {
public:
    RsdSolver(const ConstrainedProblem& p, SketchDistribution dist, const SolverParams& params)
        : SolverCommon(p, std::move(dist), params), x_(p.x0) {
        if (quad_) grad_ = quad_->gradient(x_);
    }

    void step(bool /*materialize*/) override {
        const SketchOperator op = draw();
        ++k_;
        if (op.is_null()) return;
        const SketchSample& s = op.sample();
        const Vector stg = quad_ ? s.transpose_times(grad_) : s.transpose_times(problem_.objective->gradient(x_));
        const Vector d = op.coefficients(stg);
        if (!s.is_coordinate()) ++stats_.step_dense_ops;
        s.add_times(x_, d, -1.0);
        if (quad_) {
            add_hessian_sketch(*quad_, grad_, s, d, -1.0);
            if (refresh_due()) {
                grad_ = quad_->gradient(x_);
                ++stats_.oracle_refreshes;
            }
        }
    }

    Vector x() const override { return x_; }
    Vector y() const override { return x_; }
    Vector v() const override { return x_; }

private:
    Vector x_;
    Vector grad_;
};

// ---------------------------------------------------------------------------

class AcceleratedCommon : public SolverCommon {
protected:
    AcceleratedCommon(const ConstrainedProblem& p, SketchDistribution dist, const SolverParams& params, bool strongly)
        : SolverCommon(p, std::move(dist), params),
          schedule_(strongly ? Schedule::strongly_convex(params.sigma, params.nu) : Schedule::convex(params.nu)) {
        cur_ = schedule_.next();
        next_ = schedule_.next();
    }

    void advance_schedule() {
        cur_ = next_;
        next_ = schedule_.next();
        stats_.alpha_clamps = schedule_.clamps();
    }

    Schedule schedule_;
    StepParams cur_;
    StepParams next_;
};

// General form: y = αv + (1-α)x; x' = y - g; v' = βv + (1-β)y - γg, g = Z_S ∇f(y).
class ArsdSolver final : public AcceleratedCommon {
public:
    ArsdSolver(const ConstrainedProblem& p, SketchDistribution dist, const SolverParams& params, bool strongly)
        : AcceleratedCommon(p, std::move(dist), params, strongly), x_(p.x0), v_(p.x0) {
        if (quad_) {
            hx_ = quad_->hessian_times(x_);
            hv_ = hx_;
        }
    }

    void step(bool /*materialize*/) override {
        const double a = cur_.alpha;
        const double b = cur_.beta;
        const double g = cur_.gamma;
        const Vector y = a * v_ + (1.0 - a) * x_;
        stats_.step_dense_ops += 1;
        const SketchOperator op = draw();
        ++k_;
        Vector hy;
        Vector d;
        if (quad_) {
            hy = a * hv_ + (1.0 - a) * hx_;
            if (!op.is_null()) d = op.coefficients(op.sample().transpose_times(hy + quad_->linear()));
        } else if (!op.is_null()) {
            d = op.coefficients(op.sample().transpose_times(problem_.objective->gradient(y)));
        }
        v_ = b * v_ + (1.0 - b) * y;
        x_ = y;
        stats_.step_dense_ops += 2;
        if (!op.is_null()) {
            op.sample().add_times(x_, d, -1.0);
            op.sample().add_times(v_, d, -g);
        }
        if (quad_) {
            hv_ = b * hv_ + (1.0 - b) * hy;
            hx_ = std::move(hy);
            if (!op.is_null()) {
                Vector hsd = Vector::Zero(x_.size());
                add_hessian_sketch(*quad_, hsd, op.sample(), d, 1.0);
                hx_ -= hsd;
                hv_ -= g * hsd;
            }
            if (refresh_due()) {
                hx_ = quad_->hessian_times(x_);
                hv_ = quad_->hessian_times(v_);
                ++stats_.oracle_refreshes;
            }
        }
        advance_schedule();
    }

    Vector x() const override { return x_; }
    Vector y() const override { return cur_.alpha * v_ + (1.0 - cur_.alpha) * x_; }
    Vector v() const override { return v_; }

private:
    Vector x_, v_;
    Vector hx_, hv_;
};

// ---------------------------------------------------------------------------

// (y, v) = B (u, w), B_{k+1} = A_k B_k, (u, w) -= B_{k+1}^{-1} s_k.
class ArsdEfficientScSolver final : public AcceleratedCommon {
public:
    ArsdEfficientScSolver(const ConstrainedProblem& p, SketchDistribution dist, const SolverParams& params)
        : AcceleratedCommon(p, std::move(dist), params, true), u_(p.x0), w_(p.x0), x_(p.x0) {
        bm_.setIdentity();
        if (quad_) {
            hu_ = quad_->hessian_times(u_);
            hw_ = hu_;
        }
    }

    void step(bool materialize) override {
        if (condition(bm_) > params_.rebase_condition) rebase();
        const double a1 = next_.alpha;
        const double beta = cur_.beta;
        const double gamma = cur_.gamma;
        Eigen::Matrix2d ak;
        ak << 1.0 - a1 * beta, a1 * beta, 1.0 - beta, beta;
        const double c1 = 1.0 - a1 * (1.0 - gamma);
        const double c2 = gamma;

        const SketchOperator op = draw();
        ++k_;
        const SketchSample& s = op.sample();
        const bool sparse = quad_ && s.is_coordinate();

        if (std::abs(ak.determinant()) <= 1e-300 || !std::isfinite(1.0 / ak.determinant())) {
            dense_step(op, ak, c1, c2, materialize);
            advance_schedule();
            return;
        }

        Vector d;
        Vector y_dense;
        if (materialize || !sparse) {
            y_dense = bm_(0, 0) * u_ + bm_(0, 1) * w_;
            if (sparse) {
                ++stats_.record_dense_ops;
            } else {
                ++stats_.step_dense_ops;
            }
        }
        if (!op.is_null()) {
            Vector stg;
            if (sparse) {
                stg = sketch_combination(s, bm_(0, 0), hu_, bm_(0, 1), hw_, quad_->linear());
            } else if (quad_) {
                stg = s.transpose_times(bm_(0, 0) * hu_ + bm_(0, 1) * hw_ + quad_->linear());
                ++stats_.step_dense_ops;
            } else {
                stg = s.transpose_times(problem_.objective->gradient(y_dense));
            }
            d = op.coefficients(stg);
        }
        if (materialize) {
            x_ = y_dense;
            if (!op.is_null()) s.add_times(x_, d, -1.0);
            ++stats_.record_dense_ops;
        }

        const Eigen::Matrix2d bn = ak * bm_;
        if (!op.is_null()) {
            const Eigen::Matrix2d bi = bn.inverse();
            const double cu = bi(0, 0) * c1 + bi(0, 1) * c2;
            const double cw = bi(1, 0) * c1 + bi(1, 1) * c2;
            if (!s.is_coordinate()) stats_.step_dense_ops += 2;
            s.add_times(u_, d, -cu);
            s.add_times(w_, d, -cw);
            if (quad_) {
                add_hessian_sketch(*quad_, hu_, s, d, -cu);
                add_hessian_sketch(*quad_, hw_, s, d, -cw);
            }
        }
        bm_ = bn;
        if (quad_ && refresh_due()) {
            hu_ = quad_->hessian_times(u_);
            hw_ = quad_->hessian_times(w_);
            ++stats_.oracle_refreshes;
        }
        advance_schedule();
    }

    Vector x() const override { return x_; }
    Vector y() const override { return bm_(0, 0) * u_ + bm_(0, 1) * w_; }
    Vector v() const override { return bm_(1, 0) * u_ + bm_(1, 1) * w_; }

    const Eigen::Matrix2d& B() const noexcept { return bm_; }

private:
    static double condition(const Eigen::Matrix2d& b) {
        const Eigen::JacobiSVD<Eigen::Matrix2d> svd(b);
        const auto& sv = svd.singularValues();
        if (sv[1] == 0.0) return std::numeric_limits<double>::infinity();
        return sv[0] / sv[1];
    }

    void rebase() {
        Vector y = bm_(0, 0) * u_ + bm_(0, 1) * w_;
        Vector v = bm_(1, 0) * u_ + bm_(1, 1) * w_;
        u_ = std::move(y);
        w_ = std::move(v);
        stats_.rebase_dense_ops += 2;
        if (quad_) {
            Vector hy = bm_(0, 0) * hu_ + bm_(0, 1) * hw_;
            Vector hv = bm_(1, 0) * hu_ + bm_(1, 1) * hw_;
            hu_ = std::move(hy);
            hw_ = std::move(hv);
            stats_.rebase_dense_ops += 2;
        }
        bm_.setIdentity();
        ++stats_.rebases;
    }

    // A_k singular (β = 0 or α_{k+1} = 1): apply the recursion on (y, v) directly.
    void dense_step(const SketchOperator& op, const Eigen::Matrix2d& ak, double c1, double c2, bool materialize) {
        ++stats_.dense_steps;
        const Vector y = bm_(0, 0) * u_ + bm_(0, 1) * w_;
        const Vector v = bm_(1, 0) * u_ + bm_(1, 1) * w_;
        Vector g = Vector::Zero(y.size());
        if (!op.is_null()) g = op.apply(problem_.objective->gradient(y));
        if (materialize) x_ = y - g;
        u_ = ak(0, 0) * y + ak(0, 1) * v - c1 * g;
        w_ = ak(1, 0) * y + ak(1, 1) * v - c2 * g;
        stats_.step_dense_ops += 4;
        bm_.setIdentity();
        if (quad_) {
            hu_ = quad_->hessian_times(u_);
            hw_ = quad_->hessian_times(w_);
            ++stats_.oracle_refreshes;
        }
    }

    Vector u_, w_;
    Eigen::Matrix2d bm_;
    Vector hu_, hw_;
    Vector x_;
};

// ---------------------------------------------------------------------------

// y = v + b u; v -= γ g; u -= ((1-γ)/b) g; b *= 1 - α_{k+1}.
class ArsdEfficientCvxSolver final : public AcceleratedCommon {
public:
    ArsdEfficientCvxSolver(const ConstrainedProblem& p, SketchDistribution dist, const SolverParams& params)
        : AcceleratedCommon(p, std::move(dist), params, false),
          v_(p.x0),
          u_(Vector::Zero(p.dim())),
          x_(p.x0) {
        if (quad_) {
            hv_ = quad_->hessian_times(v_);
            hu_ = Vector::Zero(p.dim());
        }
    }

    void step(bool materialize) override {
        if (!(b_ >= params_.rebase_floor)) rebase();
        const double gamma = cur_.gamma;
        const double a1 = next_.alpha;

        const SketchOperator op = draw();
        ++k_;
        const SketchSample& s = op.sample();
        const bool sparse = quad_ && s.is_coordinate();

        Vector y_dense;
        if (materialize || !sparse) {
            y_dense = v_ + b_ * u_;
            if (sparse) {
                ++stats_.record_dense_ops;
            } else {
                ++stats_.step_dense_ops;
            }
        }
        Vector d;
        if (!op.is_null()) {
            Vector stg;
            if (sparse) {
                stg = sketch_combination(s, 1.0, hv_, b_, hu_, quad_->linear());
            } else if (quad_) {
                stg = s.transpose_times(hv_ + b_ * hu_ + quad_->linear());
                ++stats_.step_dense_ops;
            } else {
                stg = s.transpose_times(problem_.objective->gradient(y_dense));
            }
            d = op.coefficients(stg);
        }
        if (materialize) {
            x_ = y_dense;
            if (!op.is_null()) s.add_times(x_, d, -1.0);
            ++stats_.record_dense_ops;
        }
        if (!op.is_null()) {
            const double cu = (1.0 - gamma) / b_;
            if (!s.is_coordinate()) stats_.step_dense_ops += 2;
            s.add_times(v_, d, -gamma);
            s.add_times(u_, d, -cu);
            if (quad_) {
                add_hessian_sketch(*quad_, hv_, s, d, -gamma);
                add_hessian_sketch(*quad_, hu_, s, d, -cu);
            }
        }
        b_ *= 1.0 - a1;
        if (quad_ && refresh_due()) {
            hv_ = quad_->hessian_times(v_);
            hu_ = quad_->hessian_times(u_);
            ++stats_.oracle_refreshes;
        }
        advance_schedule();
    }

    Vector x() const override { return x_; }
    Vector y() const override { return v_ + b_ * u_; }
    Vector v() const override { return v_; }

private:
    void rebase() {
        u_ *= b_;
        ++stats_.rebase_dense_ops;
        if (quad_) {
            hu_ *= b_;
            ++stats_.rebase_dense_ops;
        }
        b_ = 1.0;
        ++stats_.rebases;
    }

    Vector v_, u_;
    double b_ = 1.0;
    Vector hv_, hu_;
    Vector x_;
};

}  // namespace

std::unique_ptr<Solver> make_solver(const ConstrainedProblem& problem, SketchDistribution dist, Algorithm algorithm,
                                    const SolverParams& params) {
    switch (algorithm) {
        case Algorithm::RSD: return std::make_unique<RsdSolver>(problem, std::move(dist), params);
        case Algorithm::ARSD_Convex: return std::make_unique<ArsdSolver>(problem, std::move(dist), params, false);
        case Algorithm::ARSD_StronglyConvex:
            return std::make_unique<ArsdSolver>(problem, std::move(dist), params, true);
        case Algorithm::ARSD_EfficientConvex:
            return std::make_unique<ArsdEfficientCvxSolver>(problem, std::move(dist), params);
        case Algorithm::ARSD_EfficientStronglyConvex:
            return std::make_unique<ArsdEfficientScSolver>(problem, std::move(dist), params);
    }
    fail(ErrorCode::InvalidConfig, "unknown algorithm");
}

ResolvedParameters resolve_parameters(const ConstrainedProblem& problem, const SketchDistribution& dist,
                                      const SolverConfig& config, const ExpectedOperator* z) {
    ResolvedParameters r;
    const Algorithm algo = config.algorithm;
    if (!is_accelerated(algo)) return r;

    const bool enumerable = dist.is_finite() && dist.support_size() <= SketchDistribution::kMaxEnumerableSupport;
    const bool exact_z = z && z->source().is_exact();
    std::optional<double> nu_max_value;
    if (exact_z && enumerable && problem.smoothness.is_fixed()) {
        nu_max_value = nu_max(dist, *z, problem.smoothness).value;
    }
    if (config.nu) {
        r.nu = *config.nu;
        r.nu_source = "user";
        if (nu_max_value && *config.nu < *nu_max_value * (1.0 - 1e-12)) {
            std::ostringstream msg;
            msg << "nu = " << *config.nu << " is below nu_max = " << *nu_max_value;
            r.warnings.push_back(msg.str());
        }
    } else if (nu_max_value) {
        r.nu = *nu_max_value;
        r.nu_source = "nu_max";
    } else if (z) {
        const auto m = problem.smoothness.matrix();
        if (!m) fail(ErrorCode::InvalidConfig, "nu must be given for per-sketch smoothness");
        r.nu = nu_upper_bound(*z, *m);
        r.nu_source = "upper_bound";
        r.warnings.push_back("nu taken from the upper bound lambda_max(M^-1/2 Z^+ M^-1/2)");
    } else {
        fail(ErrorCode::InvalidConfig, "accelerated methods need nu (or an expected operator to derive it)");
    }

    if (is_strongly_convex(algo)) {
        if (config.sigma) {
            r.sigma = *config.sigma;
            r.sigma_source = "user";
        } else if (z && problem.G) {
            r.sigma = sigma_Z(*z, *problem.G);
            r.sigma_source = "sigma_Z";
        } else {
            fail(ErrorCode::InvalidConfig, "strongly convex methods need sigma (or G and an expected operator)");
        }
        if (!(*r.sigma > 0.0)) fail(ErrorCode::InvalidConfig, "strongly convex methods need sigma > 0");
    }
    return r;
}

RunTrace run(const ConstrainedProblem& problem, const SketchDistribution& dist, const SolverConfig& config,
             const ExpectedOperator* z) {
    problem.validate();
    if (config.max_iters < 0) fail(ErrorCode::InvalidConfig, "max_iters must be >= 0");
    if (config.record_every < 1) fail(ErrorCode::InvalidConfig, "record_every must be >= 1");
    const bool use_tol = config.stop_tolerance && std::isfinite(*config.stop_tolerance);
    if (use_tol && !z) fail(ErrorCode::InvalidConfig, "stop_tolerance needs the expected operator Z");
    if (config.stop_relative_gap && !problem.f_star) fail(ErrorCode::InvalidConfig, "stop_relative_gap needs f*");

    RunTrace trace;
    const auto params_r = resolve_parameters(problem, dist, config, z);
    trace.warnings = params_r.warnings;
    SolverParams params;
    params.nu = params_r.nu.value_or(0.0);
    params.sigma = params_r.sigma.value_or(0.0);
    params.rebase_condition = config.rebase_condition;
    params.rebase_floor = config.rebase_floor;
    params.refresh_every = config.refresh_every;
    auto solver = make_solver(problem, dist.reseeded(config.seed), config.algorithm, params);

    const auto& obj = *problem.objective;
    const auto* quad = obj.as_quadratic();
    double f0 = 0.0;
    bool stop = false;
    std::int64_t elapsed = 0;

    const auto record = [&](Index k, const Vector& x) {
        TraceRow row;
        row.k = k;
        Vector grad;
        if (quad) {
            const Vector hx = quad->hessian_times(x);
            row.f = quad->value_with(x, hx);
            if (z) grad = hx + quad->linear();
        } else {
            row.f = obj.value(x);
            if (z) grad = obj.gradient(x);
        }
        row.feas_inf = problem.feasibility(x);
        row.opt_measure = z ? optimality_measure(*z, grad) : std::numeric_limits<double>::quiet_NaN();
        row.wall_ns = config.timing ? elapsed : 0;
        trace.rows.push_back(row);
        if (k == 0) f0 = row.f;
        if (!std::isfinite(row.f) || row.f > f0 + 1e6 * std::max(1.0, std::abs(f0))) {
            fail(ErrorCode::Divergence, "objective rose from " + format_double(f0) + " to " + format_double(row.f) +
                                            " at k = " + std::to_string(k) + "; the smoothness bound is likely violated");
        }
        if (use_tol && row.opt_measure <= *config.stop_tolerance) stop = true;
        if (config.stop_relative_gap) {
            const double gap0 = f0 - *problem.f_star;
            if (gap0 <= 0.0 || (row.f - *problem.f_star) / gap0 <= *config.stop_relative_gap) stop = true;
        }
    };

    record(0, problem.x0);
    Index k = 0;
    using clock = std::chrono::steady_clock;
    while (k < config.max_iters && !stop) {
        ++k;
        const bool rec = (k % config.record_every == 0) || k == config.max_iters;
        const auto t0 = clock::now();
        solver->step(rec);
        elapsed += std::chrono::duration_cast<std::chrono::nanoseconds>(clock::now() - t0).count();
        if (rec) record(k, solver->x());
    }
    trace.stopped_early = k < config.max_iters;
    trace.stats = solver->stats();
    trace.x_final = solver->x();
    trace.ns_per_iter = k > 0 ? static_cast<double>(elapsed) / static_cast<double>(k) : 0.0;
    return trace;
}

}  // namespace sketchdesc
