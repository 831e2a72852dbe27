#include "sketchdesc/error.hpp"
#include "sketchdesc/problems.hpp"
#include "sketchdesc/solvers.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

using namespace sketchdesc;

namespace {

// f = ½ Σ L_i x_i², A = eᵀ, b = 0, M = diag(L).
ConstrainedProblem separable(const Vector& l, const Vector& x0) {
    ConstrainedProblem p;
    p.name = "separable";
    const Index n = l.size();
    p.A = Matrix::Ones(1, n);
    p.b = Vector::Zero(1);
    p.objective = QuadraticObjective::diagonal(l);
    p.smoothness = Smoothness::full(l.asDiagonal());
    p.G = Matrix(l.asDiagonal());
    p.f_star = 0.0;
    p.x_star = Vector::Zero(n);
    p.x0 = x0;
    return p;
}

ConstrainedProblem example6() { return separable(Vector::Ones(3), Eigen::Vector3d(1, -1, 0)); }

Vector spread(Index n) {
    Vector l(n);
    for (Index i = 0; i < n; ++i) l(i) = 1.0 + 0.37 * double(i);
    return l;
}

Vector centered(Index n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    Vector x = oracle::random_vector(n, rng);
    return x.array() - x.mean();
}

ConstrainedProblem pagerank_toy() {
    return make_pagerank_problem(6, {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 5}, {5, 0}, {0, 3}, {2, 5}, {4, 1}});
}

// Three lines of the general accelerated iteration, with dense Z_S from the oracle.
struct GeneralOracle {
    const ConstrainedProblem& p;
    Matrix m;
    Vector x, v;

    GeneralOracle(const ConstrainedProblem& problem) : p(problem), m(*problem.smoothness.matrix()), x(problem.x0), v(problem.x0) {}

    Vector step(const SketchSample& s, double alpha, double beta, double gamma) {
        const Vector y = alpha * v + (1 - alpha) * x;
        const Vector g = oracle::z_s(s.to_dense(), p.A, m) * p.objective->gradient(y);
        x = y - g;
        v = beta * v + (1 - beta) * y - gamma * g;
        return y;
    }
};

// NaN opt_measure makes row equality useless; compare the serialized form.
std::string csv(const std::vector<TraceRow>& rows) {
    std::ostringstream out;
    write_trace_csv(out, rows);
    return out.str();
}

double rel(const Vector& a, const Vector& b) { return (a - b).norm() / std::max(1.0, b.norm()); }

double max_y_deviation(const ConstrainedProblem& p, const SketchDistribution& dist, Algorithm eff, Algorithm gen,
                       const SolverParams& params, int steps) {
    auto a = make_solver(p, dist, eff, params);
    auto b = make_solver(p, dist, gen, params);
    double worst = 0.0;
    for (int k = 0; k < steps; ++k) {
        worst = std::max(worst, rel(a->y(), b->y()));
        const bool rec = (k + 1) % 50 == 0;
        a->step(rec);
        b->step(rec);
        if (rec) worst = std::max(worst, rel(a->x(), b->x()));
    }
    return worst;
}

}  // namespace

TEST(Rsd, OneStepReachesOptimum) {
    const auto p = example6();
    auto s = make_solver(p, SketchDistribution::fixed_partition_pairs(3), Algorithm::RSD);
    s->step(true);
    EXPECT_LT(s->x().norm(), 1e-15);
    EXPECT_EQ(s->iteration(), 1);
}

TEST(Rsd, StationaryPointUnchanged) {
    auto p = separable(Vector::Ones(3), Vector::Ones(3));
    p.b = Vector::Constant(1, 3.0);
    auto s = make_solver(p, SketchDistribution::random_tuples(3, 2, 4), Algorithm::RSD);
    for (int k = 0; k < 10; ++k) s->step(true);
    EXPECT_LT((s->x() - Vector::Ones(3)).norm(), 1e-14);
}

TEST(Rsd, NullSampleCountsZeroStep) {
    const auto p = example6();
    auto s = make_solver(p, SketchDistribution::random_tuples(3, 1, 2), Algorithm::RSD);
    for (int k = 0; k < 5; ++k) s->step(true);
    EXPECT_EQ(s->stats().zero_steps, 5u);
    EXPECT_EQ(s->x(), p.x0);
}

TEST(Rsd, FullSketchIsProjectedGradient) {
    std::mt19937_64 rng(12);
    const auto p = oracle::random_quadratic(8, 3, 0.5, rng);
    auto basis = std::make_shared<const Matrix>(Matrix::Identity(8, 8));
    auto s = make_solver(p, SketchDistribution::random_tuples(8, 8, 0, TupleRule::Uniform, {}, basis), Algorithm::RSD);
    const Matrix u = linalg::kernel_basis(p.A).columns();
    // Z_I = U (UᵀMU)⁻¹ Uᵀ
    const Matrix zi = u * (u.transpose() * *p.smoothness.matrix() * u).inverse() * u.transpose();
    Vector x = p.x0;
    for (int k = 0; k < 100; ++k) {
        x = x - zi * p.objective->gradient(x);
        s->step(true);
        ASSERT_LT((s->x() - x).norm(), 1e-10 * (1 + x.norm()));
    }
}

TEST(Arsd, ConvexFirstStepHasYEqualX0) {
    const auto p = example6();
    SolverParams params;
    params.nu = 1.0;
    auto s = make_solver(p, SketchDistribution::lipschitz_pairs(Vector::Ones(3)), Algorithm::ARSD_Convex, params);
    EXPECT_EQ(s->y(), p.x0);
    EXPECT_EQ(s->v(), p.x0);
}

TEST(Arsd, GeneralStepMatchesStraightLineOracle) {
    const auto p = separable(spread(5), centered(5, 3));
    const auto dist = SketchDistribution::lipschitz_pairs(spread(5), 9);
    for (bool strongly : {false, true}) {
        SolverParams params;
        params.nu = 1.7;
        params.sigma = 0.2;
        auto s = make_solver(p, dist, strongly ? Algorithm::ARSD_StronglyConvex : Algorithm::ARSD_Convex, params);
        GeneralOracle ref(p);
        auto draws = dist;
        auto sched = strongly ? Schedule::strongly_convex(0.2, 1.7) : Schedule::convex(1.7);
        for (int k = 0; k < 25; ++k) {
            const auto sp = sched.next();
            const Vector y = ref.step(draws.sample(), sp.alpha, sp.beta, sp.gamma);
            ASSERT_LT(rel(s->y(), y), 1e-12) << "k=" << k;
            s->step(true);
            ASSERT_LT(rel(s->x(), ref.x), 1e-12) << "k=" << k;
            ASSERT_LT(rel(s->v(), ref.v), 1e-12) << "k=" << k;
        }
    }
}

TEST(Arsd, IteratesStayFeasible) {
    std::mt19937_64 rng(8);
    const auto p = oracle::random_quadratic(12, 3, 0.1, rng);
    SolverParams params;
    params.nu = 3.0;
    params.sigma = 0.01;
    auto s = make_solver(p, SketchDistribution::random_tuples(12, 5, 1), Algorithm::ARSD_StronglyConvex, params);
    for (int k = 0; k < 500; ++k) {
        s->step(true);
        ASSERT_LT((p.A * s->y() - p.b).cwiseAbs().maxCoeff(), 1e-9 * (1 + p.b.cwiseAbs().maxCoeff()));
        ASSERT_LT((p.A * s->v() - p.b).cwiseAbs().maxCoeff(), 1e-9 * (1 + p.b.cwiseAbs().maxCoeff()));
    }
}

TEST(EfficientSc, FirstGradientPointIsX0) {
    const auto p = example6();
    SolverParams params;
    params.nu = 2.0;
    params.sigma = 0.5;
    auto s = make_solver(p, SketchDistribution::lipschitz_pairs(Vector::Ones(3)), Algorithm::ARSD_EfficientStronglyConvex,
                         params);
    EXPECT_EQ(s->y(), p.x0);
}

TEST(EfficientSc, MatchesGeneralForm) {
    const auto p = separable(spread(10), centered(10, 1));
    SolverParams params;
    params.nu = 2.5;
    params.sigma = 0.05;
    const double dev = max_y_deviation(p, SketchDistribution::lipschitz_pairs(spread(10), 3),
                                       Algorithm::ARSD_EfficientStronglyConvex, Algorithm::ARSD_StronglyConvex, params, 1000);
    EXPECT_LE(dev, 1e-8);
}

TEST(EfficientCvx, MatchesGeneralForm) {
    const auto p = separable(spread(10), centered(10, 2));
    SolverParams params;
    params.nu = 2.5;
    const double dev = max_y_deviation(p, SketchDistribution::lipschitz_pairs(spread(10), 4),
                                       Algorithm::ARSD_EfficientConvex, Algorithm::ARSD_Convex, params, 1000);
    EXPECT_LE(dev, 1e-8);
}

TEST(EfficientCvx, MatchesGeneralFormOnPageRank) {
    const auto p = pagerank_toy();
    SolverParams params;
    params.nu = 4.0;
    params.sigma = 0.01;
    const auto dist = SketchDistribution::random_tuples(6, 3, 7);
    EXPECT_LE(max_y_deviation(p, dist, Algorithm::ARSD_EfficientConvex, Algorithm::ARSD_Convex, params, 100), 1e-8);
    EXPECT_LE(max_y_deviation(p, dist, Algorithm::ARSD_EfficientStronglyConvex, Algorithm::ARSD_StronglyConvex, params, 100),
              1e-8);
}

TEST(EfficientCvx, FirstGradientPointIsX0) {
    const auto p = example6();
    SolverParams params;
    params.nu = 2.0;
    auto s = make_solver(p, SketchDistribution::lipschitz_pairs(Vector::Ones(3)), Algorithm::ARSD_EfficientConvex, params);
    EXPECT_EQ(s->y(), p.x0);
}

TEST(Efficient, NoDenseWorkBetweenRecords) {
    const auto p = separable(spread(40), centered(40, 5));
    SolverParams params;
    params.nu = 3.0;
    params.sigma = 0.01;
    for (auto algo : {Algorithm::ARSD_EfficientConvex, Algorithm::ARSD_EfficientStronglyConvex}) {
        auto s = make_solver(p, SketchDistribution::random_tuples(40, 2, 1), algo, params);
        for (int k = 0; k < 300; ++k) s->step(false);
        EXPECT_EQ(s->stats().step_dense_ops, 0u) << to_string(algo);
        EXPECT_EQ(s->stats().record_dense_ops, 0u) << to_string(algo);
        EXPECT_EQ(s->stats().dense_steps, 0u) << to_string(algo);
        s->step(true);
        EXPECT_GT(s->stats().record_dense_ops, 0u);
    }
}

TEST(Efficient, RebasingKeepsEquivalence) {
    const auto p = separable(spread(10), centered(10, 6));
    SolverParams params;
    params.nu = 2.5;
    params.sigma = 0.05;
    params.rebase_condition = 10.0;
    params.rebase_floor = 0.5;
    const auto dist = SketchDistribution::lipschitz_pairs(spread(10), 3);
    auto a = make_solver(p, dist, Algorithm::ARSD_EfficientStronglyConvex, params);
    auto b = make_solver(p, dist, Algorithm::ARSD_EfficientConvex, params);
    auto ga = make_solver(p, dist, Algorithm::ARSD_StronglyConvex, params);
    auto gb = make_solver(p, dist, Algorithm::ARSD_Convex, params);
    for (int k = 0; k < 300; ++k) {
        a->step(false);
        b->step(false);
        ga->step(false);
        gb->step(false);
    }
    EXPECT_GT(a->stats().rebases, 0u);
    EXPECT_GT(b->stats().rebases, 0u);
    EXPECT_LE(rel(a->y(), ga->y()), 1e-8);
    EXPECT_LE(rel(b->y(), gb->y()), 1e-8);
}

TEST(Run, RowCountWithoutStopping) {
    const auto p = separable(spread(6), centered(6, 1));
    SolverConfig c;
    c.max_iters = 100;
    c.record_every = 7;
    c.stop_tolerance = std::numeric_limits<double>::infinity();
    const auto t = run(p, SketchDistribution::random_tuples(6, 2), c);
    // k = 0, 7, ..., 98 and the final 100
    EXPECT_EQ(t.rows.size(), 100u / 7u + 2u);
    EXPECT_EQ(t.rows.back().k, 100);
    c.record_every = 10;
    EXPECT_EQ(run(p, SketchDistribution::random_tuples(6, 2), c).rows.size(), 11u);
    for (std::size_t i = 1; i < t.rows.size(); ++i) EXPECT_GT(t.rows[i].k, t.rows[i - 1].k);
}

TEST(Run, SameSeedIdenticalTraces) {
    const auto p = separable(spread(8), centered(8, 2));
    SolverConfig c;
    c.max_iters = 200;
    c.seed = 5;
    for (auto algo : {Algorithm::RSD, Algorithm::ARSD_EfficientStronglyConvex}) {
        c.algorithm = algo;
        c.nu = 3.0;
        c.sigma = 0.05;
        const auto a = run(p, SketchDistribution::random_tuples(8, 2), c);
        const auto b = run(p, SketchDistribution::random_tuples(8, 2), c);
        EXPECT_EQ(csv(a.rows), csv(b.rows));
    }
    c.algorithm = Algorithm::RSD;
    c.seed = 6;
    EXPECT_NE(csv(run(p, SketchDistribution::random_tuples(8, 2), c).rows),
              csv(run(p, SketchDistribution::random_tuples(8, 2), {}).rows));
}

TEST(Run, StopsOnRelativeGap) {
    const auto p = separable(spread(6), centered(6, 3));
    SolverConfig c;
    c.max_iters = 100000;
    c.stop_relative_gap = 1e-6;
    const auto t = run(p, SketchDistribution::random_tuples(6, 2), c);
    EXPECT_TRUE(t.stopped_early);
    EXPECT_LE(t.rows.back().f / t.rows.front().f, 1e-6);
}

TEST(Run, StopToleranceNeedsZ) {
    const auto p = example6();
    SolverConfig c;
    c.stop_tolerance = 1e-3;
    EXPECT_THROW(run(p, SketchDistribution::random_tuples(3, 2), c), Error);
}

TEST(Run, DivergenceGuard) {
    auto p = separable(Vector::Ones(4), centered(4, 4));
    // M far below the Hessian: every step overshoots.
    p.smoothness = Smoothness::scaled_identity(4, 1e-3);
    SolverConfig c;
    c.max_iters = 1000;
    EXPECT_THROW(run(p, SketchDistribution::random_tuples(4, 2), c), Error);
}

TEST(Run, AcceleratedResolvesNuFromEnumeration) {
    const auto p = example6();
    const auto dist = SketchDistribution::lipschitz_pairs(Vector::Ones(3));
    const auto z = expected_Z(dist, p.A, p.smoothness);
    SolverConfig c;
    c.algorithm = Algorithm::ARSD_StronglyConvex;
    const auto r = resolve_parameters(p, dist, c, &z);
    EXPECT_EQ(r.nu_source, "nu_max");
    EXPECT_NEAR(*r.nu, nu_max(dist, z, p.smoothness).value, 1e-14);
    EXPECT_NEAR(*r.sigma, 0.5, 1e-10);
    c.nu = 0.1;
    EXPECT_FALSE(resolve_parameters(p, dist, c, &z).warnings.empty());
    EXPECT_THROW(resolve_parameters(p, dist, SolverConfig{Algorithm::ARSD_Convex}, nullptr), Error);
}

TEST(Run, DescentOnNonQuadraticObjective) {
    // f = Σ log(1 + e^{x_i}) + ½‖x‖²: Hessian ⪯ 1.25 I.
    const Index n = 6;
    auto f = std::make_shared<FunctionObjective>(
        n,
        [](const Vector& x) {
            return (x.array().exp() + 1.0).log().sum() + 0.5 * x.squaredNorm();
        },
        [](const Vector& x) {
            return Vector((1.0 / (1.0 + (-x.array()).exp())).matrix() + x);
        });
    ConstrainedProblem p;
    p.A = Matrix::Ones(1, n);
    p.b = Vector::Constant(1, 1.0);
    p.objective = f;
    p.smoothness = Smoothness::scaled_identity(n, 1.25);
    p.x0 = Vector::Zero(n);
    p.x0(0) = 1.0;
    SolverConfig c;
    c.max_iters = 2000;
    const auto t = run(p, SketchDistribution::random_tuples(n, 2), c);
    for (std::size_t i = 1; i < t.rows.size(); ++i) ASSERT_LE(t.rows[i].f, t.rows[i - 1].f + 1e-12);
    // optimum is x = e/n by symmetry
    EXPECT_LT((t.x_final - Vector::Constant(n, 1.0 / n)).norm(), 1e-6);
}
