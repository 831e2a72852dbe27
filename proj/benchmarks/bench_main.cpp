#include "sketchdesc/operators.hpp"
#include "sketchdesc/problems.hpp"
#include "sketchdesc/problem_io.hpp"
#include "sketchdesc/solvers.hpp"

#include <benchmark/benchmark.h>

using namespace sketchdesc;

namespace {

const ConstrainedProblem& portfolio() {
    static const ConstrainedProblem p = [] {
        const auto data = synth_portfolio_data(500, 11, 0);
        return make_portfolio_problem(data, data.mu.mean(), proportional_allocations(data.classes));
    }();
    return p;
}

const ConstrainedProblem& exp1() {
    static const ConstrainedProblem p = make_exp1_problem(1000, 0.01, Exp1Variant::Structured, 0);
    return p;
}

}  // namespace

// Per-iteration cost of RSD against sketch width.
static void BM_RsdGaussianPortfolio(benchmark::State& state) {
    const auto& p = portfolio();
    auto solver = make_solver(p, SketchDistribution::gaussian(p.dim(), state.range(0), 1), Algorithm::RSD);
    for (auto _ : state) solver->step(false);
}
BENCHMARK(BM_RsdGaussianPortfolio)->RangeMultiplier(2)->Range(16, 128);

static void BM_RsdPairs(benchmark::State& state) {
    auto solver = make_solver(exp1(), SketchDistribution::random_tuples(exp1().dim(), state.range(0), 1), Algorithm::RSD);
    for (auto _ : state) solver->step(false);
}
BENCHMARK(BM_RsdPairs)->RangeMultiplier(2)->Range(2, 32);

static void BM_EfficientAccelerated(benchmark::State& state) {
    SolverParams params;
    params.nu = 2.0;
    params.sigma = 1e-4;
    const auto algo = state.range(0) ? Algorithm::ARSD_EfficientStronglyConvex : Algorithm::ARSD_StronglyConvex;
    auto solver = make_solver(exp1(), SketchDistribution::random_tuples(exp1().dim(), 2, 1), algo, params);
    for (auto _ : state) solver->step(false);
    state.SetLabel(std::string(to_string(algo)));
}
BENCHMARK(BM_EfficientAccelerated)->Arg(0)->Arg(1);

// Factored Z_S construction.
static void BM_SketchOperatorBuild(benchmark::State& state) {
    const auto& p = portfolio();
    auto dist = SketchDistribution::gaussian(p.dim(), state.range(0), 2);
    const auto s = dist.sample();
    for (auto _ : state) benchmark::DoNotOptimize(build_sketch_operator(s, p.A, p.smoothness));
}
BENCHMARK(BM_SketchOperatorBuild)->RangeMultiplier(2)->Range(16, 128);

BENCHMARK_MAIN();
