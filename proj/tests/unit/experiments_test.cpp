#include "sketchdesc/error.hpp"
#include "sketchdesc/experiments.hpp"
#include "sketchdesc/problems.hpp"

#include <gtest/gtest.h>

#include <atomic>
#include <cmath>
#include <filesystem>
#include <set>
#include <stdexcept>

using namespace sketchdesc;

TEST(ParallelFor, RunsEveryJobOnce) {
    std::vector<int> hits(500, 0);
    parallel_for(hits.size(), 4, [&](std::size_t i) { hits[i] += 1; });
    for (int h : hits) EXPECT_EQ(h, 1);
    EXPECT_THROW(parallel_for(10, 3,
                              [](std::size_t i) {
                                  if (i == 7) throw std::runtime_error("boom");
                              }),
                 std::runtime_error);
}

TEST(Experiment, GridIsComplete) {
    ExperimentOptions o;
    o.name = "exp2";
    o.n = 10;
    o.deltas = {0.5, 0.01};
    o.p_grid = {2, 5};
    o.seeds = {0, 1, 2};
    o.max_iters = 2000;
    o.threads = 2;
    const auto r = run_experiment(o);
    EXPECT_EQ(r.axes.size(), 3u);
    ASSERT_EQ(r.cells.size(), 2u * 4u * 2u);
    std::set<std::string> labels;
    for (const auto& c : r.cells) {
        labels.insert(c.cell);
        EXPECT_FALSE(c.failed) << c.cell << ": " << c.reason;
        EXPECT_EQ(c.iterations_to_tol.size(), 3u);
        ASSERT_FALSE(c.aggregate.empty());
        EXPECT_EQ(c.aggregate.front().k, 0);
    }
    EXPECT_EQ(labels.size(), r.cells.size());
    EXPECT_NE(r.find("delta=0.5/per-sketch/p=5"), nullptr);
    EXPECT_EQ(r.find("delta=0.3/B/p=2"), nullptr);
}

TEST(Experiment, MeanAtZeroIsStartingValue) {
    ExperimentOptions o;
    o.name = "exp2";
    o.n = 10;
    o.deltas = {0.5};
    o.p_grid = {3};
    o.seeds = {0, 1, 2, 3};
    o.max_iters = 200;
    const auto r = run_experiment(o);
    const auto e2 = make_exp2_problem(10, 0.5, 0);
    const double f0 = e2.problem.objective->value(e2.problem.x0);
    for (const auto& c : r.cells) EXPECT_EQ(c.aggregate.front().f_mean, f0) << c.cell;
}

TEST(Experiment, FailedCellCarriesReason) {
    ExperimentOptions o;
    o.name = "exp2";
    o.n = 6;
    o.deltas = {0.5};
    o.p_grid = {2, 8};
    o.seeds = {0};
    o.max_iters = 100;
    const auto r = run_experiment(o);
    ASSERT_EQ(r.cells.size(), 8u);
    for (const auto& c : r.cells) {
        if (c.cell.ends_with("p=8")) {
            EXPECT_TRUE(c.failed) << c.cell;
            EXPECT_NE(c.reason.find("sketch width"), std::string::npos) << c.reason;
        } else {
            EXPECT_FALSE(c.failed) << c.cell << ": " << c.reason;
        }
    }
    const auto dir = std::filesystem::temp_directory_path() / "sketchdesc_exp_failed";
    std::filesystem::remove_all(dir);
    EXPECT_NO_THROW(write_report(r, dir));
    EXPECT_TRUE(std::filesystem::exists(dir / "summary.json"));
    std::filesystem::remove_all(dir);
}

TEST(Experiment, ThreadCountDoesNotChangeResults) {
    ExperimentOptions o;
    o.name = "exp1";
    o.n = 20;
    o.deltas = {0.1};
    o.seeds = {0, 1};
    o.max_iters = 500;
    o.threads = 1;
    const auto a = run_experiment(o);
    o.threads = 3;
    const auto b = run_experiment(o);
    ASSERT_EQ(a.cells.size(), 12u);
    ASSERT_EQ(a.cells.size(), b.cells.size());
    for (std::size_t i = 0; i < a.cells.size(); ++i) {
        ASSERT_EQ(a.cells[i].aggregate.size(), b.cells[i].aggregate.size());
        for (std::size_t j = 0; j < a.cells[i].aggregate.size(); ++j) {
            EXPECT_EQ(a.cells[i].aggregate[j].f_mean, b.cells[i].aggregate[j].f_mean);
        }
        EXPECT_EQ(a.cells[i].iterations_to_tol, b.cells[i].iterations_to_tol);
    }
}

TEST(Experiment, UnknownNameRejected) {
    ExperimentOptions o;
    o.name = "exp9";
    EXPECT_THROW(run_experiment(o), Error);
}
