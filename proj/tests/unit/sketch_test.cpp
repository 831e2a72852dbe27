#include "sketchdesc/error.hpp"
#include "sketchdesc/sketch.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <map>
#include <numeric>
#include <set>

using namespace sketchdesc;

namespace {

double total_probability(const std::vector<WeightedSample>& support) {
    double t = 0.0;
    for (const auto& w : support) t += w.probability;
    return t;
}

std::map<std::vector<Index>, double> atom_table(const std::vector<WeightedSample>& support) {
    std::map<std::vector<Index>, double> out;
    for (const auto& w : support) {
        auto idx = w.sample.indices();
        std::sort(idx.begin(), idx.end());
        out[idx] += w.probability;
    }
    return out;
}

}  // namespace

TEST(SketchSample, ColumnOperationsMatchDense) {
    std::mt19937_64 rng(2);
    const auto s = SketchSample::columns(6, {4, 1, 3});
    const Matrix d = oracle::columns(6, {4, 1, 3});
    EXPECT_TRUE(s.is_coordinate());
    EXPECT_EQ(s.width(), 3);
    EXPECT_EQ(s.to_dense(), d);
    const Vector g = oracle::random_vector(6, rng);
    const Vector c = oracle::random_vector(3, rng);
    const Matrix m = oracle::random_spd(6, 0.1, rng);
    EXPECT_LT((s.transpose_times(g) - d.transpose() * g).norm(), 1e-15);
    EXPECT_LT((s.times(c) - d * c).norm(), 1e-15);
    EXPECT_LT(oracle::max_abs(s.congruence(m) - d.transpose() * m * d), 1e-14);
    EXPECT_LT(oracle::max_abs(s.gram() - Matrix::Identity(3, 3)), 1e-15);
    Vector x = g;
    s.add_times(x, c, -0.5);
    EXPECT_LT((x - (g - 0.5 * d * c)).norm(), 1e-15);
}

TEST(SketchSample, BasisColumns) {
    std::mt19937_64 rng(8);
    auto basis = std::make_shared<const Matrix>(oracle::random_matrix(4, 4, rng));
    const auto s = SketchSample::columns(4, {0, 2}, basis);
    EXPECT_FALSE(s.is_coordinate());
    Matrix expected(4, 2);
    expected << basis->col(0), basis->col(2);
    EXPECT_LT(oracle::max_abs(s.to_dense() - expected), 1e-15);
}

TEST(SketchSample, RejectsBadIndices) {
    EXPECT_THROW(SketchSample::columns(3, {0, 3}), Error);
    EXPECT_THROW(SketchSample::columns(3, {1, 1}), Error);
    EXPECT_THROW(SketchSample::dense(Matrix(3, 0)), Error);
}

TEST(FixedPartition, CyclicPosition) {
    auto d = SketchDistribution::fixed_partition_pairs(5);
    d.set_cycle_position(2);
    const auto s = d.sample();
    EXPECT_EQ(s.indices(), (std::vector<Index>{2, 3}));
    // wraps after n - 1 pairs
    d.set_cycle_position(0);
    for (int k = 0; k < 4; ++k) d.sample();
    EXPECT_EQ(d.sample().indices(), (std::vector<Index>{0, 1}));
}

TEST(FixedPartition, SupportIsConsecutivePairsUniform) {
    const auto support = SketchDistribution::fixed_partition_pairs(4).enumerate_support();
    ASSERT_EQ(support.size(), 3u);
    for (std::size_t i = 0; i < 3; ++i) {
        EXPECT_EQ(support[i].sample.indices(), (std::vector<Index>{Index(i), Index(i + 1)}));
        EXPECT_NEAR(support[i].probability, 1.0 / 3.0, 1e-15);
    }
}

TEST(RandomTuples, UniformPairsOnFour) {
    const auto d = SketchDistribution::random_tuples(4, 2);
    EXPECT_EQ(d.support_size(), 6u);
    const auto table = atom_table(d.enumerate_support());
    ASSERT_EQ(table.size(), 6u);
    for (const auto& [idx, p] : table) EXPECT_NEAR(p, 1.0 / 6.0, 1e-15);
}

TEST(RandomTuples, LipschitzRuleMatchesFormula) {
    const Vector l = Eigen::Vector4d(1, 2, 3, 4);
    const auto d = SketchDistribution::random_tuples(4, 3, 0, TupleRule::Lipschitz, l);
    const auto support = d.enumerate_support();
    EXPECT_NEAR(total_probability(support), 1.0, 1e-12);
    // P(T) = sum_T L_i / (L * C(3, 2))
    for (const auto& [idx, p] : atom_table(support)) {
        double s = 0.0;
        for (Index i : idx) s += l(i);
        EXPECT_NEAR(p, s / (10.0 * 3.0), 1e-14);
    }
}

TEST(LipschitzPairs, EqualWeightsOnThree) {
    const auto d = SketchDistribution::lipschitz_pairs(Vector::Ones(3));
    const auto support = d.enumerate_support();
    ASSERT_EQ(support.size(), 3u);
    for (const auto& w : support) EXPECT_NEAR(w.probability, 1.0 / 3.0, 1e-15);
}

TEST(LipschitzPairs, UnequalWeights) {
    const Vector l = Eigen::Vector3d(1, 2, 5);
    const auto table = atom_table(SketchDistribution::lipschitz_pairs(l).enumerate_support());
    // (L_i + L_j) / ((n - 1) L)
    EXPECT_NEAR((table.at({0, 1})), 3.0 / 16.0, 1e-15);
    EXPECT_NEAR((table.at({0, 2})), 6.0 / 16.0, 1e-15);
    EXPECT_NEAR((table.at({1, 2})), 7.0 / 16.0, 1e-15);
}

TEST(Enumeration, ContinuousFamiliesRefuse) {
    EXPECT_FALSE(SketchDistribution::gaussian(4, 2).is_finite());
    EXPECT_THROW(SketchDistribution::gaussian(4, 2).enumerate_support(), Error);
    EXPECT_THROW(SketchDistribution::uniform(4, 2).enumerate_support(), Error);
    EXPECT_EQ(SketchDistribution::gaussian(4, 2).support_size(), 0u);
}

TEST(Gaussian, SameSeedBitwiseIdentical) {
    auto a = SketchDistribution::gaussian(4, 2, 42);
    auto b = SketchDistribution::gaussian(4, 2, 42);
    const Matrix sa = a.sample().dense_matrix();
    const Matrix sb = b.sample().dense_matrix();
    EXPECT_EQ(sa.rows(), 4);
    EXPECT_EQ(sa.cols(), 2);
    EXPECT_EQ(std::memcmp(sa.data(), sb.data(), sizeof(double) * 8), 0);
    auto c = SketchDistribution::gaussian(4, 2, 43);
    EXPECT_NE(c.sample().dense_matrix(), sa);
}

TEST(Reseeded, RestartsStreamAndCycle) {
    auto d = SketchDistribution::random_tuples(10, 3, 1);
    std::vector<std::vector<Index>> first;
    for (int i = 0; i < 5; ++i) first.push_back(d.sample().indices());
    auto r = d.reseeded(1);
    for (int i = 0; i < 5; ++i) EXPECT_EQ(r.sample().indices(), first[i]);
}

// Each atom's empirical frequency over 1e5 draws lies within 3 standard errors.
TEST(SamplingLaw, FrequenciesMatchProbabilities) {
    const Vector l = Eigen::Vector4d(1, 2, 3, 4);
    std::vector<SketchDistribution> dists = {
        SketchDistribution::random_tuples(5, 2, 17),
        SketchDistribution::lipschitz_pairs(l, 18),
        SketchDistribution::random_tuples(4, 3, 19, TupleRule::Lipschitz, l),
        SketchDistribution::fixed_partition_pairs(6, PartitionMode::Uniform, 20),
    };
    const int draws = 100000;
    for (auto& d : dists) {
        const auto table = atom_table(d.enumerate_support());
        std::map<std::vector<Index>, int> counts;
        for (int i = 0; i < draws; ++i) {
            auto idx = d.sample().indices();
            std::sort(idx.begin(), idx.end());
            ++counts[idx];
        }
        for (const auto& [idx, p] : table) {
            const double freq = double(counts[idx]) / draws;
            const double se = std::sqrt(p * (1 - p) / draws);
            EXPECT_LE(std::abs(freq - p), 3.0 * se + 1e-12) << d.describe();
        }
        for (const auto& [idx, c] : counts) EXPECT_TRUE(table.count(idx)) << d.describe();
    }
}

TEST(KernelBlocks, SamplesLieInKernel) {
    std::mt19937_64 rng(6);
    const Matrix a = oracle::random_matrix(3, 9, rng);
    auto d = SketchDistribution::kernel_basis_blocks(a, 2, 4);
    for (int i = 0; i < 50; ++i) {
        const auto s = d.sample();
        EXPECT_LT(oracle::max_abs(a * s.to_dense()), 1e-12);
    }
    for (const auto& w : d.enumerate_support()) EXPECT_LT(oracle::max_abs(a * w.sample.to_dense()), 1e-12);
}

TEST(NontrivialKernel, Examples) {
    const Matrix ones = Matrix::Ones(1, 3);
    EXPECT_TRUE(check_nontrivial_kernel(SketchSample::columns(3, {0, 1}), ones));
    EXPECT_FALSE(check_nontrivial_kernel(SketchSample::columns(3, {0}), Matrix::Identity(3, 3)));
    EXPECT_FALSE(check_nontrivial_kernel(SketchSample::columns(3, {0}), ones));
}

// Supersets of an index set with a nontrivial kernel keep it.
TEST(NontrivialKernel, MonotoneInIndexSet) {
    std::mt19937_64 rng(21);
    const Matrix a = oracle::random_matrix(2, 7, rng);
    for (unsigned mask = 1; mask < (1u << 7); ++mask) {
        std::vector<Index> idx;
        for (Index i = 0; i < 7; ++i)
            if (mask & (1u << i)) idx.push_back(i);
        if (!check_nontrivial_kernel(SketchSample::columns(7, idx), a)) continue;
        for (Index extra = 0; extra < 7; ++extra) {
            if (mask & (1u << extra)) continue;
            auto sup = idx;
            sup.push_back(extra);
            EXPECT_TRUE(check_nontrivial_kernel(SketchSample::columns(7, sup), a));
        }
    }
}

TEST(SpanCondition, LipschitzPairsOnFive) {
    const auto r = check_span_condition(SketchDistribution::lipschitz_pairs(Vector::Ones(5)), Matrix::Ones(1, 5));
    EXPECT_TRUE(r.holds);
    EXPECT_EQ(r.kernel_dim, 4);
    EXPECT_EQ(r.span_dim, 4);
    EXPECT_FALSE(r.monte_carlo);
}

TEST(SpanCondition, SingleAtomFails) {
    // Two-column basis [e1, e2] with p = 2: the only atom is S = [e1, e2].
    auto basis = std::make_shared<const Matrix>(oracle::columns(3, {0, 1}));
    const auto d = SketchDistribution::random_tuples(3, 2, 0, TupleRule::Uniform, {}, basis);
    EXPECT_EQ(d.support_size(), 1u);
    const auto r = check_span_condition(d, Matrix::Ones(1, 3));
    EXPECT_FALSE(r.holds);
    EXPECT_EQ(r.span_dim, 1);
    EXPECT_EQ(r.kernel_dim, 2);
}

TEST(SpanCondition, GaussianMonteCarlo) {
    const auto r = check_span_condition(SketchDistribution::gaussian(3, 2, 5), Matrix::Ones(1, 3), 2000);
    EXPECT_TRUE(r.monte_carlo);
    EXPECT_TRUE(r.holds);
    EXPECT_EQ(r.span_dim, 2);
}

TEST(SpanCondition, ZeroSamplesRejected) {
    EXPECT_THROW(check_span_condition(SketchDistribution::gaussian(3, 2), Matrix::Ones(1, 3), 0), Error);
}
