#pragma once

#include "sketchdesc/linalg.hpp"
#include "sketchdesc/rng.hpp"

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace sketchdesc {

/// One realized sketch matrix S (n x p).
///
/// Column-index samples select columns of a fixed basis matrix (the identity
/// when no basis is attached) and are never materialized on the hot path.
class SketchSample {
public:
    struct ColumnIndices {
        std::vector<Index> indices;
        std::shared_ptr<const Matrix> basis;  // null means the identity
    };
    struct Dense {
        Matrix s;
    };

    static SketchSample columns(Index n, std::vector<Index> indices,
                                std::shared_ptr<const Matrix> basis = nullptr);
    static SketchSample dense(Matrix s);

    Index dim() const noexcept { return n_; }
    Index width() const noexcept;

    bool is_column_indices() const noexcept { return std::holds_alternative<ColumnIndices>(repr_); }
    /// Columns of the identity: Z_S g is supported on indices().
    bool is_coordinate() const noexcept;

    const std::vector<Index>& indices() const;
    const Matrix& dense_matrix() const;

    Matrix to_dense() const;

    /// Sᵀ g.
    Vector transpose_times(const Vector& g) const;
    /// B S for a matrix with n columns.
    Matrix right_multiply(const Matrix& b) const;
    /// S d.
    Vector times(const Vector& d) const;
    /// x += scale * S d, touching only the sampled coordinates when possible.
    void add_times(Vector& x, const Vector& d, double scale) const;
    /// Sᵀ M S for an n x n matrix.
    Matrix congruence(const Matrix& m) const;
    /// Sᵀ S.
    Matrix gram() const;

private:
    SketchSample(Index n, std::variant<ColumnIndices, Dense> repr) : n_(n), repr_(std::move(repr)) {}

    Index n_ = 0;
    std::variant<ColumnIndices, Dense> repr_;
};

enum class SketchKind {
    FixedPartitionPairs,
    RandomTuples,
    LipschitzWeightedPairs,
    KernelBasisBlocks,
    GaussianDense,
    UniformDense,
};

enum class PartitionMode { Cyclic, Uniform };
enum class TupleRule { Uniform, Lipschitz };

struct WeightedSample {
    SketchSample sample;
    double probability = 0.0;
};

/// A sketch distribution together with its random stream.
///
/// Instances carry mutable RNG (and cycle) state and are meant to be owned by
/// one run; use `reseeded` to obtain independent copies.
class SketchDistribution {
public:
    /// Pairs [e_i, e_{i+1}], i = 0..n-2. Cyclic mode walks i = k mod (n-1).
    static SketchDistribution fixed_partition_pairs(Index n, PartitionMode mode = PartitionMode::Cyclic,
                                                    std::uint64_t seed = 0);

    /// p distinct columns of the basis (identity by default).
    ///
    /// Lipschitz rule: P(T) = sum_{i in T} L_i / (L * C(N-1, p-1)), which for
    /// p = 2 is (L_i + L_j) / ((N-1) L).
    static SketchDistribution random_tuples(Index n, Index p, std::uint64_t seed = 0,
                                            TupleRule rule = TupleRule::Uniform, Vector lipschitz = {},
                                            std::shared_ptr<const Matrix> basis = nullptr);

    static SketchDistribution lipschitz_pairs(Vector lipschitz, std::uint64_t seed = 0);

    /// Blocks of p columns of an orthonormal basis of ker(A); every sample has A S = 0.
    static SketchDistribution kernel_basis_blocks(const Matrix& a, Index p, std::uint64_t seed = 0,
                                                  double rel_tol = linalg::kDefaultRankTol);

    static SketchDistribution gaussian(Index n, Index p, std::uint64_t seed = 0);
    static SketchDistribution uniform(Index n, Index p, std::uint64_t seed = 0);

    SketchSample sample();

    /// Exhaustive support of a finite family; probabilities sum to one.
    std::vector<WeightedSample> enumerate_support() const;
    /// Support size without materializing it (0 for continuous families).
    std::uint64_t support_size() const;

    bool is_finite() const noexcept;
    /// Samples are identity columns (sparse Z_S output).
    bool is_coordinate() const noexcept;

    SketchKind kind() const noexcept { return kind_; }
    Index dim() const noexcept { return n_; }
    Index width() const noexcept { return p_; }
    std::uint64_t seed() const noexcept { return rng_.seed(); }
    PartitionMode partition_mode() const noexcept { return mode_; }
    TupleRule tuple_rule() const noexcept { return rule_; }
    const std::shared_ptr<const Matrix>& basis() const noexcept { return basis_; }

    /// Fresh copy with a new stream and the cycle reset.
    SketchDistribution reseeded(std::uint64_t seed) const;

    Index cycle_position() const noexcept { return cycle_; }
    void set_cycle_position(Index k) noexcept { cycle_ = k; }

    std::string describe() const;

    static constexpr std::uint64_t kMaxEnumerableSupport = 2'000'000;

private:
    SketchDistribution(SketchKind kind, Index n, Index p, std::uint64_t seed) : kind_(kind), n_(n), p_(p), rng_(seed) {}

    Index pool_size() const noexcept;
    double tuple_probability(std::span<const Index> tuple) const;
    std::vector<Index> draw_tuple();

    SketchKind kind_;
    Index n_;
    Index p_;
    Rng rng_;
    PartitionMode mode_ = PartitionMode::Cyclic;
    TupleRule rule_ = TupleRule::Uniform;
    Vector lipschitz_;
    std::shared_ptr<const Matrix> basis_;
    Index cycle_ = 0;
};

std::string_view to_string(SketchKind kind) noexcept;

/// ‖A‖_F ‖S‖_F, the magnitude anchor for rank decisions on AS.
double product_scale(const SketchSample& s, const Matrix& a);

/// Basis (n x r) of range(S) ∩ ker(A), computed as S · ker(AS).
Matrix kernel_directions(const SketchSample& s, const Matrix& a, double rel_tol = 1e-10);

/// range(S) ∩ ker(A) ≠ {0}, decided by rank(AS) < rank(S).
bool check_nontrivial_kernel(const SketchSample& s, const Matrix& a);

struct SpanReport {
    bool holds = false;
    Index span_dim = 0;
    Index kernel_dim = 0;
    bool monte_carlo = false;
    Index samples = 0;
};

/// Whether sampled sketches can generate ker(A).
///
/// Finite families: Span(∪ range(S) ∩ ker(A)) over the support.
/// Continuous families: range of the Monte-Carlo mean of S (I - (AS)†AS) Sᵀ.
SpanReport check_span_condition(const SketchDistribution& dist, const Matrix& a, Index mc_samples = 1000);

}  // namespace sketchdesc
