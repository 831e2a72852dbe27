#include "sketchdesc/sketch.hpp"

#include "sketchdesc/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace sketchdesc {

namespace {

long double binomial(Index n, Index k) {
    if (k < 0 || k > n) return 0.0L;
    k = std::min(k, n - k);
    long double r = 1.0L;
    for (Index i = 1; i <= k; ++i) r = r * static_cast<long double>(n - k + i) / static_cast<long double>(i);
    return std::round(r);
}

// Advance a sorted k-combination of [0, n) in lexicographic order.
bool next_combination(std::vector<Index>& c, Index n) {
    const auto k = static_cast<Index>(c.size());
    for (Index i = k - 1; i >= 0; --i) {
        if (c[i] < n - k + i) {
            ++c[i];
            for (Index j = i + 1; j < k; ++j) c[j] = c[j - 1] + 1;
            return true;
        }
    }
    return false;
}

// Floyd's algorithm: k distinct values from [0, n), sorted.
std::vector<Index> floyd_sample(Index n, Index k, Rng::engine_type& eng) {
    std::vector<Index> out;
    out.reserve(static_cast<std::size_t>(k));
    for (Index j = n - k; j < n; ++j) {
        std::uniform_int_distribution<Index> pick(0, j);
        const Index t = pick(eng);
        if (std::find(out.begin(), out.end(), t) == out.end()) {
            out.push_back(t);
        } else {
            out.push_back(j);
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

void require_width(Index n, Index p, const char* what) {
    if (n < 1) fail(ErrorCode::InvalidConfig, std::string(what) + ": dimension must be positive");
    if (p < 1 || p > n) {
        fail(ErrorCode::InvalidConfig, std::string(what) + ": sketch width p must satisfy 1 <= p <= " + std::to_string(n) +
                                           ", got " + std::to_string(p));
    }
}

}  // namespace

// ---------------------------------------------------------------------------
// SketchSample

SketchSample SketchSample::columns(Index n, std::vector<Index> indices, std::shared_ptr<const Matrix> basis) {
    const Index pool = basis ? basis->cols() : n;
    if (basis && basis->rows() != n) fail(ErrorCode::InvalidShape, "sketch basis must have n rows");
    if (indices.empty()) fail(ErrorCode::InvalidInput, "column-index sketch needs at least one column");
    std::vector<Index> sorted = indices;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
        fail(ErrorCode::InvalidInput, "column-index sketch has repeated indices");
    }
    if (sorted.front() < 0 || sorted.back() >= pool) {
        fail(ErrorCode::InvalidInput, "column index out of range [0, " + std::to_string(pool) + ")");
    }
    return SketchSample(n, ColumnIndices{std::move(indices), std::move(basis)});
}

SketchSample SketchSample::dense(Matrix s) {
    if (s.cols() < 1) fail(ErrorCode::InvalidInput, "dense sketch needs p >= 1");
    linalg::require_finite(s, "dense sketch");
    const Index n = s.rows();
    return SketchSample(n, Dense{std::move(s)});
}

Index SketchSample::width() const noexcept {
    if (const auto* c = std::get_if<ColumnIndices>(&repr_)) return static_cast<Index>(c->indices.size());
    return std::get<Dense>(repr_).s.cols();
}

bool SketchSample::is_coordinate() const noexcept {
    const auto* c = std::get_if<ColumnIndices>(&repr_);
    return c != nullptr && !c->basis;
}

const std::vector<Index>& SketchSample::indices() const {
    const auto* c = std::get_if<ColumnIndices>(&repr_);
    if (!c) fail(ErrorCode::InvalidInput, "dense sketch has no column indices");
    return c->indices;
}

const Matrix& SketchSample::dense_matrix() const {
    const auto* d = std::get_if<Dense>(&repr_);
    if (!d) fail(ErrorCode::InvalidInput, "column-index sketch has no dense matrix");
    return d->s;
}

Matrix SketchSample::to_dense() const {
    if (const auto* d = std::get_if<Dense>(&repr_)) return d->s;
    const auto& c = std::get<ColumnIndices>(repr_);
    Matrix s = Matrix::Zero(n_, static_cast<Index>(c.indices.size()));
    for (std::size_t j = 0; j < c.indices.size(); ++j) {
        const auto jj = static_cast<Index>(j);
        if (c.basis) {
            s.col(jj) = c.basis->col(c.indices[j]);
        } else {
            s(c.indices[j], jj) = 1.0;
        }
    }
    return s;
}

Vector SketchSample::transpose_times(const Vector& g) const {
    if (const auto* d = std::get_if<Dense>(&repr_)) return d->s.transpose() * g;
    const auto& c = std::get<ColumnIndices>(repr_);
    Vector out(static_cast<Index>(c.indices.size()));
    for (std::size_t j = 0; j < c.indices.size(); ++j) {
        out[static_cast<Index>(j)] = c.basis ? c.basis->col(c.indices[j]).dot(g) : g[c.indices[j]];
    }
    return out;
}

Matrix SketchSample::right_multiply(const Matrix& b) const {
    if (b.cols() != n_) fail(ErrorCode::InvalidShape, "right_multiply: column count must equal n");
    if (const auto* d = std::get_if<Dense>(&repr_)) return b * d->s;
    const auto& c = std::get<ColumnIndices>(repr_);
    Matrix out(b.rows(), static_cast<Index>(c.indices.size()));
    for (std::size_t j = 0; j < c.indices.size(); ++j) {
        const auto jj = static_cast<Index>(j);
        out.col(jj) = c.basis ? Vector(b * c.basis->col(c.indices[j])) : Vector(b.col(c.indices[j]));
    }
    return out;
}

Vector SketchSample::times(const Vector& d) const {
    Vector out = Vector::Zero(n_);
    add_times(out, d, 1.0);
    return out;
}

void SketchSample::add_times(Vector& x, const Vector& d, double scale) const {
    if (const auto* dn = std::get_if<Dense>(&repr_)) {
        x.noalias() += scale * (dn->s * d);
        return;
    }
    const auto& c = std::get<ColumnIndices>(repr_);
    for (std::size_t j = 0; j < c.indices.size(); ++j) {
        const double coeff = scale * d[static_cast<Index>(j)];
        if (c.basis) {
            x.noalias() += coeff * c.basis->col(c.indices[j]);
        } else {
            x[c.indices[j]] += coeff;
        }
    }
}

Matrix SketchSample::congruence(const Matrix& m) const {
    if (m.rows() != n_ || m.cols() != n_) fail(ErrorCode::InvalidShape, "congruence: matrix must be n x n");
    if (is_coordinate()) {
        const auto& idx = std::get<ColumnIndices>(repr_).indices;
        const auto p = static_cast<Index>(idx.size());
        Matrix out(p, p);
        for (Index a = 0; a < p; ++a) {
            for (Index b = 0; b < p; ++b) out(a, b) = m(idx[static_cast<std::size_t>(a)], idx[static_cast<std::size_t>(b)]);
        }
        return out;
    }
    const Matrix s = to_dense();
    return s.transpose() * (m * s);
}

Matrix SketchSample::gram() const {
    if (is_coordinate()) return Matrix::Identity(width(), width());
    const Matrix s = to_dense();
    return s.transpose() * s;
}

// ---------------------------------------------------------------------------
// SketchDistribution

SketchDistribution SketchDistribution::fixed_partition_pairs(Index n, PartitionMode mode, std::uint64_t seed) {
    if (n < 2) fail(ErrorCode::InvalidConfig, "fixed partition pairs need n >= 2");
    SketchDistribution d(SketchKind::FixedPartitionPairs, n, 2, seed);
    d.mode_ = mode;
    return d;
}

SketchDistribution SketchDistribution::random_tuples(Index n, Index p, std::uint64_t seed, TupleRule rule,
                                                     Vector lipschitz, std::shared_ptr<const Matrix> basis) {
    const Index pool = basis ? basis->cols() : n;
    if (basis && basis->rows() != n) fail(ErrorCode::InvalidShape, "tuple basis must have n rows");
    require_width(pool, p, "random tuples");
    SketchDistribution d(SketchKind::RandomTuples, n, p, seed);
    d.rule_ = rule;
    d.basis_ = std::move(basis);
    if (rule == TupleRule::Lipschitz) {
        if (lipschitz.size() != pool) fail(ErrorCode::InvalidConfig, "Lipschitz rule needs one constant per column");
        if (!lipschitz.allFinite() || (lipschitz.array() < 0.0).any() || lipschitz.sum() <= 0.0) {
            fail(ErrorCode::InvalidConfig, "Lipschitz constants must be finite, nonnegative and not all zero");
        }
        d.lipschitz_ = std::move(lipschitz);
    }
    return d;
}

SketchDistribution SketchDistribution::lipschitz_pairs(Vector lipschitz, std::uint64_t seed) {
    const Index n = lipschitz.size();
    if (n < 2) fail(ErrorCode::InvalidConfig, "Lipschitz pairs need n >= 2");
    SketchDistribution d = random_tuples(n, 2, seed, TupleRule::Lipschitz, std::move(lipschitz));
    d.kind_ = SketchKind::LipschitzWeightedPairs;
    return d;
}

SketchDistribution SketchDistribution::kernel_basis_blocks(const Matrix& a, Index p, std::uint64_t seed,
                                                           double rel_tol) {
    auto basis = std::make_shared<const Matrix>(linalg::kernel_basis(a, rel_tol).columns());
    if (basis->cols() == 0) fail(ErrorCode::InvalidConfig, "ker(A) is trivial; no kernel blocks to sample");
    SketchDistribution d = random_tuples(a.cols(), p, seed, TupleRule::Uniform, {}, std::move(basis));
    d.kind_ = SketchKind::KernelBasisBlocks;
    return d;
}

SketchDistribution SketchDistribution::gaussian(Index n, Index p, std::uint64_t seed) {
    require_width(n, p, "gaussian sketch");
    return SketchDistribution(SketchKind::GaussianDense, n, p, seed);
}

SketchDistribution SketchDistribution::uniform(Index n, Index p, std::uint64_t seed) {
    require_width(n, p, "uniform sketch");
    return SketchDistribution(SketchKind::UniformDense, n, p, seed);
}

Index SketchDistribution::pool_size() const noexcept {
    return basis_ ? basis_->cols() : n_;
}

bool SketchDistribution::is_finite() const noexcept {
    return kind_ != SketchKind::GaussianDense && kind_ != SketchKind::UniformDense;
}

bool SketchDistribution::is_coordinate() const noexcept {
    return is_finite() && !basis_;
}

std::vector<Index> SketchDistribution::draw_tuple() {
    auto& eng = rng_.engine();
    const Index pool = pool_size();
    if (rule_ == TupleRule::Uniform) return floyd_sample(pool, p_, eng);
    // Lipschitz rule: first column with probability L_i / L, the rest uniformly.
    std::uniform_real_distribution<double> unif(0.0, lipschitz_.sum());
    const double target = unif(eng);
    Index first = 0;
    double acc = 0.0;
    for (; first < pool - 1; ++first) {
        acc += lipschitz_[first];
        if (target < acc) break;
    }
    std::vector<Index> rest = floyd_sample(pool - 1, p_ - 1, eng);
    std::vector<Index> out{first};
    for (Index r : rest) out.push_back(r >= first ? r + 1 : r);
    std::sort(out.begin(), out.end());
    return out;
}

SketchSample SketchDistribution::sample() {
    switch (kind_) {
        case SketchKind::FixedPartitionPairs: {
            Index i = 0;
            if (mode_ == PartitionMode::Cyclic) {
                i = cycle_ % (n_ - 1);
                ++cycle_;
            } else {
                std::uniform_int_distribution<Index> pick(0, n_ - 2);
                i = pick(rng_.engine());
            }
            return SketchSample::columns(n_, {i, i + 1});
        }
        case SketchKind::RandomTuples:
        case SketchKind::LipschitzWeightedPairs:
        case SketchKind::KernelBasisBlocks:
            return SketchSample::columns(n_, draw_tuple(), basis_);
        case SketchKind::GaussianDense: {
            std::normal_distribution<double> normal(0.0, 1.0);
            Matrix s(n_, p_);
            for (Index k = 0; k < s.size(); ++k) s.data()[k] = normal(rng_.engine());
            return SketchSample::dense(std::move(s));
        }
        case SketchKind::UniformDense: {
            std::uniform_real_distribution<double> unif(-1.0, 1.0);
            Matrix s(n_, p_);
            for (Index k = 0; k < s.size(); ++k) s.data()[k] = unif(rng_.engine());
            return SketchSample::dense(std::move(s));
        }
    }
    fail(ErrorCode::InvalidConfig, "unknown sketch kind");
}

double SketchDistribution::tuple_probability(std::span<const Index> tuple) const {
    const Index pool = pool_size();
    if (rule_ == TupleRule::Uniform) return static_cast<double>(1.0L / binomial(pool, p_));
    double sum = 0.0;
    for (Index i : tuple) sum += lipschitz_[i];
    return static_cast<double>(static_cast<long double>(sum) /
                               (static_cast<long double>(lipschitz_.sum()) * binomial(pool - 1, p_ - 1)));
}

std::uint64_t SketchDistribution::support_size() const {
    switch (kind_) {
        case SketchKind::FixedPartitionPairs: return static_cast<std::uint64_t>(n_ - 1);
        case SketchKind::GaussianDense:
        case SketchKind::UniformDense: return 0;
        default: {
            const long double c = binomial(pool_size(), p_);
            return c > 1e18L ? std::numeric_limits<std::uint64_t>::max() : static_cast<std::uint64_t>(c);
        }
    }
}

std::vector<WeightedSample> SketchDistribution::enumerate_support() const {
    if (!is_finite()) {
        fail(ErrorCode::UnsupportedEnumeration, "cannot enumerate the support of a continuous sketch family");
    }
    const std::uint64_t size = support_size();
    if (size > kMaxEnumerableSupport) {
        fail(ErrorCode::UnsupportedEnumeration,
             "support has " + std::to_string(size) + " atoms, above the enumeration limit");
    }
    std::vector<WeightedSample> out;
    out.reserve(static_cast<std::size_t>(size));
    if (kind_ == SketchKind::FixedPartitionPairs) {
        const double prob = 1.0 / static_cast<double>(n_ - 1);
        for (Index i = 0; i + 1 < n_; ++i) out.push_back({SketchSample::columns(n_, {i, i + 1}), prob});
        return out;
    }
    std::vector<Index> combo(static_cast<std::size_t>(p_));
    std::iota(combo.begin(), combo.end(), Index{0});
    do {
        const double prob = tuple_probability(combo);
        out.push_back({SketchSample::columns(n_, combo, basis_), prob});
    } while (next_combination(combo, pool_size()));
    return out;
}

SketchDistribution SketchDistribution::reseeded(std::uint64_t seed) const {
    SketchDistribution copy = *this;
    copy.rng_ = Rng(seed);
    copy.cycle_ = 0;
    return copy;
}

std::string SketchDistribution::describe() const {
    std::ostringstream os;
    os << to_string(kind_) << "(n=" << n_ << ", p=" << p_;
    if (kind_ == SketchKind::FixedPartitionPairs) os << (mode_ == PartitionMode::Cyclic ? ", cyclic" : ", uniform");
    if (kind_ == SketchKind::RandomTuples) os << (rule_ == TupleRule::Uniform ? ", uniform" : ", lipschitz");
    if (basis_ && kind_ != SketchKind::KernelBasisBlocks) os << ", custom basis";
    os << ", seed=" << rng_.seed() << ")";
    return os.str();
}

std::string_view to_string(SketchKind kind) noexcept {
    switch (kind) {
        case SketchKind::FixedPartitionPairs: return "fixed-partition-pairs";
        case SketchKind::RandomTuples: return "random-tuples";
        case SketchKind::LipschitzWeightedPairs: return "lipschitz-pairs";
        case SketchKind::KernelBasisBlocks: return "kernel-blocks";
        case SketchKind::GaussianDense: return "gaussian";
        case SketchKind::UniformDense: return "uniform";
    }
    return "unknown";
}

// ---------------------------------------------------------------------------
// Validity checks

double product_scale(const SketchSample& s, const Matrix& a) {
    const double s_norm = s.is_coordinate() ? std::sqrt(static_cast<double>(s.width())) : s.to_dense().norm();
    return a.norm() * s_norm;
}

Matrix kernel_directions(const SketchSample& s, const Matrix& a, double rel_tol) {
    if (a.cols() != s.dim()) fail(ErrorCode::InvalidShape, "constraint matrix and sketch dimensions differ");
    const Matrix as = s.right_multiply(a);
    const linalg::SubspaceBasis ker = linalg::null_space(as, rel_tol, product_scale(s, a));
    Matrix out(s.dim(), ker.dim());
    for (Index j = 0; j < ker.dim(); ++j) out.col(j) = s.times(ker.columns().col(j));
    return out;
}

bool check_nontrivial_kernel(const SketchSample& s, const Matrix& a) {
    if (a.cols() != s.dim()) fail(ErrorCode::InvalidShape, "constraint matrix and sketch dimensions differ");
    constexpr double tol = 1e-10;
    const Index rank_s = s.is_coordinate() ? s.width() : linalg::numerical_rank(s.to_dense(), tol);
    const Index rank_as = linalg::numerical_rank(s.right_multiply(a), tol, product_scale(s, a));
    return rank_as < rank_s;
}

SpanReport check_span_condition(const SketchDistribution& dist, const Matrix& a, Index mc_samples) {
    const Index n = dist.dim();
    if (a.cols() != n) fail(ErrorCode::InvalidShape, "constraint matrix and sketch dimensions differ");
    SpanReport report;
    report.kernel_dim = n - linalg::numerical_rank(a, 1e-10);
    Matrix gram = Matrix::Zero(n, n);
    double rank_tol = 1e-10;
    if (dist.is_finite()) {
        const auto support = dist.enumerate_support();
        report.samples = static_cast<Index>(support.size());
        for (const auto& atom : support) {
            if (atom.probability <= 0.0) continue;
            const Matrix dirs = kernel_directions(atom.sample, a);
            gram.noalias() += dirs * dirs.transpose();
        }
    } else {
        if (mc_samples <= 0) fail(ErrorCode::InvalidConfig, "Monte-Carlo span check needs mc_samples > 0");
        report.monte_carlo = true;
        report.samples = mc_samples;
        rank_tol = 1e-8;
        SketchDistribution local = dist;
        for (Index k = 0; k < mc_samples; ++k) {
            const Matrix dirs = kernel_directions(local.sample(), a);
            gram.noalias() += dirs * dirs.transpose();
        }
        gram /= static_cast<double>(mc_samples);
    }
    const Vector ev = linalg::symmetric_eigenvalues(gram);
    const double top = ev.size() ? ev[ev.size() - 1] : 0.0;
    report.span_dim = top <= 0.0 ? 0 : static_cast<Index>((ev.array() > rank_tol * top).count());
    report.holds = report.span_dim == report.kernel_dim;
    return report;
}

}  // namespace sketchdesc
