#include "sketchdesc/problems.hpp"

#include "sketchdesc/error.hpp"
#include "sketchdesc/rng.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

namespace sketchdesc {

namespace {

void require_delta(double delta) {
    if (!(delta >= 0.0 && delta <= 1.0)) fail(ErrorCode::InvalidConfig, "delta must lie in [0, 1]");
}

// Seeded unit vector orthogonal to e.
Vector unit_in_sum_zero(Index n, std::uint64_t seed) {
    Rng rng(seed);
    std::normal_distribution<double> normal;
    Vector x(n);
    for (Index i = 0; i < n; ++i) x[i] = normal(rng.engine());
    x.array() -= x.mean();
    return x / x.norm();
}

Matrix ones_row(Index n) { return Matrix::Ones(1, n); }

}  // namespace

ConstrainedProblem make_exp1_problem(Index n, double delta, Exp1Variant variant, std::uint64_t seed) {
    require_delta(delta);
    if (n < 3) fail(ErrorCode::InvalidConfig, "experiment 1 needs n >= 3");
    ConstrainedProblem p;
    Matrix h;
    if (variant == Exp1Variant::Structured) {
        p.name = "exp1-structured";
        Matrix q = Matrix::Identity(n, n);
        q(0, n - 1) += 1.0 - delta;
        q(n - 1, 0) += 1.0 - delta;
        h = 2.0 * q;
        p.A = ones_row(n);
        p.x0 = unit_in_sum_zero(n, seed);
    } else {
        p.name = "exp1-random";
        Rng rng(seed);
        std::normal_distribution<double> normal;
        const Index r = n / 2;
        Matrix w(r, n);
        for (Index j = 0; j < n; ++j) {
            for (Index i = 0; i < r; ++i) w(i, j) = normal(rng.engine());
        }
        w /= std::sqrt(static_cast<double>(n));
        h = w.transpose() * w;
        h.diagonal().array() += delta;
        h = linalg::symmetrize(h);
        Eigen::SelfAdjointEigenSolver<Matrix> eig(h);
        p.x0 = eig.eigenvectors().col(n - 1);
        p.A = eig.eigenvectors().col(n - 2).transpose();
    }
    p.b = Vector::Zero(1);
    p.objective = QuadraticObjective::dense(h);
    p.smoothness = Smoothness::full(h);
    p.G = h;
    p.f_star = 0.0;
    p.x_star = Vector::Zero(n);
    p.validate();
    return p;
}

Exp2Problem make_exp2_problem(Index n, double delta, std::uint64_t seed) {
    require_delta(delta);
    if (n < 2) fail(ErrorCode::InvalidConfig, "experiment 2 needs n >= 2");
    Matrix b = Matrix::Constant(n, n, 1.0 - delta);
    b.diagonal().array() += delta;
    Exp2Problem out;
    auto& p = out.problem;
    p.name = "exp2";
    p.A = ones_row(n);
    p.b = Vector::Zero(1);
    p.objective = QuadraticObjective::dense(2.0 * b);
    p.smoothness = Smoothness::full(2.0 * b);
    p.G = Matrix(2.0 * b);
    p.f_star = 0.0;
    p.x_star = Vector::Zero(n);
    p.x0 = unit_in_sum_zero(n, seed);
    p.validate();
    out.B = std::move(b);
    return out;
}

Smoothness exp2_smoothness(const Matrix& b, Exp2Metric metric) {
    switch (metric) {
        case Exp2Metric::Exact: return Smoothness::full(2.0 * b);
        case Exp2Metric::ScaledIdentity: return Smoothness::scaled_identity(b.rows(), 2.0 * linalg::max_eigenvalue(b));
        case Exp2Metric::PerSketch: return Smoothness::per_sketch(2.0 * b);
    }
    fail(ErrorCode::InvalidConfig, "unknown metric");
}

ConstrainedProblem make_pagerank_problem(const Matrix& adjacency) {
    const Index n = adjacency.rows();
    if (adjacency.cols() != n || n < 2) fail(ErrorCode::InvalidGraph, "adjacency matrix must be square with n >= 2");
    linalg::require_finite(adjacency, "adjacency");
    if ((adjacency.array() < 0.0).any()) fail(ErrorCode::InvalidGraph, "adjacency has negative weights");
    const Vector out_degree = adjacency.colwise().sum().transpose();
    for (Index j = 0; j < n; ++j) {
        if (!(out_degree[j] > 0.0)) fail(ErrorCode::InvalidGraph, "node " + std::to_string(j) + " is dangling");
    }
    const Matrix e = adjacency * out_degree.cwiseInverse().asDiagonal();
    const Matrix em = e - Matrix::Identity(n, n);
    const Matrix h = linalg::symmetrize(em.transpose() * em);

    ConstrainedProblem p;
    p.name = "pagerank";
    p.A = ones_row(n);
    p.b = Vector::Ones(1);
    p.objective = QuadraticObjective::dense(h);
    p.smoothness = Smoothness::full(h);
    p.G = h;
    p.x0 = least_norm_point(p.A, p.b);
    attach_kkt_optimum(p);
    p.validate();
    return p;
}

ConstrainedProblem make_pagerank_problem(Index nodes, const std::vector<std::pair<Index, Index>>& edges) {
    if (nodes < 2) fail(ErrorCode::InvalidGraph, "graph needs at least two nodes");
    Matrix adj = Matrix::Zero(nodes, nodes);
    for (const auto& [from, to] : edges) {
        if (from < 0 || to < 0 || from >= nodes || to >= nodes) fail(ErrorCode::InvalidGraph, "edge endpoint out of range");
        adj(to, from) = 1.0;
    }
    return make_pagerank_problem(adj);
}

ConstrainedProblem make_dual_erm_problem(const Matrix& features, const Vector& labels, Loss loss) {
    if (loss != Loss::Ridge) {
        fail(ErrorCode::UnsupportedLoss, "only the ridge loss has a smooth conjugate; hinge and absolute losses are not supported");
    }
    const Index n = features.cols();
    if (n < 1) fail(ErrorCode::InvalidShape, "need at least one data point");
    if (labels.size() != n) fail(ErrorCode::InvalidShape, "one label per data point (column of features)");
    linalg::require_finite(features, "features");
    linalg::require_finite(labels, "labels");
    const double inv_n = 1.0 / static_cast<double>(n);
    // φ*(s) = s²/4 + y s, averaged over the data.
    const Vector d = Vector::Constant(n, 0.5 * inv_n);
    ConstrainedProblem p;
    p.name = "dual-ridge";
    p.A = features;
    p.b = Vector::Zero(features.rows());
    p.objective = QuadraticObjective::diagonal(d, inv_n * labels);
    p.smoothness = Smoothness::full(Matrix(d.asDiagonal()));
    p.G = Matrix(d.asDiagonal());
    p.x0 = Vector::Zero(n);
    attach_kkt_optimum(p);
    p.validate();
    return p;
}

Index class_count(const std::vector<Index>& classes) {
    if (classes.empty()) return 0;
    const Index mx = *std::max_element(classes.begin(), classes.end());
    return mx + 1;
}

Vector proportional_allocations(const std::vector<Index>& classes) {
    const Index c = class_count(classes);
    Vector a = Vector::Zero(c);
    for (Index id : classes) a[id] += 1.0;
    if (c > 0) a /= static_cast<double>(classes.size());
    return a;
}

namespace {

ConstrainedProblem portfolio_core(const Vector& mu, Index n, double target_return, const std::vector<Index>& classes,
                                  const Vector& allocations) {
    if (mu.size() != n) fail(ErrorCode::InvalidShape, "mu must have one entry per asset");
    linalg::require_finite(mu, "mu");
    if (!classes.empty() && static_cast<Index>(classes.size()) != n) {
        fail(ErrorCode::InvalidShape, "class assignment must cover every asset");
    }
    for (Index id : classes) {
        if (id < 0) fail(ErrorCode::InvalidInput, "class ids must be nonnegative");
    }
    const Index c = class_count(classes);
    if (allocations.size() != c) fail(ErrorCode::InvalidShape, "one allocation per class");
    if (c > 0 && std::abs(allocations.sum() - 1.0) > 1e-10) {
        fail(ErrorCode::InvalidConfig, "class allocations must sum to 1");
    }
    ConstrainedProblem p;
    p.name = "portfolio";
    p.A = Matrix::Zero(c + 2, n);
    p.b = Vector::Zero(c + 2);
    p.A.row(0).setOnes();
    p.b[0] = 1.0;
    p.A.row(1) = mu.transpose();
    p.b[1] = target_return;
    for (Index i = 0; i < static_cast<Index>(classes.size()); ++i) p.A(2 + classes[std::size_t(i)], i) = 1.0;
    for (Index k = 0; k < c; ++k) p.b[2 + k] = allocations[k];
    p.x0 = least_norm_point(p.A, p.b);
    return p;
}

}  // namespace

ConstrainedProblem make_portfolio_problem(const Vector& mu, const Matrix& sigma, double target_return,
                                          const std::vector<Index>& classes, const Vector& allocations) {
    const Index n = sigma.rows();
    if (sigma.cols() != n) fail(ErrorCode::InvalidShape, "Sigma must be square");
    auto p = portfolio_core(mu, n, target_return, classes, allocations);
    const Matrix h = 2.0 * linalg::symmetrize(sigma);
    p.smoothness = Smoothness::full(h);  // rejects a non-PSD Sigma
    p.objective = QuadraticObjective::dense(h);
    p.G = h;
    attach_kkt_optimum(p);
    p.validate();
    return p;
}

ConstrainedProblem make_portfolio_problem(const PortfolioData& data, double target_return, const Vector& allocations) {
    if (!data.factor) return make_portfolio_problem(data.mu, data.sigma, target_return, data.classes, allocations);
    const Matrix& f = *data.factor;
    const Index n = f.cols();
    auto p = portfolio_core(data.mu, n, target_return, data.classes, allocations);
    const Matrix mbar = std::sqrt(2.0) * f;
    p.objective = QuadraticObjective::factored(mbar, 2.0 * data.ridge);
    p.smoothness = Smoothness::factored(mbar, 2.0 * data.ridge);
    p.G = 2.0 * data.sigma;
    attach_kkt_optimum(p);
    p.validate();
    return p;
}

PortfolioData synth_portfolio_data(Index n, Index num_classes, std::uint64_t seed) {
    if (num_classes < 1 || n < num_classes) fail(ErrorCode::InvalidConfig, "need n >= C >= 1");
    Rng rng(seed);
    std::normal_distribution<double> normal;
    std::uniform_real_distribution<double> uniform(0.0, 0.1);
    const Index k = std::max<Index>(2, n / 10);
    PortfolioData d;
    d.ridge = 1e-3;
    Matrix f(k, n);
    for (Index j = 0; j < n; ++j) {
        for (Index i = 0; i < k; ++i) f(i, j) = normal(rng.engine());
    }
    f /= std::sqrt(static_cast<double>(n));
    d.sigma = f.transpose() * f;
    d.sigma.diagonal().array() += d.ridge;
    d.factor = std::move(f);
    d.mu.resize(n);
    for (Index i = 0; i < n; ++i) d.mu[i] = uniform(rng.engine());
    d.classes.resize(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) d.classes[std::size_t(i)] = i % num_classes;
    return d;
}

namespace {

std::vector<std::vector<double>> read_csv_numbers(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorCode::Io, "cannot open " + path.string());
    std::vector<std::vector<double>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            try {
                std::size_t used = 0;
                row.push_back(std::stod(cell, &used));
            } catch (const std::exception&) {
                fail(ErrorCode::Io, path.string() + ": malformed number '" + cell + "'");
            }
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace

PortfolioData read_portfolio_csv(const std::filesystem::path& mu, const std::filesystem::path& sigma,
                                 const std::filesystem::path& classes) {
    PortfolioData d;
    const auto mu_rows = read_csv_numbers(mu);
    const auto n = static_cast<Index>(mu_rows.size());
    d.mu.resize(n);
    for (Index i = 0; i < n; ++i) {
        if (mu_rows[std::size_t(i)].size() != 1) fail(ErrorCode::Io, "mu.csv: expected one value per line");
        d.mu[i] = mu_rows[std::size_t(i)][0];
    }
    const auto s_rows = read_csv_numbers(sigma);
    if (static_cast<Index>(s_rows.size()) != n) fail(ErrorCode::Io, "sigma.csv: expected n rows");
    d.sigma.resize(n, n);
    for (Index i = 0; i < n; ++i) {
        if (static_cast<Index>(s_rows[std::size_t(i)].size()) != n) fail(ErrorCode::Io, "sigma.csv: expected n columns");
        for (Index j = 0; j < n; ++j) d.sigma(i, j) = s_rows[std::size_t(i)][std::size_t(j)];
    }
    const auto c_rows = read_csv_numbers(classes);
    d.classes.assign(static_cast<std::size_t>(n), -1);
    for (const auto& row : c_rows) {
        if (row.size() != 2) fail(ErrorCode::Io, "classes.csv: expected asset_id,class_id");
        const auto asset = static_cast<Index>(row[0]);
        const auto cls = static_cast<Index>(row[1]);
        if (asset < 0 || asset >= n || cls < 0) fail(ErrorCode::Io, "classes.csv: id out of range");
        d.classes[std::size_t(asset)] = cls;
    }
    if (std::find(d.classes.begin(), d.classes.end(), Index(-1)) != d.classes.end()) {
        fail(ErrorCode::Io, "classes.csv: every asset needs a class");
    }
    return d;
}

}  // namespace sketchdesc
