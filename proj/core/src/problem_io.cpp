#include "sketchdesc/problem_io.hpp"

#include "sketchdesc/error.hpp"
#include "sketchdesc/problems.hpp"
#include "sketchdesc/rng.hpp"

#include "json.hpp"

#include <fstream>
#include <random>
#include <sstream>

namespace sketchdesc {

namespace {

using nlohmann::json;

[[noreturn]] void malformed(const std::string& what) { fail(ErrorCode::Io, "problem file: " + what); }

const json& field(const json& j, const char* key) {
    if (!j.is_object() || !j.contains(key)) malformed(std::string("missing field '") + key + "'");
    return j.at(key);
}

double number(const json& j, const char* what) {
    if (!j.is_number()) malformed(std::string(what) + " must be a number");
    return j.get<double>();
}

Index integer(const json& j, const char* what) {
    if (!j.is_number_integer()) malformed(std::string(what) + " must be an integer");
    return j.get<Index>();
}

Vector vector_of(const json& j, const char* what) {
    if (!j.is_array()) malformed(std::string(what) + " must be an array");
    Vector v(static_cast<Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) v[Index(i)] = number(j[i], what);
    return v;
}

Matrix dense_of(const json& j, const char* what) {
    if (!j.is_array()) malformed(std::string(what) + " must be an array of rows");
    const auto rows = static_cast<Index>(j.size());
    if (rows == 0) return Matrix(0, 0);
    if (!j[0].is_array()) malformed(std::string(what) + " must be an array of rows");
    const auto cols = static_cast<Index>(j[0].size());
    Matrix m(rows, cols);
    for (Index i = 0; i < rows; ++i) {
        const auto& row = j[std::size_t(i)];
        if (!row.is_array() || static_cast<Index>(row.size()) != cols) malformed(std::string(what) + " has ragged rows");
        for (Index c = 0; c < cols; ++c) m(i, c) = number(row[std::size_t(c)], what);
    }
    return m;
}

Matrix constraint_matrix(const json& j, Index n) {
    if (j.is_array()) {
        Matrix a = dense_of(j, "A");
        if (a.size() == 0) return Matrix(0, n);
        return a;
    }
    const Index m = integer(field(j, "rows"), "A.rows");
    Matrix a = Matrix::Zero(m, n);
    for (const auto& t : field(j, "triplets")) {
        if (!t.is_array() || t.size() != 3) malformed("triplets must be [row, col, value]");
        const Index r = integer(t[0], "triplet row");
        const Index c = integer(t[1], "triplet col");
        if (r < 0 || r >= m || c < 0 || c >= n) malformed("triplet index out of range");
        a(r, c) += number(t[2], "triplet value");
    }
    return a;
}

std::uint64_t seed_of(const json& j) { return j.contains("seed") ? j.at("seed").get<std::uint64_t>() : 0; }

ConstrainedProblem quadratic_problem(const json& root, const json& obj) {
    ConstrainedProblem p;
    std::shared_ptr<QuadraticObjective> q;
    Vector c;
    if (obj.contains("c")) c = vector_of(obj.at("c"), "c");
    const double c0 = obj.contains("c0") ? number(obj.at("c0"), "c0") : 0.0;
    if (obj.contains("H")) {
        q = QuadraticObjective::dense(dense_of(obj.at("H"), "H"), c, c0);
    } else if (obj.contains("diag")) {
        q = QuadraticObjective::diagonal(vector_of(obj.at("diag"), "diag"), c, c0);
    } else {
        malformed("quadratic objective needs 'H' or 'diag'");
    }
    const Index n = q->dim();
    if (root.contains("n") && integer(root.at("n"), "n") != n) malformed("'n' disagrees with the objective");
    const auto& cons = field(root, "constraints");
    p.A = constraint_matrix(field(cons, "A"), n);
    p.b = vector_of(field(cons, "b"), "b");
    if (p.A.cols() != n) malformed("A must have n columns");
    p.objective = q;
    p.smoothness = Smoothness::full(q->hessian());
    return p;
}

ConstrainedProblem builtin_kind_problem(const json& obj, const std::string& kind) {
    if (kind == "pagerank") {
        if (obj.contains("adjacency")) return make_pagerank_problem(dense_of(obj.at("adjacency"), "adjacency"));
        std::vector<std::pair<Index, Index>> edges;
        Index nodes = 0;
        for (const auto& e : field(obj, "edges")) {
            if (!e.is_array() || e.size() != 2) malformed("edges must be [from, to]");
            edges.emplace_back(integer(e[0], "edge"), integer(e[1], "edge"));
            nodes = std::max({nodes, edges.back().first + 1, edges.back().second + 1});
        }
        if (obj.contains("nodes")) nodes = integer(obj.at("nodes"), "nodes");
        return make_pagerank_problem(nodes, edges);
    }
    if (kind == "dual-ridge") {
        Loss loss = Loss::Ridge;
        if (obj.contains("loss")) {
            const auto name = obj.at("loss").get<std::string>();
            if (name == "hinge") loss = Loss::Hinge;
            else if (name == "absolute") loss = Loss::Absolute;
            else if (name != "ridge") malformed("unknown loss '" + name + "'");
        }
        return make_dual_erm_problem(dense_of(field(obj, "features"), "features"), vector_of(field(obj, "labels"), "labels"),
                                     loss);
    }
    if (kind == "portfolio") {
        const Vector mu = vector_of(field(obj, "mu"), "mu");
        const Matrix sigma = dense_of(field(obj, "sigma"), "sigma");
        std::vector<Index> classes;
        if (obj.contains("classes")) {
            for (const auto& c : obj.at("classes")) classes.push_back(integer(c, "class id"));
        }
        const Vector alloc =
            obj.contains("allocations") ? vector_of(obj.at("allocations"), "allocations") : proportional_allocations(classes);
        const double r = obj.contains("target_return") ? number(obj.at("target_return"), "target_return") : mu.mean();
        return make_portfolio_problem(mu, sigma, r, classes, alloc);
    }
    if (kind == "exp1") {
        const auto variant = obj.value("variant", std::string("structured"));
        if (variant != "structured" && variant != "random") malformed("exp1 variant must be structured or random");
        return make_exp1_problem(obj.value("n", Index(100)), obj.value("delta", 0.01),
                                 variant == "structured" ? Exp1Variant::Structured : Exp1Variant::RandomRankDeficient,
                                 seed_of(obj));
    }
    if (kind == "exp2") {
        return make_exp2_problem(obj.value("n", Index(100)), obj.value("delta", 0.01), seed_of(obj)).problem;
    }
    malformed("unknown objective kind '" + kind + "'");
}

void apply_smoothness_json(ConstrainedProblem& p, const json& s) {
    if (s.is_string()) {
        const auto name = s.get<std::string>();
        if (name == "hessian") return;
        apply_smoothness_choice(p, name);
        return;
    }
    const auto kind = field(s, "kind").get<std::string>();
    if (kind == "full") {
        p.smoothness = Smoothness::full(dense_of(field(s, "M"), "M"));
    } else if (kind == "scaled-identity") {
        p.smoothness = Smoothness::scaled_identity(p.dim(), number(field(s, "lambda"), "lambda"));
    } else if (kind == "per-sketch") {
        p.smoothness = Smoothness::per_sketch(dense_of(field(s, "B"), "B"));
    } else {
        malformed("unknown smoothness kind '" + kind + "'");
    }
}

}  // namespace

ConstrainedProblem parse_problem_json(std::string_view text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::exception& e) {
        malformed(e.what());
    }
    try {
        const auto& obj = field(root, "objective");
        const auto kind = field(obj, "kind").get<std::string>();
        ConstrainedProblem p = kind == "quadratic" ? quadratic_problem(root, obj) : builtin_kind_problem(obj, kind);
        if (root.contains("name")) p.name = root.at("name").get<std::string>();
        if (p.name.empty()) p.name = kind;
        if (root.contains("smoothness")) apply_smoothness_json(p, root.at("smoothness"));
        if (root.contains("G")) p.G = dense_of(root.at("G"), "G");
        else if (!p.G && kind == "quadratic") p.G = p.objective->as_quadratic()->hessian();
        if (root.contains("x0")) p.x0 = vector_of(root.at("x0"), "x0");
        else if (p.x0.size() == 0) p.x0 = least_norm_point(p.A, p.b);
        if (root.contains("f_star")) {
            p.f_star = number(root.at("f_star"), "f_star");
        } else if (!p.f_star && kind == "quadratic") {
            attach_kkt_optimum(p);
        }
        p.validate();
        return p;
    } catch (const json::exception& e) {
        malformed(e.what());
    }
}

ConstrainedProblem load_problem_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorCode::Io, "cannot open problem file " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_problem_json(ss.str());
}

std::vector<std::string> builtin_problem_names() {
    return {"example6", "exp1-structured", "exp1-random", "exp2", "pagerank-toy", "dual-ridge", "portfolio"};
}

ConstrainedProblem make_builtin_problem(std::string_view name, const BuiltinOptions& o) {
    const double delta = o.delta.value_or(0.01);
    if (name == "example6") {
        const Index n = o.n.value_or(3);
        if (n < 2) fail(ErrorCode::InvalidConfig, "example6 needs n >= 2");
        ConstrainedProblem p;
        p.name = "example6";
        p.A = Matrix::Ones(1, n);
        p.b = Vector::Zero(1);
        p.objective = QuadraticObjective::diagonal(Vector::Ones(n));
        p.smoothness = Smoothness::full(Matrix::Identity(n, n));
        p.G = Matrix::Identity(n, n);
        p.x0 = Vector::Zero(n);
        p.x0[0] = 1.0;
        p.x0[1] = -1.0;
        p.f_star = 0.0;
        p.x_star = Vector::Zero(n);
        p.validate();
        return p;
    }
    if (name == "exp1-structured") return make_exp1_problem(o.n.value_or(100), delta, Exp1Variant::Structured, o.seed);
    if (name == "exp1-random") return make_exp1_problem(o.n.value_or(100), delta, Exp1Variant::RandomRankDeficient, o.seed);
    if (name == "exp2") return make_exp2_problem(o.n.value_or(100), delta, o.seed).problem;
    if (name == "pagerank-toy") {
        const Index n = o.n.value_or(8);
        if (n < 3) fail(ErrorCode::InvalidConfig, "pagerank-toy needs n >= 3");
        std::vector<std::pair<Index, Index>> edges;
        for (Index i = 0; i < n; ++i) {
            edges.emplace_back(i, (i + 1) % n);
            if (i % 2 == 0) edges.emplace_back(i, (i + 2) % n);
        }
        auto p = make_pagerank_problem(n, edges);
        p.name = "pagerank-toy";
        return p;
    }
    if (name == "dual-ridge") {
        const Index n = o.n.value_or(50);
        const Index m = std::max<Index>(1, std::min<Index>(5, n - 1));
        Rng rng(o.seed);
        std::normal_distribution<double> normal;
        Matrix features(m, n);
        for (Index j = 0; j < n; ++j) {
            for (Index i = 0; i < m; ++i) features(i, j) = normal(rng.engine());
        }
        Vector labels(n);
        for (Index i = 0; i < n; ++i) labels[i] = normal(rng.engine());
        return make_dual_erm_problem(features, labels);
    }
    if (name == "portfolio") {
        const Index n = o.n.value_or(500);
        const Index c = std::min<Index>(11, n);
        const auto data = synth_portfolio_data(n, c, o.seed);
        return make_portfolio_problem(data, data.mu.mean(), proportional_allocations(data.classes));
    }
    fail(ErrorCode::InvalidConfig, "unknown builtin problem '" + std::string(name) + "'");
}

ConstrainedProblem load_problem(std::string_view spec, const BuiltinOptions& options) {
    constexpr std::string_view prefix = "builtin:";
    if (spec.substr(0, prefix.size()) == prefix) return make_builtin_problem(spec.substr(prefix.size()), options);
    return load_problem_json(std::filesystem::path(std::string(spec)));
}

void apply_smoothness_choice(ConstrainedProblem& p, std::string_view choice) {
    if (choice == "full") return;
    const auto m = p.smoothness.matrix();
    if (!m) fail(ErrorCode::InvalidConfig, "smoothness is already per-sketch");
    if (choice == "scaled-identity") {
        p.smoothness = Smoothness::scaled_identity(p.dim(), linalg::max_eigenvalue(*m));
    } else if (choice == "per-sketch") {
        p.smoothness = Smoothness::per_sketch(*m);
    } else {
        fail(ErrorCode::InvalidConfig, "unknown smoothness choice '" + std::string(choice) + "'");
    }
}

std::vector<std::string> sketch_kind_names() {
    return {"fixed", "fixed-uniform", "random-pairs", "random-tuples", "lipschitz-pairs",
            "kernel-blocks", "gaussian", "uniform"};
}

SketchDistribution make_sketch(const SketchSpec& spec, const ConstrainedProblem& problem) {
    const Index n = problem.dim();
    const auto& k = spec.kind;
    if (k == "fixed") return SketchDistribution::fixed_partition_pairs(n, PartitionMode::Cyclic, spec.seed);
    if (k == "fixed-uniform") return SketchDistribution::fixed_partition_pairs(n, PartitionMode::Uniform, spec.seed);
    if (k == "random-pairs") return SketchDistribution::random_tuples(n, 2, spec.seed);
    if (k == "random-tuples") return SketchDistribution::random_tuples(n, spec.p, spec.seed);
    if (k == "lipschitz-pairs") return SketchDistribution::lipschitz_pairs(problem.smoothness.diagonal(), spec.seed);
    if (k == "kernel-blocks") return SketchDistribution::kernel_basis_blocks(problem.A, spec.p, spec.seed);
    if (k == "gaussian") return SketchDistribution::gaussian(n, spec.p, spec.seed);
    if (k == "uniform") return SketchDistribution::uniform(n, spec.p, spec.seed);
    fail(ErrorCode::InvalidConfig, "unknown sketch kind '" + k + "'");
}

}  // namespace sketchdesc
