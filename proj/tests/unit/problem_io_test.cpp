#include "sketchdesc/error.hpp"
#include "sketchdesc/problem_io.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

using namespace sketchdesc;

TEST(ProblemJson, DenseQuadratic) {
    const auto p = parse_problem_json(R"({
        "name": "toy", "n": 3,
        "constraints": {"A": [[1, 1, 1]], "b": [0]},
        "objective": {"kind": "quadratic", "H": [[2,0,0],[0,2,0],[0,0,2]], "c": [0, 0, 0]},
        "smoothness": "hessian",
        "x0": [1, -1, 0], "f_star": 0
    })");
    EXPECT_EQ(p.name, "toy");
    EXPECT_EQ(p.dim(), 3);
    EXPECT_EQ(p.constraints(), 1);
    EXPECT_NEAR(p.objective->value(Eigen::Vector3d(1, -1, 0)), 2.0, 1e-15);
    EXPECT_LT(oracle::max_abs(*p.smoothness.matrix() - 2.0 * Matrix::Identity(3, 3)), 1e-15);
    EXPECT_EQ(*p.f_star, 0.0);
}

TEST(ProblemJson, TripletsAndDiagonal) {
    const auto p = parse_problem_json(R"({
        "n": 4,
        "constraints": {"A": {"rows": 2, "triplets": [[0,0,1],[0,1,1],[1,2,1],[1,3,-1]]}, "b": [1, 0]},
        "objective": {"kind": "quadratic", "diag": [1, 2, 3, 4]},
        "smoothness": {"kind": "scaled-identity", "lambda": 4}
    })");
    Matrix a(2, 4);
    a << 1, 1, 0, 0, 0, 0, 1, -1;
    EXPECT_EQ(p.A, a);
    EXPECT_EQ(p.smoothness.kind(), SmoothnessKind::ScaledIdentity);
    // x0 defaults to A†b
    EXPECT_LT(p.feasibility(p.x0), 1e-12);
    EXPECT_LT((p.x0 - oracle::pinv(a) * p.b).norm(), 1e-12);
}

TEST(ProblemJson, BuiltinKinds) {
    const auto pr = parse_problem_json(R"({"objective": {"kind": "pagerank", "edges": [[0,1],[1,0]]}})");
    EXPECT_EQ(pr.dim(), 2);
    const auto e1 = parse_problem_json(R"({"objective": {"kind": "exp1", "n": 10, "variant": "structured", "delta": 0.1}})");
    EXPECT_EQ(e1.dim(), 10);
    const auto e2 = parse_problem_json(R"({"objective": {"kind": "exp2", "n": 8, "delta": 0.5}})");
    EXPECT_EQ(e2.dim(), 8);
}

TEST(ProblemJson, MalformedIsIoError) {
    const auto code_of = [](const char* text) {
        try {
            parse_problem_json(text);
        } catch (const Error& e) {
            return e.code();
        }
        return ErrorCode::InvalidInput;
    };
    EXPECT_EQ(code_of("{not json"), ErrorCode::Io);
    EXPECT_EQ(code_of(R"({"n": 2, "objective": {"kind": "nope"}})"), ErrorCode::Io);
    EXPECT_EQ(code_of(R"({"n": 2, "constraints": {"A": [[1, 1]], "b": [0]}, "objective": {"kind": "quadratic", "H": [[1]]}})"),
              ErrorCode::Io);
    EXPECT_THROW(load_problem_json("/nonexistent/problem.json"), Error);
}

TEST(ProblemJson, InfeasibleStart) {
    EXPECT_THROW(parse_problem_json(R"({
        "n": 2, "constraints": {"A": [[1, 1]], "b": [1]},
        "objective": {"kind": "quadratic", "diag": [1, 1]}, "x0": [0, 0]})"),
                 Error);
}

TEST(ProblemJson, LoadFromFile) {
    const auto path = std::filesystem::temp_directory_path() / "sketchdesc_problem_io_test.json";
    {
        std::ofstream out(path);
        out << R"({"n": 2, "constraints": {"A": [[1, 1]], "b": [1]}, "objective": {"kind": "quadratic", "diag": [1, 1]}})";
    }
    const auto p = load_problem(path.string());
    EXPECT_EQ(p.dim(), 2);
    std::filesystem::remove(path);
}

TEST(Builtins, NamesResolve) {
    for (const auto& name : builtin_problem_names()) {
        BuiltinOptions o;
        if (name == "portfolio") o.n = 40;
        EXPECT_NO_THROW(load_problem("builtin:" + name, o)) << name;
    }
    EXPECT_THROW(load_problem("builtin:missing"), Error);
    const auto ex = make_builtin_problem("example6");
    EXPECT_EQ(ex.x0, Vector(Eigen::Vector3d(1, -1, 0)));
}

TEST(SmoothnessChoice, Variants) {
    auto p = make_builtin_problem("exp2", {Index(10), 0.5, 0});
    const Matrix m = *p.smoothness.matrix();
    apply_smoothness_choice(p, "scaled-identity");
    EXPECT_NEAR(p.smoothness.lambda(), Eigen::SelfAdjointEigenSolver<Matrix>(m).eigenvalues().maxCoeff(), 1e-10);
    auto q = make_builtin_problem("exp2", {Index(10), 0.5, 0});
    apply_smoothness_choice(q, "per-sketch");
    EXPECT_EQ(q.smoothness.kind(), SmoothnessKind::PerSketch);
    EXPECT_THROW(apply_smoothness_choice(q, "bogus"), Error);
}

TEST(SketchSpecs, AllKindsBuild) {
    const auto p = make_builtin_problem("exp1-structured", {Index(12), 0.1, 0});
    for (const auto& kind : sketch_kind_names()) {
        auto d = make_sketch({kind, 3, 1}, p);
        EXPECT_EQ(d.dim(), 12) << kind;
        EXPECT_NO_THROW(d.sample()) << kind;
    }
    EXPECT_THROW(make_sketch({"nope", 2, 0}, p), Error);
}
