#pragma once

#include "sketchdesc/problem.hpp"
#include "sketchdesc/sketch.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace sketchdesc {

/// Problem file layout:
///
///   { "name": str, "n": int,
///     "constraints": { "A": [[...]] | {"rows": m, "triplets": [[i, j, v], ...]}, "b": [...] },
///     "objective": { "kind": "quadratic", "H": [[...]] | "diag": [...], "c": [...], "c0": x }
///                | { "kind": "pagerank", "edges": [[from, to], ...] | "adjacency": [[...]] }
///                | { "kind": "dual-ridge", "features": [[...]], "labels": [...] }
///                | { "kind": "portfolio", "mu", "sigma", "classes", "allocations", "target_return" }
///                | { "kind": "exp1", "variant": "structured" | "random", "delta", "seed" }
///                | { "kind": "exp2", "delta", "seed" },
///     "smoothness": "hessian" | {"kind": "full", "M": [[...]]}
///                 | {"kind": "scaled-identity", "lambda": x} | {"kind": "per-sketch", "B": [[...]]},
///     "G": [[...]], "f_star": x, "x0": [...] }
///
/// Only the quadratic kind reads "constraints"; the others build their own.
/// Malformed content raises an Io error.
ConstrainedProblem parse_problem_json(std::string_view text);
ConstrainedProblem load_problem_json(const std::filesystem::path& path);

struct BuiltinOptions {
    std::optional<Index> n;
    std::optional<double> delta;
    std::uint64_t seed = 0;
};

/// example6, exp1-structured, exp1-random, exp2, pagerank-toy, dual-ridge, portfolio
ConstrainedProblem make_builtin_problem(std::string_view name, const BuiltinOptions& options = {});
std::vector<std::string> builtin_problem_names();

/// `builtin:<name>` or a JSON file path.
ConstrainedProblem load_problem(std::string_view spec, const BuiltinOptions& options = {});

/// full (the problem's M), scaled-identity (λ_max(M)·I), per-sketch (rule on M).
void apply_smoothness_choice(ConstrainedProblem& problem, std::string_view choice);

struct SketchSpec {
    /// fixed, fixed-uniform, random-pairs, random-tuples, lipschitz-pairs, kernel-blocks, gaussian, uniform
    std::string kind = "random-pairs";
    Index p = 2;
    std::uint64_t seed = 0;
};

std::vector<std::string> sketch_kind_names();
SketchDistribution make_sketch(const SketchSpec& spec, const ConstrainedProblem& problem);

}  // namespace sketchdesc
