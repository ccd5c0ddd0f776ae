#pragma once
/// @file benchmarks.hpp
/// @brief Built-in benchmark cases and their literature reference values.

#include <string>
#include <vector>

#include "sbshell/problem.hpp"

namespace sbshell {

struct ReferenceValue {
    std::string quantity;
    double value = 0.0;
    std::string citation;
};

struct BenchmarkCase {
    std::string name;
    std::string description;
    Problem problem;
    std::vector<ReferenceValue> references;
};

std::vector<std::string> benchmark_names();
/// Throws InputError for unknown names.
BenchmarkCase make_benchmark(const std::string& name);
/// Entries of the compiled-in references table for a case.
std::vector<ReferenceValue> benchmark_references(const std::string& name);

/// Circular arc from a through m to b.
NurbsCurve arc_through(const Eigen::Vector2d& a, const Eigen::Vector2d& m, const Eigen::Vector2d& b);

}  // namespace sbshell
