#pragma once
/// @file quadrature.hpp
/// @brief Gauss-Legendre rules.

#include <vector>

namespace sbshell {

struct QuadRule {
    std::vector<double> points;
    std::vector<double> weights;
};

/// n-point Gauss-Legendre rule on [-1, 1].
const QuadRule& gauss_legendre(int n);

/// n-point rule mapped to [a, b].
QuadRule gauss_legendre(int n, double a, double b);

}  // namespace sbshell
