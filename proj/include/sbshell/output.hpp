#pragma once
/// @file output.hpp
/// @brief Result sampling and file output: legacy VTK, CSV tables and
/// coupling matrix dumps.

#include <string>
#include <vector>

#include "sbshell/problem.hpp"

namespace sbshell {

/// Solution sampled on an n x n lattice per element (n + 1 points per
/// direction), quads as cells.
struct Lattice {
    std::vector<Vector3d> position;      ///< reference surface point
    std::vector<Eigen::Vector2d> theta;  ///< planar parameter point
    std::vector<Vector3d> displacement;
    std::vector<std::array<int, 4>> cells;
};

Lattice sample_lattice(const Analysis& a, int n = 4);

/// Legacy ASCII unstructured grid with point data "displacement" (vector),
/// "u_z" and "magnitude".
void write_vtk(const std::string& path, const Lattice& lat);
/// Point count declared in a legacy VTK file.
int read_vtk_point_count(const std::string& path);

struct TableRow {
    double h = 0.0;
    int dof = 0;
    int degree = 0;
    std::vector<double> values;
};

/// CSV with header h,dof,p followed by the value columns.
void write_csv(const std::string& path, const std::vector<std::string>& columns, const std::vector<TableRow>& rows);
std::string format_csv(const std::vector<std::string>& columns, const std::vector<TableRow>& rows);

/// Triplet text: a comment line, then "rows cols nnz", then one "i j value"
/// line per entry with zero-based indices.
void dump_triplets(const std::string& path, const SparseMatrix& M, const std::string& comment);

/// Least-squares slope of log(value) against log(h).
double loglog_slope(const std::vector<double>& h, const std::vector<double>& value);

}  // namespace sbshell
