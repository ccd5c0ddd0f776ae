#pragma once
/// @file coupling.hpp
/// @brief C1 coupling of scaled-boundary multi-patch spaces.
///
/// Pipeline: drop raw functions of the two innermost rows, add three
/// scaling-centre functions per centre, merge C0 duplicates across
/// interfaces, then keep the null space of the normal-derivative jump
/// operator. The result is a sparse matrix T whose columns are the C1
/// functions written in the raw patch bases.

#include <array>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "sbshell/sb_geometry.hpp"

namespace sbshell {

using SparseMatrix = Eigen::SparseMatrix<double>;
using SparseRowMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

enum class NullSpaceMethod {
    Decomposed,  ///< interface blocks plus a vertex system; sparse result
    Global,      ///< one SVD over all active functions; dense on the active set
};

struct CouplingOptions {
    /// singular values of the jump Gram matrix at or below tol * max are zero
    double null_tolerance = 1e-10;
    /// warn when the spectral gap around the threshold is below this ratio
    double gap_warning = 10.0;
    /// quadrature points per interface element; 0 means 2p
    int quad_points = 0;
    NullSpaceMethod method = NullSpaceMethod::Decomposed;
};

struct CouplingDiagnostics {
    int num_raw = 0;
    int num_b3 = 0;      ///< after removal, centre functions and C0 merge
    int num_active = 0;  ///< B''' functions with a nonzero jump somewhere
    int num_coupled = 0;
    double min_gap = 1e300;  ///< smallest spectral gap ratio seen
    std::vector<std::string> warnings;
};

struct CouplingBasis {
    SparseMatrix T;   ///< N x N1
    SparseMatrix T0;  ///< N x N''' (B''' functions)
    CouplingDiagnostics diag;
};

/// Restriction on a boundary edge for one displacement component.
enum class EdgeConstraint {
    Free,
    Trace,           ///< value fixed (hinged / diaphragm)
    TraceAndNormal,  ///< value and normal derivative fixed (clamped)
};

/// Raw functions to remove for a per-boundary-edge constraint list (indexed
/// like SBDomain::boundary_edges()).
std::vector<char> dirichlet_removal(const SBDomain& dom, const std::vector<EdgeConstraint>& edges);

/// B''' functions in raw coordinates. `removed` flags raw functions to drop
/// (Dirichlet); the two innermost rows are always dropped.
SparseMatrix build_b3_basis(const SBDomain& dom, const std::vector<char>& removed);

/// Weighted normal-derivative jump rows of the columns of T0 across one
/// interface: M = G^T G approximates the jump Gram matrix. `cols` returns
/// the T0 column of each G column.
Eigen::MatrixXd jump_rows(const SBDomain& dom, const Interface& I, const SparseRowMatrix& T0rows,
                          std::vector<int>& cols, int quad_points = 0);

struct NullSpace {
    Eigen::MatrixXd basis;           ///< orthonormal columns
    Eigen::VectorXd singular_values; ///< of the Gram matrix, descending
    int rank = 0;
    double gap = 1e300;              ///< ratio across the threshold
};

/// Null space of a symmetric positive semi-definite matrix M.
NullSpace null_space(const Eigen::MatrixXd& M, double tol = 1e-10);
/// Null space of G^T G computed from G (better conditioned).
NullSpace null_space_rows(const Eigen::MatrixXd& G, double tol = 1e-10);

/// Full pipeline.
CouplingBasis build_c1_basis(const SBDomain& dom, const std::vector<char>& removed,
                             const CouplingOptions& opt = {});

/// Largest normal-derivative jump of any column of T across any interface,
/// relative to the largest gradient of that column on any interface, sampled at n points
/// per interface element.
double max_normal_jump(const SBDomain& dom, const SparseMatrix& T, int samples_per_element = 5);
/// Largest value jump (C0 check) of any column of T.
double max_value_jump(const SBDomain& dom, const SparseMatrix& T, int samples_per_element = 5);

/// Edge jets for the analysis-suitable G1 test: across- and along-edge
/// derivatives of one side at edge parameter s.
using EdgeJet = std::function<std::array<Eigen::Vector2d, 2>(double)>;

/// Least-squares residual of
///   alpha_R(s) d_L - alpha_L(s) d_R + beta(s) t_L = 0
/// with linear alphas and quadratic beta, scaled to [0,1]; small values mean
/// the parametrization is analysis-suitable G1 at this interface.
double asg1_residual(const EdgeJet& left, const EdgeJet& right, int samples = 41);
/// Same test for an interface of a scaled-boundary domain.
double asg1_residual(const SBDomain& dom, const Interface& I, int samples = 41);

}  // namespace sbshell
