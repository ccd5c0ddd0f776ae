#pragma once
/// @file shell.hpp
/// @brief Linear Kirchhoff-Love shell on a coupled C1 scaled-boundary space.

#include <array>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "sbshell/coupling.hpp"
#include "sbshell/sb_geometry.hpp"

namespace sbshell {

using Vector3d = Eigen::Vector3d;
using Matrix32 = Eigen::Matrix<double, 3, 2>;
using Matrix33 = Eigen::Matrix3d;

/// Value, first and second derivatives of a map R(theta) into R^3.
/// dd columns are R_,11, R_,12, R_,22.
struct MapJet {
    Vector3d x = Vector3d::Zero();
    Matrix32 d = Matrix32::Zero();
    Matrix33 dd = Matrix33::Zero();
};
using SurfaceMap = std::function<MapJet(const Eigen::Vector2d&)>;

/// R(theta) = (theta1, theta2, 0).
MapJet flat_map(const Eigen::Vector2d& theta);

struct Material {
    double E = 1.0;
    double nu = 0.0;
    double t = 1.0;
    void validate() const;
};

/// Covariant basis, unit normal, metrics and second derivatives at a point.
struct SurfaceFrame {
    Vector3d x, a1, a2, a3;
    Vector3d a11, a12, a22;  ///< a_{alpha,beta}
    double J = 0.0;          ///< |a1 x a2|
    Eigen::Matrix2d cov, con;
    const Vector3d& ab(int a, int b) const { return a + b == 0 ? a11 : (a + b == 1 ? a12 : a22); }
};

/// Throws GeometryError when |a1 x a2| < 1e-14.
SurfaceFrame make_frame(const MapJet& R);

/// eps_ab = (a_b . v_,a + a_a . v_,b) / 2; dv columns v_,1 and v_,2.
Eigen::Matrix2d membrane_strain(const SurfaceFrame& f, const Matrix32& dv);
/// Linearized change of curvature (minus the first variation of b_ab);
/// ddv columns v_,11, v_,12, v_,22.
Eigen::Matrix2d bending_strain(const SurfaceFrame& f, const Matrix32& dv, const Matrix33& ddv);

/// D^{abcd} for the contravariant metric.
double constitutive(const Eigen::Matrix2d& con, double E, double nu, int a, int b, int c, int d);
/// Voigt form acting on (e11, e22, 2 e12).
Eigen::Matrix3d constitutive_voigt(const Eigen::Matrix2d& con, double E, double nu);

/// Per-component constraint of a boundary curve tag.
using ComponentConstraints = std::array<EdgeConstraint, 3>;

/// u_c(theta) = 0 at a single point; removes a rigid translation that the
/// edge constraints leave free.
struct PointPin {
    Eigen::Vector2d theta;
    int component = 0;
};

struct BoundarySpec {
    std::map<std::string, ComponentConstraints> by_tag;
    ComponentConstraints fallback{EdgeConstraint::Free, EdgeConstraint::Free, EdgeConstraint::Free};
    std::vector<PointPin> pins;

    static ComponentConstraints clamped();
    static ComponentConstraints hinged();
    static ComponentConstraints free();
    const ComponentConstraints& at(const std::string& tag) const;
};

struct PointLoad {
    Eigen::Vector2d theta;
    Vector3d force;
};

struct LoadSpec {
    /// Force per unit surface area as a function of theta and the reference
    /// position.
    std::function<Vector3d(const Eigen::Vector2d&, const Vector3d&)> body;
    std::vector<PointLoad> points;
};

/// Calls f(pb, w) at every Gauss point of every element, w being the
/// quadrature weight times |det dF|, so sums approximate planar integrals.
/// n = 0 selects p + 1 points per direction.
void for_each_quadrature_point(const SBDomain& dom, int n, const std::function<void(const PointBasis&, double)>& f);

/// Reference surface: L2 projection of an exact map onto the unconstrained
/// coupled space.
class ShellSurface {
public:
    ShellSurface(const SBDomain& dom, const SparseMatrix& T, const SurfaceMap& exact);

    const SBDomain& domain() const { return *dom_; }
    /// Raw control data, one row per raw function.
    const Eigen::MatrixXd& raw_coefficients() const { return Praw_; }
    /// Largest |R_approx - R| over the quadrature points.
    double deviation() const { return deviation_; }
    MapJet jet(const PointBasis& pb) const;
    SurfaceFrame frame(const PointBasis& pb) const { return make_frame(jet(pb)); }

private:
    const SBDomain* dom_;
    Eigen::MatrixXd Praw_;
    double deviation_ = 0.0;
};

enum class SolverKind { Direct, CG };

struct SolveInfo {
    double residual = 0.0;    ///< relative residual of the diagonally scaled system
    /// |r| / (| |K| |u| | + |F|): bounded by a small multiple of the unit
    /// roundoff for a stable solve even when K is badly conditioned
    double backward_error = 0.0;
    double rcond = 0.0;       ///< reciprocal condition estimate of the scaled matrix (direct only)
    int iterations = 0;       ///< CG only
    std::string solver;
};

/// Coupled, constrained system. Unknown blocks are ordered x, y, z with
/// T[c] mapping block c to raw coefficients.
struct ShellSystem {
    SparseMatrix K;
    Eigen::VectorXd F;
    std::array<SparseMatrix, 3> T;
    std::array<int, 3> offset{0, 0, 0};
    int size() const { return static_cast<int>(F.size()); }
};

/// Displacement field in raw coefficients (one column per component).
class ShellSolution {
public:
    ShellSolution() = default;
    ShellSolution(const SBDomain& dom, Eigen::MatrixXd raw) : dom_(&dom), raw_(std::move(raw)) {}

    const Eigen::MatrixXd& raw() const { return raw_; }
    Vector3d value(const PointBasis& pb) const;
    Matrix32 gradient(const PointBasis& pb) const;
    Matrix33 hessian(const PointBasis& pb) const;
    /// Displacement at a parameter point of a patch.
    Vector3d at(int patch, double zeta, double xi) const;
    /// Displacement at a planar point; throws if it lies outside the domain.
    Vector3d at(const Eigen::Vector2d& theta) const;

private:
    const SBDomain* dom_ = nullptr;
    Eigen::MatrixXd raw_;
};

/// Coupled bases for the three displacement components plus the
/// unconstrained one used for the geometry.
struct ComponentBases {
    CouplingBasis free;
    std::vector<CouplingBasis> distinct;  ///< storage for constrained patterns
    std::array<int, 3> which{-1, -1, -1};  ///< index into distinct, -1 for free

    const CouplingBasis& component(int c) const
    {
        const int w = which[static_cast<std::size_t>(c)];
        return w < 0 ? free : distinct[static_cast<std::size_t>(w)];
    }
};

/// T E with E eliminating the coefficient of the column that is largest at
/// theta, so every column of the result vanishes there.
SparseMatrix pin_point(const SBDomain& dom, const SparseMatrix& T, const Eigen::Vector2d& theta);

ComponentBases build_component_bases(const SBDomain& dom, const BoundarySpec& bc, const CouplingOptions& opt = {});

/// Raw stiffness, 3 N_raw square, component-blocked.
SparseMatrix assemble_raw_stiffness(const ShellSurface& s, const Material& mat);
/// Raw load vector for a body force and point loads.
Eigen::VectorXd assemble_raw_load(const ShellSurface& s, const LoadSpec& load);

ShellSystem reduce_system(const SparseMatrix& Kraw, const Eigen::VectorXd& Fraw, const std::array<const SparseMatrix*, 3>& T);

/// Solves K u = F after symmetric diagonal scaling; throws SolverError if K
/// is not positive definite.
Eigen::VectorXd solve_system(const ShellSystem& sys, SolverKind kind, SolveInfo* info = nullptr);
ShellSolution expand_solution(const SBDomain& dom, const ShellSystem& sys, const Eigen::VectorXd& u);

/// Reference displacement with derivatives.
using ReferenceField = std::function<MapJet(const Eigen::Vector2d&)>;

struct ErrorNorms {
    double l2 = 0.0;
    double h2 = 0.0;  ///< seminorm from the full Hessian, all components
};
/// Errors over the reference surface measure.
ErrorNorms error_norms(const ShellSurface& s, const ShellSolution& u, const ReferenceField& ref);

}  // namespace sbshell
