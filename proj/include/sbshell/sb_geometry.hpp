#pragma once
/// @file sb_geometry.hpp
/// @brief Scaled-boundary patches, multi-patch planar domains and physical
/// basis evaluation.

#include <array>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "sbshell/spline.hpp"

namespace sbshell {

/// F(zeta, xi) and its first/second derivatives at one parameter point.
struct GeometryJet {
    Eigen::Vector2d x;
    Eigen::Matrix2d jac;  ///< columns dF/dzeta, dF/dxi
    Eigen::Vector2d d_zz, d_zx, d_xx;
    double det = 0.0;  ///< det(jac) = xi * d(zeta)
};

/// A single scaled-boundary patch: boundary curve gamma(zeta), scaling
/// centre z0, radial B-spline space in xi.
class SBPatch {
public:
    SBPatch() = default;
    SBPatch(NurbsCurve boundary, Eigen::Vector2d center, KnotVector radial, int center_id = 0);

    const NurbsCurve& boundary() const { return boundary_; }
    const Eigen::Vector2d& center() const { return center_; }
    const KnotVector& radial() const { return radial_; }
    int center_id() const { return center_id_; }
    int degree() const { return boundary_.degree(); }
    int n1() const { return boundary_.basis().size(); }
    int n2() const { return radial_.num_basis(); }
    int num_functions() const { return n1() * n2(); }
    int local_index(int i, int j) const { return i + j * n1(); }

    /// C_ij = z0 + l_j (C_i - z0), l_j the Greville abscissae of the radial
    /// space.
    Eigen::Vector2d control_point(int i, int j) const;
    /// Map, Jacobian and second derivatives from gamma directly.
    GeometryJet eval(double zeta, double xi) const;
    /// Same quantities summed from the tensor-product control net.
    GeometryJet eval_from_net(double zeta, double xi) const;
    /// d(zeta) = gamma1' * (gamma2 - z02) - gamma2' * (gamma1 - z01).
    double d(double zeta) const;

    /// Boundary tag used for boundary conditions (source curve label).
    std::string tag;
    int source_curve = -1;

private:
    NurbsCurve boundary_;
    Eigen::Vector2d center_ = Eigen::Vector2d::Zero();
    KnotVector radial_;
    int center_id_ = 0;
};

/// Nonzero raw functions of one patch at a point, with derivatives in the
/// planar physical coordinates theta.
struct PointBasis {
    int patch = -1;
    double zeta = 0.0, xi = 0.0;
    Eigen::Vector2d x;
    double det = 0.0;            ///< |det dF/d(zeta,xi)|
    std::vector<int> index;      ///< global raw indices
    Eigen::VectorXd N;           ///< values
    Eigen::MatrixXd dN;          ///< 2 x nb, d/dtheta1, d/dtheta2
    Eigen::MatrixXd d2N;         ///< 3 x nb, 11, 12, 22
};

enum class EdgeKind { Zeta0 = 0, Zeta1 = 1, Xi1 = 2 };

/// Two patch edges that coincide. The edge parameter s runs along side a;
/// side b uses s or 1 - s when reversed.
struct Interface {
    int patch_a = -1, patch_b = -1;
    EdgeKind edge_a = EdgeKind::Zeta0, edge_b = EdgeKind::Zeta0;
    bool reversed = false;
    Eigen::Vector2d normal = Eigen::Vector2d::Zero();  ///< unit normal at the edge midpoint
    bool radial() const { return edge_a != EdgeKind::Xi1; }
};

/// Outer (xi = 1) edge on the domain boundary.
struct BoundaryEdge {
    int patch = -1;
    std::string tag;
};

/// Planar parameter point on an edge: (zeta, xi) for edge parameter s.
Eigen::Vector2d edge_point(EdgeKind e, double s);

/// Block = one scaling centre with a closed loop of boundary curves.
struct SBBlock {
    Eigen::Vector2d center = Eigen::Vector2d::Zero();
    std::vector<NurbsCurve> curves;
    std::vector<std::string> tags;  ///< per curve, may be empty
};

/// Discretization parameters: degree, regularity, elements per direction.
struct MeshSpec {
    int degree = 3;
    int regularity = 1;
    int elements = 4;  ///< = 1/h
};

/// All patches of a multi-patch scaled-boundary domain.
class SBDomain {
public:
    SBDomain() = default;
    /// Elevate every curve to the target degree, refine to `elements` equal
    /// spans in both directions, detect interfaces. Throws GeometryError on
    /// degenerate Jacobians or non-conforming interfaces.
    SBDomain(const std::vector<SBBlock>& blocks, const MeshSpec& mesh);

    const std::vector<SBPatch>& patches() const { return patches_; }
    const SBPatch& patch(int m) const { return patches_[static_cast<std::size_t>(m)]; }
    int num_patches() const { return static_cast<int>(patches_.size()); }
    const std::vector<Eigen::Vector2d>& centers() const { return centers_; }
    int offset(int m) const { return offsets_[static_cast<std::size_t>(m)]; }
    int num_raw() const { return offsets_.back(); }
    const std::vector<Interface>& interfaces() const { return interfaces_; }
    const std::vector<BoundaryEdge>& boundary_edges() const { return boundary_edges_; }
    const MeshSpec& mesh() const { return mesh_; }

    /// Raw functions with their derivatives at a parameter point of patch m.
    PointBasis eval_basis(int m, double zeta, double xi, int nderiv = 2) const;
    /// Locate a planar point: returns (patch, zeta, xi) with patch = -1 if the
    /// point is outside every patch.
    std::tuple<int, double, double> locate(const Eigen::Vector2d& x, double tol = 1e-9) const;
    /// Raw control point of global raw index r.
    Eigen::Vector2d raw_control_point(int r) const;
    /// (patch, i, j) of a global raw index.
    std::tuple<int, int, int> raw_ijk(int r) const;
    double area() const;
    /// Axis-aligned bounding box (min, max) of the control net.
    std::pair<Eigen::Vector2d, Eigen::Vector2d> bbox() const;

private:
    void detect_interfaces();

    std::vector<SBPatch> patches_;
    std::vector<Eigen::Vector2d> centers_;
    std::vector<int> offsets_{0};
    std::vector<Interface> interfaces_;
    std::vector<BoundaryEdge> boundary_edges_;
    MeshSpec mesh_;
};

/// Checks that gamma is visible from z0: d(zeta) has one strict sign.
/// Returns the minimum of |d| / max |d| over samples (0 when it changes sign).
double star_shape_margin(const NurbsCurve& gamma, const Eigen::Vector2d& z0, int samples = 400);

}  // namespace sbshell
