#pragma once
/// @file spline.hpp
/// @brief Univariate B-spline and NURBS kernel: evaluation, knot insertion,
/// sub-curve extraction and planar NURBS curves.

#include <array>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace sbshell {

/// Non-decreasing knot vector with an attached degree.
class KnotVector {
public:
    KnotVector() = default;
    KnotVector(std::vector<double> knots, int degree);

    /// p-open knot vector on [0,1] with `elements` equal spans and interior
    /// multiplicity p - regularity.
    static KnotVector open_uniform(int degree, int elements, int regularity);

    int degree() const { return degree_; }
    const std::vector<double>& knots() const { return knots_; }
    double operator[](int i) const { return knots_[static_cast<std::size_t>(i)]; }
    int size() const { return static_cast<int>(knots_.size()); }
    int num_basis() const { return size() - degree_ - 1; }
    double front() const { return knots_[static_cast<std::size_t>(degree_)]; }
    double back() const { return knots_[static_cast<std::size_t>(num_basis())]; }

    /// Span index s with t_s <= x < t_{s+1}; x at the right end maps to the
    /// last non-degenerate span (left limit).
    int find_span(double x) const;
    int multiplicity(double x, double tol = 1e-12) const;
    std::vector<double> unique_knots() const;
    /// Non-empty knot spans as (a, b) pairs.
    std::vector<std::pair<double, double>> elements() const;
    int num_elements() const { return static_cast<int>(elements().size()); }
    /// p minus the largest interior multiplicity (p when there are none).
    int regularity() const;
    bool is_open(double tol = 1e-14) const;
    Eigen::VectorXd greville() const;

private:
    std::vector<double> knots_;
    int degree_ = 0;
};

/// Values and derivatives of the p+1 functions that are nonzero at a point.
struct BasisValues {
    int first = 0;         ///< global index of the first nonzero function
    Eigen::MatrixXd ders;  ///< (nderiv+1) x (p+1), row k = k-th derivative
};

/// B-spline basis via Cox-de Boor (0/0 := 0), derivatives from the
/// degree-lowering derivative recursion.
BasisValues eval_bspline(const KnotVector& kv, double x, int nderiv);

/// B-spline or NURBS space; empty weights means polynomial B-splines.
class SplineBasis {
public:
    SplineBasis() = default;
    explicit SplineBasis(KnotVector kv, std::vector<double> weights = {});

    const KnotVector& knots() const { return kv_; }
    const std::vector<double>& weights() const { return weights_; }
    bool rational() const { return !weights_.empty(); }
    int degree() const { return kv_.degree(); }
    int size() const { return kv_.num_basis(); }
    double weight(int i) const { return weights_.empty() ? 1.0 : weights_[static_cast<std::size_t>(i)]; }

    /// Rational quotient rule applied when weights are present.
    BasisValues eval(double x, int nderiv) const;

private:
    KnotVector kv_;
    std::vector<double> weights_;
};

/// Result of knot insertion. Coarse function i equals
/// sum_k transfer(k, i) * fine function k, so fine coefficients are
/// transfer * coarse coefficients.
struct Refinement {
    SplineBasis fine;
    Eigen::SparseMatrix<double> transfer;
};

/// Insert knots (Boehm). Throws if any resulting interior multiplicity would
/// exceed p - regularity_bound. A negative bound skips the check.
Refinement insert_knots(const SplineBasis& basis, const std::vector<double>& new_knots,
                        int regularity_bound);

/// Knots to add to [0,1] for `elements` equal spans with interior multiplicity
/// p - regularity, minus those already present.
std::vector<double> uniform_refinement_knots(const KnotVector& kv, int elements, int regularity);

/// Planar NURBS curve.
class NurbsCurve {
public:
    NurbsCurve() = default;
    NurbsCurve(SplineBasis basis, std::vector<Eigen::Vector2d> control_points);

    /// Straight segment a -> b as a degree-p Bezier curve.
    static NurbsCurve line(const Eigen::Vector2d& a, const Eigen::Vector2d& b, int degree = 1);
    /// Circular arc from angle a0 to a1 as a rational quadratic. Sweeps up to
    /// 120 degrees give one Bezier piece, longer ones quarter pieces.
    static NurbsCurve arc(const Eigen::Vector2d& center, double radius, double a0, double a1);
    /// Full circle as a 4-piece quadratic NURBS, ccw when ccw is true.
    static NurbsCurve circle(const Eigen::Vector2d& center, double radius, bool ccw = true);
    /// Axis-aligned ellipse as a 4-piece quadratic NURBS.
    static NurbsCurve ellipse(const Eigen::Vector2d& center, double rx, double ry, bool ccw = true);

    const SplineBasis& basis() const { return basis_; }
    const std::vector<Eigen::Vector2d>& control_points() const { return cps_; }
    int degree() const { return basis_.degree(); }
    double t0() const { return basis_.knots().front(); }
    double t1() const { return basis_.knots().back(); }

    Eigen::Vector2d point(double t) const;
    /// Point and first nd derivatives.
    std::array<Eigen::Vector2d, 3> derivatives(double t, int nd = 2) const;

    NurbsCurve reversed() const;
    /// Curve restricted to [a, b] and reparametrized to [0, 1].
    NurbsCurve subcurve(double a, double b) const;
    /// Degree elevation by repeated elevation of each Bezier piece; only
    /// defined for single-piece curves.
    NurbsCurve elevated(int target_degree) const;
    NurbsCurve refined(const std::vector<double>& knots, int regularity_bound = -1) const;
    /// Interior knot values (distinct, excluding ends).
    std::vector<double> breakpoints() const;
    double length(int samples_per_span = 32) const;
    NurbsCurve translated(const Eigen::Vector2d& d) const;

private:
    SplineBasis basis_;
    std::vector<Eigen::Vector2d> cps_;
};

}  // namespace sbshell
