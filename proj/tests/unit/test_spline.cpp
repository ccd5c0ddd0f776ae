#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "sbshell/errors.hpp"
#include "sbshell/quadrature.hpp"
#include "sbshell/spline.hpp"

using namespace sbshell;

namespace {

// Textbook recursion, evaluated function by function; independent of the
// triangular table used in the library.
double cox_de_boor(const std::vector<double>& t, int i, int p, double x)
{
    if (p == 0) {
        const double a = t[static_cast<std::size_t>(i)], b = t[static_cast<std::size_t>(i + 1)];
        if (a < b && ((a <= x && x < b) || (x == t.back() && b == t.back()))) return 1.0;
        return 0.0;
    }
    double v = 0.0;
    const double d1 = t[static_cast<std::size_t>(i + p)] - t[static_cast<std::size_t>(i)];
    const double d2 = t[static_cast<std::size_t>(i + p + 1)] - t[static_cast<std::size_t>(i + 1)];
    if (d1 > 0) v += (x - t[static_cast<std::size_t>(i)]) / d1 * cox_de_boor(t, i, p - 1, x);
    if (d2 > 0) v += (t[static_cast<std::size_t>(i + p + 1)] - x) / d2 * cox_de_boor(t, i + 1, p - 1, x);
    return v;
}

double full_value(const KnotVector& kv, int i, double x)
{
    const BasisValues b = eval_bspline(kv, x, 0);
    const int j = i - b.first;
    return (j >= 0 && j <= kv.degree()) ? b.ders(0, j) : 0.0;
}

}  // namespace

TEST(Quadrature, IntegratesPolynomialsExactly)
{
    for (int n = 1; n <= 10; ++n) {
        const QuadRule& q = gauss_legendre(n);
        for (int k = 0; k <= 2 * n - 1; ++k) {
            double s = 0.0;
            for (std::size_t i = 0; i < q.points.size(); ++i) s += q.weights[i] * std::pow(q.points[i], k);
            const double exact = (k % 2 == 1) ? 0.0 : 2.0 / (k + 1);
            EXPECT_NEAR(s, exact, 1e-14) << "n=" << n << " k=" << k;
        }
    }
}

TEST(KnotVector, OpenUniformSizes)
{
    for (int p = 2; p <= 5; ++p)
        for (int k = 1; k <= 6; ++k) {
            const KnotVector kv = KnotVector::open_uniform(p, k, 1);
            EXPECT_EQ(kv.num_basis(), p + 1 + (k - 1) * (p - 1));
            EXPECT_EQ(kv.num_elements(), k);
            if (k > 1) EXPECT_EQ(kv.regularity(), 1);
        }
}

TEST(KnotVector, SpanAtRightEndUsesLeftLimit)
{
    const KnotVector kv({0, 0, 0, 0.5, 0.5, 1, 1, 1}, 2);
    EXPECT_EQ(kv.find_span(1.0), 4);
    EXPECT_EQ(kv.find_span(0.5), 4);
    EXPECT_EQ(kv.find_span(0.4999), 2);
}

TEST(Bspline, MatchesRecursionOracle)
{
    const std::vector<double> t = {0, 0, 0, 0, 0.2, 0.2, 0.5, 0.7, 0.7, 0.7, 1, 1, 1, 1};
    const KnotVector kv(t, 3);
    for (int s = 0; s <= 200; ++s) {
        const double x = s / 200.0;
        for (int i = 0; i < kv.num_basis(); ++i) EXPECT_NEAR(full_value(kv, i, x), cox_de_boor(t, i, 3, x), 1e-14);
    }
}

TEST(Bspline, PartitionOfUnityAndNonNegativity)
{
    for (int p = 1; p <= 6; ++p) {
        const KnotVector kv = KnotVector::open_uniform(p, 5, std::max(0, p - 2));
        for (int s = 0; s <= 97; ++s) {
            const double x = s / 97.0;
            const BasisValues b = eval_bspline(kv, x, 2);
            EXPECT_NEAR(b.ders.row(0).sum(), 1.0, 1e-14);
            EXPECT_NEAR(b.ders.row(1).sum(), 0.0, 1e-10);
            EXPECT_NEAR(b.ders.row(2).sum(), 0.0, 1e-8);
            EXPECT_GE(b.ders.row(0).minCoeff(), -1e-15);
        }
    }
}

TEST(Bspline, DerivativesMatchFiniteDifferences)
{
    const KnotVector kv = KnotVector::open_uniform(4, 3, 1);
    const double h = 1e-6;
    for (double x : {0.05, 0.21, 0.4, 0.61, 0.93}) {
        const BasisValues b = eval_bspline(kv, x, 2);
        for (int j = 0; j <= 4; ++j) {
            const int i = b.first + j;
            const double fd1 = (full_value(kv, i, x + h) - full_value(kv, i, x - h)) / (2 * h);
            const double fd2 = (full_value(kv, i, x + h) - 2 * full_value(kv, i, x) + full_value(kv, i, x - h)) / (h * h);
            EXPECT_NEAR(b.ders(1, j), fd1, 1e-6);
            EXPECT_NEAR(b.ders(2, j), fd2, 2e-3);
        }
    }
}

TEST(Nurbs, RationalDerivativesMatchFiniteDifferences)
{
    const SplineBasis sb(KnotVector({0, 0, 0, 0.5, 1, 1, 1}, 2), {1.0, 0.6, 1.7, 0.9});
    const double h = 1e-5;
    for (double x : {0.1, 0.3, 0.55, 0.8}) {
        const BasisValues b = sb.eval(x, 2), bp = sb.eval(x + h, 0), bm = sb.eval(x - h, 0);
        ASSERT_EQ(b.first, bp.first);
        ASSERT_EQ(b.first, bm.first);
        EXPECT_NEAR(b.ders.row(0).sum(), 1.0, 1e-14);
        for (int j = 0; j <= 2; ++j) {
            EXPECT_NEAR(b.ders(1, j), (bp.ders(0, j) - bm.ders(0, j)) / (2 * h), 1e-7);
            EXPECT_NEAR(b.ders(2, j), (bp.ders(0, j) - 2 * b.ders(0, j) + bm.ders(0, j)) / (h * h), 1e-3);
        }
    }
}

TEST(Nurbs, QuarterCircleIsExact)
{
    const NurbsCurve c = NurbsCurve::arc(Eigen::Vector2d(0, 0), 1.0, 0.0, 0.5 * std::numbers::pi);
    EXPECT_EQ(c.degree(), 2);
    for (int s = 0; s <= 100; ++s) EXPECT_NEAR(c.point(s / 100.0).norm(), 1.0, 1e-14);
    EXPECT_NEAR(c.length(), 0.5 * std::numbers::pi, 1e-12);
    const NurbsCurve full = NurbsCurve::circle(Eigen::Vector2d(1, 2), 3.0);
    for (int s = 0; s <= 100; ++s) EXPECT_NEAR((full.point(s / 100.0) - Eigen::Vector2d(1, 2)).norm(), 3.0, 1e-13);
}

TEST(KnotInsertion, PreservesCurveAndFunctions)
{
    const NurbsCurve c = NurbsCurve::arc(Eigen::Vector2d(0, 0), 2.0, 0.1, 1.4).elevated(4);
    const NurbsCurve r = c.refined({0.25, 0.25, 0.5, 0.5, 0.75, 0.75}, 1);
    for (int s = 0; s <= 50; ++s) EXPECT_NEAR((r.point(s / 50.0) - c.point(s / 50.0)).norm(), 0.0, 1e-13);

    const Refinement ref = insert_knots(c.basis(), {0.3, 0.6, 0.6}, 1);
    for (double x : {0.0, 0.2, 0.45, 0.77, 1.0}) {
        const BasisValues bc = c.basis().eval(x, 0), bf = ref.fine.eval(x, 0);
        for (int i = 0; i < c.basis().size(); ++i) {
            double coarse = 0.0;
            if (i >= bc.first && i <= bc.first + 4) coarse = bc.ders(0, i - bc.first);
            double fine = 0.0;
            for (Eigen::SparseMatrix<double>::InnerIterator it(ref.transfer, i); it; ++it) {
                const int k = static_cast<int>(it.row());
                if (k >= bf.first && k <= bf.first + 4) fine += it.value() * bf.ders(0, k - bf.first);
            }
            EXPECT_NEAR(coarse, fine, 1e-13);
        }
    }
}

TEST(KnotInsertion, RejectsRegularityViolation)
{
    const SplineBasis b(KnotVector::open_uniform(3, 2, 1));
    EXPECT_NO_THROW(insert_knots(b, {0.25, 0.25}, 1));
    EXPECT_THROW(insert_knots(b, {0.5}, 1), SplineError);
    EXPECT_THROW(insert_knots(b, {0.25, 0.25, 0.25}, 1), SplineError);
}

TEST(NurbsCurve, SubcurveAndReverse)
{
    const NurbsCurve c = NurbsCurve::circle(Eigen::Vector2d(0, 0), 1.0);
    const NurbsCurve s = c.subcurve(0.1, 0.6);
    for (int k = 0; k <= 20; ++k) {
        const double u = k / 20.0;
        EXPECT_NEAR((s.point(u) - c.point(0.1 + 0.5 * u)).norm(), 0.0, 1e-13);
    }
    const NurbsCurve r = s.reversed();
    EXPECT_NEAR((r.point(0.3) - s.point(0.7)).norm(), 0.0, 1e-14);
}

TEST(NurbsCurve, DegreeElevationKeepsShape)
{
    const NurbsCurve c = NurbsCurve::arc(Eigen::Vector2d(1, 1), 0.5, 0.0, 1.2);
    for (int p = 3; p <= 6; ++p) {
        const NurbsCurve e = c.elevated(p);
        EXPECT_EQ(e.degree(), p);
        for (int k = 0; k <= 20; ++k) EXPECT_NEAR((e.point(k / 20.0) - c.point(k / 20.0)).norm(), 0.0, 1e-14);
    }
    const NurbsCurve two = NurbsCurve::circle(Eigen::Vector2d(0, 0), 1.0);
    EXPECT_THROW(two.elevated(3), SplineError);
}
