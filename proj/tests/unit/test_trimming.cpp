#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "fixtures.hpp"
#include "sbshell/errors.hpp"
#include "sbshell/sb_geometry.hpp"
#include "sbshell/trimming.hpp"

using namespace sbshell;
using fixtures::V2;

namespace {

constexpr double pi = std::numbers::pi;

Loop square_loop(double x0, double y0, double x1, double y1)
{
    return loop_from_block(fixtures::polygon_block({V2(x0, y0), V2(x1, y0), V2(x1, y1), V2(x0, y1)}, V2::Zero()));
}

std::vector<NurbsCurve> curves(const Loop& l)
{
    std::vector<NurbsCurve> c;
    for (const Segment& s : l) c.push_back(s.curve);
    return c;
}

double green_area(const std::vector<SBBlock>& blocks)
{
    double a = 0.0;
    for (const SBBlock& b : blocks) a += loop_area(loop_from_block(b));
    return a;
}

// every curve must see its centre with one sign over 720 rays
void expect_star_shaped(const std::vector<SBBlock>& blocks)
{
    for (const SBBlock& b : blocks)
        for (const NurbsCurve& c : b.curves) EXPECT_GT(star_shape_margin(c, b.center, 720), 0.0);
}

void expect_on_circle(const std::vector<SBBlock>& blocks, const std::string& tag, const V2& c, double r)
{
    int n = 0;
    for (const SBBlock& b : blocks)
        for (std::size_t k = 0; k < b.curves.size(); ++k) {
            if (b.tags[k] != tag) continue;
            ++n;
            for (int q = 0; q <= 50; ++q) EXPECT_NEAR((b.curves[k].point(q / 50.0) - c).norm(), r, 1e-12);
        }
    EXPECT_GT(n, 0);
}

}  // namespace

TEST(Intersect, InteriorCircleHasNone)
{
    EXPECT_TRUE(intersect(NurbsCurve::circle(V2(2, 2), 1.0), curves(square_loop(0, 0, 4, 4))).empty());
}

TEST(Intersect, CornerCircleCrossesTwoSides)
{
    const NurbsCurve c = NurbsCurve::circle(V2(0, 0), 3.0);
    const auto hits = intersect(c, curves(square_loop(0, 0, 4, 4)));
    ASSERT_EQ(hits.size(), 2u);
    for (const auto& h : hits) {
        // bottom side y = 0 meets x^2 = 9 at x = 3; left side (0,4) -> (0,0) at y = 3
        if (h.curve == 0) {
            EXPECT_NEAR(h.zeta, 0.75, 1e-12);
            EXPECT_LT((h.point - V2(3, 0)).norm(), 1e-12);
        } else {
            EXPECT_EQ(h.curve, 3);
            EXPECT_NEAR(h.zeta, 0.25, 1e-12);
            EXPECT_LT((h.point - V2(0, 3)).norm(), 1e-12);
        }
        EXPECT_LT((c.point(h.s) - h.point).norm(), 1e-10);
    }
}

TEST(Intersect, TangentialNearMissHasNone)
{
    EXPECT_TRUE(intersect(NurbsCurve::circle(V2(2, 2), 2.0 - 1e-3), curves(square_loop(0, 0, 4, 4))).empty());
}

TEST(Extract, SubcurveMatchesParent)
{
    const NurbsCurve c = NurbsCurve::circle(V2(0.3, -0.2), 1.7);
    const double a = 0.13, b = 0.71;
    const NurbsCurve s = c.subcurve(a, b);
    for (int q = 0; q <= 50; ++q) {
        const double u = q / 50.0;
        EXPECT_LT((s.point(u) - c.point(a + (b - a) * u)).norm(), 1e-12);
    }
}

TEST(Extract, UnsplitBlockKeepsControlData)
{
    const Loop l = square_loop(0, 0, 2, 1);
    const auto blocks = extract_blocks(partition(Region{{l}}));
    ASSERT_EQ(blocks.size(), 1u);
    ASSERT_EQ(blocks[0].curves.size(), 4u);
    for (std::size_t k = 0; k < 4; ++k) {
        const auto& P = blocks[0].curves[k].control_points();
        const auto& Q = l[k].curve.control_points();
        ASSERT_EQ(P.size(), Q.size());
        for (std::size_t i = 0; i < P.size(); ++i) EXPECT_EQ(P[i], Q[i]);
        EXPECT_EQ(blocks[0].curves[k].basis().knots().knots(), l[k].curve.basis().knots().knots());
    }
}

TEST(Extract, CubicLineHasNoCurvature)
{
    const NurbsCurve c = NurbsCurve::line(V2(0.5, 1), V2(-2, 3), 3);
    for (int q = 0; q <= 20; ++q) {
        const auto g = c.derivatives(q / 20.0, 2);
        EXPECT_NEAR(g[1].x() * g[2].y() - g[1].y() * g[2].x(), 0.0, 1e-12);
    }
}

TEST(Partition, ConvexDomainIsOneBlockAtItsCentroid)
{
    const PartitionPlan plan = partition(Region{{square_loop(0, 0, 4, 2)}});
    ASSERT_EQ(plan.blocks.size(), 1u);
    EXPECT_LT((plan.blocks[0].center - V2(2, 1)).norm(), 1e-9);
}

TEST(Partition, SplitByMissingLineKeepsRegion)
{
    const auto r = split_region(Region{{square_loop(0, 0, 1, 1)}}, {V2(0, 3), V2(1, 0)});
    ASSERT_TRUE(r.has_value());
    EXPECT_EQ(r->size(), 1u);
}

TEST(Partition, CentredHoleGivesQuadrants)
{
    const Region r = trim_region(square_loop(-4, -4, 4, 4), {{NurbsCurve::circle(V2(0, 0), 1.0), "hole"}});
    ASSERT_EQ(r.loops.size(), 2u);
    EXPECT_NEAR(region_area(r), 64.0 - pi, 1e-12);
    const auto blocks = extract_blocks(partition(r));
    EXPECT_EQ(blocks.size(), 4u);
    EXPECT_NEAR(green_area(blocks) / (64.0 - pi), 1.0, 1e-8);
    expect_star_shaped(blocks);
    expect_on_circle(blocks, "hole", V2(0, 0), 1.0);
    const SBDomain dom(blocks, {3, 1, 2});
    EXPECT_EQ(dom.num_patches(), 20);
    EXPECT_NEAR(dom.area() / (64.0 - pi), 1.0, 1e-6);
}

TEST(Partition, FourHolesWithCutTemplateRoundTrips)
{
    std::vector<TrimmingCurve> holes;
    for (double x : {-2.0, 2.0})
        for (double y : {-2.0, 2.0}) holes.push_back({NurbsCurve::circle(V2(x, y), 0.5), "hole"});
    const Region r = trim_region(square_loop(-4, -4, 4, 4), holes);
    PartitionOptions opt;
    for (double c : {-2.0, 2.0}) {
        opt.cuts.push_back({V2(c, 0), V2(0, 1)});
        opt.cuts.push_back({V2(0, c), V2(1, 0)});
    }
    const auto blocks = extract_blocks(partition(r, opt));
    EXPECT_EQ(blocks.size(), 9u);
    const double area = 64.0 - pi;
    EXPECT_NEAR(green_area(blocks) / area, 1.0, 1e-8);
    expect_star_shaped(blocks);
    const SBDomain dom(blocks, {3, 1, 2});
    EXPECT_NEAR(dom.area() / area, 1.0, 1e-6);
}

TEST(Partition, FourHolesAutomaticRoundTrips)
{
    std::vector<TrimmingCurve> holes;
    for (double x : {-2.0, 2.0})
        for (double y : {-2.0, 2.0}) holes.push_back({NurbsCurve::circle(V2(x, y), 0.5), "hole"});
    const Region r = trim_region(square_loop(-4, -4, 4, 4), holes);
    const auto blocks = extract_blocks(partition(r));
    EXPECT_NEAR(green_area(blocks) / (64.0 - pi), 1.0, 1e-8);
    expect_star_shaped(blocks);
    EXPECT_NO_THROW(SBDomain(blocks, {3, 1, 2}));
}

TEST(Partition, BoundaryCrossingTrimCurve)
{
    const Region r = trim_region(square_loop(0, 0, 4, 4), {{NurbsCurve::circle(V2(0, 0), 3.0), "arc"}});
    ASSERT_EQ(r.loops.size(), 1u);
    const double area = 16.0 - 9.0 * pi / 4.0;
    EXPECT_NEAR(region_area(r), area, 1e-12);
    const auto blocks = extract_blocks(partition(r));
    EXPECT_NEAR(green_area(blocks) / area, 1.0, 1e-8);
    expect_star_shaped(blocks);
    expect_on_circle(blocks, "arc", V2(0, 0), 3.0);
    EXPECT_NO_THROW(SBDomain(blocks, {3, 1, 2}));
}

TEST(Partition, KeepInsideLeavesTheDisk)
{
    TrimmingCurve t{NurbsCurve::circle(V2(1, 1), 0.5), "rim", false};
    const Region r = trim_region(square_loop(0, 0, 2, 2), {t});
    ASSERT_EQ(r.loops.size(), 1u);
    EXPECT_NEAR(region_area(r), pi / 4.0, 1e-12);
    const PartitionPlan plan = partition(r);
    ASSERT_EQ(plan.blocks.size(), 1u);
    EXPECT_LT((plan.blocks[0].center - V2(1, 1)).norm(), 1e-6);
}

TEST(Partition, DepthCapRaises)
{
    const Region r = trim_region(square_loop(-4, -4, 4, 4), {{NurbsCurve::circle(V2(0, 0), 1.0), "hole"}});
    PartitionOptions opt;
    opt.max_depth = 1;
    EXPECT_THROW(partition(r, opt), GeometryError);
}
