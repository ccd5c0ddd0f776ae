#include <gtest/gtest.h>

#include <random>

#include "fixtures.hpp"
#include "sbshell/errors.hpp"
#include "sbshell/sb_geometry.hpp"

using namespace sbshell;
using fixtures::V2;

TEST(SBPatch, MapReproducesBoundaryAndCollapses)
{
    const SBDomain dom({fixtures::disk_block()}, {3, 1, 3});
    for (const SBPatch& P : dom.patches()) {
        for (int k = 0; k < 200; ++k) {
            const double z = k / 199.0;
            EXPECT_LT((P.eval(z, 1.0).x - P.boundary().point(z)).norm(), 1e-12);
            EXPECT_LT((P.eval(z, 0.0).x - P.center()).norm(), 1e-14);
            EXPECT_LT((P.eval_from_net(z, 1.0).x - P.boundary().point(z)).norm(), 1e-12);
        }
    }
}

TEST(SBPatch, ControlNetMatchesClosedForm)
{
    const SBDomain dom({fixtures::disk_block()}, {4, 1, 2});
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    for (const SBPatch& P : dom.patches())
        for (int k = 0; k < 50; ++k) {
            const double z = U(rng), x = U(rng);
            const GeometryJet a = P.eval(z, x), b = P.eval_from_net(z, x);
            EXPECT_LT((a.x - b.x).norm(), 1e-13);
            EXPECT_LT((a.jac - b.jac).norm(), 1e-12);
            EXPECT_LT((a.d_zz - b.d_zz).norm(), 1e-10);
            EXPECT_LT((a.d_zx - b.d_zx).norm(), 1e-11);
            EXPECT_LT(b.d_xx.norm(), 1e-11);
            EXPECT_NEAR(a.det, x * P.d(z), 1e-13);
        }
}

TEST(SBDomain, SquareHasFourRadialInterfaces)
{
    const SBDomain dom({fixtures::square_block()}, {3, 1, 2});
    EXPECT_EQ(dom.num_patches(), 4);
    EXPECT_EQ(dom.interfaces().size(), 4u);
    for (const Interface& I : dom.interfaces()) EXPECT_TRUE(I.radial());
    EXPECT_EQ(dom.boundary_edges().size(), 4u);
    EXPECT_NEAR(dom.area(), 4.0, 1e-12);
}

TEST(SBDomain, TwoBlocksShareOneStraightInterface)
{
    const SBDomain dom(fixtures::two_blocks(), {3, 1, 2});
    int outer = 0;
    for (const Interface& I : dom.interfaces())
        if (!I.radial()) {
            ++outer;
            EXPECT_TRUE(I.reversed);
        }
    EXPECT_EQ(outer, 1);
    EXPECT_EQ(dom.interfaces().size(), 9u);
    EXPECT_NEAR(dom.area(), 2.0, 1e-12);
}

TEST(SBDomain, InterfaceSidesAgree)
{
    const SBDomain dom({fixtures::disk_block()}, {3, 1, 4});
    for (const Interface& I : dom.interfaces())
        for (int k = 0; k <= 20; ++k) {
            const double s = k / 20.0;
            const V2 ua = edge_point(I.edge_a, s), ub = edge_point(I.edge_b, I.reversed ? 1 - s : s);
            EXPECT_LT((dom.patch(I.patch_a).eval(ua.x(), ua.y()).x - dom.patch(I.patch_b).eval(ub.x(), ub.y()).x).norm(),
                      1e-12);
        }
}

TEST(SBDomain, RefinementDoesNotMoveGeometry)
{
    const SBDomain coarse({fixtures::disk_block()}, {3, 1, 2}), fine({fixtures::disk_block()}, {3, 1, 8});
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    for (int k = 0; k < 100; ++k) {
        const int m = k % 3;
        const double z = U(rng), x = U(rng);
        EXPECT_LT((coarse.patch(m).eval(z, x).x - fine.patch(m).eval(z, x).x).norm(), 1e-12);
    }
}

TEST(SBDomain, RejectsCentreThatDoesNotSeeTheBoundary)
{
    EXPECT_THROW(SBDomain({fixtures::square_block(2.0, V2(3.0, 1.0))}, {3, 1, 2}), GeometryError);
    // L-shape with the centre in a corner it cannot see from
    EXPECT_THROW(SBDomain({fixtures::polygon_block({V2(0, 0), V2(2, 0), V2(2, 1), V2(1, 1), V2(1, 2), V2(0, 2)},
                                                   V2(1.8, 0.2))},
                          {3, 1, 2}),
                 GeometryError);
}

TEST(SBDomain, RejectsOpenLoopAndCoarseRadialSpace)
{
    SBBlock b = fixtures::square_block();
    b.curves.pop_back();
    EXPECT_THROW(SBDomain({b}, {3, 1, 2}), GeometryError);
    EXPECT_THROW(SBDomain({fixtures::square_block()}, {3, 1, 1}), GeometryError);
}

TEST(SBDomain, PhysicalDerivativesMatchFiniteDifferences)
{
    const SBDomain dom({fixtures::disk_block()}, {3, 1, 2});
    const int m = 1;
    const double z = 0.37, x = 0.61, h = 1e-6;
    const PointBasis pb = dom.eval_basis(m, z, x, 2);
    const SBPatch& P = dom.patch(m);
    const Eigen::Matrix2d Jinv = P.eval(z, x).jac.inverse();
    // perturb in physical space through the inverse Jacobian
    for (int d = 0; d < 2; ++d) {
        const V2 dp = Jinv.col(d) * h;
        const PointBasis pp = dom.eval_basis(m, z + dp.x(), x + dp.y(), 2), pm = dom.eval_basis(m, z - dp.x(), x - dp.y(), 2);
        for (std::size_t k = 0; k < pb.index.size(); ++k) {
            ASSERT_EQ(pp.index[k], pb.index[k]);
            const double fd = (pp.N[static_cast<Eigen::Index>(k)] - pm.N[static_cast<Eigen::Index>(k)]) / (2 * h);
            EXPECT_NEAR(pb.dN(d, static_cast<Eigen::Index>(k)), fd, 2e-6);
            const double fd2 = (pp.dN(d, static_cast<Eigen::Index>(k)) - pm.dN(d, static_cast<Eigen::Index>(k))) / (2 * h);
            EXPECT_NEAR(pb.d2N(d == 0 ? 0 : 2, static_cast<Eigen::Index>(k)), fd2, 2e-4);
            const double fd12 = (pp.dN(1 - d, static_cast<Eigen::Index>(k)) - pm.dN(1 - d, static_cast<Eigen::Index>(k))) / (2 * h);
            EXPECT_NEAR(pb.d2N(1, static_cast<Eigen::Index>(k)), fd12, 2e-4);
        }
    }
}

TEST(SBDomain, LocateInvertsTheMap)
{
    const SBDomain dom(fixtures::two_blocks(), {3, 1, 2});
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    for (int k = 0; k < 60; ++k) {
        const int m = k % dom.num_patches();
        const V2 x = dom.patch(m).eval(U(rng), U(rng)).x;
        const auto [mm, z, xi] = dom.locate(x);
        ASSERT_GE(mm, 0);
        EXPECT_LT((dom.patch(mm).eval(z, xi).x - x).norm(), 1e-10);
    }
    EXPECT_EQ(std::get<0>(dom.locate(V2(5.0, 5.0))), -1);
}
