#include <gtest/gtest.h>

#include <map>

#include <Eigen/SparseQR>

#include "fixtures.hpp"
#include "sbshell/coupling.hpp"
#include "sbshell/errors.hpp"
#include "sbshell/quadrature.hpp"

using namespace sbshell;
using fixtures::V2;

namespace {

// Residual of the least-squares fit of raw coefficients v by span(T).
double span_residual(const SparseMatrix& T, const Eigen::VectorXd& v)
{
    Eigen::SparseQR<SparseMatrix, Eigen::COLAMDOrdering<int>> qr(T);
    const Eigen::VectorXd c = qr.solve(v);
    return (T * c - v).norm() / v.norm();
}

Eigen::VectorXd raw_coefficients(const SBDomain& dom, int what)
{
    Eigen::VectorXd v(dom.num_raw());
    for (int r = 0; r < dom.num_raw(); ++r) {
        const V2 c = dom.raw_control_point(r);
        v[r] = what == 0 ? 1.0 : (what == 1 ? c.x() : c.y());
    }
    return v;
}

int rank_of(const SparseMatrix& T)
{
    Eigen::SparseQR<SparseMatrix, Eigen::COLAMDOrdering<int>> qr(T);
    return static_cast<int>(qr.rank());
}

}  // namespace

TEST(Coupling, RemovesTwoInnerRowsAndMergesInterfaces)
{
    // two patches of one block: a triangle split through the centre is not a
    // loop, so use a square (four patches) and count directly
    const SBDomain dom({fixtures::square_block()}, {3, 1, 2});  // n1 = n2 = 6
    const SparseMatrix T0 = build_b3_basis(dom, {});
    const int per_patch = 6 * (6 - 2);
    // 4 radial interfaces, each merging rows j = 2..5
    EXPECT_EQ(T0.cols(), 3 + 4 * per_patch - 4 * 4);
}

TEST(Coupling, ScalingCentreFunctionsAreLinearNearCentre)
{
    const SBDomain dom({fixtures::disk_block()}, {3, 1, 3});
    const SparseMatrix T0 = build_b3_basis(dom, {});
    const SparseRowMatrix Tr = T0;
    for (int m = 0; m < dom.num_patches(); ++m) {
        const double x1 = dom.patch(m).radial().elements().front().second;
        for (int k = 0; k < 10; ++k) {
            const double z = (k + 0.5) / 10.0, xi = x1 * (k + 1) / 11.0;
            const PointBasis pb = dom.eval_basis(m, z, xi, 1);
            Eigen::Vector3d val = Eigen::Vector3d::Zero();
            Eigen::Matrix<double, 2, 3> grad = Eigen::Matrix<double, 2, 3>::Zero();
            for (std::size_t b = 0; b < pb.index.size(); ++b)
                for (SparseRowMatrix::InnerIterator it(Tr, pb.index[b]); it; ++it)
                    if (it.col() < 3) {
                        val[it.col()] += it.value() * pb.N[static_cast<Eigen::Index>(b)];
                        grad.col(it.col()) += it.value() * pb.dN.col(static_cast<Eigen::Index>(b));
                    }
            EXPECT_NEAR(val[0], 1.0, 1e-12);
            EXPECT_NEAR(val[1], pb.x.x(), 1e-12);
            EXPECT_NEAR(val[2], pb.x.y(), 1e-12);
            EXPECT_LT(grad.col(0).norm(), 1e-10);
            EXPECT_LT((grad.col(1) - V2(1, 0)).norm(), 1e-10);
            EXPECT_LT((grad.col(2) - V2(0, 1)).norm(), 1e-10);
        }
    }
}

TEST(Coupling, RemainingFunctionsHaveVanishingGradientAtCentre)
{
    const SBDomain dom({fixtures::disk_block()}, {3, 1, 2});
    for (double xi : {1e-2, 1e-3, 1e-4}) {
        double gmax = 0.0;
        for (int m = 0; m < 3; ++m)
            for (int ray = 0; ray < 8; ++ray) {
                const PointBasis pb = dom.eval_basis(m, (ray + 0.5) / 8.0, xi, 1);
                for (std::size_t b = 0; b < pb.index.size(); ++b) {
                    const auto [mm, i, j] = dom.raw_ijk(pb.index[b]);
                    if (j >= 2) gmax = std::max(gmax, pb.dN.col(static_cast<Eigen::Index>(b)).norm());
                }
            }
        EXPECT_LT(gmax, 50.0 * xi);
    }
}

TEST(Coupling, B3FunctionsAreContinuous)
{
    const SBDomain dom(fixtures::two_blocks(), {3, 1, 3});
    const SparseMatrix T0 = build_b3_basis(dom, {});
    EXPECT_LT(max_value_jump(dom, T0, 20), 1e-12);
}

TEST(Coupling, JumpRowsMatchRefinedQuadrature)
{
    const SBDomain dom(fixtures::two_blocks(), {3, 1, 2});
    const SparseMatrix T0 = build_b3_basis(dom, {});
    const SparseRowMatrix Tr = T0;
    for (const Interface& I : dom.interfaces()) {
        std::vector<int> c1, c2;
        const Eigen::MatrixXd G1 = jump_rows(dom, I, Tr, c1, 0), G2 = jump_rows(dom, I, Tr, c2, 24);
        ASSERT_EQ(c1, c2);
        const Eigen::MatrixXd M1 = G1.transpose() * G1, M2 = G2.transpose() * G2;
        // the 1/det factor makes radial integrands rational, so agreement is
        // close but not exact; the null spaces must coincide
        EXPECT_LT((M1 - M2).cwiseAbs().maxCoeff(), 1e-5 * M2.cwiseAbs().maxCoeff());
        EXPECT_EQ(null_space_rows(G1, 1e-10).basis.cols(), null_space_rows(G2, 1e-10).basis.cols());
        EXPECT_LT((M1 - M1.transpose()).cwiseAbs().maxCoeff(), 1e-14 * std::max(1.0, M1.cwiseAbs().maxCoeff()));
    }
}

TEST(Coupling, NullSpaceOfPsdMatrix)
{
    Eigen::MatrixXd B = Eigen::MatrixXd::Random(4, 7);
    const NullSpace ns = null_space(B.transpose() * B, 1e-10);
    EXPECT_EQ(ns.rank, 4);
    EXPECT_EQ(ns.basis.cols(), 3);
    EXPECT_LT((B * ns.basis).norm(), 1e-12);
    const NullSpace nr = null_space_rows(B, 1e-10);
    EXPECT_EQ(nr.basis.cols(), 3);
    EXPECT_LT((B * nr.basis).norm(), 1e-12);
    EXPECT_GT(nr.gap, 1e10);
}

TEST(Coupling, SinglePatchRingIsUnchangedWithoutInterfaces)
{
    // one centre, one closed curve: the only interface is radial with itself
    // absent, so use two halves of a disk: the pipeline must leave the
    // interface-free functions untouched
    const SBDomain dom({fixtures::disk_block()}, {3, 1, 3});
    const CouplingBasis cb = build_c1_basis(dom, {});
    EXPECT_GT(cb.diag.num_coupled, 3);
    EXPECT_LT(cb.diag.num_coupled, dom.num_raw());
}

class CouplingFixture : public ::testing::TestWithParam<int> {};

TEST_P(CouplingFixture, ColumnsAreC1AndReproduceLinears)
{
    const int which = GetParam();
    std::vector<SBBlock> blocks;
    MeshSpec mesh{3, 1, 4};
    if (which == 0) blocks = {fixtures::square_block()};
    if (which == 1) blocks = {fixtures::disk_block()};
    if (which == 2) blocks = fixtures::two_blocks();
    if (which == 3) {
        blocks = fixtures::two_blocks();
        mesh = {4, 1, 3};
    }
    const SBDomain dom(blocks, mesh);
    const CouplingBasis cb = build_c1_basis(dom, {});
    EXPECT_TRUE(cb.diag.warnings.empty()) << cb.diag.warnings.front();
    EXPECT_LT(max_normal_jump(dom, cb.T, 8), 1e-9);
    EXPECT_LT(max_value_jump(dom, cb.T, 8), 1e-12);
    for (int what = 0; what < 3; ++what) EXPECT_LT(span_residual(cb.T, raw_coefficients(dom, what)), 1e-9);
    EXPECT_GT(cb.T.cols(), 3);
    EXPECT_LT(cb.T.cols(), dom.num_raw());
    EXPECT_EQ(rank_of(cb.T), cb.T.cols());
}

TEST_P(CouplingFixture, DecomposedAndGlobalNullSpacesAgree)
{
    const int which = GetParam();
    std::vector<SBBlock> blocks;
    if (which == 0) blocks = {fixtures::square_block()};
    if (which == 1) blocks = {fixtures::disk_block()};
    if (which >= 2) blocks = fixtures::two_blocks();
    const SBDomain dom(blocks, {3, 1, 3});
    CouplingOptions g;
    g.method = NullSpaceMethod::Global;
    const CouplingBasis a = build_c1_basis(dom, {}), b = build_c1_basis(dom, {}, g);
    ASSERT_EQ(a.T.cols(), b.T.cols());
    // same span: stacking does not increase the rank
    SparseMatrix AB(a.T.rows(), a.T.cols() + b.T.cols());
    std::vector<Eigen::Triplet<double>> t;
    for (int k = 0; k < a.T.outerSize(); ++k)
        for (SparseMatrix::InnerIterator it(a.T, k); it; ++it) t.emplace_back(static_cast<int>(it.row()), k, it.value());
    for (int k = 0; k < b.T.outerSize(); ++k)
        for (SparseMatrix::InnerIterator it(b.T, k); it; ++it)
            t.emplace_back(static_cast<int>(it.row()), static_cast<int>(a.T.cols()) + k, it.value());
    AB.setFromTriplets(t.begin(), t.end());
    Eigen::MatrixXd D(AB);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(D);
    const Eigen::VectorXd s = svd.singularValues();
    int rank = 0;
    while (rank < s.size() && s[rank] > 1e-8 * s[0]) ++rank;
    EXPECT_EQ(rank, a.T.cols());
}

INSTANTIATE_TEST_SUITE_P(Fixtures, CouplingFixture, ::testing::Values(0, 1, 2, 3));

TEST(Coupling, NullDimensionMatchesBruteForceRank)
{
    // rank of the full jump Gram matrix with a doubled rule, computed by a
    // dense eigen-decomposition, fixes the coupled dimension
    const SBDomain dom(fixtures::two_blocks(), {3, 1, 4});
    const SparseMatrix T0 = build_b3_basis(dom, {});
    const SparseRowMatrix Tr = T0;
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(T0.cols(), T0.cols());
    for (const Interface& I : dom.interfaces()) {
        std::vector<int> cols;
        const Eigen::MatrixXd G = jump_rows(dom, I, Tr, cols, 12);
        const Eigen::MatrixXd m = G.transpose() * G;
        for (std::size_t a = 0; a < cols.size(); ++a)
            for (std::size_t b = 0; b < cols.size(); ++b)
                M(cols[a], cols[b]) += m(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M);
    const Eigen::VectorXd ev = es.eigenvalues();
    int zero = 0;
    for (Eigen::Index i = 0; i < ev.size(); ++i)
        if (ev[i] <= 1e-10 * ev.maxCoeff()) ++zero;
    const CouplingBasis cb = build_c1_basis(dom, {});
    EXPECT_EQ(cb.T.cols(), zero);
}

TEST(Coupling, DirichletRemovalKeepsC1AndDropsBoundaryTraces)
{
    const SBDomain dom({fixtures::square_block()}, {3, 1, 4});
    std::vector<EdgeConstraint> ec(dom.boundary_edges().size(), EdgeConstraint::TraceAndNormal);
    const CouplingBasis cb = build_c1_basis(dom, dirichlet_removal(dom, ec));
    EXPECT_LT(max_normal_jump(dom, cb.T, 6), 1e-9);
    // no column has a value or normal derivative on the outer boundary
    const SparseRowMatrix Tr = cb.T;
    double worst = 0.0;
    for (const BoundaryEdge& be : dom.boundary_edges())
        for (int k = 0; k <= 10; ++k) {
            const PointBasis pb = dom.eval_basis(be.patch, k / 10.0, 1.0, 1);
            for (std::size_t b = 0; b < pb.index.size(); ++b)
                for (SparseRowMatrix::InnerIterator it(Tr, pb.index[b]); it; ++it)
                    worst = std::max({worst, std::abs(it.value() * pb.N[static_cast<Eigen::Index>(b)]),
                                      std::abs(it.value()) * pb.dN.col(static_cast<Eigen::Index>(b)).norm()});
        }
    // the row sums cancel per column; check per-column sums instead
    std::map<int, double> val;
    for (const BoundaryEdge& be : dom.boundary_edges())
        for (int k = 0; k <= 10; ++k) {
            const PointBasis pb = dom.eval_basis(be.patch, k / 10.0, 1.0, 1);
            std::map<int, double> v, dn;
            const V2 t = dom.patch(be.patch).eval(k / 10.0, 1.0).jac.col(0);
            const V2 n = V2(t.y(), -t.x()).normalized();
            for (std::size_t b = 0; b < pb.index.size(); ++b)
                for (SparseRowMatrix::InnerIterator it(Tr, pb.index[b]); it; ++it) {
                    v[static_cast<int>(it.col())] += it.value() * pb.N[static_cast<Eigen::Index>(b)];
                    dn[static_cast<int>(it.col())] += it.value() * n.dot(pb.dN.col(static_cast<Eigen::Index>(b)));
                }
            for (const auto& [c, x] : v) val[c] = std::max(val[c], std::abs(x));
            for (const auto& [c, x] : dn) val[c] = std::max(val[c], std::abs(x));
        }
    for (const auto& [c, x] : val) EXPECT_LT(x, 1e-12) << "column " << c;
    (void)worst;
}

TEST(Coupling, ScalingCentreReachingDirichletEdgeIsRejected)
{
    // p=2, two elements: n2 = 4 = p+2, clamped rows overlap the centre rows
    const SBDomain dom({fixtures::square_block()}, {2, 1, 2});
    std::vector<EdgeConstraint> ec(dom.boundary_edges().size(), EdgeConstraint::TraceAndNormal);
    EXPECT_THROW(build_b3_basis(dom, dirichlet_removal(dom, ec)), GeometryError);
}

TEST(ASG1, SBPatchesSharingACentre)
{
    const SBDomain dom({fixtures::disk_block()}, {3, 1, 2});
    for (const Interface& I : dom.interfaces()) EXPECT_LT(asg1_residual(dom, I), 1e-10);
    const SBDomain two(fixtures::two_blocks(), {3, 1, 2});
    for (const Interface& I : two.interfaces()) EXPECT_LT(asg1_residual(two, I), 1e-10);
}

namespace {

// Bicubic-in-v, linear-in-u patch pair: left patch on [-1,0]x[0,1], right on
// [0,1]x[0,1]; across-derivatives at u=0 come from the first interior
// control column, which can be perturbed.
std::array<Eigen::Vector2d, 2> bilinear_jet(double s, const V2& a, const V2& b, const V2& c, const V2& d)
{
    // F(u,v) = (1-u)(1-v) a + u(1-v) b + (1-u) v d + u v c, edge at u = 0
    const V2 du = (1 - s) * (b - a) + s * (c - d);
    const V2 dv = d - a;
    return {du, dv};
}

}  // namespace

TEST(ASG1, BilinearPairAndPerturbedPair)
{
    const V2 p0(0, 0), p1(0.1, 1.0);  // shared edge
    const V2 l0(-1, 0.1), l1(-0.9, 1.2), r0(1, -0.1), r1(1.2, 0.9);
    auto left = [&](double s) { return bilinear_jet(s, p0, l0, l1, p1); };
    auto right = [&](double s) { return bilinear_jet(s, p0, r0, r1, p1); };
    EXPECT_LT(asg1_residual(left, right), 1e-12);

    // quadratic across-derivative on the right with a perturbed control point
    auto bent = [&](double s) {
        auto j = bilinear_jet(s, p0, r0, r1, p1);
        j[0] += V2(0.0, 0.3) * 4.0 * s * s * (1 - s);
        return j;
    };
    EXPECT_GT(asg1_residual(left, bent), 1e-4);
}
