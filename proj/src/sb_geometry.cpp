#include "sbshell/sb_geometry.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "sbshell/errors.hpp"
#include "sbshell/quadrature.hpp"

namespace sbshell {

namespace {

double cross2(const Eigen::Vector2d& a, const Eigen::Vector2d& b) { return a.x() * b.y() - a.y() * b.x(); }

}  // namespace

// ------------------------------------------------------------------ SBPatch

SBPatch::SBPatch(NurbsCurve boundary, Eigen::Vector2d center, KnotVector radial, int center_id)
    : boundary_(std::move(boundary)), center_(std::move(center)), radial_(std::move(radial)), center_id_(center_id)
{
    if (radial_.degree() != boundary_.degree())
        throw GeometryError("SBPatch: radial and boundary degrees differ");
    if (!radial_.is_open() || radial_.front() != 0.0 || radial_.back() != 1.0)
        throw GeometryError("SBPatch: radial knot vector must be open on [0,1]");
    if (boundary_.t0() != 0.0 || boundary_.t1() != 1.0)
        throw GeometryError("SBPatch: boundary curve must be parametrized on [0,1]");
}

Eigen::Vector2d SBPatch::control_point(int i, int j) const
{
    const Eigen::VectorXd g = radial_.greville();
    const Eigen::Vector2d& c = boundary_.control_points()[static_cast<std::size_t>(i)];
    return center_ + g[j] * (c - center_);
}

double SBPatch::d(double zeta) const
{
    const auto g = boundary_.derivatives(zeta, 1);
    return cross2(g[1], g[0] - center_);
}

GeometryJet SBPatch::eval(double zeta, double xi) const
{
    const auto g = boundary_.derivatives(zeta, 2);
    const Eigen::Vector2d gt = g[0] - center_;
    GeometryJet J;
    J.x = center_ + xi * gt;
    J.jac.col(0) = xi * g[1];
    J.jac.col(1) = gt;
    J.d_zz = xi * g[2];
    J.d_zx = g[1];
    J.d_xx.setZero();
    J.det = xi * cross2(g[1], gt);
    return J;
}

GeometryJet SBPatch::eval_from_net(double zeta, double xi) const
{
    const BasisValues bz = boundary_.basis().eval(zeta, 2);
    const BasisValues bx = eval_bspline(radial_, xi, 2);
    GeometryJet J;
    J.x.setZero();
    J.jac.setZero();
    J.d_zz.setZero();
    J.d_zx.setZero();
    J.d_xx.setZero();
    for (int a = 0; a < bz.ders.cols(); ++a)
        for (int b = 0; b < bx.ders.cols(); ++b) {
            const Eigen::Vector2d c = control_point(bz.first + a, bx.first + b);
            J.x += bz.ders(0, a) * bx.ders(0, b) * c;
            J.jac.col(0) += bz.ders(1, a) * bx.ders(0, b) * c;
            J.jac.col(1) += bz.ders(0, a) * bx.ders(1, b) * c;
            J.d_zz += bz.ders(2, a) * bx.ders(0, b) * c;
            J.d_zx += bz.ders(1, a) * bx.ders(1, b) * c;
            J.d_xx += bz.ders(0, a) * bx.ders(2, b) * c;
        }
    J.det = J.jac.determinant();
    return J;
}

double star_shape_margin(const NurbsCurve& gamma, const Eigen::Vector2d& z0, int samples)
{
    double mn = 1e300, mx = -1e300, amax = 0.0;
    for (int k = 0; k <= samples; ++k) {
        const double t = gamma.t0() + (gamma.t1() - gamma.t0()) * k / samples;
        const auto g = gamma.derivatives(t, 1);
        const double v = cross2(g[1], g[0] - z0);
        mn = std::min(mn, v);
        mx = std::max(mx, v);
        amax = std::max(amax, std::abs(v));
    }
    if (amax == 0.0) return 0.0;
    if (mn > 0.0) return mn / amax;
    if (mx < 0.0) return -mx / amax;
    return 0.0;
}

Eigen::Vector2d edge_point(EdgeKind e, double s)
{
    switch (e) {
    case EdgeKind::Zeta0: return {0.0, s};
    case EdgeKind::Zeta1: return {1.0, s};
    case EdgeKind::Xi1: return {s, 1.0};
    }
    return {0.0, 0.0};
}

// ------------------------------------------------------------------ SBDomain

SBDomain::SBDomain(const std::vector<SBBlock>& blocks, const MeshSpec& mesh) : mesh_(mesh)
{
    const int p = mesh.degree;
    if (p < 2) throw GeometryError("SBDomain: degree must be at least 2");
    if (mesh.regularity < 1 || mesh.regularity >= p) throw GeometryError("SBDomain: regularity must lie in [1, p-1]");
    const KnotVector radial = KnotVector::open_uniform(p, mesh.elements, mesh.regularity);
    if (radial.num_basis() < p + 2)
        throw GeometryError("SBDomain: radial space too coarse (need at least p+2 functions)");

    for (std::size_t b = 0; b < blocks.size(); ++b) {
        const SBBlock& blk = blocks[b];
        if (blk.curves.size() < 2) throw GeometryError("SBDomain: a block needs at least two boundary curves");
        const int cid = static_cast<int>(centers_.size());
        centers_.push_back(blk.center);
        int sign = 0;
        for (std::size_t k = 0; k < blk.curves.size(); ++k) {
            NurbsCurve c = blk.curves[k];
            const NurbsCurve& next = blk.curves[(k + 1) % blk.curves.size()];
            const double scale = std::max(1.0, (c.point(0.0) - blk.center).norm());
            if ((c.point(c.t1()) - next.point(next.t0())).norm() > 1e-8 * scale) {
                std::ostringstream os;
                os << "SBDomain: block " << b << " boundary loop is not closed at curve " << k;
                throw GeometryError(os.str());
            }
            if (c.t0() != 0.0 || c.t1() != 1.0) {
                // affine reparametrization to [0,1]
                c = c.subcurve(c.t0(), c.t1());
            }
            if (c.degree() < p) c = c.elevated(p);
            if (c.degree() != p) throw GeometryError("SBDomain: boundary curve degree exceeds the target degree");
            c = c.refined(uniform_refinement_knots(c.basis().knots(), mesh.elements, mesh.regularity),
                          mesh.regularity);

            const double margin = star_shape_margin(c, blk.center);
            if (margin <= 1e-10) {
                std::ostringstream os;
                os << "SBDomain: non-positive Jacobian (block " << b << ", curve " << k
                   << " is not visible from its scaling centre)";
                throw GeometryError(os.str());
            }
            const double dmid = cross2(c.derivatives(0.5, 1)[1], c.point(0.5) - blk.center);
            const int s = dmid > 0 ? 1 : -1;
            if (sign != 0 && s != sign) throw GeometryError("SBDomain: boundary loop orientation is inconsistent");
            sign = s;

            SBPatch patch(c, blk.center, radial, cid);
            patch.tag = k < blk.tags.size() ? blk.tags[k] : std::string();
            patch.source_curve = static_cast<int>(k);
            patches_.push_back(std::move(patch));
            offsets_.push_back(offsets_.back() + patches_.back().num_functions());
        }
    }
    detect_interfaces();
}

void SBDomain::detect_interfaces()
{
    struct EdgeRef {
        int patch;
        EdgeKind kind;
        std::array<Eigen::Vector2d, 5> pts;
    };
    std::vector<EdgeRef> edges;
    double scale = 0.0;
    for (int m = 0; m < num_patches(); ++m) {
        const SBPatch& P = patches_[static_cast<std::size_t>(m)];
        for (EdgeKind k : {EdgeKind::Zeta0, EdgeKind::Zeta1, EdgeKind::Xi1}) {
            EdgeRef e{m, k, {}};
            for (int q = 0; q < 5; ++q) {
                const Eigen::Vector2d uv = edge_point(k, 0.25 * q);
                e.pts[static_cast<std::size_t>(q)] = P.eval(uv.x(), uv.y()).x;
                scale = std::max(scale, e.pts[static_cast<std::size_t>(q)].cwiseAbs().maxCoeff());
            }
            edges.push_back(e);
        }
    }
    const double tol = 1e-8 * std::max(scale, 1.0);
    auto same = [&](const EdgeRef& a, const EdgeRef& b, bool rev) {
        for (int q = 0; q < 5; ++q)
            if ((a.pts[static_cast<std::size_t>(q)] - b.pts[static_cast<std::size_t>(rev ? 4 - q : q)]).norm() > tol) return false;
        return true;
    };

    std::vector<std::vector<Eigen::Vector2d>> outer_samples(edges.size());
    for (std::size_t a = 0; a < edges.size(); ++a)
        if (edges[a].kind == EdgeKind::Xi1)
            for (int q = 1; q < 64; ++q)
                outer_samples[a].push_back(patches_[static_cast<std::size_t>(edges[a].patch)].boundary().point(q / 64.0));

    std::vector<int> matched(edges.size(), -1);
    for (std::size_t a = 0; a < edges.size(); ++a) {
        if (matched[a] >= 0) continue;
        for (std::size_t b = a + 1; b < edges.size(); ++b) {
            if (matched[b] >= 0 || edges[b].patch == edges[a].patch) continue;
            const bool radial_a = edges[a].kind != EdgeKind::Xi1, radial_b = edges[b].kind != EdgeKind::Xi1;
            if (radial_a != radial_b) continue;
            bool rev = false;
            if (same(edges[a], edges[b], false)) rev = false;
            else if (same(edges[a], edges[b], true)) rev = true;
            else continue;
            if (radial_a && rev) continue;  // radial edges both start at the centre
            Interface I;
            I.patch_a = edges[a].patch;
            I.patch_b = edges[b].patch;
            I.edge_a = edges[a].kind;
            I.edge_b = edges[b].kind;
            I.reversed = rev;
            const Eigen::Vector2d t = edges[a].pts[3] - edges[a].pts[1];
            I.normal = Eigen::Vector2d(t.y(), -t.x()).normalized();
            if (!radial_a) {
                // C0 conformity of the traces: mirrored knots, weights and points
                const NurbsCurve& ca = patches_[static_cast<std::size_t>(I.patch_a)].boundary();
                const NurbsCurve cb = rev ? patches_[static_cast<std::size_t>(I.patch_b)].boundary().reversed()
                                          : patches_[static_cast<std::size_t>(I.patch_b)].boundary();
                bool ok = ca.basis().size() == cb.basis().size();
                for (int i = 0; ok && i < ca.basis().knots().size(); ++i)
                    ok = std::abs(ca.basis().knots()[i] - cb.basis().knots()[i]) < 1e-10;
                for (int i = 0; ok && i < ca.basis().size(); ++i)
                    ok = std::abs(ca.basis().weight(i) - cb.basis().weight(i)) < 1e-10 * std::max(1.0, ca.basis().weight(i)) &&
                         (ca.control_points()[static_cast<std::size_t>(i)] - cb.control_points()[static_cast<std::size_t>(i)]).norm() < tol;
                if (!ok) throw GeometryError("SBDomain: interface curves do not share knots, weights and control points");
            }
            interfaces_.push_back(I);
            matched[a] = static_cast<int>(b);
            matched[b] = static_cast<int>(a);
            break;
        }
    }
    for (std::size_t a = 0; a < edges.size(); ++a) {
        if (matched[a] >= 0) continue;
        if (edges[a].kind != EdgeKind::Xi1) {
            std::ostringstream os;
            os << "SBDomain: radial edge of patch " << edges[a].patch << " has no partner";
            throw GeometryError(os.str());
        }
        // unmatched outer edge lying on top of another one means a T-junction
        const Eigen::Vector2d mid = edges[a].pts[2];
        for (std::size_t b = 0; b < edges.size(); ++b) {
            if (b == a || edges[b].kind != EdgeKind::Xi1) continue;
            const auto& smp = outer_samples[b];
            for (const auto& q : smp) {
                if ((q - mid).norm() < tol) {
                    std::ostringstream os;
                    os << "SBDomain: non-conforming interface between patches " << edges[a].patch << " and "
                       << edges[b].patch;
                    throw GeometryError(os.str());
                }
            }
        }
        boundary_edges_.push_back({edges[a].patch, patches_[static_cast<std::size_t>(edges[a].patch)].tag});
    }
}

PointBasis SBDomain::eval_basis(int m, double zeta, double xi, int nderiv) const
{
    const SBPatch& P = patches_[static_cast<std::size_t>(m)];
    const BasisValues bz = P.boundary().basis().eval(zeta, std::max(nderiv, 0));
    const BasisValues bx = eval_bspline(P.radial(), xi, std::max(nderiv, 0));
    const GeometryJet J = P.eval(zeta, xi);
    const int nz = static_cast<int>(bz.ders.cols()), nx = static_cast<int>(bx.ders.cols());
    const int nb = nz * nx;

    PointBasis pb;
    pb.patch = m;
    pb.zeta = zeta;
    pb.xi = xi;
    pb.x = J.x;
    pb.det = std::abs(J.det);
    pb.index.resize(static_cast<std::size_t>(nb));
    pb.N.resize(nb);
    pb.dN.setZero(2, nb);
    pb.d2N.setZero(3, nb);
    const bool with_d = nderiv >= 1 && pb.det > 0.0;
    Eigen::Matrix2d Jinv = Eigen::Matrix2d::Zero();
    if (with_d) Jinv = J.jac.inverse();
    const int off = offsets_[static_cast<std::size_t>(m)];
    int k = 0;
    for (int b = 0; b < nx; ++b)
        for (int a = 0; a < nz; ++a, ++k) {
            pb.index[static_cast<std::size_t>(k)] = off + P.local_index(bz.first + a, bx.first + b);
            pb.N[k] = bz.ders(0, a) * bx.ders(0, b);
            if (!with_d) continue;
            const Eigen::Vector2d gh(bz.ders(1, a) * bx.ders(0, b), bz.ders(0, a) * bx.ders(1, b));
            const Eigen::Vector2d g = Jinv.transpose() * gh;
            pb.dN.col(k) = g;
            if (nderiv < 2) continue;
            Eigen::Matrix2d Hh;
            Hh(0, 0) = bz.ders(2, a) * bx.ders(0, b);
            Hh(0, 1) = Hh(1, 0) = bz.ders(1, a) * bx.ders(1, b);
            Hh(1, 1) = bz.ders(0, a) * bx.ders(2, b);
            Hh(0, 0) -= g.dot(J.d_zz);
            Hh(0, 1) -= g.dot(J.d_zx);
            Hh(1, 0) -= g.dot(J.d_zx);
            Hh(1, 1) -= g.dot(J.d_xx);
            const Eigen::Matrix2d H = Jinv.transpose() * Hh * Jinv;
            pb.d2N(0, k) = H(0, 0);
            pb.d2N(1, k) = H(0, 1);
            pb.d2N(2, k) = H(1, 1);
        }
    return pb;
}

std::tuple<int, double, double> SBDomain::locate(const Eigen::Vector2d& x, double tol) const
{
    const auto [lo, hi] = bbox();
    const double scale = std::max(1.0, (hi - lo).norm());
    for (int m = 0; m < num_patches(); ++m) {
        const SBPatch& P = patches_[static_cast<std::size_t>(m)];
        const Eigen::Vector2d r = x - P.center();
        if (r.norm() <= tol * scale) return {m, 0.5, 0.0};
        // zeta solves cross(r, gamma(zeta) - z0) = 0 with a positive dot product
        auto f = [&](double z) { return cross2(r, P.boundary().point(z) - P.center()); };
        const int ns = 64;
        double za = 0.0, fa = f(0.0);
        for (int k = 1; k <= ns; ++k) {
            const double zb = static_cast<double>(k) / ns, fb = f(zb);
            const bool bracket = (fa <= 0.0 && fb >= 0.0) || (fa >= 0.0 && fb <= 0.0);
            if (bracket) {
                double a = za, b = zb, fa2 = fa;
                for (int it = 0; it < 200 && b - a > 1e-15; ++it) {
                    const double c = 0.5 * (a + b), fc = f(c);
                    if ((fa2 <= 0.0) == (fc <= 0.0)) {
                        a = c;
                        fa2 = fc;
                    } else {
                        b = c;
                    }
                }
                const double z = 0.5 * (a + b);
                const Eigen::Vector2d g = P.boundary().point(z) - P.center();
                if (g.dot(r) > 0.0) {
                    const double xi = r.norm() / g.norm();
                    if (xi <= 1.0 + tol) return {m, z, std::min(xi, 1.0)};
                }
            }
            za = zb;
            fa = fb;
        }
    }
    return {-1, 0.0, 0.0};
}

Eigen::Vector2d SBDomain::raw_control_point(int r) const
{
    const auto [m, i, j] = raw_ijk(r);
    return patches_[static_cast<std::size_t>(m)].control_point(i, j);
}

std::tuple<int, int, int> SBDomain::raw_ijk(int r) const
{
    const auto it = std::upper_bound(offsets_.begin(), offsets_.end(), r);
    const int m = static_cast<int>(it - offsets_.begin()) - 1;
    const int loc = r - offsets_[static_cast<std::size_t>(m)];
    const int n1 = patches_[static_cast<std::size_t>(m)].n1();
    return {m, loc % n1, loc / n1};
}

double SBDomain::area() const
{
    double A = 0.0;
    for (const SBPatch& P : patches_) {
        const int nq = P.degree() + 1;
        for (const auto& [z0, z1] : P.boundary().basis().knots().elements()) {
            const QuadRule qz = gauss_legendre(nq, z0, z1);
            for (const auto& [x0, x1] : P.radial().elements()) {
                const QuadRule qx = gauss_legendre(nq, x0, x1);
                for (std::size_t a = 0; a < qz.points.size(); ++a)
                    for (std::size_t b = 0; b < qx.points.size(); ++b)
                        A += qz.weights[a] * qx.weights[b] * std::abs(P.eval(qz.points[a], qx.points[b]).det);
            }
        }
    }
    return A;
}

std::pair<Eigen::Vector2d, Eigen::Vector2d> SBDomain::bbox() const
{
    Eigen::Vector2d lo = Eigen::Vector2d::Constant(1e300), hi = Eigen::Vector2d::Constant(-1e300);
    for (const SBPatch& P : patches_) {
        lo = lo.cwiseMin(P.center());
        hi = hi.cwiseMax(P.center());
        for (const auto& c : P.boundary().control_points()) {
            lo = lo.cwiseMin(c);
            hi = hi.cwiseMax(c);
        }
    }
    return {lo, hi};
}

}  // namespace sbshell
