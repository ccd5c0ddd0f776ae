#include "sbshell/trimming.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "sbshell/errors.hpp"
#include "sbshell/quadrature.hpp"

namespace sbshell {

namespace {

using V2 = Eigen::Vector2d;

double cross(const V2& a, const V2& b) { return a.x() * b.y() - a.y() * b.x(); }

NurbsCurve unit_param(const NurbsCurve& c)
{
    if (c.t0() == 0.0 && c.t1() == 1.0) return c;
    return c.subcurve(c.t0(), c.t1());
}

Segment piece(const Segment& s, double a, double b)
{
    if (a <= 0.0 && b >= 1.0) return s;
    return {s.curve.subcurve(a, b), s.origin, s.tag};
}

V2 tangent(const NurbsCurve& c, double t)
{
    V2 d = c.derivatives(t, 1)[1];
    if (d.norm() < 1e-14) d = t < 0.5 ? c.point(t + 1e-4) - c.point(t) : c.point(t) - c.point(t - 1e-4);
    return d.normalized();
}

using Polygon = std::vector<V2>;

Polygon sample_loop(const Loop& loop, int per_segment)
{
    Polygon out;
    for (const Segment& s : loop)
        for (int k = 0; k < per_segment; ++k) out.push_back(s.curve.point(static_cast<double>(k) / per_segment));
    return out;
}

double polygon_area(const Polygon& p)
{
    double a = 0.0;
    for (std::size_t k = 0; k < p.size(); ++k) a += cross(p[k], p[(k + 1) % p.size()]);
    return 0.5 * a;
}

int winding(const Polygon& p, const V2& x)
{
    int w = 0;
    for (std::size_t k = 0; k < p.size(); ++k) {
        const V2& a = p[k];
        const V2& b = p[(k + 1) % p.size()];
        if (a.y() <= x.y()) {
            if (b.y() > x.y() && cross(b - a, x - a) > 0) ++w;
        } else if (b.y() <= x.y() && cross(b - a, x - a) < 0) {
            --w;
        }
    }
    return w;
}

struct RegionShape {
    std::vector<Polygon> polys;
    double scale = 1.0;

    explicit RegionShape(const Region& r, int per_segment = 64)
    {
        V2 lo = V2::Constant(1e300), hi = V2::Constant(-1e300);
        for (const Loop& l : r.loops) {
            polys.push_back(sample_loop(l, per_segment));
            for (const V2& q : polys.back()) {
                lo = lo.cwiseMin(q);
                hi = hi.cwiseMax(q);
            }
        }
        scale = std::max((hi - lo).norm(), 1e-300);
    }
    bool inside(const V2& x) const
    {
        int w = 0;
        for (const Polygon& p : polys) w += winding(p, x);
        return w != 0;
    }
};

// Chains directed segments into closed loops. At a vertex with several
// outgoing segments the one reached first turning clockwise from the
// reversed incoming direction is taken, which traces the face on the left.
std::vector<Loop> link(const std::vector<Segment>& edges, double tol)
{
    const std::size_t n = edges.size();
    std::vector<V2> start(n), end(n), out_dir(n), in_dir(n);
    for (std::size_t i = 0; i < n; ++i) {
        start[i] = edges[i].curve.point(0.0);
        end[i] = edges[i].curve.point(1.0);
        out_dir[i] = tangent(edges[i].curve, 0.0);
        in_dir[i] = tangent(edges[i].curve, 1.0);
    }
    std::vector<int> next(n, -1), used(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        const V2 r = -in_dir[i];
        double best = 1e300;
        for (std::size_t j = 0; j < n; ++j) {
            if ((start[j] - end[i]).norm() > tol) continue;
            double a = std::atan2(-cross(r, out_dir[j]), r.dot(out_dir[j]));
            if (a <= 1e-12) a += 2.0 * std::numbers::pi;
            if (a < best) {
                best = a;
                next[i] = static_cast<int>(j);
            }
        }
        if (next[i] < 0) throw GeometryError("trimming: boundary segments do not form closed loops");
        if (used[static_cast<std::size_t>(next[i])]++) throw GeometryError("trimming: ambiguous boundary vertex");
    }
    std::vector<Loop> loops;
    std::vector<char> done(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        if (done[i]) continue;
        Loop l;
        for (std::size_t k = i; !done[k]; k = static_cast<std::size_t>(next[k])) {
            done[k] = 1;
            l.push_back(edges[k]);
        }
        loops.push_back(std::move(l));
    }
    return loops;
}

// Outer loops with the holes they contain.
std::vector<Region> group(const std::vector<Loop>& loops, double scale)
{
    std::vector<std::pair<double, const Loop*>> outer, holes;
    for (const Loop& l : loops) {
        const double a = loop_area(l);
        if (std::abs(a) < 1e-14 * scale * scale) continue;
        (a > 0 ? outer : holes).push_back({a, &l});
    }
    std::sort(outer.begin(), outer.end(), [](const auto& x, const auto& y) { return x.first < y.first; });
    std::vector<Region> out;
    std::vector<Polygon> polys;
    for (const auto& o : outer) {
        out.push_back(Region{{*o.second}});
        polys.push_back(sample_loop(*o.second, 64));
    }
    for (const auto& h : holes) {
        const V2 x = h.second->front().curve.point(0.5);
        bool placed = false;
        for (std::size_t k = 0; k < out.size() && !placed; ++k)
            if (winding(polys[k], x) != 0) {
                out[k].loops.push_back(*h.second);
                placed = true;
            }
        if (!placed) throw GeometryError("trimming: hole loop outside every outer loop");
    }
    return out;
}

double signed_area(const NurbsCurve& c)
{
    double a = 0.0;
    for (const auto& [u0, u1] : c.basis().knots().elements()) {
        const QuadRule q = gauss_legendre(24, u0, u1);
        for (std::size_t k = 0; k < q.points.size(); ++k) {
            const auto g = c.derivatives(q.points[k], 1);
            a += 0.5 * q.weights[k] * cross(g[0], g[1]);
        }
    }
    return a;
}

bool is_straight(const NurbsCurve& c, double tol)
{
    const auto& P = c.control_points();
    const V2 d = P.back() - P.front();
    if (d.norm() < tol) return false;
    const V2 u = d.normalized();
    for (const V2& q : P) {
        const double along = (q - P.front()).dot(u);
        if (std::abs(cross(u, q - P.front())) > tol || along < -tol || along > d.norm() + tol) return false;
    }
    return true;
}

// Newton on gamma_a(u) - gamma_b(v) = 0.
bool newton_pair(const NurbsCurve& a, const NurbsCurve& b, double& u, double& v, double tol)
{
    for (int it = 0; it < 50; ++it) {
        const auto ga = a.derivatives(u, 1), gb = b.derivatives(v, 1);
        const V2 F = ga[0] - gb[0];
        if (F.norm() < tol) return true;
        Eigen::Matrix2d J;
        J.col(0) = ga[1];
        J.col(1) = -gb[1];
        if (std::abs(J.determinant()) < 1e-300) return false;
        const V2 step = J.partialPivLu().solve(-F);
        u = std::clamp(u + step.x(), a.t0(), a.t1());
        v = std::clamp(v + step.y(), b.t0(), b.t1());
    }
    return (a.point(u) - b.point(v)).norm() < tol;
}

std::vector<V2> polyline(const NurbsCurve& c, int n)
{
    std::vector<V2> p(static_cast<std::size_t>(n + 1));
    for (int k = 0; k <= n; ++k) p[static_cast<std::size_t>(k)] = c.point(c.t0() + (c.t1() - c.t0()) * k / n);
    return p;
}

// Splits every segment of every loop at the given parameters.
std::vector<Segment> split_at(const Segment& s, std::vector<double> params)
{
    std::sort(params.begin(), params.end());
    std::vector<Segment> out;
    double a = 0.0;
    for (double t : params) {
        if (t - a < 1e-9 || 1.0 - t < 1e-9) continue;
        out.push_back(piece(s, a, t));
        a = t;
    }
    out.push_back(piece(s, a, 1.0));
    return out;
}

Region apply_trim(const Region& region, const TrimmingCurve& trim)
{
    const NurbsCurve T = unit_param(trim.curve);
    const RegionShape shape(region);
    if ((T.point(0.0) - T.point(1.0)).norm() > 1e-12 * shape.scale)
        throw GeometryError("trimming: trimming curve is not closed");
    const bool ccw = signed_area(T) > 0;
    const NurbsCurve hole = (ccw == trim.remove_inside) ? T.reversed() : T;
    Segment trim_seg{hole, SegmentOrigin::Trim, trim.tag};

    std::vector<NurbsCurve> curves;
    std::vector<std::pair<int, int>> where;
    for (std::size_t l = 0; l < region.loops.size(); ++l)
        for (std::size_t k = 0; k < region.loops[l].size(); ++k) {
            curves.push_back(region.loops[l][k].curve);
            where.push_back({static_cast<int>(l), static_cast<int>(k)});
        }
    const auto hits = intersect(hole, curves);

    Polygon tpoly;
    for (int k = 0; k < 1024; ++k) tpoly.push_back(hole.point(k / 1024.0));
    auto in_trim = [&](const V2& x) { return winding(tpoly, x) != 0; };

    if (hits.empty()) {
        const bool trim_in_region = shape.inside(hole.point(0.0));
        const bool region_in_trim = in_trim(region.loops[0].front().curve.point(0.0));
        Region out = region;
        if (trim.remove_inside) {
            if (trim_in_region) out.loops.push_back(Loop{trim_seg});
            else if (region_in_trim) throw GeometryError("trimming: trimming curve removes the whole region");
        } else {
            if (trim_in_region) out.loops = {Loop{trim_seg}};
            else if (!region_in_trim) throw GeometryError("trimming: trimming curve does not overlap the region");
        }
        return out;
    }

    std::vector<std::vector<double>> params(curves.size());
    std::vector<double> sparams;
    for (const auto& h : hits) {
        params[static_cast<std::size_t>(h.curve)].push_back(h.zeta);
        sparams.push_back(h.s);
    }
    std::vector<Segment> edges;
    for (std::size_t c = 0; c < curves.size(); ++c) {
        const Segment& s = region.loops[static_cast<std::size_t>(where[c].first)][static_cast<std::size_t>(where[c].second)];
        for (Segment& p : split_at(s, params[c]))
            if (in_trim(p.curve.point(0.5)) != trim.remove_inside) edges.push_back(std::move(p));
    }
    for (Segment& p : split_at(trim_seg, sparams))
        if (shape.inside(p.curve.point(0.5))) edges.push_back(std::move(p));

    const auto regions = group(link(edges, 1e-9 * shape.scale), shape.scale);
    if (regions.size() != 1) throw GeometryError("trimming: trimming splits the region into disconnected parts");
    return regions.front();
}

// Interior points where coordinate `axis` of the curve is extremal.
std::vector<V2> curve_extremes(const NurbsCurve& c, int axis)
{
    std::vector<V2> out;
    auto v = [&](double u) { return c.point(u)[axis]; };
    for (int q = 1; q < 64; ++q) {
        const double a0 = v((q - 1) / 64.0), a1 = v(q / 64.0), a2 = v((q + 1) / 64.0);
        if ((a1 - a0) * (a2 - a1) > 0 || (a1 == a0 && a2 == a1)) continue;
        // bisection on the derivative, which is accurate where v is flat
        auto dv = [&](double u) { return c.derivatives(u, 1)[1][axis]; };
        double lo = (q - 1) / 64.0, hi = (q + 1) / 64.0;
        const double slo = dv(lo);
        if (slo * dv(hi) > 0) continue;
        for (int it = 0; it < 80 && hi - lo > 1e-16; ++it) {
            const double m = 0.5 * (lo + hi);
            if (dv(m) * slo > 0) lo = m;
            else hi = m;
        }
        const V2 x = c.point(0.5 * (lo + hi));
        if (out.empty() || (out.back() - x).norm() > 1e-9) out.push_back(x);
    }
    return out;
}

V2 loop_centroid(const Loop& l)
{
    double A = 0.0;
    V2 m = V2::Zero();
    for (const Segment& s : l)
        for (const auto& [u0, u1] : s.curve.basis().knots().elements()) {
            const QuadRule q = gauss_legendre(24, u0, u1);
            for (std::size_t k = 0; k < q.points.size(); ++k) {
                const auto g = s.curve.derivatives(q.points[k], 1);
                A += 0.5 * q.weights[k] * cross(g[0], g[1]);
                m += q.weights[k] * V2(0.5 * g[0].x() * g[0].x() * g[1].y(), -0.5 * g[0].y() * g[0].y() * g[1].x());
            }
        }
    return m / A;
}

std::vector<CutLine> candidate_cuts(const Region& r)
{
    std::vector<CutLine> out;
    auto add = [&](const V2& p, bool horizontal) {
        out.push_back({p, horizontal ? V2(1.0, 0.0) : V2(0.0, 1.0)});
    };
    for (std::size_t l = 1; l < r.loops.size(); ++l) {
        const V2 c = loop_centroid(r.loops[l]);
        add(c, true);
        add(c, false);
        // x extremes give horizontal cuts, y extremes vertical ones
        for (const Segment& s : r.loops[l])
            for (int axis = 0; axis < 2; ++axis)
                for (const V2& x : curve_extremes(s.curve, axis)) add(x, axis == 0);
    }
    const Loop& L = r.loops[0];
    for (std::size_t k = 0; k < L.size(); ++k) {
        const NurbsCurve& c = L[k].curve;
        bool concave = false;
        for (int q = 0; q <= 32 && !concave; ++q) {
            const auto g = c.derivatives(q / 32.0, 2);
            concave = cross(g[1], g[2]) < -1e-10 * g[1].squaredNorm() * g[1].norm();
        }
        if (concave) {
            add(c.point(0.0), true);
            add(c.point(0.0), false);
            add(c.point(1.0), true);
            add(c.point(1.0), false);
            for (int axis = 0; axis < 2; ++axis)
                for (const V2& x : curve_extremes(c, axis)) add(x, axis == 0);
        }
        const Segment& nx = L[(k + 1) % L.size()];
        if (cross(tangent(c, 1.0), tangent(nx.curve, 0.0)) < -1e-8) {
            add(c.point(1.0), true);
            add(c.point(1.0), false);
        }
    }
    // drop duplicates
    std::vector<CutLine> uniq;
    for (const CutLine& c : out) {
        bool dup = false;
        for (const CutLine& u : uniq)
            dup = dup || (u.direction == c.direction && std::abs(cross(c.direction, c.point - u.point)) < 1e-9);
        if (!dup) uniq.push_back(c);
    }
    return uniq;
}

// Smallest interior corner angle over all loops.
double min_corner_angle(const Region& r)
{
    double m = std::numbers::pi;
    for (const Loop& l : r.loops)
        for (std::size_t k = 0; k < l.size(); ++k) {
            const V2 in = tangent(l[k].curve, 1.0), out = tangent(l[(k + 1) % l.size()].curve, 0.0);
            const double turn = std::atan2(cross(in, out), in.dot(out));
            m = std::min(m, std::numbers::pi - turn);
        }
    return m;
}

void refine(const Region& r, int depth, const PartitionOptions& opt, std::vector<StarBlock>& out)
{
    if (r.loops.size() == 1)
        if (auto z = kernel_center(r.loops[0], opt.kernel_samples)) {
            out.push_back({r.loops[0], *z});
            return;
        }
    if (depth >= opt.max_depth)
        throw GeometryError("trimming: automatic partition reached the depth cap; supply cut lines in the geometry file");
    const double area = region_area(r);
    std::optional<std::vector<Region>> best;
    std::tuple<int, int, std::size_t, double> best_score{1 << 30, 0, 0, 0.0};
    for (const CutLine& c : candidate_cuts(r)) {
        auto pieces = split_region(r, c);
        if (!pieces || pieces->size() < 2) continue;
        int nonstar = 0, sharp = 0;
        double amin = 1e300, amax = 0.0;
        for (const Region& p : *pieces) {
            if (min_corner_angle(p) < std::numbers::pi / 12) ++sharp;
            const double a = region_area(p);
            amin = std::min(amin, a);
            amax = std::max(amax, a);
            if (p.loops.size() > 1 || !kernel_center(p.loops[0], opt.kernel_samples)) ++nonstar;
        }
        if (amin < 1e-3 * area) continue;
        const std::tuple<int, int, std::size_t, double> score{sharp, nonstar, pieces->size(), amax / amin};
        if (!best || score < best_score) {
            best = std::move(pieces);
            best_score = score;
        }
    }
    if (!best) throw GeometryError("trimming: no admissible cut line found; supply cut lines in the geometry file");
    for (const Region& p : *best) refine(p, depth + 1, opt, out);
}

}  // namespace

std::vector<CurveIntersection> intersect(const NurbsCurve& trim, const std::vector<NurbsCurve>& boundary)
{
    const int n = 1024;
    const std::vector<V2> tp = polyline(trim, n);
    const bool closed = (tp.front() - tp.back()).norm() < 1e-12 * std::max(1.0, tp.front().norm());
    std::vector<CurveIntersection> out;
    for (std::size_t i = 0; i < boundary.size(); ++i) {
        const NurbsCurve& B = boundary[i];
        const std::vector<V2> bp = polyline(B, n);
        double scale = 1.0;
        for (const V2& q : bp) scale = std::max(scale, q.cwiseAbs().maxCoeff());
        for (int a = 0; a < n; ++a) {
            const V2 p0 = tp[static_cast<std::size_t>(a)], r = tp[static_cast<std::size_t>(a + 1)] - p0;
            const V2 lo_a = p0.cwiseMin(p0 + r), hi_a = p0.cwiseMax(p0 + r);
            for (int b = 0; b < n; ++b) {
                const V2 q0 = bp[static_cast<std::size_t>(b)], s = bp[static_cast<std::size_t>(b + 1)] - q0;
                const V2 lo_b = q0.cwiseMin(q0 + s), hi_b = q0.cwiseMax(q0 + s);
                if ((lo_a.array() > hi_b.array()).any() || (lo_b.array() > hi_a.array()).any()) continue;
                const double den = cross(r, s);
                if (std::abs(den) < 1e-300) continue;
                const double u = cross(q0 - p0, s) / den, v = cross(q0 - p0, r) / den;
                const double eps = 1e-9;
                if (u < -eps || u > 1 + eps || v < -eps || v > 1 + eps) continue;
                double sp = trim.t0() + (trim.t1() - trim.t0()) * (a + std::clamp(u, 0.0, 1.0)) / n;
                double zp = B.t0() + (B.t1() - B.t0()) * (b + std::clamp(v, 0.0, 1.0)) / n;
                if (!newton_pair(B, trim, zp, sp, 1e-13 * scale)) {
                    std::ostringstream os;
                    os << "intersect: Newton did not converge near boundary curve " << i << ", zeta = " << zp
                       << ", s = " << sp;
                    throw GeometryError(os.str());
                }
                const V2 x = B.point(zp);
                if ((x - trim.point(sp)).norm() > 1e-10 * scale) throw GeometryError("intersect: unresolved intersection");
                bool dup = false;
                for (const CurveIntersection& c : out) {
                    const double ds = std::abs(c.s - sp);
                    const bool same_s = ds < 1e-8 || (closed && std::abs(ds - (trim.t1() - trim.t0())) < 1e-8);
                    dup = dup || (same_s && ((c.curve == static_cast<int>(i) && std::abs(c.zeta - zp) < 1e-8) ||
                                             (c.point - x).norm() < 1e-8 * scale));
                }
                if (!dup) out.push_back({static_cast<int>(i), zp, sp, x});
            }
        }
    }
    return out;
}

Loop loop_from_block(const SBBlock& block, SegmentOrigin origin)
{
    Loop l;
    for (std::size_t k = 0; k < block.curves.size(); ++k)
        l.push_back({unit_param(block.curves[k]), origin, k < block.tags.size() ? block.tags[k] : std::string()});
    return l;
}

double loop_area(const Loop& loop)
{
    double a = 0.0;
    for (const Segment& s : loop) a += signed_area(s.curve);
    return a;
}

double region_area(const Region& region)
{
    double a = 0.0;
    for (const Loop& l : region.loops) a += loop_area(l);
    return a;
}

Region trim_region(const Loop& outer, const std::vector<TrimmingCurve>& trims)
{
    Region r;
    Loop o = outer;
    for (Segment& s : o) s.curve = unit_param(s.curve);
    if (loop_area(o) < 0) {
        std::reverse(o.begin(), o.end());
        for (Segment& s : o) s.curve = s.curve.reversed();
    }
    r.loops.push_back(std::move(o));
    for (const TrimmingCurve& t : trims) r = apply_trim(r, t);
    return r;
}

std::optional<std::vector<Region>> split_region(const Region& region, const CutLine& line)
{
    const RegionShape shape(region);
    const V2 d = line.direction.normalized(), o = line.point;
    const double tol = 1e-10 * shape.scale, near = 1e-6 * shape.scale;
    auto f = [&](const V2& x) { return cross(d, x - o); };
    auto along = [&](const V2& x) { return (x - o).dot(d); };

    std::vector<Segment> left, right;
    std::vector<std::pair<double, V2>> on_line;
    std::vector<std::pair<double, double>> covered;
    const int ns = 256;
    for (const Loop& loop : region.loops)
        for (const Segment& s : loop) {
            std::vector<double> fv(ns + 1);
            double fmax = 0.0;
            for (int k = 0; k <= ns; ++k) {
                fv[static_cast<std::size_t>(k)] = f(s.curve.point(static_cast<double>(k) / ns));
                fmax = std::max(fmax, std::abs(fv[static_cast<std::size_t>(k)]));
            }
            const V2 a = s.curve.point(0.0), b = s.curve.point(1.0);
            if (fmax < tol) {
                (along(b) > along(a) ? left : right).push_back(s);
                covered.push_back(std::minmax(along(a), along(b)));
                on_line.push_back({along(a), a});
                on_line.push_back({along(b), b});
                continue;
            }
            std::vector<double> roots;
            for (int k = 0; k < ns; ++k) {
                const double f0 = fv[static_cast<std::size_t>(k)], f1 = fv[static_cast<std::size_t>(k + 1)];
                if (k > 0 && std::abs(f0) < near) {
                    const double fm = fv[static_cast<std::size_t>(k - 1)];
                    if (fm * f1 > 0 && std::abs(f0) <= std::min(std::abs(fm), std::abs(f1))) return std::nullopt;
                }
                if (!(f0 * f1 < 0) || std::abs(f0) < tol || std::abs(f1) < tol) {
                    if (k > 0 && std::abs(f0) < tol && fv[static_cast<std::size_t>(k - 1)] * f1 < 0)
                        roots.push_back(static_cast<double>(k) / ns);
                    continue;
                }
                double lo = static_cast<double>(k) / ns, hi = static_cast<double>(k + 1) / ns;
                for (int it = 0; it < 80 && hi - lo > 1e-16; ++it) {
                    const double m = 0.5 * (lo + hi);
                    (f(s.curve.point(m)) * f0 > 0 ? lo : hi) = m;
                }
                roots.push_back(0.5 * (lo + hi));
            }
            for (double t : roots) {
                const V2 x = s.curve.point(t);
                on_line.push_back({along(x), x});
            }
            if (std::abs(fv.front()) < tol) {
                if (std::abs(cross(d, tangent(s.curve, 0.0))) < 1e-6) return std::nullopt;
                on_line.push_back({along(a), a});
            }
            if (std::abs(fv.back()) < tol) {
                if (std::abs(cross(d, tangent(s.curve, 1.0))) < 1e-6) return std::nullopt;
                on_line.push_back({along(b), b});
            }
            for (Segment& p : split_at(s, roots)) {
                double fm = 0.0;
                for (int q = 1; q < 8; ++q) {
                    const double v = f(p.curve.point(q / 8.0));
                    if (std::abs(v) > std::abs(fm)) fm = v;
                }
                (fm > 0 ? left : right).push_back(std::move(p));
            }
        }
    if (right.empty() || left.empty()) return std::vector<Region>{region};

    std::sort(on_line.begin(), on_line.end(), [](const auto& x, const auto& y) { return x.first < y.first; });
    std::vector<std::pair<double, V2>> pts;
    for (const auto& q : on_line)
        if (pts.empty() || q.first - pts.back().first > 1e-9 * shape.scale) pts.push_back(q);
    for (std::size_t k = 0; k + 1 < pts.size(); ++k) {
        const double tm = 0.5 * (pts[k].first + pts[k + 1].first);
        bool cov = false;
        for (const auto& [c0, c1] : covered) cov = cov || (tm > c0 && tm < c1);
        if (cov || !shape.inside(o + d * tm)) continue;
        left.push_back({NurbsCurve::line(pts[k].second, pts[k + 1].second), SegmentOrigin::Cut, "cut"});
        right.push_back({NurbsCurve::line(pts[k + 1].second, pts[k].second), SegmentOrigin::Cut, "cut"});
    }
    std::vector<Region> out = group(link(left, 1e-9 * shape.scale), shape.scale);
    for (Region& r : group(link(right, 1e-9 * shape.scale), shape.scale)) out.push_back(std::move(r));
    return out;
}

std::optional<Eigen::Vector2d> kernel_center(const Loop& loop, int samples)
{
    std::vector<double> len;
    double total = 0.0;
    for (const Segment& s : loop) {
        len.push_back(s.curve.length());
        total += len.back();
    }
    Polygon p;
    for (std::size_t k = 0; k < loop.size(); ++k) {
        const int n = std::max(4, static_cast<int>(std::lround(samples * len[k] / total)));
        for (int q = 0; q < n; ++q) p.push_back(loop[k].curve.point(static_cast<double>(q) / n));
    }
    const double area = polygon_area(p);
    if (area <= 0) return std::nullopt;

    V2 lo = p.front(), hi = p.front();
    for (const V2& q : p) {
        lo = lo.cwiseMin(q);
        hi = hi.cwiseMax(q);
    }
    Polygon K{lo, V2(hi.x(), lo.y()), hi, V2(lo.x(), hi.y())};
    for (std::size_t k = 0; k < p.size() && K.size() >= 3; ++k) {
        const V2 a = p[k], e = p[(k + 1) % p.size()] - a;
        auto side = [&](const V2& z) { return cross(e, z - a); };
        Polygon C;
        for (std::size_t j = 0; j < K.size(); ++j) {
            const V2& u = K[j];
            const V2& v = K[(j + 1) % K.size()];
            const double su = side(u), sv = side(v);
            if (su >= 0) C.push_back(u);
            if ((su >= 0) != (sv >= 0)) C.push_back(u + (v - u) * (su / (su - sv)));
        }
        K = std::move(C);
    }
    if (K.size() < 3) return std::nullopt;
    const double ka = polygon_area(K);
    if (ka < 1e-10 * area) return std::nullopt;
    V2 c = V2::Zero();
    for (std::size_t j = 0; j < K.size(); ++j) {
        const V2& u = K[j];
        const V2& v = K[(j + 1) % K.size()];
        c += (u + v) * cross(u, v);
    }
    c /= 6.0 * ka;

    for (const Segment& s : loop) {
        if (star_shape_margin(s.curve, c, samples) <= 1e-8) return std::nullopt;
        if (cross(s.curve.derivatives(0.5, 1)[1], s.curve.point(0.5) - c) >= 0) return std::nullopt;
    }
    return c;
}

PartitionPlan partition(const Region& region, const PartitionOptions& opt)
{
    std::vector<Region> regions{region};
    for (const CutLine& c : opt.cuts) {
        std::vector<Region> next;
        for (const Region& r : regions) {
            auto pieces = split_region(r, c);
            if (!pieces) throw GeometryError("trimming: cut line touches the boundary tangentially");
            for (Region& p : *pieces) next.push_back(std::move(p));
        }
        regions = std::move(next);
    }
    PartitionPlan plan;
    for (const Region& r : regions) refine(r, 0, opt, plan.blocks);
    return plan;
}

std::vector<SBBlock> extract_blocks(const PartitionPlan& plan)
{
    std::vector<std::vector<Segment>> pieces;
    V2 lo = V2::Constant(1e300), hi = V2::Constant(-1e300);
    for (const StarBlock& b : plan.blocks) {
        std::vector<Segment> ps;
        for (const Segment& s : b.boundary) {
            std::vector<double> bk = s.curve.breakpoints();
            for (Segment& p : split_at(s, bk)) {
                lo = lo.cwiseMin(p.curve.point(0.0));
                hi = hi.cwiseMax(p.curve.point(0.0));
                ps.push_back(std::move(p));
            }
        }
        pieces.push_back(std::move(ps));
    }
    const double tol = 1e-9 * std::max((hi - lo).norm(), 1e-300);

    std::vector<V2> verts;
    for (const auto& ps : pieces)
        for (const Segment& s : ps) verts.push_back(s.curve.point(0.0));

    std::vector<SBBlock> out;
    for (std::size_t b = 0; b < pieces.size(); ++b) {
        SBBlock blk;
        blk.center = plan.blocks[b].center;
        for (const Segment& s : pieces[b]) {
            std::vector<Segment> parts{s};
            if (is_straight(s.curve, tol)) {
                const V2 a = s.curve.point(0.0), e = s.curve.point(1.0) - a;
                const double L = e.norm();
                const V2 u = e / L;
                std::vector<double> params;
                for (const V2& v : verts) {
                    const double t = (v - a).dot(u);
                    if (std::abs(cross(u, v - a)) > tol || t < tol || t > L - tol) continue;
                    double x0 = 0.0, x1 = 1.0;
                    for (int it = 0; it < 80 && x1 - x0 > 1e-16; ++it) {
                        const double m = 0.5 * (x0 + x1);
                        ((s.curve.point(m) - a).dot(u) < t ? x0 : x1) = m;
                    }
                    params.push_back(0.5 * (x0 + x1));
                }
                if (!params.empty()) parts = split_at(s, params);
            }
            for (const Segment& p : parts) {
                blk.curves.push_back(p.curve);
                blk.tags.push_back(p.origin == SegmentOrigin::Cut ? std::string("cut") : p.tag);
            }
        }
        out.push_back(std::move(blk));
    }
    return out;
}

}  // namespace sbshell
