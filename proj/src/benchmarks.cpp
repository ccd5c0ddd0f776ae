#include "sbshell/benchmarks.hpp"

#include <cmath>
#include <numbers>

#include <json.hpp>

#include "references_data.hpp"
#include "sbshell/errors.hpp"
#include "sbshell/trimming.hpp"

namespace sbshell {

namespace {

using V2 = Eigen::Vector2d;
constexpr double pi = std::numbers::pi;

SBBlock polygon(const std::vector<V2>& pts, const V2& center)
{
    SBBlock b;
    b.center = center;
    for (std::size_t k = 0; k < pts.size(); ++k) {
        b.curves.push_back(NurbsCurve::line(pts[k], pts[(k + 1) % pts.size()]));
        b.tags.push_back("side" + std::to_string(k));
    }
    return b;
}

// Rectangle [x0,x1] x [y0,y1]; sides tagged side0 (bottom) .. side3 (left).
SBBlock rectangle(double x0, double y0, double x1, double y1, const V2& center)
{
    return polygon({V2(x0, y0), V2(x1, y0), V2(x1, y1), V2(x0, y1)}, center);
}

std::vector<SBBlock> trimmed(const Loop& outer, const std::vector<TrimmingCurve>& holes, const PartitionOptions& opt)
{
    return extract_blocks(partition(trim_region(outer, holes), opt));
}

Problem scordelis_base(double extent1, double extent2)
{
    Problem pb;
    pb.map.type = "cylinder";
    pb.map.params = {{"radius", 25.0}, {"angle", 80.0}, {"length", 50.0}, {"extent1", extent1}, {"extent2", extent2}};
    pb.material = {4.32e8, 0.0, 0.25};
    // rigid diaphragms on the curved ends: u_x = u_z = 0, u_y free
    const ComponentConstraints dia{EdgeConstraint::Trace, EdgeConstraint::Free, EdgeConstraint::Trace};
    pb.boundary.by_tag["side0"] = dia;
    pb.boundary.by_tag["side2"] = dia;
    return pb;
}

Problem hypar(double t)
{
    Problem pb;
    pb.blocks = {rectangle(-0.5, -0.5, 0.5, 0.5, V2(0.0, -0.1))};
    pb.map.type = "hypar";
    pb.material = {2e11, 0.3, t};
    pb.boundary.by_tag["side3"] = BoundarySpec::clamped();
    pb.load.body = [t](const V2&, const Vector3d&) { return Vector3d(0.0, 0.0, -8000.0 * t); };
    pb.points = {{"A", V2(0.5, 0.0)}};
    return pb;
}

// Grid cut lines through every hole centre.
PartitionOptions grid_cuts(const std::vector<double>& xs, const std::vector<double>& ys)
{
    PartitionOptions opt;
    for (double x : xs) opt.cuts.push_back({V2(x, 0.0), V2(0.0, 1.0)});
    for (double y : ys) opt.cuts.push_back({V2(0.0, y), V2(1.0, 0.0)});
    return opt;
}

}  // namespace

NurbsCurve arc_through(const Eigen::Vector2d& a, const Eigen::Vector2d& m, const Eigen::Vector2d& b)
{
    const double d = 2.0 * (a.x() * (m.y() - b.y()) + m.x() * (b.y() - a.y()) + b.x() * (a.y() - m.y()));
    if (std::abs(d) < 1e-14) throw GeometryError("arc_through: points are collinear");
    const V2 c((a.squaredNorm() * (m.y() - b.y()) + m.squaredNorm() * (b.y() - a.y()) + b.squaredNorm() * (a.y() - m.y())) / d,
               (a.squaredNorm() * (b.x() - m.x()) + m.squaredNorm() * (a.x() - b.x()) + b.squaredNorm() * (m.x() - a.x())) / d);
    const double r = (a - c).norm();
    const double t0 = std::atan2(a.y() - c.y(), a.x() - c.x());
    double tm = std::atan2(m.y() - c.y(), m.x() - c.x()), t1 = std::atan2(b.y() - c.y(), b.x() - c.x());
    while (tm < t0) tm += 2 * pi;
    while (t1 < t0) t1 += 2 * pi;
    if (tm < t1) return NurbsCurve::arc(c, r, t0, t1);
    while (t1 > t0) t1 -= 2 * pi;
    return NurbsCurve::arc(c, r, t0, t1);
}

std::vector<std::string> benchmark_names()
{
    return {"square-shell", "scordelis-lo", "scordelis-lo-hole", "scordelis-lo-4holes",
            "hypar-t100",   "hypar-t1000",  "plate-16holes",     "violin"};
}

std::vector<ReferenceValue> benchmark_references(const std::string& name)
{
    const nlohmann::json j = nlohmann::json::parse(detail::kReferencesJson);
    std::vector<ReferenceValue> out;
    const auto& e = j.at("entries");
    if (!e.contains(name)) return out;
    for (const auto& r : e.at(name))
        out.push_back({r.at("quantity").get<std::string>(), r.at("value").get<double>(), r.at("citation").get<std::string>()});
    return out;
}

BenchmarkCase make_benchmark(const std::string& name)
{
    BenchmarkCase bc;
    bc.name = name;
    Problem& pb = bc.problem;
    if (name == "square-shell") {
        bc.description = "flat square [0,2]^2, hinged edges, manufactured solution sin(pi x) sin(pi y)";
        pb.blocks = {rectangle(0.0, 0.0, 2.0, 2.0, V2(1.0, 1.0))};
        const double E = 1e6, nu = 0.1;
        pb.material = {E, nu, std::cbrt(12.0 * (1.0 - nu * nu) / E)};
        pb.boundary.fallback = BoundarySpec::hinged();
        pb.load.body = [](const V2& th, const Vector3d&) {
            return Vector3d(0.0, 0.0, 4.0 * std::pow(pi, 4) * std::sin(pi * th.x()) * std::sin(pi * th.y()));
        };
        pb.exact = [](const V2& th) {
            const double sx = std::sin(pi * th.x()), cx = std::cos(pi * th.x());
            const double sy = std::sin(pi * th.y()), cy = std::cos(pi * th.y());
            MapJet r;
            r.x.z() = sx * sy;
            r.d(2, 0) = pi * cx * sy;
            r.d(2, 1) = pi * sx * cy;
            r.dd(2, 0) = -pi * pi * sx * sy;
            r.dd(2, 1) = pi * pi * cx * cy;
            r.dd(2, 2) = -pi * pi * sx * sy;
            return r;
        };
        pb.points = {{"peak", V2(0.5, 0.5)}};
        pb.degrees = {3, 4};
        pb.elements = {4, 8, 16, 32};
    } else if (name == "scordelis-lo") {
        bc.description = "Scordelis-Lo roof, gravity load, offset scaling centre";
        pb = scordelis_base(1.0, 2.0);
        pb.blocks = {rectangle(-0.5, -1.0, 0.5, 1.0, V2(0.2, 0.1))};
        pb.boundary.pins.push_back({V2(0.0, 0.0), 1});
        pb.load.body = [](const V2&, const Vector3d&) { return Vector3d(0.0, 0.0, -90.0); };
        pb.points = {{"A", V2(0.5, 0.0)}};
        pb.degrees = {4};
        pb.elements = {2, 3, 4, 5, 6};
    } else if (name == "scordelis-lo-hole") {
        bc.description = "Scordelis-Lo roof trimmed by a centred hole of radius 1, gravity load";
        pb = scordelis_base(8.0, 8.0);
        pb.blocks = trimmed(loop_from_block(rectangle(-4, -4, 4, 4, V2::Zero())),
                            {{NurbsCurve::circle(V2::Zero(), 1.0), "hole"}}, {});
        pb.boundary.pins.push_back({V2(4.0, 0.0), 1});
        pb.load.body = [](const V2&, const Vector3d&) { return Vector3d(0.0, 0.0, -90.0); };
        pb.points = {{"A", V2(4.0, 0.0)}};
        pb.degrees = {3, 4};
        pb.elements = {2, 4, 6, 8};
    } else if (name == "scordelis-lo-4holes") {
        bc.description = "Scordelis-Lo roof with four holes of radius 0.5, central point load";
        pb = scordelis_base(8.0, 8.0);
        std::vector<TrimmingCurve> holes;
        for (double x : {-2.0, 2.0})
            for (double y : {-2.0, 2.0}) holes.push_back({NurbsCurve::circle(V2(x, y), 0.5), "hole"});
        pb.blocks = trimmed(loop_from_block(rectangle(-4, -4, 4, 4, V2::Zero())), holes, grid_cuts({-2, 2}, {-2, 2}));
        pb.boundary.pins.push_back({V2(4.0, 0.0), 1});
        pb.load.points.push_back({V2(0.0, 0.0), Vector3d(0.0, 0.0, -1e-5)});
        pb.points = {{"load", V2(0.0, 0.0)}, {"A", V2(4.0, 0.0)}};
        pb.degrees = {3};
        pb.elements = {2, 4, 6};
    } else if (name == "hypar-t100" || name == "hypar-t1000") {
        const bool thick = name == "hypar-t100";
        bc.description = std::string("hyperbolic paraboloid clamped on one side, t = ") + (thick ? "1/100" : "1/1000");
        pb = hypar(thick ? 0.01 : 0.001);
        pb.degrees = {thick ? 5 : 3};
        pb.elements = thick ? std::vector<int>{2, 4, 6, 8, 10} : std::vector<int>{4, 8, 12, 16, 20, 24};
    } else if (name == "plate-16holes") {
        bc.description = "clamped square plate [0,5]^2 with 16 holes of radius 0.025, sinusoidal load";
        const std::vector<double> xs{0.8, 1.7, 3.1, 4.2}, ys{0.6, 1.9, 2.8, 4.3};
        std::vector<TrimmingCurve> holes;
        for (double x : xs)
            for (double y : ys) holes.push_back({NurbsCurve::circle(V2(x, y), 0.025), "hole"});
        pb.blocks = trimmed(loop_from_block(rectangle(0, 0, 5, 5, V2::Zero())), holes, grid_cuts(xs, ys));
        pb.material = {8.736e7, 0.3, 0.005};
        for (const char* s : {"side0", "side1", "side2", "side3"}) pb.boundary.by_tag[s] = BoundarySpec::clamped();
        pb.load.body = [](const V2& th, const Vector3d&) {
            return Vector3d(0.0, 0.0, std::sin(pi * th.x()) * std::sin(pi * th.y()));
        };
        pb.points = {{"centre", V2(2.5, 2.5)}};
        pb.degrees = {3};
        pb.elements = {2, 3};
    } else if (name == "violin") {
        bc.description = "violin top plate with two F-holes on a Gaussian bump, clamped outline";
        Loop outer;
        auto add = [&](const V2& a, const V2& m, const V2& b) {
            outer.push_back({arc_through(a, m, b), SegmentOrigin::Boundary, "outline"});
        };
        add(V2(0, -17), V2(8, -14), V2(10, -6));
        add(V2(10, -6), V2(7, -1), V2(8.5, 4));
        add(V2(8.5, 4), V2(7.5, 11), V2(0, 15));
        add(V2(0, 15), V2(-7.5, 11), V2(-8.5, 4));
        add(V2(-8.5, 4), V2(-7, -1), V2(-10, -6));
        add(V2(-10, -6), V2(-8, -14), V2(0, -17));
        const std::vector<TrimmingCurve> fholes{{NurbsCurve::ellipse(V2(4.5, 1.0), 0.6, 3.5), "fhole"},
                                                {NurbsCurve::ellipse(V2(-4.5, 1.0), 0.6, 3.5), "fhole"}};
        pb.blocks = trimmed(outer, fholes, grid_cuts({-4.5, 4.5}, {1.0}));
        pb.map.type = "gaussian";
        pb.map.params = {{"amplitude", 4.0}, {"a", 0.0025}, {"b", 0.01}};
        pb.material = {1e5, 0.1, 0.25};
        pb.boundary.by_tag["outline"] = BoundarySpec::clamped();
        pb.load.body = [](const V2&, const Vector3d&) { return Vector3d(0.0, 0.0, -0.05); };
        pb.points = {{"centre", V2(0.0, 1.0)}};
        pb.degrees = {3};
        pb.elements = {2, 3};
    } else {
        throw InputError("unknown case '" + name + "'");
    }
    pb.name = name;
    bc.references = benchmark_references(name);
    return bc;
}

}  // namespace sbshell
