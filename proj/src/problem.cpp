#include "sbshell/problem.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <numbers>

#include <json.hpp>

#include "json_util.hpp"
#include "sbshell/errors.hpp"
#include "sbshell/geometry_io.hpp"

namespace sbshell {

using json = nlohmann::json;

double MapSpec::param(const std::string& key, double fallback) const
{
    const auto it = params.find(key);
    return it == params.end() ? fallback : it->second;
}

SurfaceMap make_surface_map(const MapSpec& spec)
{
    if (spec.type == "identity") return flat_map;
    if (spec.type == "cylinder") {
        const double R = spec.param("radius", 1.0), L = spec.param("length", 1.0);
        const double alpha = spec.param("angle", 90.0) * std::numbers::pi / 180.0;
        const double w1 = spec.param("extent1", 1.0), w2 = spec.param("extent2", 1.0);
        return [=](const Eigen::Vector2d& th) {
            const double c = alpha / w1, a = c * th.x(), s = std::sin(a), co = std::cos(a);
            MapJet j;
            j.x << R * s, L / w2 * th.y(), R * co;
            j.d.col(0) << R * c * co, 0.0, -R * c * s;
            j.d(1, 1) = L / w2;
            j.dd.col(0) << -R * c * c * s, 0.0, -R * c * c * co;
            return j;
        };
    }
    if (spec.type == "hypar") {
        const double c = spec.param("c", 1.0);
        return [=](const Eigen::Vector2d& th) {
            MapJet j;
            j.x << th.x(), th.y(), c * (th.x() * th.x() - th.y() * th.y());
            j.d.col(0) << 1.0, 0.0, 2.0 * c * th.x();
            j.d.col(1) << 0.0, 1.0, -2.0 * c * th.y();
            j.dd(2, 0) = 2.0 * c;
            j.dd(2, 2) = -2.0 * c;
            return j;
        };
    }
    if (spec.type == "gaussian") {
        const double A = spec.param("amplitude", 1.0), a = spec.param("a", 1.0), b = spec.param("b", 1.0);
        return [=](const Eigen::Vector2d& th) {
            const double x = th.x(), y = th.y(), z = A * std::exp(-a * x * x) * std::exp(-b * y * y);
            MapJet j;
            j.x << x, y, z;
            j.d.col(0) << 1.0, 0.0, -2.0 * a * x * z;
            j.d.col(1) << 0.0, 1.0, -2.0 * b * y * z;
            j.dd(2, 0) = (4.0 * a * a * x * x - 2.0 * a) * z;
            j.dd(2, 1) = 4.0 * a * b * x * y * z;
            j.dd(2, 2) = (4.0 * b * b * y * y - 2.0 * b) * z;
            return j;
        };
    }
    throw InputError("unknown map type '" + spec.type + "'");
}

int parse_mesh_size(const std::string& h)
{
    try {
        std::size_t pos = 0;
        const auto slash = h.find('/');
        double v;
        if (slash != std::string::npos) {
            const double num = std::stod(h.substr(0, slash), &pos);
            if (pos != slash) throw InputError("bad mesh size");
            const std::string den_s = h.substr(slash + 1);
            const double den = std::stod(den_s, &pos);
            if (pos != den_s.size()) throw InputError("bad mesh size");
            v = den / num;
        } else {
            const double x = std::stod(h, &pos);
            if (pos != h.size()) throw InputError("bad mesh size");
            v = x < 1.0 ? 1.0 / x : x;
        }
        const int k = static_cast<int>(std::lround(v));
        if (k < 1 || std::abs(v - k) > 1e-9 * v) throw InputError("bad mesh size");
        return k;
    } catch (const std::logic_error&) {
        throw InputError("mesh size '" + h + "' is not of the form 1/k");
    } catch (const InputError&) {
        throw InputError("mesh size '" + h + "' is not of the form 1/k");
    }
}

namespace {

Vector3d get_vec3(const json& j, const char* what)
{
    if (!j.is_array() || j.size() != 3) throw InputError(std::string("expected a 3-vector for ") + what);
    return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

EdgeConstraint parse_constraint(const std::string& s)
{
    if (s == "free") return EdgeConstraint::Free;
    if (s == "trace" || s == "hinged") return EdgeConstraint::Trace;
    if (s == "clamped") return EdgeConstraint::TraceAndNormal;
    throw InputError("unknown edge constraint '" + s + "'");
}

ComponentConstraints parse_condition(const json& j)
{
    if (j.is_string()) {
        const std::string s = j.get<std::string>();
        if (s == "clamped") return BoundarySpec::clamped();
        if (s == "hinged" || s == "simply-supported") return BoundarySpec::hinged();
        if (s == "free") return BoundarySpec::free();
        throw InputError("unknown boundary condition '" + s + "'");
    }
    if (!j.is_array() || j.size() != 3) throw InputError("boundary condition must be a name or a list of three");
    return {parse_constraint(j[0].get<std::string>()), parse_constraint(j[1].get<std::string>()),
            parse_constraint(j[2].get<std::string>())};
}

}  // namespace

Problem parse_problem(const std::string& text, const std::string& base_dir)
{
    const json j = detail::parse_json_text(text, "problem");
    if (j.value("format", std::string()) != "sbshell-problem-v1")
        throw InputError("problem: expected \"format\": \"sbshell-problem-v1\"");
    Problem pb;
    try {
        pb.name = j.value("name", std::string("problem"));
        const json& g = j.at("geometry");
        if (g.is_string()) {
            std::filesystem::path p(g.get<std::string>());
            if (p.is_relative()) p = std::filesystem::path(base_dir) / p;
            pb.blocks = resolve_blocks(load_geometry(p.string()));
        } else {
            pb.blocks = resolve_blocks(detail::geometry_from_json(g));
        }
        if (j.contains("map")) {
            const json& m = j.at("map");
            pb.map.type = m.value("type", std::string("identity"));
            for (const auto& [k, v] : m.items()) {
                if (k == "type") continue;
                if (k == "extent") {
                    const Eigen::Vector2d e = detail::get_vec2(v, "map extent");
                    pb.map.params["extent1"] = e.x();
                    pb.map.params["extent2"] = e.y();
                } else if (v.is_number()) {
                    pb.map.params[k] = v.get<double>();
                } else {
                    throw InputError("map parameter '" + k + "' must be a number");
                }
            }
            make_surface_map(pb.map);
        }
        const json& mat = j.at("material");
        pb.material = {mat.at("E").get<double>(), mat.value("nu", 0.0), mat.at("t").get<double>()};
        pb.material.validate();

        if (j.contains("boundary")) {
            const json& b = j.at("boundary");
            if (b.contains("default")) pb.boundary.fallback = parse_condition(b.at("default"));
            const json tags = b.value("tags", json::object());
            for (const auto& [tag, c] : tags.items()) pb.boundary.by_tag[tag] = parse_condition(c);
            for (const json& p : b.value("pins", json::array())) {
                const int c = p.at("component").get<int>();
                if (c < 0 || c > 2) throw InputError("pin component must be 0, 1 or 2");
                pb.boundary.pins.push_back({detail::get_vec2(p.at("point"), "pin point"), c});
            }
        }
        if (j.contains("load")) {
            const json& l = j.at("load");
            if (l.contains("body")) {
                const json& b = l.at("body");
                const std::string type = b.value("type", std::string("constant"));
                if (type == "constant") {
                    const Vector3d g = get_vec3(b.at("value"), "body load");
                    pb.load.body = [g](const Eigen::Vector2d&, const Vector3d&) { return g; };
                } else if (type == "sinsin") {
                    const double A = b.at("amplitude").get<double>(), k = b.at("wavenumber").get<double>();
                    pb.load.body = [A, k](const Eigen::Vector2d& th, const Vector3d&) {
                        return Vector3d(0.0, 0.0, A * std::sin(k * th.x()) * std::sin(k * th.y()));
                    };
                } else {
                    throw InputError("unknown body load type '" + type + "'");
                }
            }
            for (const json& p : l.value("points", json::array()))
                pb.load.points.push_back({detail::get_vec2(p.at("point"), "load point"), get_vec3(p.at("force"), "force")});
        }
        if (j.contains("exact")) {
            const json& e = j.at("exact");
            if (e.value("type", std::string()) != "sinsin") throw InputError("only the \"sinsin\" exact solution is supported");
            const double A = e.at("amplitude").get<double>(), k = e.at("wavenumber").get<double>();
            pb.exact = [A, k](const Eigen::Vector2d& th) {
                const double sx = std::sin(k * th.x()), cx = std::cos(k * th.x());
                const double sy = std::sin(k * th.y()), cy = std::cos(k * th.y());
                MapJet r;
                r.x.z() = A * sx * sy;
                r.d(2, 0) = A * k * cx * sy;
                r.d(2, 1) = A * k * sx * cy;
                r.dd(2, 0) = -A * k * k * sx * sy;
                r.dd(2, 1) = A * k * k * cx * cy;
                r.dd(2, 2) = -A * k * k * sx * sy;
                return r;
            };
        }
        for (const json& p : j.value("points", json::array()))
            pb.points.push_back({p.value("name", std::string("P") + std::to_string(pb.points.size())),
                                 detail::get_vec2(p.at("point"), "point")});
        if (j.contains("degrees")) pb.degrees = j.at("degrees").get<std::vector<int>>();
        pb.regularity = j.value("regularity", 1);
        if (j.contains("h")) {
            pb.elements.clear();
            for (const json& h : j.at("h")) pb.elements.push_back(parse_mesh_size(h.is_string() ? h.get<std::string>() : h.dump()));
        }
    } catch (const json::exception& e) {
        throw InputError(std::string("problem: ") + e.what());
    }
    if (pb.degrees.empty() || pb.elements.empty()) throw InputError("problem: empty degree or mesh list");
    return pb;
}

Problem load_problem(const std::string& path)
{
    return parse_problem(detail::read_file(path), std::filesystem::path(path).parent_path().string());
}

RunResult run_problem(const Problem& pb, const RunOptions& opt)
{
    using clock = std::chrono::steady_clock;
    pb.material.validate();
    const auto t0 = clock::now();
    auto A = std::make_shared<Analysis>();
    A->domain = SBDomain(pb.blocks, {opt.degree, opt.regularity, opt.elements});
    A->bases = build_component_bases(A->domain, pb.boundary, opt.coupling);
    A->surface = std::make_unique<ShellSurface>(A->domain, A->bases.free.T, make_surface_map(pb.map));
    {
        const SparseMatrix K = assemble_raw_stiffness(*A->surface, pb.material);
        const Eigen::VectorXd F = assemble_raw_load(*A->surface, pb.load);
        A->system = reduce_system(K, F, {&A->bases.component(0).T, &A->bases.component(1).T, &A->bases.component(2).T});
    }
    const auto t1 = clock::now();

    RunResult r;
    const Eigen::VectorXd u = solve_system(A->system, opt.solver, &r.solve);
    A->solution = expand_solution(A->domain, A->system, u);
    r.seconds_setup = std::chrono::duration<double>(t1 - t0).count();
    r.seconds_solve = std::chrono::duration<double>(clock::now() - t1).count();

    r.problem = pb.name;
    r.degree = opt.degree;
    r.regularity = opt.regularity;
    r.elements = opt.elements;
    r.h = 1.0 / opt.elements;
    r.dof = A->system.size();
    r.num_raw = A->domain.num_raw();
    r.num_patches = A->domain.num_patches();
    r.geometry_deviation = A->surface->deviation();
    for (const NamedPoint& p : pb.points) r.values.push_back({p.name, p.theta, A->solution.at(p.theta)});
    if (pb.exact) r.errors = error_norms(*A->surface, A->solution, pb.exact);
    r.analysis = std::move(A);
    return r;
}

}  // namespace sbshell
