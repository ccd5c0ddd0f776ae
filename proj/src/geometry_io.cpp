#include "sbshell/geometry_io.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include <json.hpp>

#include "sbshell/errors.hpp"
#include "json_util.hpp"

namespace sbshell {

using json = nlohmann::json;
using detail::get_vec2;

namespace detail {

Eigen::Vector2d get_vec2(const json& j, const char* what)
{
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
        throw InputError(std::string("expected a 2-vector for ") + what);
    return {j[0].get<double>(), j[1].get<double>()};
}

NurbsCurve parse_curve(const json& c)
{
    const double deg = std::numbers::pi / 180.0;
    try {
        if (c.contains("line")) {
            const json& l = c.at("line");
            if (!l.is_array() || l.size() != 2) throw InputError("line needs two points");
            return NurbsCurve::line(get_vec2(l[0], "line"), get_vec2(l[1], "line"), c.value("degree", 1));
        }
        if (c.contains("arc")) {
            const json& a = c.at("arc");
            const json& ang = a.at("angles");
            return NurbsCurve::arc(get_vec2(a.at("center"), "arc center"), a.at("radius").get<double>(),
                                   ang.at(0).get<double>() * deg, ang.at(1).get<double>() * deg);
        }
        if (c.contains("circle")) {
            const json& a = c.at("circle");
            return NurbsCurve::circle(get_vec2(a.at("center"), "circle center"), a.at("radius").get<double>(),
                                      a.value("ccw", true));
        }
        if (c.contains("ellipse")) {
            const json& a = c.at("ellipse");
            const Eigen::Vector2d r = get_vec2(a.at("radii"), "ellipse radii");
            return NurbsCurve::ellipse(get_vec2(a.at("center"), "ellipse center"), r.x(), r.y(), a.value("ccw", true));
        }
        const int p = c.at("degree").get<int>();
        std::vector<double> knots = c.at("knots").get<std::vector<double>>();
        std::vector<double> weights;
        if (c.contains("weights")) weights = c.at("weights").get<std::vector<double>>();
        std::vector<Eigen::Vector2d> pts;
        for (const json& q : c.at("points")) pts.push_back(get_vec2(q, "control point"));
        if (!weights.empty() && weights.size() != pts.size()) throw InputError("weights and points differ in length");
        return NurbsCurve(SplineBasis(KnotVector(std::move(knots), p), std::move(weights)), std::move(pts));
    } catch (const json::exception& e) {
        throw InputError(std::string("malformed curve: ") + e.what());
    } catch (const SplineError& e) {
        throw InputError(std::string("invalid curve data: ") + e.what());
    }
}

json curve_to_json(const NurbsCurve& c, const std::string& tag)
{
    json j;
    j["degree"] = c.degree();
    j["knots"] = c.basis().knots().knots();
    if (c.basis().rational()) j["weights"] = c.basis().weights();
    json pts = json::array();
    for (const auto& q : c.control_points()) pts.push_back({q.x(), q.y()});
    j["points"] = pts;
    if (!tag.empty()) j["tag"] = tag;
    return j;
}

json parse_json_text(const std::string& text, const char* what)
{
    try {
        return json::parse(text);
    } catch (const json::exception& e) {
        throw InputError(std::string(what) + ": " + e.what());
    }
}

std::string read_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw InputError("cannot open " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

GeometryDesc geometry_from_json(const json& j)
{
    if (j.value("format", std::string()) != "sbshell-geometry-v1")
        throw InputError("geometry: expected \"format\": \"sbshell-geometry-v1\"");
    GeometryDesc g;
    try {
        for (const json& b : j.value("blocks", json::array())) {
            SBBlock blk;
            blk.center = get_vec2(b.at("center"), "block center");
            for (const json& c : b.at("curves")) {
                blk.curves.push_back(parse_curve(c));
                blk.tags.push_back(c.value("tag", std::string()));
            }
            g.blocks.push_back(std::move(blk));
        }
        if (j.contains("trimming")) {
            const json& t = j.at("trimming");
            TrimmingSpec spec;
            if (t.contains("outer")) {
                for (const json& c : t.at("outer"))
                    spec.outer.push_back({parse_curve(c), SegmentOrigin::Boundary, c.value("tag", std::string())});
            } else {
                if (g.blocks.size() != 1) throw InputError("trimming: \"outer\" is required unless there is exactly one block");
                spec.outer = loop_from_block(g.blocks.front());
            }
            for (const json& c : t.value("curves", json::array()))
                spec.curves.push_back({parse_curve(c), c.value("tag", std::string("trim")), c.value("remove_inside", true)});
            for (const json& c : t.value("cuts", json::array()))
                spec.options.cuts.push_back({get_vec2(c.at("point"), "cut point"), get_vec2(c.at("direction"), "cut direction")});
            spec.options.max_depth = t.value("max_depth", spec.options.max_depth);
            g.trimming = std::move(spec);
        }
    } catch (const json::exception& e) {
        throw InputError(std::string("geometry: ") + e.what());
    }
    if (g.blocks.empty() && !g.trimming) throw InputError("geometry: no blocks");
    return g;
}

json blocks_to_json(const std::vector<SBBlock>& blocks)
{
    json j;
    j["format"] = "sbshell-geometry-v1";
    json bl = json::array();
    for (const SBBlock& b : blocks) {
        json jb;
        jb["center"] = {b.center.x(), b.center.y()};
        json cs = json::array();
        for (std::size_t k = 0; k < b.curves.size(); ++k)
            cs.push_back(curve_to_json(b.curves[k], k < b.tags.size() ? b.tags[k] : std::string()));
        jb["curves"] = cs;
        bl.push_back(jb);
    }
    j["blocks"] = bl;
    return j;
}

}  // namespace detail

GeometryDesc parse_geometry(const std::string& json_text)
{
    return detail::geometry_from_json(detail::parse_json_text(json_text, "geometry"));
}

GeometryDesc load_geometry(const std::string& path) { return parse_geometry(detail::read_file(path)); }

std::vector<SBBlock> resolve_blocks(const GeometryDesc& g)
{
    if (!g.trimming) return g.blocks;
    const Region r = trim_region(g.trimming->outer, g.trimming->curves);
    return extract_blocks(partition(r, g.trimming->options));
}

std::string geometry_to_json(const std::vector<SBBlock>& blocks) { return detail::blocks_to_json(blocks).dump(2); }

void save_geometry(const std::string& path, const std::vector<SBBlock>& blocks)
{
    std::ofstream out(path);
    if (!out) throw InputError("cannot write " + path);
    out << geometry_to_json(blocks) << "\n";
}

}  // namespace sbshell
