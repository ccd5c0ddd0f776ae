#pragma once
/// @file problem.hpp
/// @brief Analysis problems (`sbshell-problem-v1`) and the run driver.
///
/// Problem file layout:
///
///     {
///       "format": "sbshell-problem-v1",
///       "name": "my-roof",
///       "geometry": "roof.geometry.json",        // path or inline object
///       "map": {"type": "cylinder", "radius": 25, "angle": 80, "length": 50,
///               "extent": [1, 2]},
///       "material": {"E": 4.32e8, "nu": 0.0, "t": 0.25},
///       "boundary": {"default": "free",
///                    "tags": {"side0": ["trace", "free", "trace"], "side3": "clamped"},
///                    "pins": [{"point": [0, 0], "component": 1}]},
///       "load": {"body": {"type": "constant", "value": [0, 0, -90]},
///                "points": [{"point": [0, 0], "force": [0, 0, -1]}]},
///       "exact": {"type": "sinsin", "amplitude": 1, "wavenumber": 3.14159},
///       "points": [{"name": "A", "point": [0.5, 0]}],
///       "degrees": [3], "regularity": 1, "h": ["1/4", "1/8"]
///     }
///
/// Map types: identity; cylinder (radius, angle in degrees, length, extent
/// of the centred parameter box); hypar (z = c (x^2 - y^2)); gaussian
/// (z = amplitude exp(-a x^2) exp(-b y^2)). Boundary conditions per tag are
/// "clamped", "hinged", "free" or a per-component list of
/// "free" / "trace" / "clamped". Body loads are "constant" or "sinsin"
/// (z load amplitude sin(k x) sin(k y)).

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "sbshell/coupling.hpp"
#include "sbshell/sb_geometry.hpp"
#include "sbshell/shell.hpp"

namespace sbshell {

struct MapSpec {
    std::string type = "identity";
    std::map<std::string, double> params;
    double param(const std::string& key, double fallback) const;
};

/// Throws InputError for unknown types.
SurfaceMap make_surface_map(const MapSpec& spec);

struct NamedPoint {
    std::string name;
    Eigen::Vector2d theta = Eigen::Vector2d::Zero();
};

struct Problem {
    std::string name;
    std::vector<SBBlock> blocks;
    MapSpec map;
    Material material;
    BoundarySpec boundary;
    LoadSpec load;
    ReferenceField exact;  ///< empty when no closed-form solution exists
    std::vector<NamedPoint> points;
    std::vector<int> degrees{3};
    int regularity = 1;
    std::vector<int> elements{4};
};

/// Relative paths in the text resolve against base_dir.
Problem parse_problem(const std::string& json_text, const std::string& base_dir = ".");
Problem load_problem(const std::string& path);

/// "1/4", "0.25" or "4" to a number of elements per direction.
int parse_mesh_size(const std::string& h);

struct RunOptions {
    int degree = 3;
    int regularity = 1;
    int elements = 4;
    SolverKind solver = SolverKind::Direct;
    CouplingOptions coupling;
};

/// Everything an analysis builds; pointers between members make it
/// immovable once constructed.
struct Analysis {
    SBDomain domain;
    ComponentBases bases;
    std::unique_ptr<ShellSurface> surface;
    ShellSystem system;
    ShellSolution solution;

    Analysis() = default;
    Analysis(const Analysis&) = delete;
    Analysis& operator=(const Analysis&) = delete;
};

struct PointValue {
    std::string name;
    Eigen::Vector2d theta;
    Vector3d u;
};

struct RunResult {
    std::string problem;
    int degree = 0;
    int regularity = 0;
    int elements = 0;
    double h = 0.0;
    int dof = 0;        ///< unknowns of the reduced system
    int num_raw = 0;    ///< raw functions per component
    int num_patches = 0;
    std::vector<PointValue> values;
    std::optional<ErrorNorms> errors;
    SolveInfo solve;
    double geometry_deviation = 0.0;
    double seconds_setup = 0.0;
    double seconds_solve = 0.0;
    std::shared_ptr<const Analysis> analysis;
};

RunResult run_problem(const Problem& problem, const RunOptions& opt);

}  // namespace sbshell
