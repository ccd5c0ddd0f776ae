#pragma once
/// @file geometry_io.hpp
/// @brief Reading and writing `sbshell-geometry-v1` files.
///
/// Layout:
///
///     {
///       "format": "sbshell-geometry-v1",
///       "blocks": [
///         {"center": [x, y],
///          "curves": [{"degree": 2, "knots": [...], "weights": [...],
///                      "points": [[x, y], ...], "tag": "side0"}, ...]}
///       ],
///       "trimming": {
///         "outer": [curve, ...],        // optional, defaults to the single block
///         "curves": [curve + {"remove_inside": true}, ...],
///         "cuts": [{"point": [x, y], "direction": [dx, dy]}, ...],
///         "max_depth": 8
///       }
///     }
///
/// A curve may also be given by one of the shorthands
/// {"line": [[x0, y0], [x1, y1]]}, {"arc": {"center", "radius", "angles"}},
/// {"circle": {"center", "radius", "ccw"}} or {"ellipse": {"center", "radii"}};
/// angles are in degrees. "weights" may be omitted for polynomial curves.

#include <optional>
#include <string>
#include <vector>

#include "sbshell/sb_geometry.hpp"
#include "sbshell/trimming.hpp"

namespace sbshell {

struct TrimmingSpec {
    Loop outer;
    std::vector<TrimmingCurve> curves;
    PartitionOptions options;
};

struct GeometryDesc {
    std::vector<SBBlock> blocks;
    std::optional<TrimmingSpec> trimming;
};

/// Throws InputError on malformed input.
GeometryDesc parse_geometry(const std::string& json_text);
GeometryDesc load_geometry(const std::string& path);

/// The analysis blocks: the given ones, or the partition of the trimmed
/// region when a trimming section is present.
std::vector<SBBlock> resolve_blocks(const GeometryDesc& g);

std::string geometry_to_json(const std::vector<SBBlock>& blocks);
void save_geometry(const std::string& path, const std::vector<SBBlock>& blocks);

}  // namespace sbshell
