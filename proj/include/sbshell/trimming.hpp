#pragma once
/// @file trimming.hpp
/// @brief Trimmed planar regions: curve intersection, Boolean difference with
/// closed trimming curves and partition into star-shaped blocks with straight
/// cut lines.

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sbshell/sb_geometry.hpp"
#include "sbshell/spline.hpp"

namespace sbshell {

enum class SegmentOrigin { Boundary, Trim, Cut };

/// One boundary piece of a region, parametrized on [0,1].
struct Segment {
    NurbsCurve curve;
    SegmentOrigin origin = SegmentOrigin::Boundary;
    std::string tag;
};

/// Closed chain of segments; the region lies on the left.
using Loop = std::vector<Segment>;

/// loops[0] is the outer boundary (ccw), the rest are holes (cw).
struct Region {
    std::vector<Loop> loops;
};

struct TrimmingCurve {
    NurbsCurve curve;
    std::string tag = "trim";
    /// Remove the material inside the curve (a hole) or keep only the inside.
    bool remove_inside = true;
};

struct CurveIntersection {
    int curve = -1;  ///< index into the boundary list
    double zeta = 0.0;
    double s = 0.0;  ///< parameter on the trimming curve
    Eigen::Vector2d point = Eigen::Vector2d::Zero();
};

/// All crossings of trim with the boundary curves: polyline crossings on 1024
/// samples refined by Newton. Throws GeometryError if Newton does not
/// converge in 50 iterations.
std::vector<CurveIntersection> intersect(const NurbsCurve& trim, const std::vector<NurbsCurve>& boundary);

/// Straight line through point along direction.
struct CutLine {
    Eigen::Vector2d point = Eigen::Vector2d::Zero();
    Eigen::Vector2d direction = Eigen::Vector2d::UnitX();
};

struct StarBlock {
    Loop boundary;
    Eigen::Vector2d center = Eigen::Vector2d::Zero();
};

struct PartitionPlan {
    std::vector<StarBlock> blocks;
};

struct PartitionOptions {
    int max_depth = 8;
    int kernel_samples = 720;
    /// Applied to every region before the automatic recursion.
    std::vector<CutLine> cuts;
};

Loop loop_from_block(const SBBlock& block, SegmentOrigin origin = SegmentOrigin::Boundary);
/// Signed area by Green's formula.
double loop_area(const Loop& loop);
double region_area(const Region& region);

/// Outer loop minus (or intersected with) each trimming curve.
Region trim_region(const Loop& outer, const std::vector<TrimmingCurve>& trims);

/// Pieces of the region on either side of the line; nullopt when the line
/// touches the boundary tangentially.
std::optional<std::vector<Region>> split_region(const Region& region, const CutLine& line);

/// Centroid of the kernel of the polygon sampled from the loop, or nullopt
/// if the kernel is empty or the loop is not visible from the centroid.
std::optional<Eigen::Vector2d> kernel_center(const Loop& loop, int samples = 720);

/// Greedy recursive partition into star-shaped blocks. Throws GeometryError
/// when the depth cap is reached.
PartitionPlan partition(const Region& region, const PartitionOptions& opt = {});

/// Blocks ready for SBDomain: every curve a single Bezier piece and straight
/// segments split at the vertices of neighbouring blocks. Cut segments are
/// tagged "cut".
std::vector<SBBlock> extract_blocks(const PartitionPlan& plan);

}  // namespace sbshell
