#pragma once
// Small geometry fixtures shared by the unit tests.

#include <numbers>
#include <vector>

#include "sbshell/sb_geometry.hpp"

namespace fixtures {

using sbshell::NurbsCurve;
using sbshell::SBBlock;
using V2 = Eigen::Vector2d;

// Closed polygon loop a0 -> a1 -> ... -> a0 as straight curves.
inline SBBlock polygon_block(const std::vector<V2>& pts, const V2& center)
{
    SBBlock b;
    b.center = center;
    for (std::size_t k = 0; k < pts.size(); ++k) {
        b.curves.push_back(NurbsCurve::line(pts[k], pts[(k + 1) % pts.size()]));
        b.tags.push_back("side" + std::to_string(k));
    }
    return b;
}

inline SBBlock square_block(double a = 2.0, V2 center = V2(1.0, 1.0))
{
    return polygon_block({V2(0, 0), V2(a, 0), V2(a, a), V2(0, a)}, center);
}

// Unit disk from three 120 degree arcs.
inline SBBlock disk_block(V2 center = V2(0.1, -0.05))
{
    SBBlock b;
    b.center = center;
    const double t = 2.0 * std::numbers::pi / 3.0;
    for (int k = 0; k < 3; ++k) b.curves.push_back(NurbsCurve::arc(V2(0, 0), 1.0, k * t, (k + 1) * t));
    return b;
}

// [0,2]x[0,1] split at x=1 into two square blocks.
inline std::vector<SBBlock> two_blocks()
{
    return {polygon_block({V2(0, 0), V2(1, 0), V2(1, 1), V2(0, 1)}, V2(0.45, 0.55)),
            polygon_block({V2(1, 0), V2(2, 0), V2(2, 1), V2(1, 1)}, V2(1.5, 0.4))};
}

}  // namespace fixtures
