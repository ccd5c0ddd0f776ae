#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "fixtures.hpp"
#include "sbshell/benchmarks.hpp"
#include "sbshell/errors.hpp"
#include "sbshell/geometry_io.hpp"
#include "sbshell/output.hpp"

using namespace sbshell;
using fixtures::V2;

namespace {

std::string temp_path(const std::string& name)
{
    return (std::filesystem::temp_directory_path() / ("sbshell_test_" + name)).string();
}

const char* kSquareProblem = R"({
  "format": "sbshell-problem-v1",
  "name": "plate",
  "geometry": {"format": "sbshell-geometry-v1",
               "blocks": [{"center": [1, 1],
                           "curves": [{"line": [[0, 0], [2, 0]], "tag": "s0"},
                                      {"line": [[2, 0], [2, 2]], "tag": "s1"},
                                      {"line": [[2, 2], [0, 2]], "tag": "s2"},
                                      {"line": [[0, 2], [0, 0]], "tag": "s3"}]}]},
  "material": {"E": 1e6, "nu": 0.1, "t": 0.1},
  "boundary": {"default": "hinged", "tags": {"s3": "clamped"}},
  "load": {"body": {"type": "constant", "value": [0, 0, -1]}},
  "points": [{"name": "mid", "point": [1, 1]}],
  "degrees": [3, 4],
  "h": ["1/2", "1/4"]
})";

}  // namespace

TEST(MeshSize, AcceptsFractionsDecimalsAndCounts)
{
    EXPECT_EQ(parse_mesh_size("1/4"), 4);
    EXPECT_EQ(parse_mesh_size("0.125"), 8);
    EXPECT_EQ(parse_mesh_size("6"), 6);
    EXPECT_THROW(parse_mesh_size("1/3.5"), InputError);
    EXPECT_THROW(parse_mesh_size("abc"), InputError);
    EXPECT_THROW(parse_mesh_size("0"), InputError);
}

TEST(GeometryIo, RoundTripKeepsCurves)
{
    const std::vector<SBBlock> blocks{fixtures::disk_block(), fixtures::square_block()};
    const std::string path = temp_path("geom.json");
    save_geometry(path, blocks);
    const std::vector<SBBlock> back = resolve_blocks(load_geometry(path));
    std::remove(path.c_str());
    ASSERT_EQ(back.size(), blocks.size());
    for (std::size_t b = 0; b < blocks.size(); ++b) {
        EXPECT_LT((back[b].center - blocks[b].center).norm(), 1e-15);
        ASSERT_EQ(back[b].curves.size(), blocks[b].curves.size());
        for (std::size_t c = 0; c < blocks[b].curves.size(); ++c)
            for (int s = 0; s <= 20; ++s) {
                const double t = s / 20.0;
                EXPECT_LT((back[b].curves[c].point(t) - blocks[b].curves[c].point(t)).norm(), 1e-14);
            }
    }
    EXPECT_EQ(back[1].tags, blocks[1].tags);
}

TEST(GeometryIo, TrimmingSectionIsPartitioned)
{
    const std::string text = R"({"format": "sbshell-geometry-v1",
      "blocks": [{"center": [0, 0], "curves": [{"line": [[-4, -4], [4, -4]]}, {"line": [[4, -4], [4, 4]]},
                                               {"line": [[4, 4], [-4, 4]]}, {"line": [[-4, 4], [-4, -4]]}]}],
      "trimming": {"curves": [{"circle": {"center": [0, 0], "radius": 1}, "tag": "hole"}]}})";
    const std::vector<SBBlock> blocks = resolve_blocks(parse_geometry(text));
    EXPECT_EQ(blocks.size(), 4u);
    SBDomain dom(blocks, {3, 1, 2});
    EXPECT_NEAR(dom.area(), 64.0 - std::numbers::pi, 1e-6);
}

TEST(GeometryIo, MalformedInputRaises)
{
    EXPECT_THROW(parse_geometry("{"), InputError);
    EXPECT_THROW(parse_geometry(R"({"format": "other"})"), InputError);
    EXPECT_THROW(parse_geometry(R"({"format": "sbshell-geometry-v1", "blocks": [{"center": [0, 0]}]})"), InputError);
    EXPECT_THROW(load_geometry(temp_path("missing.json")), InputError);
}

TEST(ProblemIo, ParsesAllSections)
{
    const Problem pb = parse_problem(kSquareProblem);
    EXPECT_EQ(pb.name, "plate");
    ASSERT_EQ(pb.blocks.size(), 1u);
    EXPECT_DOUBLE_EQ(pb.material.E, 1e6);
    EXPECT_DOUBLE_EQ(pb.material.t, 0.1);
    EXPECT_EQ(pb.degrees, (std::vector<int>{3, 4}));
    EXPECT_EQ(pb.elements, (std::vector<int>{2, 4}));
    ASSERT_EQ(pb.points.size(), 1u);
    EXPECT_EQ(pb.points[0].name, "mid");
    EXPECT_TRUE(pb.boundary.by_tag.count("s3"));
    ASSERT_TRUE(pb.load.body);
    EXPECT_DOUBLE_EQ(pb.load.body(V2(0.3, 0.4), Vector3d::Zero()).z(), -1.0);
}

TEST(ProblemIo, RejectsUnknownMapAndCondition)
{
    std::string bad = kSquareProblem;
    bad.replace(bad.find("\"hinged\""), 8, "\"sticky\"");
    EXPECT_THROW(parse_problem(bad), InputError);
    MapSpec m;
    m.type = "torus";
    EXPECT_THROW(make_surface_map(m), InputError);
}

TEST(Output, VtkPointCountMatchesLattice)
{
    Problem pb = parse_problem(kSquareProblem);
    RunOptions opt;
    opt.elements = 2;
    const RunResult r = run_problem(pb, opt);
    const Lattice lat = sample_lattice(*r.analysis, 3);
    EXPECT_EQ(lat.position.size(), static_cast<std::size_t>(r.num_patches * 2 * 2 * 16));
    const std::string path = temp_path("out.vtk");
    write_vtk(path, lat);
    EXPECT_EQ(read_vtk_point_count(path), static_cast<int>(lat.position.size()));
    std::remove(path.c_str());
}

TEST(Output, ZeroLoadGivesZeroField)
{
    Problem pb = parse_problem(kSquareProblem);
    pb.load = {};
    RunOptions opt;
    opt.elements = 2;
    const RunResult r = run_problem(pb, opt);
    const Lattice lat = sample_lattice(*r.analysis, 2);
    for (const Vector3d& u : lat.displacement) EXPECT_EQ(u.norm(), 0.0);
}

TEST(Output, CsvIsDeterministic)
{
    const std::vector<TableRow> rows{{0.25, 633, 3, {1.5, 2e-3}}, {0.125, 1800, 3, {0.4, 1.25e-4}}};
    const std::string a = format_csv({"H2", "L2"}, rows), b = format_csv({"H2", "L2"}, rows);
    EXPECT_EQ(a, b);
    EXPECT_EQ(a.substr(0, a.find('\n')), "h,dof,p,H2,L2");
    EXPECT_NE(a.find("0.125,1800,3,0.4,0.000125"), std::string::npos);
}

TEST(Output, SlopeNeedsTwoLevels)
{
    EXPECT_THROW(loglog_slope({0.5}, {1.0}), InputError);
    EXPECT_NEAR(loglog_slope({0.5, 0.25, 0.125}, {4.0, 1.0, 0.25}), 2.0, 1e-12);
}

TEST(Output, TripletDumpHeader)
{
    SparseMatrix M(3, 2);
    M.insert(0, 1) = 2.5;
    M.insert(2, 0) = -1.0;
    const std::string path = temp_path("m.txt");
    dump_triplets(path, M, "test");
    std::ifstream in(path);
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "# test");
    int r = 0, c = 0, n = 0;
    in >> r >> c >> n;
    EXPECT_EQ(r, 3);
    EXPECT_EQ(c, 2);
    EXPECT_EQ(n, 2);
    std::remove(path.c_str());
}

TEST(Benchmarks, NamesBuildAndUnknownRaises)
{
    for (const std::string& n : benchmark_names()) {
        if (n == "plate-16holes" || n == "violin") continue;
        const BenchmarkCase bc = make_benchmark(n);
        EXPECT_FALSE(bc.problem.blocks.empty()) << n;
    }
    EXPECT_THROW(make_benchmark("nope"), InputError);
    EXPECT_FALSE(benchmark_references("hypar-t100").empty());
}

TEST(Benchmarks, ArcThroughPassesTheThreePoints)
{
    const V2 a(0, -17), m(8, -14), b(10, -6);
    const NurbsCurve c = arc_through(a, m, b);
    EXPECT_LT((c.point(c.t0()) - a).norm(), 1e-12);
    EXPECT_LT((c.point(c.t1()) - b).norm(), 1e-12);
    double best = 1e9;
    for (int s = 0; s <= 2000; ++s) best = std::min(best, (c.point(c.t0() + (c.t1() - c.t0()) * s / 2000.0) - m).norm());
    EXPECT_LT(best, 1e-2);
    EXPECT_THROW(arc_through(V2(0, 0), V2(1, 1), V2(2, 2)), GeometryError);
}
