// sbshell: run built-in benchmark cases or problem files, sweep meshes,
// partition trimmed geometries.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sbshell/benchmarks.hpp"
#include "sbshell/errors.hpp"
#include "sbshell/geometry_io.hpp"
#include "sbshell/output.hpp"

using namespace sbshell;

namespace {

struct Common {
    std::string target;
    int p = 0;
    int r = 1;
    std::vector<std::string> h;
    std::string solver = "direct";
    std::string csv;
};

Problem load_target(const std::string& target)
{
    if (std::filesystem::exists(target) && target.size() > 5 && target.substr(target.size() - 5) == ".json")
        return load_problem(target);
    return make_benchmark(target).problem;
}

RunOptions options(const Common& c, int degree, int elements)
{
    RunOptions o;
    o.degree = degree;
    o.regularity = c.r;
    o.elements = elements;
    o.solver = c.solver == "cg" ? SolverKind::CG : SolverKind::Direct;
    return o;
}

std::vector<int> mesh_levels(const Common& c, const Problem& pb)
{
    if (c.h.empty()) return pb.elements;
    std::vector<int> out;
    for (const auto& h : c.h) out.push_back(parse_mesh_size(h));
    return out;
}

std::vector<int> degrees(const Common& c, const Problem& pb)
{
    return c.p > 0 ? std::vector<int>{c.p} : pb.degrees;
}

void print_result(const RunResult& r)
{
    std::printf("case        %s\n", r.problem.c_str());
    std::printf("degree      %d (C%d)\n", r.degree, r.regularity);
    std::printf("h           1/%d\n", r.elements);
    std::printf("patches     %d\n", r.num_patches);
    std::printf("dof         %d\n", r.dof);
    std::printf("solver      %s  residual %.3e  backward error %.3e\n", r.solve.solver.c_str(), r.solve.residual,
                r.solve.backward_error);
    std::printf("geometry    max deviation %.3e\n", r.geometry_deviation);
    std::printf("time        setup %.2f s  solve %.2f s\n", r.seconds_setup, r.seconds_solve);
    for (const PointValue& v : r.values)
        std::printf("u(%s) at (%g, %g)  %.10g %.10g %.10g\n", v.name.c_str(), v.theta.x(), v.theta.y(), v.u.x(), v.u.y(),
                    v.u.z());
    if (r.errors) std::printf("error       L2 %.6e  H2 %.6e\n", r.errors->l2, r.errors->h2);
}

std::vector<std::string> value_columns(const RunResult& r)
{
    std::vector<std::string> cols;
    for (const PointValue& v : r.values)
        for (const char* c : {"ux", "uy", "uz"}) cols.push_back(v.name + "_" + c);
    if (r.errors) {
        cols.push_back("L2");
        cols.push_back("H2");
    }
    return cols;
}

TableRow table_row(const RunResult& r)
{
    TableRow row{r.h, r.dof, r.degree, {}};
    for (const PointValue& v : r.values)
        for (int k = 0; k < 3; ++k) row.values.push_back(v.u[k]);
    if (r.errors) {
        row.values.push_back(r.errors->l2);
        row.values.push_back(r.errors->h2);
    }
    return row;
}

int cmd_list()
{
    for (const std::string& n : benchmark_names()) {
        const BenchmarkCase bc = make_benchmark(n);
        std::printf("%-22s %s\n", n.c_str(), bc.description.c_str());
        for (const ReferenceValue& ref : bc.references)
            if (ref.value != 0.0) std::printf("%-22s   ref %s = %.10g (%s)\n", "", ref.quantity.c_str(), ref.value, ref.citation.c_str());
    }
    return 0;
}

int cmd_run(const Common& c, const std::string& vtk, int vtk_samples, const std::string& dump)
{
    const Problem pb = load_target(c.target);
    const RunResult r = run_problem(pb, options(c, degrees(c, pb).front(), mesh_levels(c, pb).front()));
    print_result(r);
    if (!vtk.empty()) {
        write_vtk(vtk, sample_lattice(*r.analysis, vtk_samples));
        std::printf("wrote %s\n", vtk.c_str());
    }
    if (!c.csv.empty()) {
        write_csv(c.csv, value_columns(r), {table_row(r)});
        std::printf("wrote %s\n", c.csv.c_str());
    }
    if (!dump.empty()) {
        dump_triplets(dump, r.analysis->bases.free.T, "C1 coupling matrix T (raw x coupled), " + pb.name);
        std::printf("wrote %s\n", dump.c_str());
    }
    return 0;
}

int cmd_sweep(const Common& c)
{
    const Problem pb = load_target(c.target);
    const std::vector<int> levels = mesh_levels(c, pb);
    if (levels.size() < 2) throw InputError("a sweep needs at least two mesh levels");
    std::vector<std::string> cols;
    std::vector<TableRow> rows;
    for (int p : degrees(c, pb)) {
        std::vector<double> hs, l2, h2;
        for (int k : levels) {
            const RunResult r = run_problem(pb, options(c, p, k));
            if (cols.empty()) cols = value_columns(r);
            rows.push_back(table_row(r));
            hs.push_back(r.h);
            if (r.errors) {
                l2.push_back(r.errors->l2);
                h2.push_back(r.errors->h2);
            }
        }
        if (!l2.empty())
            std::fprintf(stderr, "p=%d  slope L2 %.3f  H2 %.3f\n", p, loglog_slope(hs, l2), loglog_slope(hs, h2));
    }
    const std::string table = format_csv(cols, rows);
    std::cout << table;
    if (!c.csv.empty()) write_csv(c.csv, cols, rows);
    return 0;
}

int cmd_trim(const std::string& path, const std::string& emit)
{
    const std::vector<SBBlock> blocks = resolve_blocks(load_geometry(path));
    std::printf("blocks      %zu\n", blocks.size());
    for (std::size_t b = 0; b < blocks.size(); ++b)
        std::printf("block %zu     centre (%.6g, %.6g), %zu curves\n", b, blocks[b].center.x(), blocks[b].center.y(),
                    blocks[b].curves.size());
    if (!emit.empty()) {
        save_geometry(emit, blocks);
        std::printf("wrote %s\n", emit.c_str());
    }
    return 0;
}

void add_common(CLI::App* sub, Common& c)
{
    sub->set_help_flag("--help", "print this help");  // -h would clash with --h
    sub->add_option("case", c.target, "built-in case name or problem file (*.json)")->required();
    sub->add_option("--p", c.p, "spline degree (default: from the case)")->check(CLI::Range(2, 9));
    sub->add_option("--r", c.r, "inter-element regularity")->check(CLI::Range(1, 8));
    sub->add_option("--h", c.h, "mesh size per direction, e.g. 1/8");
    sub->add_option("--solver", c.solver, "linear solver")->check(CLI::IsMember({"direct", "cg"}));
    sub->add_option("--csv", c.csv, "write a CSV table");
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Kirchhoff-Love shells on scaled-boundary isogeometric multi-patch domains"};
    app.require_subcommand(1);

    app.add_subcommand("list", "list built-in cases");

    Common run_opt;
    std::string vtk, dump;
    int vtk_samples = 4;
    auto* run = app.add_subcommand("run", "single analysis");
    add_common(run, run_opt);
    run->add_option("--vtk", vtk, "write the displacement field as legacy VTK");
    run->add_option("--vtk-samples", vtk_samples, "lattice points per element edge")->check(CLI::Range(1, 64));
    run->add_option("--dump-coupling", dump, "write the C1 coupling matrix as triplets");

    Common sweep_opt;
    auto* sweep = app.add_subcommand("sweep", "mesh/degree sweep with convergence rates");
    add_common(sweep, sweep_opt);

    std::string geom, emit;
    auto* trim = app.add_subcommand("trim", "partition a trimmed geometry into star-shaped blocks");
    trim->add_option("geometry", geom, "sbshell-geometry-v1 file")->required()->check(CLI::ExistingFile);
    trim->add_option("--emit-geometry", emit, "write the resulting blocks");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (app.got_subcommand("list")) return cmd_list();
        if (app.got_subcommand("run")) return cmd_run(run_opt, vtk, vtk_samples, dump);
        if (app.got_subcommand("sweep")) return cmd_sweep(sweep_opt);
        if (app.got_subcommand("trim")) return cmd_trim(geom, emit);
    } catch (const InputError& e) {
        std::fprintf(stderr, "error: %s\n\n%s", e.what(), app.help().c_str());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
