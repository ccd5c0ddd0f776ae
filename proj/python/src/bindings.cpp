#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <filesystem>

#include "sbshell/benchmarks.hpp"
#include "sbshell/errors.hpp"
#include "sbshell/geometry_io.hpp"
#include "sbshell/output.hpp"

namespace py = pybind11;
using namespace sbshell;

namespace {

Problem load_target(const std::string& target)
{
    const std::filesystem::path p(target);
    if (p.extension() == ".json" && std::filesystem::exists(p)) return load_problem(target);
    return make_benchmark(target).problem;
}

RunResult run(const std::string& target, std::optional<int> p, std::optional<std::string> h, int r,
              const std::string& solver)
{
    const Problem pb = load_target(target);
    RunOptions o;
    o.degree = p.value_or(pb.degrees.front());
    o.elements = h ? parse_mesh_size(*h) : pb.elements.front();
    o.regularity = r;
    if (solver != "direct" && solver != "cg") throw InputError("solver must be 'direct' or 'cg'");
    o.solver = solver == "cg" ? SolverKind::CG : SolverKind::Direct;
    py::gil_scoped_release release;
    return run_problem(pb, o);
}

py::dict lattice(const RunResult& r, int n)
{
    const Lattice lat = sample_lattice(*r.analysis, n);
    const auto np = static_cast<Eigen::Index>(lat.position.size());
    Eigen::MatrixXd x(np, 3), u(np, 3), th(np, 2);
    for (Eigen::Index i = 0; i < np; ++i) {
        x.row(i) = lat.position[static_cast<std::size_t>(i)].transpose();
        u.row(i) = lat.displacement[static_cast<std::size_t>(i)].transpose();
        th.row(i) = lat.theta[static_cast<std::size_t>(i)].transpose();
    }
    Eigen::MatrixXi cells(static_cast<Eigen::Index>(lat.cells.size()), 4);
    for (std::size_t c = 0; c < lat.cells.size(); ++c)
        for (int k = 0; k < 4; ++k) cells(static_cast<Eigen::Index>(c), k) = lat.cells[c][static_cast<std::size_t>(k)];
    py::dict d;
    d["position"] = x;
    d["theta"] = th;
    d["displacement"] = u;
    d["cells"] = cells;
    return d;
}

}  // namespace

PYBIND11_MODULE(_sbshell, m)
{
    m.doc() = "Kirchhoff-Love shells on scaled-boundary isogeometric multi-patch domains";

    py::register_exception<InputError>(m, "InputError", PyExc_ValueError);
    py::register_exception<GeometryError>(m, "GeometryError", PyExc_RuntimeError);
    py::register_exception<SolverError>(m, "SolverError", PyExc_RuntimeError);

    py::class_<RunResult>(m, "RunResult")
        .def_readonly("problem", &RunResult::problem)
        .def_readonly("degree", &RunResult::degree)
        .def_readonly("elements", &RunResult::elements)
        .def_readonly("h", &RunResult::h)
        .def_readonly("dof", &RunResult::dof)
        .def_readonly("num_patches", &RunResult::num_patches)
        .def_readonly("geometry_deviation", &RunResult::geometry_deviation)
        .def_readonly("seconds_setup", &RunResult::seconds_setup)
        .def_readonly("seconds_solve", &RunResult::seconds_solve)
        .def_property_readonly("values",
                               [](const RunResult& r) {
                                   py::dict d;
                                   for (const PointValue& v : r.values) d[py::str(v.name)] = Eigen::Vector3d(v.u);
                                   return d;
                               })
        .def_property_readonly("l2", [](const RunResult& r) -> std::optional<double> {
            return r.errors ? std::optional<double>(r.errors->l2) : std::nullopt;
        })
        .def_property_readonly("h2", [](const RunResult& r) -> std::optional<double> {
            return r.errors ? std::optional<double>(r.errors->h2) : std::nullopt;
        })
        .def_property_readonly("residual", [](const RunResult& r) { return r.solve.residual; })
        .def("lattice", &lattice, py::arg("samples") = 4, "solution sampled on a lattice per element")
        .def("write_vtk", [](const RunResult& r, const std::string& path, int n) { write_vtk(path, sample_lattice(*r.analysis, n)); },
             py::arg("path"), py::arg("samples") = 4)
        .def("__repr__", [](const RunResult& r) {
            return "<RunResult " + r.problem + " p=" + std::to_string(r.degree) + " h=1/" + std::to_string(r.elements) +
                   " dof=" + std::to_string(r.dof) + ">";
        });

    m.def("list_cases", &benchmark_names);
    m.def("case_info", [](const std::string& name) {
        const BenchmarkCase bc = make_benchmark(name);
        py::list refs;
        for (const ReferenceValue& r : bc.references) refs.append(py::make_tuple(r.quantity, r.value, r.citation));
        py::dict d;
        d["name"] = bc.name;
        d["description"] = bc.description;
        d["degrees"] = bc.problem.degrees;
        d["elements"] = bc.problem.elements;
        d["references"] = refs;
        return d;
    });
    m.def("run", &run, py::arg("target"), py::arg("p") = py::none(), py::arg("h") = py::none(), py::arg("r") = 1,
          py::arg("solver") = "direct", "run a built-in case or a problem file at one mesh level");
    m.def("partition", [](const std::string& path, std::optional<std::string> emit) {
        const std::vector<SBBlock> blocks = resolve_blocks(load_geometry(path));
        if (emit) save_geometry(*emit, blocks);
        std::vector<Eigen::Vector2d> centres;
        for (const SBBlock& b : blocks) centres.push_back(b.center);
        return centres;
    }, py::arg("geometry"), py::arg("emit") = py::none(), "star-shaped blocks of a geometry file; returns their centres");
    m.def("parse_mesh_size", &parse_mesh_size);
    m.def("loglog_slope", &loglog_slope);
}
