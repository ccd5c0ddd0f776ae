#include "sbshell/output.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "sbshell/errors.hpp"

namespace sbshell {

Lattice sample_lattice(const Analysis& a, int n)
{
    if (n < 1) throw InputError("lattice resolution must be positive");
    Lattice lat;
    const SBDomain& dom = a.domain;
    for (int m = 0; m < dom.num_patches(); ++m) {
        const SBPatch& P = dom.patch(m);
        for (const auto& [z0, z1] : P.boundary().basis().knots().elements())
            for (const auto& [x0, x1] : P.radial().elements()) {
                const int base = static_cast<int>(lat.position.size());
                for (int b = 0; b <= n; ++b)
                    for (int c = 0; c <= n; ++c) {
                        const double z = z0 + (z1 - z0) * c / n, x = x0 + (x1 - x0) * b / n;
                        const PointBasis pb = dom.eval_basis(m, z, x, 0);
                        lat.position.push_back(a.surface->jet(pb).x);
                        lat.theta.push_back(P.eval(z, x).x);
                        lat.displacement.push_back(a.solution.value(pb));
                    }
                for (int b = 0; b < n; ++b)
                    for (int c = 0; c < n; ++c) {
                        const int q = base + b * (n + 1) + c;
                        lat.cells.push_back({q, q + 1, q + n + 2, q + n + 1});
                    }
            }
    }
    return lat;
}

void write_vtk(const std::string& path, const Lattice& lat)
{
    std::ofstream out(path);
    if (!out) throw InputError("cannot write " + path);
    out << std::setprecision(12);
    out << "# vtk DataFile Version 3.0\nsbshell displacement\nASCII\nDATASET UNSTRUCTURED_GRID\n";
    out << "POINTS " << lat.position.size() << " double\n";
    for (const Vector3d& x : lat.position) out << x.x() << ' ' << x.y() << ' ' << x.z() << '\n';
    out << "CELLS " << lat.cells.size() << ' ' << 5 * lat.cells.size() << '\n';
    for (const auto& c : lat.cells) out << "4 " << c[0] << ' ' << c[1] << ' ' << c[2] << ' ' << c[3] << '\n';
    out << "CELL_TYPES " << lat.cells.size() << '\n';
    for (std::size_t k = 0; k < lat.cells.size(); ++k) out << "9\n";
    out << "POINT_DATA " << lat.position.size() << "\nVECTORS displacement double\n";
    for (const Vector3d& u : lat.displacement) out << u.x() << ' ' << u.y() << ' ' << u.z() << '\n';
    out << "SCALARS u_z double 1\nLOOKUP_TABLE default\n";
    for (const Vector3d& u : lat.displacement) out << u.z() << '\n';
    out << "SCALARS magnitude double 1\nLOOKUP_TABLE default\n";
    for (const Vector3d& u : lat.displacement) out << u.norm() << '\n';
}

int read_vtk_point_count(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw InputError("cannot open " + path);
    std::string word;
    while (in >> word)
        if (word == "POINTS") {
            int n = -1;
            in >> n;
            return n;
        }
    throw InputError(path + ": no POINTS section");
}

std::string format_csv(const std::vector<std::string>& columns, const std::vector<TableRow>& rows)
{
    std::ostringstream os;
    os << "h,dof,p";
    for (const auto& c : columns) os << ',' << c;
    os << '\n' << std::setprecision(15);
    for (const TableRow& r : rows) {
        os << r.h << ',' << r.dof << ',' << r.degree;
        for (double v : r.values) os << ',' << v;
        os << '\n';
    }
    return os.str();
}

void write_csv(const std::string& path, const std::vector<std::string>& columns, const std::vector<TableRow>& rows)
{
    std::ofstream out(path);
    if (!out) throw InputError("cannot write " + path);
    out << format_csv(columns, rows);
}

void dump_triplets(const std::string& path, const SparseMatrix& M, const std::string& comment)
{
    std::ofstream out(path);
    if (!out) throw InputError("cannot write " + path);
    out << "# " << comment << '\n' << M.rows() << ' ' << M.cols() << ' ' << M.nonZeros() << '\n';
    out << std::setprecision(17);
    for (int k = 0; k < M.outerSize(); ++k)
        for (SparseMatrix::InnerIterator it(M, k); it; ++it) out << it.row() << ' ' << it.col() << ' ' << it.value() << '\n';
}

double loglog_slope(const std::vector<double>& h, const std::vector<double>& value)
{
    if (h.size() != value.size() || h.size() < 2) throw InputError("a rate needs at least two mesh levels");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(h.size());
    for (std::size_t k = 0; k < h.size(); ++k) {
        const double x = std::log(h[k]), y = std::log(value[k]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace sbshell
