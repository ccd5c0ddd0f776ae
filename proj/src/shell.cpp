#include "sbshell/shell.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include <Eigen/CholmodSupport>
#include <Eigen/IterativeLinearSolvers>

#include "sbshell/errors.hpp"
#include "sbshell/quadrature.hpp"

namespace sbshell {

namespace {

// Voigt rows (e11, e22, 2 e12) for index pairs.
constexpr int kPairs[3][2] = {{0, 0}, {1, 1}, {0, 1}};

// Cholesky with access to the factor for a condition estimate.
class CholmodLLT : public Eigen::CholmodSupernodalLLT<SparseMatrix, Eigen::Lower> {
public:
    double rcond()
    {
        if (!this->m_cholmodFactor) return 0.0;
        return cholmod_rcond(this->m_cholmodFactor, &this->cholmod());
    }
};

}  // namespace

MapJet flat_map(const Eigen::Vector2d& theta)
{
    MapJet j;
    j.x << theta.x(), theta.y(), 0.0;
    j.d(0, 0) = 1.0;
    j.d(1, 1) = 1.0;
    return j;
}

void Material::validate() const
{
    if (!(t > 0.0) || !(E > 0.0) || !(nu > -1.0 && nu < 0.5))
        throw InputError("material: need t > 0, E > 0 and -1 < nu < 0.5");
}

SurfaceFrame make_frame(const MapJet& R)
{
    SurfaceFrame f;
    f.x = R.x;
    f.a1 = R.d.col(0);
    f.a2 = R.d.col(1);
    f.a11 = R.dd.col(0);
    f.a12 = R.dd.col(1);
    f.a22 = R.dd.col(2);
    const Vector3d n = f.a1.cross(f.a2);
    f.J = n.norm();
    if (f.J < 1e-14) {
        std::ostringstream os;
        os << "degenerate surface at (" << R.x.transpose() << ")";
        throw GeometryError(os.str());
    }
    f.a3 = n / f.J;
    f.cov << f.a1.dot(f.a1), f.a1.dot(f.a2), f.a2.dot(f.a1), f.a2.dot(f.a2);
    f.con = f.cov.inverse();
    return f;
}

Eigen::Matrix2d membrane_strain(const SurfaceFrame& f, const Matrix32& dv)
{
    const Vector3d a[2] = {f.a1, f.a2};
    Eigen::Matrix2d e;
    for (int x = 0; x < 2; ++x)
        for (int y = 0; y < 2; ++y) e(x, y) = 0.5 * (a[y].dot(dv.col(x)) + a[x].dot(dv.col(y)));
    return e;
}

Eigen::Matrix2d bending_strain(const SurfaceFrame& f, const Matrix32& dv, const Matrix33& ddv)
{
    const Vector3d c23 = f.a2.cross(f.a3), c13 = f.a1.cross(f.a3);
    const double g = (c23.dot(dv.col(0)) - c13.dot(dv.col(1))) / f.J;
    Eigen::Matrix2d k;
    for (int x = 0; x < 2; ++x)
        for (int y = x; y < 2; ++y) {
            const Vector3d& aab = f.ab(x, y);
            const double v = -f.a3.dot(ddv.col(x + y)) + aab.dot(f.a3) * g +
                             (aab.cross(f.a2).dot(dv.col(0)) - aab.cross(f.a1).dot(dv.col(1))) / f.J;
            k(x, y) = k(y, x) = v;
        }
    return k;
}

double constitutive(const Eigen::Matrix2d& con, double E, double nu, int a, int b, int c, int d)
{
    return E / (2.0 * (1.0 + nu)) *
           (con(a, c) * con(b, d) + con(a, d) * con(b, c) + 2.0 * nu / (1.0 - nu) * con(a, b) * con(c, d));
}

Eigen::Matrix3d constitutive_voigt(const Eigen::Matrix2d& con, double E, double nu)
{
    Eigen::Matrix3d D;
    for (int r = 0; r < 3; ++r)
        for (int s = 0; s < 3; ++s)
            D(r, s) = constitutive(con, E, nu, kPairs[r][0], kPairs[r][1], kPairs[s][0], kPairs[s][1]);
    return D;
}

ComponentConstraints BoundarySpec::clamped()
{
    return {EdgeConstraint::TraceAndNormal, EdgeConstraint::TraceAndNormal, EdgeConstraint::TraceAndNormal};
}
ComponentConstraints BoundarySpec::hinged()
{
    return {EdgeConstraint::Trace, EdgeConstraint::Trace, EdgeConstraint::Trace};
}
ComponentConstraints BoundarySpec::free()
{
    return {EdgeConstraint::Free, EdgeConstraint::Free, EdgeConstraint::Free};
}

const ComponentConstraints& BoundarySpec::at(const std::string& tag) const
{
    const auto it = by_tag.find(tag);
    return it == by_tag.end() ? fallback : it->second;
}

void for_each_quadrature_point(const SBDomain& dom, int n, const std::function<void(const PointBasis&, double)>& f)
{
    for (int m = 0; m < dom.num_patches(); ++m) {
        const SBPatch& P = dom.patch(m);
        const int nq = n > 0 ? n : P.degree() + 1;
        const auto ez = P.boundary().basis().knots().elements();
        const auto ex = P.radial().elements();
        for (const auto& [x0, x1] : ex) {
            const QuadRule qx = gauss_legendre(nq, x0, x1);
            for (const auto& [z0, z1] : ez) {
                const QuadRule qz = gauss_legendre(nq, z0, z1);
                for (std::size_t b = 0; b < qx.points.size(); ++b)
                    for (std::size_t a = 0; a < qz.points.size(); ++a) {
                        const PointBasis pb = dom.eval_basis(m, qz.points[a], qx.points[b], 2);
                        f(pb, qz.weights[a] * qx.weights[b] * pb.det);
                    }
            }
        }
    }
}

ShellSurface::ShellSurface(const SBDomain& dom, const SparseMatrix& T, const SurfaceMap& exact) : dom_(&dom)
{
    const int N = dom.num_raw();
    std::vector<Eigen::Triplet<double>> trip;
    Eigen::MatrixXd b = Eigen::MatrixXd::Zero(N, 3);
    for_each_quadrature_point(dom, 0, [&](const PointBasis& pb, double w) {
        const Vector3d R = exact(pb.x).x;
        const auto nb = static_cast<Eigen::Index>(pb.index.size());
        for (Eigen::Index i = 0; i < nb; ++i) {
            b.row(pb.index[static_cast<std::size_t>(i)]) += w * pb.N[i] * R.transpose();
            for (Eigen::Index j = 0; j < nb; ++j)
                trip.emplace_back(pb.index[static_cast<std::size_t>(i)], pb.index[static_cast<std::size_t>(j)],
                                  w * pb.N[i] * pb.N[j]);
        }
    });
    SparseMatrix M(N, N);
    M.setFromTriplets(trip.begin(), trip.end());
    // Jacobi scaling: patch areas can differ by orders of magnitude
    const SparseMatrix Mt = SparseMatrix(T.transpose() * M * T);
    Eigen::VectorXd s = Mt.diagonal();
    for (Eigen::Index i = 0; i < s.size(); ++i) {
        if (!(s[i] > 0.0)) throw SolverError("geometry projection: mass matrix is singular");
        s[i] = 1.0 / std::sqrt(s[i]);
    }
    const SparseMatrix Mc = SparseMatrix(s.asDiagonal() * Mt * s.asDiagonal());
    const Eigen::MatrixXd bc = s.asDiagonal() * (T.transpose() * b);
    CholmodLLT llt;
    llt.compute(Mc);
    if (llt.info() != Eigen::Success) throw SolverError("geometry projection: mass matrix is singular");
    const Eigen::MatrixXd P = s.asDiagonal() * llt.solve(bc);
    Praw_ = T * P;

    deviation_ = 0.0;
    for_each_quadrature_point(dom, 0, [&](const PointBasis& pb, double) {
        deviation_ = std::max(deviation_, (jet(pb).x - exact(pb.x).x).norm());
    });
}

MapJet ShellSurface::jet(const PointBasis& pb) const
{
    MapJet j;
    for (std::size_t k = 0; k < pb.index.size(); ++k) {
        const Vector3d c = Praw_.row(pb.index[k]).transpose();
        const auto kk = static_cast<Eigen::Index>(k);
        j.x += pb.N[kk] * c;
        if (pb.dN.size() == 0) continue;
        j.d.col(0) += pb.dN(0, kk) * c;
        j.d.col(1) += pb.dN(1, kk) * c;
        for (int r = 0; r < 3; ++r) j.dd.col(r) += pb.d2N(r, kk) * c;
    }
    return j;
}

SparseMatrix pin_point(const SBDomain& dom, const SparseMatrix& T, const Eigen::Vector2d& theta)
{
    const auto [m, z, x] = dom.locate(theta);
    if (m < 0) throw InputError("pinned point outside the domain");
    const PointBasis pb = dom.eval_basis(m, z, x, 0);
    const SparseRowMatrix Tr = T;
    std::map<int, double> val;
    for (std::size_t k = 0; k < pb.index.size(); ++k)
        for (SparseRowMatrix::InnerIterator it(Tr, pb.index[k]); it; ++it)
            val[static_cast<int>(it.col())] += it.value() * pb.N[static_cast<Eigen::Index>(k)];
    int kmax = -1;
    double vmax = 0.0;
    for (const auto& [c, v] : val)
        if (std::abs(v) > vmax) {
            vmax = std::abs(v);
            kmax = c;
        }
    if (kmax < 0 || vmax < 1e-12) throw InputError("pinned point is already constrained");
    // u_k = -sum_j phi_j(P) / phi_k(P) u_j
    const auto n = static_cast<int>(T.cols());
    std::vector<Eigen::Triplet<double>> trip;
    for (int j = 0, col = 0; j < n; ++j) {
        if (j == kmax) continue;
        trip.emplace_back(j, col, 1.0);
        const auto it = val.find(j);
        if (it != val.end() && it->second != 0.0) trip.emplace_back(kmax, col, -it->second / val[kmax]);
        ++col;
    }
    SparseMatrix E(n, n - 1);
    E.setFromTriplets(trip.begin(), trip.end());
    SparseMatrix R = T * E;
    R.prune(1e-14, 1.0);
    return R;
}

ComponentBases build_component_bases(const SBDomain& dom, const BoundarySpec& bc, const CouplingOptions& opt)
{
    ComponentBases out;
    out.free = build_c1_basis(dom, {}, opt);

    const auto& be = dom.boundary_edges();
    std::array<std::vector<EdgeConstraint>, 3> per;
    for (int c = 0; c < 3; ++c)
        for (const BoundaryEdge& e : be) per[static_cast<std::size_t>(c)].push_back(bc.at(e.tag)[static_cast<std::size_t>(c)]);

    // one coupling per distinct constraint pattern
    std::vector<std::vector<EdgeConstraint>> patterns;
    std::array<int, 3> which{};
    for (int c = 0; c < 3; ++c) {
        const auto& p = per[static_cast<std::size_t>(c)];
        const bool all_free = std::all_of(p.begin(), p.end(), [](EdgeConstraint e) { return e == EdgeConstraint::Free; });
        if (all_free) {
            which[static_cast<std::size_t>(c)] = -1;
            continue;
        }
        auto it = std::find(patterns.begin(), patterns.end(), p);
        if (it == patterns.end()) {
            patterns.push_back(p);
            it = patterns.end() - 1;
        }
        which[static_cast<std::size_t>(c)] = static_cast<int>(it - patterns.begin());
    }
    for (const auto& p : patterns) out.distinct.push_back(build_c1_basis(dom, dirichlet_removal(dom, p), opt));
    out.which = which;
    for (int c = 0; c < 3; ++c) {
        bool pinned = false;
        CouplingBasis b = out.component(c);
        for (const PointPin& pin : bc.pins)
            if (pin.component == c) {
                b.T = pin_point(dom, b.T, pin.theta);
                pinned = true;
            }
        if (!pinned) continue;
        b.diag.num_coupled = static_cast<int>(b.T.cols());
        out.distinct.push_back(std::move(b));
        out.which[static_cast<std::size_t>(c)] = static_cast<int>(out.distinct.size()) - 1;
    }
    return out;
}

SparseMatrix assemble_raw_stiffness(const ShellSurface& s, const Material& mat)
{
    mat.validate();
    const SBDomain& dom = s.domain();
    const int N = dom.num_raw();
    const double tm = mat.t, tb = mat.t * mat.t * mat.t / 12.0;

    // element matrices accumulate between index changes; the quadrature loop
    // visits all points of one element before moving on
    std::vector<Eigen::Triplet<double>> trip;
    std::vector<int> cur;
    Eigen::MatrixXd Ke;
    auto flush = [&]() {
        const int nb = static_cast<int>(cur.size());
        for (int c = 0; c < 3; ++c)
            for (int d = 0; d < 3; ++d)
                for (int i = 0; i < nb; ++i)
                    for (int j = 0; j < nb; ++j) {
                        const double v = Ke(c * nb + i, d * nb + j);
                        if (v != 0.0) trip.emplace_back(c * N + cur[static_cast<std::size_t>(i)], d * N + cur[static_cast<std::size_t>(j)], v);
                    }
    };
    Eigen::MatrixXd Bm, Bb;
    for_each_quadrature_point(dom, 0, [&](const PointBasis& pb, double w) {
        if (pb.index != cur) {
            if (!cur.empty()) flush();
            cur = pb.index;
            const auto n3 = static_cast<Eigen::Index>(3 * cur.size());
            Ke.setZero(n3, n3);
        }
        const SurfaceFrame f = s.frame(pb);
        const Eigen::Matrix3d D = constitutive_voigt(f.con, mat.E, mat.nu);
        const auto nb = static_cast<Eigen::Index>(cur.size());
        Bm.setZero(3, 3 * nb);
        Bb.setZero(3, 3 * nb);
        const Vector3d a[2] = {f.a1, f.a2};
        const Vector3d c23 = f.a2.cross(f.a3) / f.J, c13 = f.a1.cross(f.a3) / f.J;
        Vector3d A1[3], A2[3];
        for (int r = 0; r < 3; ++r) {
            const Vector3d& aab = f.ab(kPairs[r][0], kPairs[r][1]);
            const double b = aab.dot(f.a3);
            A1[r] = b * c23 + aab.cross(f.a2) / f.J;
            A2[r] = -(b * c13 + aab.cross(f.a1) / f.J);
        }
        for (Eigen::Index k = 0; k < nb; ++k) {
            const double d1 = pb.dN(0, k), d2 = pb.dN(1, k);
            for (int c = 0; c < 3; ++c) {
                const Eigen::Index col = c * nb + k;
                Bm(0, col) = a[0][c] * d1;
                Bm(1, col) = a[1][c] * d2;
                Bm(2, col) = a[0][c] * d2 + a[1][c] * d1;
                const double d2v[3] = {pb.d2N(0, k), pb.d2N(2, k), pb.d2N(1, k)};
                for (int r = 0; r < 3; ++r)
                    Bb(r, col) = (r == 2 ? 2.0 : 1.0) * (-f.a3[c] * d2v[r] + A1[r][c] * d1 + A2[r][c] * d2);
            }
        }
        const double wJ = w * f.J;
        Ke.noalias() += (wJ * tm) * Bm.transpose() * D * Bm;
        Ke.noalias() += (wJ * tb) * Bb.transpose() * D * Bb;
    });
    if (!cur.empty()) flush();
    SparseMatrix K(3 * N, 3 * N);
    K.setFromTriplets(trip.begin(), trip.end());
    return K;
}

Eigen::VectorXd assemble_raw_load(const ShellSurface& s, const LoadSpec& load)
{
    const SBDomain& dom = s.domain();
    const int N = dom.num_raw();
    Eigen::VectorXd F = Eigen::VectorXd::Zero(3 * N);
    if (load.body) {
        for_each_quadrature_point(dom, 0, [&](const PointBasis& pb, double w) {
            const MapJet j = s.jet(pb);
            const double J = j.d.col(0).cross(j.d.col(1)).norm();
            const Vector3d g = load.body(pb.x, j.x);
            for (std::size_t k = 0; k < pb.index.size(); ++k)
                for (int c = 0; c < 3; ++c) F[c * N + pb.index[k]] += w * J * g[c] * pb.N[static_cast<Eigen::Index>(k)];
        });
    }
    for (const PointLoad& pl : load.points) {
        const auto [m, z, x] = dom.locate(pl.theta);
        if (m < 0) throw InputError("point load outside the domain");
        const PointBasis pb = dom.eval_basis(m, z, x, 0);
        for (std::size_t k = 0; k < pb.index.size(); ++k)
            for (int c = 0; c < 3; ++c) F[c * N + pb.index[k]] += pl.force[c] * pb.N[static_cast<Eigen::Index>(k)];
    }
    return F;
}

ShellSystem reduce_system(const SparseMatrix& Kraw, const Eigen::VectorXd& Fraw, const std::array<const SparseMatrix*, 3>& T)
{
    ShellSystem sys;
    const Eigen::Index N = T[0]->rows();
    int cols = 0;
    std::vector<Eigen::Triplet<double>> trip;
    for (int c = 0; c < 3; ++c) {
        const SparseMatrix& Tc = *T[static_cast<std::size_t>(c)];
        sys.T[static_cast<std::size_t>(c)] = Tc;
        sys.offset[static_cast<std::size_t>(c)] = cols;
        for (int k = 0; k < Tc.outerSize(); ++k)
            for (SparseMatrix::InnerIterator it(Tc, k); it; ++it)
                trip.emplace_back(static_cast<int>(c * N + it.row()), cols + k, it.value());
        cols += static_cast<int>(Tc.cols());
    }
    SparseMatrix Tb(3 * N, cols);
    Tb.setFromTriplets(trip.begin(), trip.end());
    const SparseMatrix KT = Kraw * Tb;
    SparseMatrix K = SparseMatrix(Tb.transpose() * KT);
    // symmetrize rounding differences
    sys.K = 0.5 * (K + SparseMatrix(K.transpose()));
    sys.K.prune(0.0);
    sys.F = Tb.transpose() * Fraw;
    return sys;
}

Eigen::VectorXd solve_system(const ShellSystem& sys, SolverKind kind, SolveInfo* info)
{
    SolveInfo si;
    if (sys.F.norm() == 0.0) {
        if (info) *info = si;
        return Eigen::VectorXd::Zero(sys.size());
    }
    // Jacobi scaling: functions near a scaling centre have tiny physical
    // support and stiffness entries many orders above the rest
    const Eigen::VectorXd d = sys.K.diagonal();
    if (d.minCoeff() <= 0.0)
        throw SolverError("stiffness matrix has a non-positive diagonal entry; a coupled function carries no energy");
    const Eigen::VectorXd S = d.cwiseSqrt().cwiseInverse();
    const SparseMatrix Ks = S.asDiagonal() * sys.K * S.asDiagonal();
    const Eigen::VectorXd Fs = S.asDiagonal() * sys.F;
    const double fn = Fs.norm();

    Eigen::VectorXd y;
    if (kind == SolverKind::Direct) {
        CholmodLLT llt;
        llt.compute(Ks);
        if (llt.info() != Eigen::Success)
            throw SolverError("stiffness matrix is not positive definite; the boundary conditions do not remove all rigid "
                              "body modes");
        y = llt.solve(Fs);
        for (int it = 0; it < 3; ++it) {
            const Eigen::VectorXd r = Fs - Ks * y;
            if (r.norm() <= 1e-14 * fn) break;
            y += llt.solve(r);
        }
        si.rcond = llt.rcond();
        si.solver = "cholmod";
    } else {
        Eigen::ConjugateGradient<SparseMatrix, Eigen::Lower | Eigen::Upper, Eigen::IdentityPreconditioner> cg;
        cg.setTolerance(1e-12);
        cg.setMaxIterations(std::max(1000, 20 * sys.size()));
        cg.compute(Ks);
        y = cg.solve(Fs);
        si.iterations = static_cast<int>(cg.iterations());
        si.solver = "cg";
        if (cg.info() != Eigen::Success) {
            std::ostringstream os;
            os << "conjugate gradients did not converge after " << cg.iterations() << " iterations (estimated error "
               << cg.error() << "); the system is likely ill conditioned";
            throw SolverError(os.str());
        }
    }
    const Eigen::VectorXd r = Ks * y - Fs;
    si.residual = r.norm() / fn;
    si.backward_error = r.norm() / ((SparseMatrix(Ks.cwiseAbs()) * y.cwiseAbs()).norm() + fn);
    if (info) *info = si;
    return S.asDiagonal() * y;
}

ShellSolution expand_solution(const SBDomain& dom, const ShellSystem& sys, const Eigen::VectorXd& u)
{
    Eigen::MatrixXd raw(dom.num_raw(), 3);
    for (int c = 0; c < 3; ++c) {
        const SparseMatrix& Tc = sys.T[static_cast<std::size_t>(c)];
        raw.col(c) = Tc * u.segment(sys.offset[static_cast<std::size_t>(c)], Tc.cols());
    }
    return ShellSolution(dom, std::move(raw));
}

Vector3d ShellSolution::value(const PointBasis& pb) const
{
    Vector3d v = Vector3d::Zero();
    for (std::size_t k = 0; k < pb.index.size(); ++k) v += pb.N[static_cast<Eigen::Index>(k)] * raw_.row(pb.index[k]).transpose();
    return v;
}

Matrix32 ShellSolution::gradient(const PointBasis& pb) const
{
    Matrix32 g = Matrix32::Zero();
    for (std::size_t k = 0; k < pb.index.size(); ++k)
        g += raw_.row(pb.index[k]).transpose() * pb.dN.col(static_cast<Eigen::Index>(k)).transpose();
    return g;
}

Matrix33 ShellSolution::hessian(const PointBasis& pb) const
{
    Matrix33 h = Matrix33::Zero();
    for (std::size_t k = 0; k < pb.index.size(); ++k)
        h += raw_.row(pb.index[k]).transpose() * pb.d2N.col(static_cast<Eigen::Index>(k)).transpose();
    return h;
}

Vector3d ShellSolution::at(int patch, double zeta, double xi) const
{
    return value(dom_->eval_basis(patch, zeta, xi, 0));
}

Vector3d ShellSolution::at(const Eigen::Vector2d& theta) const
{
    const auto [m, z, x] = dom_->locate(theta);
    if (m < 0) throw InputError("evaluation point outside the domain");
    return at(m, z, x);
}

ErrorNorms error_norms(const ShellSurface& s, const ShellSolution& u, const ReferenceField& ref)
{
    double l2 = 0.0, h2 = 0.0;
    for_each_quadrature_point(s.domain(), 0, [&](const PointBasis& pb, double w) {
        const MapJet j = s.jet(pb);
        const double J = j.d.col(0).cross(j.d.col(1)).norm();
        const MapJet r = ref(pb.x);
        l2 += w * J * (u.value(pb) - r.x).squaredNorm();
        const Matrix33 dh = u.hessian(pb) - r.dd;
        // the mixed derivative appears twice in the full Hessian
        h2 += w * J * (dh.col(0).squaredNorm() + 2.0 * dh.col(1).squaredNorm() + dh.col(2).squaredNorm());
    });
    return {std::sqrt(l2), std::sqrt(h2)};
}

}  // namespace sbshell
