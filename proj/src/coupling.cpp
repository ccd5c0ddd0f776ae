#include "sbshell/coupling.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include <Eigen/SVD>

#include "sbshell/errors.hpp"
#include "sbshell/quadrature.hpp"

namespace sbshell {

namespace {

struct UnionFind {
    std::vector<int> parent;
    explicit UnionFind(int n) : parent(static_cast<std::size_t>(n)) { std::iota(parent.begin(), parent.end(), 0); }
    int find(int x)
    {
        while (parent[static_cast<std::size_t>(x)] != x) {
            parent[static_cast<std::size_t>(x)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
            x = parent[static_cast<std::size_t>(x)];
        }
        return x;
    }
    void unite(int a, int b)
    {
        a = find(a);
        b = find(b);
        if (a != b) parent[static_cast<std::size_t>(std::max(a, b))] = std::min(a, b);
    }
};

int raw_index(const SBDomain& dom, int m, int i, int j) { return dom.offset(m) + dom.patch(m).local_index(i, j); }

int edge_column(const SBPatch& P, EdgeKind e) { return e == EdgeKind::Zeta0 ? 0 : P.n1() - 1; }

std::vector<std::pair<double, double>> edge_elements(const SBDomain& dom, const Interface& I)
{
    const SBPatch& Pa = dom.patch(I.patch_a);
    return I.radial() ? Pa.radial().elements() : Pa.boundary().basis().knots().elements();
}

// Along-edge tangent of side a at edge parameter s.
Eigen::Vector2d edge_tangent(const SBPatch& P, EdgeKind e, double s)
{
    const Eigen::Vector2d uv = edge_point(e, s);
    const GeometryJet J = P.eval(uv.x(), uv.y());
    return e == EdgeKind::Xi1 ? Eigen::Vector2d(J.jac.col(0)) : Eigen::Vector2d(J.jac.col(1));
}

double gap_of(const Eigen::VectorXd& lam, int rank)
{
    if (rank <= 0 || rank >= lam.size()) return 1e300;
    const double below = std::max(lam[rank], 1e-300);
    return lam[rank - 1] / below;
}

// Dense matrix of selected columns.
Eigen::MatrixXd take_cols(const Eigen::MatrixXd& G, const std::vector<int>& idx)
{
    Eigen::MatrixXd out(G.rows(), static_cast<Eigen::Index>(idx.size()));
    for (std::size_t k = 0; k < idx.size(); ++k) out.col(static_cast<Eigen::Index>(k)) = G.col(idx[k]);
    return out;
}

// Reduced column echelon form of the column space of Y, processing rows in
// the given order. Localizes bases whose span splits over row groups.
Eigen::MatrixXd column_echelon(Eigen::MatrixXd Y, const std::vector<int>& row_order, double pivot_tol)
{
    int k = 0;
    const int d = static_cast<int>(Y.cols());
    for (int r : row_order) {
        if (k >= d) break;
        Eigen::Index c = 0;
        const double piv = Y.row(r).segment(k, d - k).cwiseAbs().maxCoeff(&c);
        if (piv <= pivot_tol) continue;
        c += k;
        if (c != k) Y.col(k).swap(Y.col(c));
        Y.col(k) /= Y(r, k);
        for (int j = 0; j < d; ++j) {
            if (j == k) continue;
            const double f = Y(r, j);
            if (f != 0.0) Y.col(j) -= f * Y.col(k);
        }
        ++k;
    }
    for (Eigen::Index i = 0; i < Y.size(); ++i)
        if (std::abs(Y.data()[i]) < 1e-13) Y.data()[i] = 0.0;
    return Y;
}

}  // namespace

// ------------------------------------------------------------- B''' basis

std::vector<char> dirichlet_removal(const SBDomain& dom, const std::vector<EdgeConstraint>& edges)
{
    std::vector<char> removed(static_cast<std::size_t>(dom.num_raw()), 0);
    const auto& be = dom.boundary_edges();
    if (edges.size() != be.size()) throw InputError("dirichlet_removal: one constraint per boundary edge expected");
    for (std::size_t k = 0; k < be.size(); ++k) {
        if (edges[k] == EdgeConstraint::Free) continue;
        const SBPatch& P = dom.patch(be[k].patch);
        const int n2 = P.n2();
        for (int i = 0; i < P.n1(); ++i) {
            removed[static_cast<std::size_t>(raw_index(dom, be[k].patch, i, n2 - 1))] = 1;
            if (edges[k] == EdgeConstraint::TraceAndNormal)
                removed[static_cast<std::size_t>(raw_index(dom, be[k].patch, i, n2 - 2))] = 1;
        }
    }
    return removed;
}

SparseMatrix build_b3_basis(const SBDomain& dom, const std::vector<char>& removed_in)
{
    const int N = dom.num_raw();
    std::vector<char> dirichlet = removed_in;
    dirichlet.resize(static_cast<std::size_t>(N), 0);

    UnionFind uf(N);
    const auto [lo, hi] = dom.bbox();
    const double tol = 1e-8 * std::max(1.0, (hi - lo).norm());
    for (const Interface& I : dom.interfaces()) {
        const SBPatch& Pa = dom.patch(I.patch_a);
        const SBPatch& Pb = dom.patch(I.patch_b);
        auto pair = [&](int ia, int ja, int ib, int jb) {
            if ((Pa.control_point(ia, ja) - Pb.control_point(ib, jb)).norm() > tol)
                throw GeometryError("build_b3_basis: interface control points do not coincide");
            uf.unite(raw_index(dom, I.patch_a, ia, ja), raw_index(dom, I.patch_b, ib, jb));
        };
        if (I.radial()) {
            const int ia = edge_column(Pa, I.edge_a), ib = edge_column(Pb, I.edge_b);
            for (int j = 0; j < Pa.n2(); ++j) pair(ia, j, ib, j);
        } else {
            if (Pa.n1() != Pb.n1()) throw GeometryError("build_b3_basis: interface curves differ in size");
            for (int i = 0; i < Pa.n1(); ++i) pair(i, Pa.n2() - 1, I.reversed ? Pb.n1() - 1 - i : i, Pb.n2() - 1);
        }
    }

    std::vector<char> class_removed(static_cast<std::size_t>(N), 0);
    std::vector<char> class_dirichlet(static_cast<std::size_t>(N), 0);
    for (int r = 0; r < N; ++r) {
        const auto [m, i, j] = dom.raw_ijk(r);
        (void)m;
        (void)i;
        const int root = uf.find(r);
        if (j < 2 || dirichlet[static_cast<std::size_t>(r)]) class_removed[static_cast<std::size_t>(root)] = 1;
        if (dirichlet[static_cast<std::size_t>(r)]) class_dirichlet[static_cast<std::size_t>(root)] = 1;
    }

    std::vector<Eigen::Triplet<double>> trip;
    int col = 0;
    const int ncent = static_cast<int>(dom.centers().size());
    const int p = dom.mesh().degree;
    for (int c = 0; c < ncent; ++c) {
        for (int m = 0; m < dom.num_patches(); ++m) {
            const SBPatch& P = dom.patch(m);
            if (P.center_id() != c) continue;
            for (int j = 0; j <= std::min(p, P.n2() - 1); ++j)
                for (int i = 0; i < P.n1(); ++i) {
                    const int r = raw_index(dom, m, i, j);
                    if (class_dirichlet[static_cast<std::size_t>(uf.find(r))])
                        throw GeometryError("build_b3_basis: mesh too coarse, scaling-centre functions reach a Dirichlet edge");
                    const Eigen::Vector2d x = P.control_point(i, j);
                    trip.emplace_back(r, col, 1.0);
                    trip.emplace_back(r, col + 1, x.x());
                    trip.emplace_back(r, col + 2, x.y());
                }
        }
        col += 3;
    }
    std::vector<int> class_col(static_cast<std::size_t>(N), -1);
    for (int r = 0; r < N; ++r) {
        const int root = uf.find(r);
        if (class_removed[static_cast<std::size_t>(root)]) continue;
        if (class_col[static_cast<std::size_t>(root)] < 0) class_col[static_cast<std::size_t>(root)] = col++;
        trip.emplace_back(r, class_col[static_cast<std::size_t>(root)], 1.0);
    }
    SparseMatrix T0(N, col);
    T0.setFromTriplets(trip.begin(), trip.end());
    T0.prune(0.0);
    T0.makeCompressed();
    return T0;
}

// ------------------------------------------------------------ jump rows

Eigen::MatrixXd jump_rows(const SBDomain& dom, const Interface& I, const SparseRowMatrix& T0rows,
                          std::vector<int>& cols, int quad_points)
{
    const SBPatch& Pa = dom.patch(I.patch_a);
    const int nq = quad_points > 0 ? quad_points : 2 * Pa.degree();
    std::unordered_map<int, int> pos;
    cols.clear();
    std::vector<std::vector<std::pair<int, double>>> rows;

    for (const auto& [s0, s1] : edge_elements(dom, I)) {
        const QuadRule q = gauss_legendre(nq, s0, s1);
        for (std::size_t k = 0; k < q.points.size(); ++k) {
            const double s = q.points[k];
            const Eigen::Vector2d ua = edge_point(I.edge_a, s);
            const Eigen::Vector2d ub = edge_point(I.edge_b, I.reversed ? 1.0 - s : s);
            const Eigen::Vector2d t = edge_tangent(Pa, I.edge_a, s);
            const double ds = t.norm();
            const Eigen::Vector2d n(t.y() / ds, -t.x() / ds);
            const double scale = std::sqrt(q.weights[k] * ds);
            std::map<int, double> acc;
            auto add = [&](int patch, const Eigen::Vector2d& uv, double sign) {
                const PointBasis pb = dom.eval_basis(patch, uv.x(), uv.y(), 1);
                for (std::size_t b = 0; b < pb.index.size(); ++b) {
                    const double dn = n.dot(pb.dN.col(static_cast<Eigen::Index>(b)));
                    for (SparseRowMatrix::InnerIterator it(T0rows, pb.index[b]); it; ++it)
                        acc[static_cast<int>(it.col())] += sign * it.value() * dn;
                }
            };
            add(I.patch_a, ua, 1.0);
            add(I.patch_b, ub, -1.0);
            std::vector<std::pair<int, double>> row;
            for (const auto& [c, v] : acc) {
                auto it = pos.find(c);
                if (it == pos.end()) {
                    it = pos.emplace(c, static_cast<int>(cols.size())).first;
                    cols.push_back(c);
                }
                row.emplace_back(it->second, scale * v);
            }
            rows.push_back(std::move(row));
        }
    }
    Eigen::MatrixXd G = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (const auto& [c, v] : rows[r]) G(static_cast<Eigen::Index>(r), c) = v;
    return G;
}

// ------------------------------------------------------------ null spaces

NullSpace null_space(const Eigen::MatrixXd& M, double tol)
{
    NullSpace ns;
    const Eigen::Index n = M.cols();
    if (n == 0) return ns;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (M + M.transpose()));
    const Eigen::VectorXd ev = es.eigenvalues();  // ascending
    const double lmax = std::max(ev.cwiseAbs().maxCoeff(), 0.0);
    Eigen::VectorXd lam = ev.reverse().cwiseMax(0.0);
    int rank = 0;
    while (rank < n && lam[rank] > tol * lmax) ++rank;
    ns.rank = rank;
    ns.singular_values = lam;
    ns.gap = gap_of(lam, rank);
    ns.basis = es.eigenvectors().leftCols(n - rank);
    if (lmax == 0.0) ns.basis = Eigen::MatrixXd::Identity(n, n);
    return ns;
}

NullSpace null_space_rows(const Eigen::MatrixXd& G, double tol)
{
    NullSpace ns;
    const Eigen::Index n = G.cols();
    if (n == 0) return ns;
    Eigen::MatrixXd R;
    if (G.rows() > n) {
        Eigen::HouseholderQR<Eigen::MatrixXd> qr(G);
        R = qr.matrixQR().topRows(n).triangularView<Eigen::Upper>();
    } else {
        R = G;
    }
    Eigen::BDCSVD<Eigen::MatrixXd> svd(R, Eigen::ComputeFullV);
    const Eigen::VectorXd s = svd.singularValues();
    Eigen::VectorXd lam = Eigen::VectorXd::Zero(n);
    for (Eigen::Index i = 0; i < s.size(); ++i) lam[i] = s[i] * s[i];
    const double lmax = lam.size() ? lam[0] : 0.0;
    int rank = 0;
    while (rank < n && lam[rank] > tol * lmax) ++rank;
    ns.rank = rank;
    ns.singular_values = lam;
    ns.gap = gap_of(lam, rank);
    ns.basis = svd.matrixV().rightCols(n - rank);
    return ns;
}

// ------------------------------------------------------------ pipeline

CouplingBasis build_c1_basis(const SBDomain& dom, const std::vector<char>& removed, const CouplingOptions& opt)
{
    CouplingBasis out;
    out.T0 = build_b3_basis(dom, removed);
    const SparseRowMatrix T0rows = out.T0;
    const int nb3 = static_cast<int>(out.T0.cols());
    out.diag.num_raw = dom.num_raw();
    out.diag.num_b3 = nb3;
    const double tol = opt.null_tolerance;

    auto note_gap = [&](double gap, const std::string& where) {
        out.diag.min_gap = std::min(out.diag.min_gap, gap);
        if (gap < opt.gap_warning) {
            std::ostringstream os;
            os << "weak spectral gap (" << gap << ") at " << where;
            out.diag.warnings.push_back(os.str());
        }
    };

    // jump blocks per interface, normalized, restricted to touched columns
    struct Block {
        Eigen::MatrixXd G;
        std::vector<int> cols;  // B''' columns
    };
    std::vector<Block> blocks;
    std::vector<std::vector<int>> touch(static_cast<std::size_t>(nb3));
    for (const Interface& I : dom.interfaces()) {
        Block b;
        std::vector<int> cols;
        Eigen::MatrixXd G = jump_rows(dom, I, T0rows, cols, opt.quad_points);
        if (G.cols() == 0) continue;
        Eigen::BDCSVD<Eigen::MatrixXd> sv(G);
        const double smax = sv.singularValues().size() ? sv.singularValues()[0] : 0.0;
        if (smax == 0.0) continue;
        G /= smax;
        std::vector<int> keep;
        for (Eigen::Index c = 0; c < G.cols(); ++c)
            if (G.col(c).norm() > 1e-11) keep.push_back(static_cast<int>(c));
        b.G = take_cols(G, keep);
        for (int k : keep) b.cols.push_back(cols[static_cast<std::size_t>(k)]);
        const int e = static_cast<int>(blocks.size());
        for (int c : b.cols) touch[static_cast<std::size_t>(c)].push_back(e);
        blocks.push_back(std::move(b));
    }

    std::vector<Eigen::Triplet<double>> zt;
    int ncol = 0;
    std::vector<int> active;
    for (int c = 0; c < nb3; ++c) {
        if (touch[static_cast<std::size_t>(c)].empty()) zt.emplace_back(c, ncol++, 1.0);
        else active.push_back(c);
    }
    out.diag.num_active = static_cast<int>(active.size());

    auto emit = [&](const std::vector<int>& vars, const Eigen::VectorXd& v) {
        const double vmax = v.cwiseAbs().maxCoeff();
        for (std::size_t k = 0; k < vars.size(); ++k)
            if (std::abs(v[static_cast<Eigen::Index>(k)]) > 1e-14 * vmax) zt.emplace_back(vars[k], ncol, v[static_cast<Eigen::Index>(k)]);
        ++ncol;
    };

    if (opt.method == NullSpaceMethod::Global && !active.empty()) {
        std::unordered_map<int, int> pos;
        for (std::size_t k = 0; k < active.size(); ++k) pos[active[k]] = static_cast<int>(k);
        Eigen::Index nrows = 0;
        for (const Block& b : blocks) nrows += b.G.rows();
        Eigen::MatrixXd G = Eigen::MatrixXd::Zero(nrows, static_cast<Eigen::Index>(active.size()));
        Eigen::Index r0 = 0;
        for (const Block& b : blocks) {
            for (std::size_t k = 0; k < b.cols.size(); ++k)
                G.block(r0, pos[b.cols[k]], b.G.rows(), 1) = b.G.col(static_cast<Eigen::Index>(k));
            r0 += b.G.rows();
        }
        const NullSpace ns = null_space_rows(G, tol);
        note_gap(ns.gap, "global jump operator");
        for (Eigen::Index k = 0; k < ns.basis.cols(); ++k) emit(active, ns.basis.col(k));
    } else if (!active.empty()) {
        // edge variables touch one interface, vertex variables several
        std::vector<int> vertex;
        std::unordered_map<int, int> vpos;
        for (int c : active)
            if (touch[static_cast<std::size_t>(c)].size() > 1) {
                vpos[c] = static_cast<int>(vertex.size());
                vertex.push_back(c);
            }
        struct EdgeFactor {
            std::vector<int> ecols, vcols;  // positions within the block
            Eigen::MatrixXd Ur, Vr;
            Eigen::VectorXd sr;
        };
        std::vector<EdgeFactor> fac(blocks.size());
        std::vector<Eigen::MatrixXd> srows;
        std::vector<std::vector<int>> srow_vars;
        for (std::size_t e = 0; e < blocks.size(); ++e) {
            const Block& b = blocks[e];
            EdgeFactor& f = fac[e];
            for (std::size_t k = 0; k < b.cols.size(); ++k)
                (touch[static_cast<std::size_t>(b.cols[k])].size() > 1 ? f.vcols : f.ecols).push_back(static_cast<int>(k));
            const Eigen::MatrixXd A = take_cols(b.G, f.ecols);
            const int ne = static_cast<int>(f.ecols.size());
            if (ne > 0) {
                Eigen::BDCSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeThinU | Eigen::ComputeFullV);
                const Eigen::VectorXd s = svd.singularValues();
                int rank = 0;
                while (rank < s.size() && s[rank] * s[rank] > tol) ++rank;
                Eigen::VectorXd lam = Eigen::VectorXd::Zero(ne);
                for (Eigen::Index i = 0; i < s.size(); ++i) lam[i] = s[i] * s[i];
                std::ostringstream where;
                where << "interface " << e;
                if (rank < ne) note_gap(gap_of(lam, rank), where.str());
                f.Ur = svd.matrixU().leftCols(rank);
                f.Vr = svd.matrixV().leftCols(rank);
                f.sr = s.head(rank);
                std::vector<int> evars;
                for (int k : f.ecols) evars.push_back(b.cols[static_cast<std::size_t>(k)]);
                for (int k = rank; k < ne; ++k) emit(evars, svd.matrixV().col(k));
            }
            if (!f.vcols.empty()) {
                Eigen::MatrixXd B = take_cols(b.G, f.vcols);
                if (f.Ur.cols() > 0) B -= f.Ur * (f.Ur.transpose() * B);
                Eigen::BDCSVD<Eigen::MatrixXd> svd(B, Eigen::ComputeThinV);
                const Eigen::VectorXd s = svd.singularValues();
                int r = 0;
                while (r < s.size() && s[r] > 1e-15) ++r;
                if (r > 0) {
                    srows.push_back(s.head(r).asDiagonal() * svd.matrixV().leftCols(r).transpose());
                    std::vector<int> vv;
                    for (int k : f.vcols) vv.push_back(vpos[b.cols[static_cast<std::size_t>(k)]]);
                    srow_vars.push_back(vv);
                }
            }
        }

        if (!vertex.empty()) {
            // vertex variables split into groups linked by the reduced rows
            const int nvtx = static_cast<int>(vertex.size());
            std::vector<int> parent(static_cast<std::size_t>(nvtx));
            std::iota(parent.begin(), parent.end(), 0);
            auto root = [&](int a) {
                while (parent[static_cast<std::size_t>(a)] != a) a = parent[static_cast<std::size_t>(a)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(a)])];
                return a;
            };
            for (const auto& vv : srow_vars)
                for (std::size_t c = 1; c < vv.size(); ++c) parent[static_cast<std::size_t>(root(vv[c]))] = root(vv[0]);
            std::map<int, std::vector<int>> groups;
            for (int v = 0; v < nvtx; ++v) groups[root(v)].push_back(v);

            Eigen::MatrixXd Zv = Eigen::MatrixXd::Zero(nvtx, 0);
            std::vector<std::vector<int>> zv_rows;  // nonzero rows per group block
            std::vector<Eigen::MatrixXd> zv_blocks;
            for (const auto& [g, members] : groups) {
                std::unordered_map<int, int> loc;
                for (std::size_t k = 0; k < members.size(); ++k) loc[members[k]] = static_cast<int>(k);
                const Eigen::Index nm = static_cast<Eigen::Index>(members.size());
                Eigen::Index nrows = 0;
                for (std::size_t k = 0; k < srows.size(); ++k)
                    if (root(srow_vars[k][0]) == g) nrows += srows[k].rows();
                Eigen::MatrixXd S = Eigen::MatrixXd::Zero(nrows, nm);
                Eigen::Index r0 = 0;
                for (std::size_t k = 0; k < srows.size(); ++k) {
                    if (root(srow_vars[k][0]) != g) continue;
                    for (std::size_t c = 0; c < srow_vars[k].size(); ++c)
                        S.block(r0, loc[srow_vars[k][c]], srows[k].rows(), 1) = srows[k].col(static_cast<Eigen::Index>(c));
                    r0 += srows[k].rows();
                }
                Eigen::MatrixXd basis;
                if (S.rows() == 0) {
                    basis = Eigen::MatrixXd::Identity(nm, nm);
                } else {
                    // absolute threshold: blocks are already normalized
                    Eigen::MatrixXd R = S;
                    if (S.rows() > S.cols()) {
                        Eigen::HouseholderQR<Eigen::MatrixXd> qr(S);
                        R = qr.matrixQR().topRows(S.cols()).triangularView<Eigen::Upper>();
                    }
                    Eigen::BDCSVD<Eigen::MatrixXd> svd(R, Eigen::ComputeFullV);
                    const Eigen::VectorXd sv = svd.singularValues();
                    int rank = 0;
                    while (rank < sv.size() && sv[rank] * sv[rank] > tol) ++rank;
                    Eigen::VectorXd lam = Eigen::VectorXd::Zero(nm);
                    for (Eigen::Index i = 0; i < sv.size(); ++i) lam[i] = sv[i] * sv[i];
                    if (rank < nm) note_gap(gap_of(lam, rank), "vertex system");
                    basis = svd.matrixV().rightCols(nm - rank);
                }
                if (basis.cols() == 0) continue;
                // localize: order variables by the interfaces they touch
                std::vector<int> order(members.size());
                std::iota(order.begin(), order.end(), 0);
                std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
                    return touch[static_cast<std::size_t>(vertex[static_cast<std::size_t>(members[static_cast<std::size_t>(a)])])] <
                           touch[static_cast<std::size_t>(vertex[static_cast<std::size_t>(members[static_cast<std::size_t>(b)])])];
                });
                Eigen::MatrixXd E = column_echelon(basis, order, 1e-8);
                // keep the orthonormal basis when elimination lost accuracy
                Eigen::MatrixXd En = E;
                bool ok = E.cwiseAbs().maxCoeff() < 1e4;
                for (Eigen::Index k = 0; ok && k < En.cols(); ++k) {
                    const double n = En.col(k).norm();
                    ok = n > 0.0;
                    if (ok) En.col(k) /= n;
                }
                if (ok) ok = Eigen::JacobiSVD<Eigen::MatrixXd>(En).singularValues().minCoeff() > 1e-6;
                zv_rows.push_back(members);
                zv_blocks.push_back(ok ? E : basis);
            }
            Eigen::Index total = 0;
            for (const auto& b : zv_blocks) total += b.cols();
            Zv = Eigen::MatrixXd::Zero(nvtx, total);
            Eigen::Index c0 = 0;
            for (std::size_t k = 0; k < zv_blocks.size(); ++k) {
                for (std::size_t r = 0; r < zv_rows[k].size(); ++r)
                    Zv.block(zv_rows[k][r], c0, 1, zv_blocks[k].cols()) = zv_blocks[k].row(static_cast<Eigen::Index>(r));
                c0 += zv_blocks[k].cols();
            }

            for (Eigen::Index k = 0; k < Zv.cols(); ++k) {
                const Eigen::VectorXd z = Zv.col(k);
                if (z.cwiseAbs().maxCoeff() == 0.0) continue;
                std::map<int, double> vec;
                for (std::size_t v = 0; v < vertex.size(); ++v)
                    if (z[static_cast<Eigen::Index>(v)] != 0.0) vec[vertex[v]] = z[static_cast<Eigen::Index>(v)];
                // edge parts: least-squares solve per touched interface
                for (std::size_t e = 0; e < blocks.size(); ++e) {
                    const EdgeFactor& f = fac[e];
                    if (f.ecols.empty() || f.vcols.empty() || f.sr.size() == 0) continue;
                    Eigen::VectorXd zb(static_cast<Eigen::Index>(f.vcols.size()));
                    bool any = false;
                    for (std::size_t c = 0; c < f.vcols.size(); ++c) {
                        zb[static_cast<Eigen::Index>(c)] = z[vpos[blocks[e].cols[static_cast<std::size_t>(f.vcols[c])]]];
                        any = any || zb[static_cast<Eigen::Index>(c)] != 0.0;
                    }
                    if (!any) continue;
                    const Eigen::VectorXd rhs = take_cols(blocks[e].G, f.vcols) * zb;
                    const Eigen::VectorXd y = -f.Vr * (f.sr.cwiseInverse().asDiagonal() * (f.Ur.transpose() * rhs));
                    for (std::size_t c = 0; c < f.ecols.size(); ++c)
                        if (y[static_cast<Eigen::Index>(c)] != 0.0)
                            vec[blocks[e].cols[static_cast<std::size_t>(f.ecols[c])]] += y[static_cast<Eigen::Index>(c)];
                }
                std::vector<int> vars;
                Eigen::VectorXd vals(static_cast<Eigen::Index>(vec.size()));
                Eigen::Index i = 0;
                for (const auto& [c, v] : vec) {
                    vars.push_back(c);
                    vals[i++] = v;
                }
                emit(vars, vals);
            }
        }
    }

    SparseMatrix Z(nb3, ncol);
    Z.setFromTriplets(zt.begin(), zt.end());
    out.T = (out.T0 * Z).pruned(1e-14, 1.0);
    out.T.makeCompressed();
    out.diag.num_coupled = ncol;
    return out;
}

// ------------------------------------------------------------ checks

namespace {

template <class F>
double max_jump_impl(const SBDomain& dom, const SparseMatrix& T, int samples, F&& quantity)
{
    // jumps and gradient scales per column over all interfaces
    const SparseRowMatrix Tr = T;
    std::unordered_map<int, double> jump, scale;
    for (const Interface& I : dom.interfaces()) {
        for (const auto& [s0, s1] : edge_elements(dom, I)) {
            for (int q = 0; q < samples; ++q) {
                const double s = s0 + (s1 - s0) * (q + 0.5) / samples;
                const Eigen::Vector2d ua = edge_point(I.edge_a, s);
                const Eigen::Vector2d ub = edge_point(I.edge_b, I.reversed ? 1.0 - s : s);
                const Eigen::Vector2d t = edge_tangent(dom.patch(I.patch_a), I.edge_a, s);
                const Eigen::Vector2d n = Eigen::Vector2d(t.y(), -t.x()).normalized();
                std::unordered_map<int, double> va, vb, ga;
                auto acc = [&](int patch, const Eigen::Vector2d& uv, std::unordered_map<int, double>& v) {
                    const PointBasis pb = dom.eval_basis(patch, uv.x(), uv.y(), 1);
                    for (std::size_t b = 0; b < pb.index.size(); ++b) {
                        const double val = quantity(pb, static_cast<Eigen::Index>(b), n);
                        const double g = pb.dN.col(static_cast<Eigen::Index>(b)).norm() + std::abs(pb.N[static_cast<Eigen::Index>(b)]);
                        for (SparseRowMatrix::InnerIterator it(Tr, pb.index[b]); it; ++it) {
                            v[static_cast<int>(it.col())] += it.value() * val;
                            ga[static_cast<int>(it.col())] += std::abs(it.value()) * g;
                        }
                    }
                };
                acc(I.patch_a, ua, va);
                acc(I.patch_b, ub, vb);
                for (const auto& [c, v] : va) jump[c] = std::max(jump[c], std::abs(v - vb[c]));
                for (const auto& [c, v] : vb)
                    if (!va.count(c)) jump[c] = std::max(jump[c], std::abs(v));
                for (const auto& [c, g] : ga) scale[c] = std::max(scale[c], g);
            }
        }
    }
    double worst = 0.0;
    for (const auto& [c, j] : jump)
        if (scale[c] > 0.0) worst = std::max(worst, j / scale[c]);
    return worst;
}

}  // namespace

double max_normal_jump(const SBDomain& dom, const SparseMatrix& T, int samples)
{
    return max_jump_impl(dom, T, samples, [](const PointBasis& pb, Eigen::Index b, const Eigen::Vector2d& n) {
        return n.dot(pb.dN.col(b));
    });
}

double max_value_jump(const SBDomain& dom, const SparseMatrix& T, int samples)
{
    return max_jump_impl(dom, T, samples, [](const PointBasis& pb, Eigen::Index b, const Eigen::Vector2d&) {
        return pb.N[b];
    });
}

double asg1_residual(const EdgeJet& left, const EdgeJet& right, int samples)
{
    std::vector<std::array<Eigen::Vector2d, 3>> data;
    double L = 0.0;
    for (int k = 0; k < samples; ++k) {
        const double s = (k + 0.5) / samples;
        const auto l = left(s), r = right(s);
        data.push_back({l[0], r[0], l[1]});
        L = std::max({L, l[0].norm(), r[0].norm(), l[1].norm()});
    }
    if (L == 0.0) return 0.0;
    Eigen::MatrixXd A(2 * samples, 7);
    for (int k = 0; k < samples; ++k) {
        const double s = (k + 0.5) / samples;
        const Eigen::Vector2d dl = data[static_cast<std::size_t>(k)][0] / L, dr = data[static_cast<std::size_t>(k)][1] / L,
                              tl = data[static_cast<std::size_t>(k)][2] / L;
        A.block<2, 1>(2 * k, 0) = dl;
        A.block<2, 1>(2 * k, 1) = s * dl;
        A.block<2, 1>(2 * k, 2) = -dr;
        A.block<2, 1>(2 * k, 3) = -s * dr;
        A.block<2, 1>(2 * k, 4) = tl;
        A.block<2, 1>(2 * k, 5) = s * tl;
        A.block<2, 1>(2 * k, 6) = s * s * tl;
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(A);
    const Eigen::VectorXd sv = svd.singularValues();
    return sv[sv.size() - 1] / sv[0];
}

double asg1_residual(const SBDomain& dom, const Interface& I, int samples)
{
    const SBPatch& Pa = dom.patch(I.patch_a);
    const SBPatch& Pb = dom.patch(I.patch_b);
    auto jet = [&](const SBPatch& P, EdgeKind e, bool rev) -> EdgeJet {
        return [&P, e, rev](double s) {
            const Eigen::Vector2d uv = edge_point(e, rev ? 1.0 - s : s);
            const GeometryJet J = P.eval(uv.x(), uv.y());
            if (e == EdgeKind::Xi1) return std::array<Eigen::Vector2d, 2>{J.jac.col(1), J.jac.col(0)};
            return std::array<Eigen::Vector2d, 2>{J.jac.col(0), J.jac.col(1)};
        };
    };
    return asg1_residual(jet(Pa, I.edge_a, false), jet(Pb, I.edge_b, I.reversed), samples);
}

}  // namespace sbshell
