#include "sbshell/spline.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "sbshell/errors.hpp"
#include "sbshell/quadrature.hpp"

namespace sbshell {

// ---------------------------------------------------------------- KnotVector

KnotVector::KnotVector(std::vector<double> knots, int degree) : knots_(std::move(knots)), degree_(degree)
{
    if (degree_ < 0) throw SplineError("KnotVector: negative degree");
    if (static_cast<int>(knots_.size()) < 2 * degree_ + 2)
        throw SplineError("KnotVector: too few knots for degree");
    for (std::size_t i = 1; i < knots_.size(); ++i)
        if (knots_[i] < knots_[i - 1]) throw SplineError("KnotVector: knots must be non-decreasing");
    if (!(back() > front())) throw SplineError("KnotVector: empty parameter range");
}

KnotVector KnotVector::open_uniform(int degree, int elements, int regularity)
{
    if (elements < 1) throw SplineError("open_uniform: need at least one element");
    if (regularity < -1 || regularity >= degree)
        throw SplineError("open_uniform: regularity must lie in [-1, p-1]");
    std::vector<double> k(static_cast<std::size_t>(degree + 1), 0.0);
    for (int e = 1; e < elements; ++e)
        for (int m = 0; m < degree - regularity; ++m) k.push_back(static_cast<double>(e) / elements);
    k.insert(k.end(), static_cast<std::size_t>(degree + 1), 1.0);
    return KnotVector(std::move(k), degree);
}

int KnotVector::find_span(double x) const
{
    const int n = num_basis();
    if (x >= back()) {
        int s = n - 1;
        while (s > degree_ && !(knots_[static_cast<std::size_t>(s)] < knots_[static_cast<std::size_t>(s + 1)])) --s;
        return s;
    }
    if (x <= front()) {
        int s = degree_;
        while (s < n - 1 && !(knots_[static_cast<std::size_t>(s)] < knots_[static_cast<std::size_t>(s + 1)])) ++s;
        return s;
    }
    auto it = std::upper_bound(knots_.begin() + degree_, knots_.begin() + n + 1, x);
    return static_cast<int>(it - knots_.begin()) - 1;
}

int KnotVector::multiplicity(double x, double tol) const
{
    int m = 0;
    for (double k : knots_)
        if (std::abs(k - x) <= tol) ++m;
    return m;
}

std::vector<double> KnotVector::unique_knots() const
{
    std::vector<double> u;
    for (double k : knots_)
        if (u.empty() || k > u.back()) u.push_back(k);
    return u;
}

std::vector<std::pair<double, double>> KnotVector::elements() const
{
    std::vector<std::pair<double, double>> e;
    const auto u = unique_knots();
    for (std::size_t i = 0; i + 1 < u.size(); ++i)
        if (u[i] >= front() && u[i + 1] <= back()) e.emplace_back(u[i], u[i + 1]);
    return e;
}

int KnotVector::regularity() const
{
    int maxm = 0;
    for (double u : unique_knots())
        if (u > front() && u < back()) maxm = std::max(maxm, multiplicity(u, 0.0));
    return degree_ - maxm;
}

bool KnotVector::is_open(double tol) const
{
    for (int i = 0; i <= degree_; ++i) {
        if (std::abs(knots_[static_cast<std::size_t>(i)] - knots_.front()) > tol) return false;
        if (std::abs(knots_[knots_.size() - 1 - static_cast<std::size_t>(i)] - knots_.back()) > tol) return false;
    }
    return true;
}

Eigen::VectorXd KnotVector::greville() const
{
    const int n = num_basis();
    Eigen::VectorXd g(n);
    for (int i = 0; i < n; ++i) {
        double s = 0.0;
        for (int k = 1; k <= degree_; ++k) s += knots_[static_cast<std::size_t>(i + k)];
        g[i] = degree_ > 0 ? s / degree_ : 0.5 * (knots_[static_cast<std::size_t>(i)] + knots_[static_cast<std::size_t>(i + 1)]);
    }
    return g;
}

// ---------------------------------------------------------------- evaluation

namespace {

inline double safe_ratio(double num, double den) { return den == 0.0 ? 0.0 : num / den; }

}  // namespace

BasisValues eval_bspline(const KnotVector& kv, double x, int nderiv)
{
    const int p = kv.degree();
    const int s = kv.find_span(x);
    x = std::clamp(x, kv.front(), kv.back());

    // levels[k][j] = B_{s-k+j, k}(x), j = 0..k
    std::vector<std::vector<double>> levels(static_cast<std::size_t>(p + 1));
    levels[0] = {1.0};
    for (int k = 1; k <= p; ++k) {
        const auto& prev = levels[static_cast<std::size_t>(k - 1)];
        auto& cur = levels[static_cast<std::size_t>(k)];
        cur.assign(static_cast<std::size_t>(k + 1), 0.0);
        for (int j = 0; j <= k; ++j) {
            const int i = s - k + j;
            double v = 0.0;
            if (j >= 1) {  // B_{i,k-1} lives at prev[j-1]
                v += safe_ratio(x - kv[i], kv[i + k] - kv[i]) * prev[static_cast<std::size_t>(j - 1)];
            }
            if (j <= k - 1) {  // B_{i+1,k-1} lives at prev[j]
                v += safe_ratio(kv[i + k + 1] - x, kv[i + k + 1] - kv[i + 1]) * prev[static_cast<std::size_t>(j)];
            }
            cur[static_cast<std::size_t>(j)] = v;
        }
    }

    // d^order of degree-k functions (global index s-k..s), lowering degree
    // once per derivative order.
    auto derivative = [&](auto&& self, int k, int order) -> std::vector<double> {
        if (order == 0) return levels[static_cast<std::size_t>(k)];
        std::vector<double> out(static_cast<std::size_t>(k + 1), 0.0);
        if (order > k) return out;
        const auto lower = self(self, k - 1, order - 1);
        for (int j = 0; j <= k; ++j) {
            const int i = s - k + j;
            double v = 0.0;
            if (j >= 1) v += safe_ratio(k, kv[i + k] - kv[i]) * lower[static_cast<std::size_t>(j - 1)];
            if (j <= k - 1) v -= safe_ratio(k, kv[i + k + 1] - kv[i + 1]) * lower[static_cast<std::size_t>(j)];
            out[static_cast<std::size_t>(j)] = v;
        }
        return out;
    };

    BasisValues bv;
    bv.first = s - p;
    bv.ders.setZero(nderiv + 1, p + 1);
    for (int d = 0; d <= nderiv; ++d) {
        const auto row = derivative(derivative, p, d);
        for (int j = 0; j <= p; ++j) bv.ders(d, j) = row[static_cast<std::size_t>(j)];
    }
    return bv;
}

SplineBasis::SplineBasis(KnotVector kv, std::vector<double> weights) : kv_(std::move(kv)), weights_(std::move(weights))
{
    if (!weights_.empty()) {
        if (static_cast<int>(weights_.size()) != kv_.num_basis())
            throw SplineError("SplineBasis: weight count does not match basis size");
        for (double w : weights_)
            if (!(w > 0.0)) throw SplineError("SplineBasis: weights must be positive");
    }
}

BasisValues SplineBasis::eval(double x, int nderiv) const
{
    BasisValues b = eval_bspline(kv_, x, nderiv);
    if (weights_.empty()) return b;
    const int p = kv_.degree();
    Eigen::VectorXd w(p + 1);
    for (int j = 0; j <= p; ++j) w[j] = weights_[static_cast<std::size_t>(b.first + j)];
    Eigen::MatrixXd wb = b.ders.array().rowwise() * w.transpose().array();
    Eigen::VectorXd W = wb.rowwise().sum();  // W, W', W''
    Eigen::MatrixXd r(nderiv + 1, p + 1);
    r.row(0) = wb.row(0) / W[0];
    if (nderiv >= 1) r.row(1) = (wb.row(1) - r.row(0) * W[1]) / W[0];
    if (nderiv >= 2) r.row(2) = (wb.row(2) - 2.0 * r.row(1) * W[1] - r.row(0) * W[2]) / W[0];
    if (nderiv >= 3) throw SplineError("SplineBasis::eval: rational derivatives above order 2 not supported");
    b.ders = r;
    return b;
}

// ---------------------------------------------------------------- refinement

Refinement insert_knots(const SplineBasis& basis, const std::vector<double>& new_knots, int regularity_bound)
{
    const KnotVector& kv0 = basis.knots();
    const int p = kv0.degree();
    std::vector<double> t = kv0.knots();
    const int n0 = kv0.num_basis();
    Eigen::MatrixXd A = Eigen::MatrixXd::Identity(n0, n0);  // fine = A * coarse (B-spline)

    std::vector<double> sorted = new_knots;
    std::sort(sorted.begin(), sorted.end());
    for (double u : sorted) {
        if (!(u > kv0.front() && u < kv0.back()))
            throw SplineError("insert_knots: knot outside the open parameter range");
        const int n = static_cast<int>(t.size()) - p - 1;
        KnotVector cur(t, p);
        int s = cur.find_span(u);
        Eigen::MatrixXd K = Eigen::MatrixXd::Zero(n + 1, n);
        for (int i = 0; i <= n; ++i) {
            if (i <= s - p) {
                K(i, i) = 1.0;
            } else if (i >= s + 1) {
                K(i, i - 1) = 1.0;
            } else {
                const double a = (u - t[static_cast<std::size_t>(i)]) / (t[static_cast<std::size_t>(i + p)] - t[static_cast<std::size_t>(i)]);
                K(i, i) = a;
                K(i, i - 1) = 1.0 - a;
            }
        }
        A = K * A;
        t.insert(t.begin() + s + 1, u);
    }

    KnotVector kv1(t, p);
    if (regularity_bound >= 0) {
        for (double u : kv1.unique_knots())
            if (u > kv1.front() && u < kv1.back() && kv1.multiplicity(u, 0.0) > p - regularity_bound)
                throw SplineError("insert_knots: multiplicity exceeds p - r");
    }

    Refinement r;
    if (basis.rational()) {
        Eigen::VectorXd w0(n0);
        for (int i = 0; i < n0; ++i) w0[i] = basis.weight(i);
        Eigen::VectorXd w1 = A * w0;
        std::vector<double> wv(w1.data(), w1.data() + w1.size());
        r.fine = SplineBasis(kv1, wv);
        Eigen::MatrixXd T = w1.cwiseInverse().asDiagonal() * A * w0.asDiagonal();
        r.transfer = T.sparseView(1.0, 1e-15);
    } else {
        r.fine = SplineBasis(kv1);
        r.transfer = A.sparseView(1.0, 1e-15);
    }
    r.transfer.makeCompressed();
    return r;
}

std::vector<double> uniform_refinement_knots(const KnotVector& kv, int elements, int regularity)
{
    const int p = kv.degree();
    const double a = kv.front(), b = kv.back();
    std::vector<double> out;
    for (int e = 1; e < elements; ++e) {
        const double u = a + (b - a) * e / elements;
        int have = 0;
        for (double k : kv.knots())
            if (std::abs(k - u) <= 1e-12 * (b - a)) ++have;
        for (int m = have; m < p - regularity; ++m) out.push_back(u);
    }
    return out;
}

// ---------------------------------------------------------------- NurbsCurve

NurbsCurve::NurbsCurve(SplineBasis basis, std::vector<Eigen::Vector2d> control_points)
    : basis_(std::move(basis)), cps_(std::move(control_points))
{
    if (static_cast<int>(cps_.size()) != basis_.size())
        throw SplineError("NurbsCurve: control point count does not match basis size");
}

NurbsCurve NurbsCurve::line(const Eigen::Vector2d& a, const Eigen::Vector2d& b, int degree)
{
    std::vector<double> k(static_cast<std::size_t>(degree + 1), 0.0);
    k.insert(k.end(), static_cast<std::size_t>(degree + 1), 1.0);
    std::vector<Eigen::Vector2d> cps;
    for (int i = 0; i <= degree; ++i) cps.push_back(a + (b - a) * (static_cast<double>(i) / degree));
    return NurbsCurve(SplineBasis(KnotVector(k, degree)), cps);
}

NurbsCurve NurbsCurve::arc(const Eigen::Vector2d& c, double r, double a0, double a1)
{
    const double sweep = a1 - a0;
    // one rational Bezier piece up to 120 degrees, quarter pieces beyond
    int pieces = 1;
    if (std::abs(sweep) > 2.0 * std::numbers::pi / 3.0 + 1e-12)
        pieces = static_cast<int>(std::ceil(std::abs(sweep) / (0.5 * std::numbers::pi) - 1e-12));
    const double d = sweep / pieces;
    std::vector<double> knots = {0.0, 0.0, 0.0};
    std::vector<double> w;
    std::vector<Eigen::Vector2d> cps;
    auto on = [&](double a) { return Eigen::Vector2d(c + r * Eigen::Vector2d(std::cos(a), std::sin(a))); };
    for (int k = 0; k < pieces; ++k) {
        const double s = a0 + k * d, e = s + d, m = 0.5 * (s + e);
        if (k == 0) {
            cps.push_back(on(s));
            w.push_back(1.0);
        }
        cps.push_back(c + r / std::cos(0.5 * d) * Eigen::Vector2d(std::cos(m), std::sin(m)));
        w.push_back(std::cos(0.5 * d));
        cps.push_back(on(e));
        w.push_back(1.0);
        if (k + 1 < pieces) {
            knots.push_back(static_cast<double>(k + 1) / pieces);
            knots.push_back(static_cast<double>(k + 1) / pieces);
        }
    }
    knots.insert(knots.end(), 3, 1.0);
    return NurbsCurve(SplineBasis(KnotVector(knots, 2), w), cps);
}

NurbsCurve NurbsCurve::circle(const Eigen::Vector2d& c, double r, bool ccw)
{
    NurbsCurve full = arc(c, r, 0.0, 2.0 * std::numbers::pi);
    return ccw ? full : full.reversed();
}

NurbsCurve NurbsCurve::ellipse(const Eigen::Vector2d& c, double rx, double ry, bool ccw)
{
    NurbsCurve unit = circle(Eigen::Vector2d::Zero(), 1.0, ccw);
    std::vector<Eigen::Vector2d> cps;
    for (const auto& q : unit.cps_) cps.push_back(c + Eigen::Vector2d(rx * q.x(), ry * q.y()));
    return NurbsCurve(unit.basis_, cps);
}

Eigen::Vector2d NurbsCurve::point(double t) const { return derivatives(t, 0)[0]; }

std::array<Eigen::Vector2d, 3> NurbsCurve::derivatives(double t, int nd) const
{
    const BasisValues b = basis_.eval(t, nd);
    std::array<Eigen::Vector2d, 3> out{Eigen::Vector2d::Zero(), Eigen::Vector2d::Zero(), Eigen::Vector2d::Zero()};
    for (int d = 0; d <= nd; ++d)
        for (int j = 0; j < b.ders.cols(); ++j)
            out[static_cast<std::size_t>(d)] += b.ders(d, j) * cps_[static_cast<std::size_t>(b.first + j)];
    return out;
}

NurbsCurve NurbsCurve::reversed() const
{
    const auto& t = basis_.knots().knots();
    const double a = t.front(), b = t.back();
    std::vector<double> k(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) k[i] = a + b - t[t.size() - 1 - i];
    std::vector<double> w = basis_.weights();
    std::reverse(w.begin(), w.end());
    std::vector<Eigen::Vector2d> cps(cps_.rbegin(), cps_.rend());
    return NurbsCurve(SplineBasis(KnotVector(k, degree()), w), cps);
}

NurbsCurve NurbsCurve::refined(const std::vector<double>& knots, int regularity_bound) const
{
    if (knots.empty()) return *this;
    Refinement r = insert_knots(basis_, knots, regularity_bound);
    // the rational transfer W1^-1 A W0 maps control points exactly
    const int n0 = basis_.size(), n1 = r.fine.size();
    Eigen::MatrixXd P(n0, 2);
    for (int i = 0; i < n0; ++i) P.row(i) = cps_[static_cast<std::size_t>(i)].transpose();
    Eigen::MatrixXd Q = r.transfer * P;
    std::vector<Eigen::Vector2d> cps(static_cast<std::size_t>(n1));
    for (int k = 0; k < n1; ++k) cps[static_cast<std::size_t>(k)] = Q.row(k).transpose();
    return NurbsCurve(r.fine, cps);
}

NurbsCurve NurbsCurve::subcurve(double a, double b) const
{
    if (!(a < b)) throw SplineError("subcurve: need a < b");
    const int p = degree();
    const double lo = t0(), hi = t1();
    a = std::max(a, lo);
    b = std::min(b, hi);
    const double tol = 1e-13 * (hi - lo);
    auto snap = [&](double u) {
        for (double k : basis_.knots().knots())
            if (std::abs(k - u) <= tol) return k;
        return u;
    };
    a = snap(a);
    b = snap(b);
    std::vector<double> ins;
    const KnotVector& kv = basis_.knots();
    if (a > lo)
        for (int m = kv.multiplicity(a, 0.0); m < p; ++m) ins.push_back(a);
    if (b < hi)
        for (int m = kv.multiplicity(b, 0.0); m < p; ++m) ins.push_back(b);
    NurbsCurve c = refined(ins, -1);
    const auto& t = c.basis_.knots().knots();
    int k0 = 0;
    while (t[static_cast<std::size_t>(k0)] < a) ++k0;
    int ma = 0;
    while (static_cast<std::size_t>(k0 + ma) < t.size() && t[static_cast<std::size_t>(k0 + ma)] == a) ++ma;
    int k1 = 0;
    while (t[static_cast<std::size_t>(k1)] < b) ++k1;
    const int i0 = k0 + ma - p - 1;
    const int i1 = k1 - 1;
    std::vector<double> knots(static_cast<std::size_t>(p + 1), 0.0);
    for (std::size_t i = 0; i < t.size(); ++i)
        if (t[i] > a && t[i] < b) knots.push_back((t[i] - a) / (b - a));
    knots.insert(knots.end(), static_cast<std::size_t>(p + 1), 1.0);
    std::vector<Eigen::Vector2d> cps;
    std::vector<double> w;
    for (int i = i0; i <= i1; ++i) {
        cps.push_back(c.cps_[static_cast<std::size_t>(i)]);
        if (c.basis_.rational()) w.push_back(c.basis_.weight(i));
    }
    return NurbsCurve(SplineBasis(KnotVector(knots, p), w), cps);
}

NurbsCurve NurbsCurve::elevated(int target) const
{
    int q = degree();
    if (target < q) throw SplineError("elevated: target degree below current degree");
    if (target == q) return *this;
    if (basis_.size() != q + 1) throw SplineError("elevated: only single-piece curves can be elevated");
    // homogeneous control points (w x, w y, w)
    std::vector<Eigen::Vector3d> P;
    for (int i = 0; i <= q; ++i) {
        const double w = basis_.weight(i);
        P.emplace_back(w * cps_[static_cast<std::size_t>(i)].x(), w * cps_[static_cast<std::size_t>(i)].y(), w);
    }
    while (q < target) {
        std::vector<Eigen::Vector3d> Q(static_cast<std::size_t>(q + 2));
        Q[0] = P[0];
        Q[static_cast<std::size_t>(q + 1)] = P[static_cast<std::size_t>(q)];
        for (int i = 1; i <= q; ++i) {
            const double a = static_cast<double>(i) / (q + 1);
            Q[static_cast<std::size_t>(i)] = a * P[static_cast<std::size_t>(i - 1)] + (1.0 - a) * P[static_cast<std::size_t>(i)];
        }
        P = std::move(Q);
        ++q;
    }
    std::vector<double> knots(static_cast<std::size_t>(q + 1), t0());
    knots.insert(knots.end(), static_cast<std::size_t>(q + 1), t1());
    std::vector<Eigen::Vector2d> cps;
    std::vector<double> w;
    for (const auto& h : P) {
        cps.emplace_back(h.x() / h.z(), h.y() / h.z());
        w.push_back(h.z());
    }
    if (!basis_.rational()) w.clear();
    return NurbsCurve(SplineBasis(KnotVector(knots, q), w), cps);
}

std::vector<double> NurbsCurve::breakpoints() const
{
    std::vector<double> out;
    for (double u : basis_.knots().unique_knots())
        if (u > t0() && u < t1()) out.push_back(u);
    return out;
}

double NurbsCurve::length(int samples_per_span) const
{
    double L = 0.0;
    const int n = std::min(samples_per_span, 64);
    for (const auto& [a, b] : basis_.knots().elements()) {
        const QuadRule q = gauss_legendre(n, a, b);
        for (std::size_t k = 0; k < q.points.size(); ++k) L += q.weights[k] * derivatives(q.points[k], 1)[1].norm();
    }
    return L;
}

NurbsCurve NurbsCurve::translated(const Eigen::Vector2d& d) const
{
    std::vector<Eigen::Vector2d> cps = cps_;
    for (auto& c : cps) c += d;
    return NurbsCurve(basis_, cps);
}

}  // namespace sbshell
