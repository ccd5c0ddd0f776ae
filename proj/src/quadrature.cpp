#include "sbshell/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

#include "sbshell/errors.hpp"

namespace sbshell {

namespace {

QuadRule compute_rule(int n)
{
    QuadRule r;
    r.points.resize(static_cast<std::size_t>(n));
    r.weights.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        // Newton on P_n starting from the Tricomi estimate
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = pk;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        r.points[static_cast<std::size_t>(n - 1 - i)] = x;
        r.weights[static_cast<std::size_t>(n - 1 - i)] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    return r;
}

}  // namespace

const QuadRule& gauss_legendre(int n)
{
    if (n < 1 || n > 64) throw Error("gauss_legendre: unsupported number of points");
    static std::mutex mtx;
    static std::map<int, QuadRule> cache;
    std::lock_guard<std::mutex> lock(mtx);
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, compute_rule(n)).first;
    return it->second;
}

QuadRule gauss_legendre(int n, double a, double b)
{
    const QuadRule& ref = gauss_legendre(n);
    QuadRule r = ref;
    const double h = 0.5 * (b - a), m = 0.5 * (a + b);
    for (std::size_t i = 0; i < r.points.size(); ++i) {
        r.points[i] = m + h * ref.points[i];
        r.weights[i] = h * ref.weights[i];
    }
    return r;
}

}  // namespace sbshell
