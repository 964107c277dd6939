#pragma once

#include <cmath>
#include <map>
#include <mutex>
#include <type_traits>
#include <vector>

namespace mlz::detail {

struct GaussRule {
    std::vector<double> nodes;    // on [-1, 1]
    std::vector<double> weights;
};

/// Gauss-Legendre nodes/weights by Newton iteration on P_n.
inline GaussRule make_gauss_rule(int n) {
    GaussRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    const int m = (n + 1) / 2;
    for (int i = 0; i < m; ++i) {
        // Chebyshev-based initial guess
        double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            pp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / pp;
            x -= dx;
            if (std::abs(dx) < 1e-15) {
                // one polishing step after convergence
                double q0 = 1.0, q1 = x;
                for (int k = 2; k <= n; ++k) {
                    const double q2 = ((2.0 * k - 1.0) * x * q1 - (k - 1.0) * q0) / k;
                    q0 = q1;
                    q1 = q2;
                }
                pp = n * (x * q1 - q0) / (x * x - 1.0);
                break;
            }
        }
        rule.nodes[i] = -x;
        rule.nodes[n - 1 - i] = x;
        const double w = 2.0 / ((1.0 - x * x) * pp * pp);
        rule.weights[i] = w;
        rule.weights[n - 1 - i] = w;
    }
    return rule;
}

/// Cached rules; the orders used in hot loops avoid the lock entirely.
inline const GaussRule& gauss_legendre(int n) {
    switch (n) {
        case 8: { static const GaussRule r = make_gauss_rule(8); return r; }
        case 12: { static const GaussRule r = make_gauss_rule(12); return r; }
        case 16: { static const GaussRule r = make_gauss_rule(16); return r; }
        case 20: { static const GaussRule r = make_gauss_rule(20); return r; }
        default: break;
    }
    static std::map<int, GaussRule> cache;
    static std::mutex mtx;
    std::lock_guard<std::mutex> lock(mtx);
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, make_gauss_rule(n)).first;
    return it->second;
}

/// Integrates f over [a, b] with an n-point Gauss-Legendre rule. The functor
/// may return a scalar or an Eigen matrix; the accumulator is materialized
/// to the plain value type either way.
template <typename F>
auto gl_integrate(F&& f, double a, double b, int n) {
    const GaussRule& rule = gauss_legendre(n);
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (a + b);
    using R = std::decay_t<decltype(f(mid))>;
    R acc = f(mid + half * rule.nodes[0]) * rule.weights[0];
    for (int i = 1; i < n; ++i)
        acc += f(mid + half * rule.nodes[i]) * rule.weights[i];
    return R(acc * half);
}

}  // namespace mlz::detail
