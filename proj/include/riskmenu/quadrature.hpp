#ifndef RISKMENU_QUADRATURE_HPP
#define RISKMENU_QUADRATURE_HPP

#include <array>
#include <cmath>
#include <numbers>
#include <span>
#include <string>

#include "riskmenu/errors.hpp"

namespace riskmenu::quadrature {

inline constexpr int kNodes = 32;
inline constexpr double kRelTol = 1e-10;
inline constexpr int kMaxPanels = 1024;

struct Rule {
    std::array<double, kNodes> x{};
    std::array<double, kNodes> w{};
};

// Nodes and weights on [-1, 1] from Newton iteration on P_32.
inline const Rule& gauss_legendre() {
    static const Rule rule = [] {
        Rule r;
        constexpr int n = kNodes;
        for (int i = 0; i < (n + 1) / 2; ++i) {
            double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
            double dp = 0.0;
            for (int iter = 0; iter < 100; ++iter) {
                double p0 = 1.0, p1 = 0.0;
                for (int j = 1; j <= n; ++j) {
                    const double p2 = p1;
                    p1 = p0;
                    p0 = ((2.0 * j - 1.0) * z * p1 - (j - 1.0) * p2) / j;
                }
                dp = n * (z * p0 - p1) / (z * z - 1.0);
                const double dz = p0 / dp;
                z -= dz;
                if (std::abs(dz) < 1e-16) break;
            }
            const double wt = 2.0 / ((1.0 - z * z) * dp * dp);
            r.x[i] = -z;
            r.x[n - 1 - i] = z;
            r.w[i] = wt;
            r.w[n - 1 - i] = wt;
        }
        return r;
    }();
    return rule;
}

struct Estimate {
    double value;
    double abs_value; ///< integral of |f|, used as the convergence scale
};

template <class F>
Estimate panel_sum(F&& f, std::span<const double> breaks, int panels_per_piece) {
    const Rule& rule = gauss_legendre();
    double sum = 0.0, abs_sum = 0.0;
    for (std::size_t k = 0; k + 1 < breaks.size(); ++k) {
        const double lo = breaks[k], hi = breaks[k + 1];
        if (!(hi > lo)) continue;
        const double width = (hi - lo) / panels_per_piece;
        for (int p = 0; p < panels_per_piece; ++p) {
            const double a = lo + p * width;
            const double half = 0.5 * width, mid = a + half;
            double s = 0.0, as = 0.0;
            for (int j = 0; j < kNodes; ++j) {
                const double v = rule.w[j] * f(mid + half * rule.x[j]);
                s += v;
                as += std::abs(v);
            }
            sum += half * s;
            abs_sum += half * as;
        }
    }
    return {sum, abs_sum};
}

/// Integral of f over the union of pieces [breaks[k], breaks[k+1]].
///
/// Panels per piece are doubled until two successive estimates agree to
/// rel_tol (relative to the integral of |f|). Throws ToleranceError with the
/// last estimate when max_panels is reached first.
template <class F>
double integrate(F&& f, std::span<const double> breaks, double rel_tol = kRelTol,
                 int max_panels = kMaxPanels) {
    Estimate prev = panel_sum(f, breaks, 1);
    for (int panels = 2; panels <= max_panels; panels *= 2) {
        const Estimate cur = panel_sum(f, breaks, panels);
        if (std::abs(cur.value - prev.value) <= rel_tol * cur.abs_value) return cur.value;
        prev = cur;
    }
    throw ToleranceError("quadrature did not converge to relative tolerance " +
                             std::to_string(rel_tol),
                         prev.value);
}

template <class F>
double integrate(F&& f, double lo, double hi, double rel_tol = kRelTol,
                 int max_panels = kMaxPanels) {
    const std::array<double, 2> breaks{lo, hi};
    return integrate(std::forward<F>(f), std::span<const double>(breaks), rel_tol, max_panels);
}

} // namespace riskmenu::quadrature

#endif // RISKMENU_QUADRATURE_HPP
