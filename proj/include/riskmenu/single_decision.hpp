#ifndef RISKMENU_SINGLE_DECISION_HPP
#define RISKMENU_SINGLE_DECISION_HPP

// One-size-fits-all decision of a planner with utility v over certainty
// equivalents: maximize E_F[v(CE(gamma, m))] over m.
//
// The first-order condition reads m = Phi(m) = m*(Gamma(m)) where Gamma(m) is
// the mean of gamma re-weighted by h(gamma, m) = CE v'(CE). For power
// utility v with parameter eta, h is proportional to exp(theta(m) gamma) with
// theta(m) = sigma^2 (eta - 1) T m^2 / 2, i.e. an exponential tilt of F.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <utility>
#include <vector>

#include "riskmenu/core_model.hpp"
#include "riskmenu/distributions.hpp"

namespace riskmenu {

class PlannerPreferences {
public:
    using Fn = std::function<double(double)>;

    /// v(c) = (c^{1-eta} - 1) / (1 - eta), log for eta = 1.
    static PlannerPreferences power(double eta) {
        if (!(eta >= 0.0) || !std::isfinite(eta))
            throw DomainError("planner eta must be finite and >= 0");
        PlannerPreferences p;
        p.eta_ = eta;
        return p;
    }

    static PlannerPreferences logarithmic() { return power(1.0); }

    /// General increasing v with its derivative supplied analytically.
    /// v' > 0 is spot-checked on a log-spaced grid over [1e-6, 1e6].
    static PlannerPreferences general(Fn v, Fn dv) {
        if (!v || !dv) throw DomainError("general planner utility needs v and v'");
        for (int k = -12; k <= 12; ++k) {
            const double c = std::pow(10.0, 0.5 * k);
            if (!(dv(c) > 0.0))
                throw DomainError("planner utility must be strictly increasing (v' > 0)");
        }
        PlannerPreferences p;
        p.v_ = std::move(v);
        p.dv_ = std::move(dv);
        return p;
    }

    bool is_power() const noexcept { return !v_; }
    bool is_logarithmic() const noexcept { return is_power() && eta_ == 1.0; }
    double eta() const noexcept { return eta_; }

    /// v(CE) given log CE.
    double value(double log_ce) const {
        if (!is_power()) return v_(std::exp(log_ce));
        if (eta_ == 1.0) return log_ce;
        const double k = 1.0 - eta_;
        return std::expm1(k * log_ce) / k;
    }

    /// h = CE v'(CE) given log CE.
    double h(double log_ce) const {
        if (!is_power()) {
            const double c = std::exp(log_ce);
            return c * dv_(c);
        }
        return std::exp((1.0 - eta_) * log_ce);
    }

private:
    PlannerPreferences() = default;
    double eta_ = 1.0;
    Fn v_;
    Fn dv_;
};

struct LocalMaximum {
    double m;
    double objective;
};

struct SolverDiagnostics {
    int iterations = 0;
    double residual = 0.0; ///< |m - Phi(m)| at the returned decision
    std::vector<LocalMaximum> local_maxima; ///< global-scan branch only
};

struct SingleSolution {
    double m_star;
    double gamma_star; ///< m_star = merton_fraction(gamma_star)
    double objective_value;
    SolverDiagnostics diagnostics;
};

/// Grid size of the global scan used for eta < 1 and general v.
inline constexpr int kScanPoints = 2048;
/// Objective values within this band count as tied; the smallest decision wins.
inline constexpr double kTieTolerance = 1e-9;
inline constexpr double kDecisionTolerance = 1e-12;

/// E_F[v(CE(gamma, m))].
inline double objective(const MarketParams& mp, const TypeDistribution& F,
                        const PlannerPreferences& prefs, double m) {
    return quadrature_expectation(
        F, [&](double g) { return prefs.value(log_certainty_equivalent(mp, g, m)); });
}

/// theta(m) = sigma^2 (eta - 1) T m^2 / 2.
inline double tilting_coefficient(const MarketParams& mp, double eta, double m) {
    return 0.5 * mp.variance() * (eta - 1.0) * mp.T() * m * m;
}

/// Gamma(m), the h-weighted mean risk type.
inline double weighted_risk_type(const MarketParams& mp, const TypeDistribution& F,
                                 const PlannerPreferences& prefs, double m) {
    if (prefs.is_power()) return tilted_mean(F, tilting_coefficient(mp, prefs.eta(), m));
    if (F.is_degenerate()) return mean(F);
    auto h = [&](double g) { return prefs.h(log_certainty_equivalent(mp, g, m)); };
    const double z = quadrature_expectation(F, h);
    const double first = quadrature_expectation(F, [&](double g) { return g * h(g); });
    return std::clamp(first / z, F.support_low(), F.support_high());
}

/// Phi(m) = m*(Gamma(m)); always inside [m*(b), m*(a)].
inline double fixed_point_map(const MarketParams& mp, const TypeDistribution& F,
                              const PlannerPreferences& prefs, double m) {
    return merton_fraction(mp, weighted_risk_type(mp, F, prefs, m));
}

namespace detail {

// Root of s(m) = Phi(m) - m on [lo, hi] with s(lo) > 0 >= s(hi).
template <class S>
std::pair<double, int> bisect_sign_change(S&& s, double lo, double hi) {
    int it = 0;
    while (hi - lo > kDecisionTolerance * std::max(1.0, std::abs(hi)) && it < 200) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if (s(mid) > 0.0) lo = mid;
        else hi = mid;
        ++it;
    }
    return {0.5 * (lo + hi), it};
}

inline SingleSolution finish(const MarketParams& mp, const TypeDistribution& F,
                             const PlannerPreferences& prefs, double m, int iterations) {
    SingleSolution sol;
    sol.m_star = m;
    sol.gamma_star = implied_risk_type(mp, m);
    sol.objective_value = objective(mp, F, prefs, m);
    sol.diagnostics.iterations = iterations;
    sol.diagnostics.residual = std::abs(m - fixed_point_map(mp, F, prefs, m));
    return sol;
}

} // namespace detail

/// Optimal one-size-fits-all decision.
///
/// - degenerate F: m*(x) in closed form
/// - eta = 1: m*(E[gamma])
/// - eta > 1: bisection on m - Phi(m), which is increasing, over [m*(b), m*(a)]
/// - eta < 1 and general v: sign scan of Phi(m) - m on a kScanPoints grid,
///   bisection inside every + to - bracket (each is a local maximum), then the
///   smallest global maximizer up to kTieTolerance
inline SingleSolution solve(const MarketParams& mp, const TypeDistribution& F,
                            const PlannerPreferences& prefs) {
    if (F.is_degenerate()) return detail::finish(mp, F, prefs, merton_fraction(mp, mean(F)), 0);
    if (prefs.is_logarithmic())
        return detail::finish(mp, F, prefs, merton_fraction(mp, mean(F)), 0);

    const double lo = merton_fraction(mp, F.support_high());
    const double hi = merton_fraction(mp, F.support_low());
    auto s = [&](double m) { return fixed_point_map(mp, F, prefs, m) - m; };

    if (prefs.is_power() && prefs.eta() > 1.0) {
        const auto [m, it] = detail::bisect_sign_change(s, lo, hi);
        return detail::finish(mp, F, prefs, m, it);
    }

    std::vector<double> grid(kScanPoints), sign(kScanPoints);
    for (int k = 0; k < kScanPoints; ++k) {
        grid[k] = k + 1 == kScanPoints ? hi : lo + (hi - lo) * k / (kScanPoints - 1.0);
        sign[k] = s(grid[k]);
    }
    std::vector<LocalMaximum> maxima;
    int iterations = kScanPoints;
    for (int k = 0; k + 1 < kScanPoints; ++k) {
        if (sign[k] > 0.0 && sign[k + 1] <= 0.0) {
            const auto [m, it] = detail::bisect_sign_change(s, grid[k], grid[k + 1]);
            iterations += it;
            maxima.push_back({m, objective(mp, F, prefs, m)});
        }
    }
    if (maxima.empty()) {
        // Phi(m) = m at the left end of the bracket, or no sign change resolved.
        double best_m = grid.front(), best_v = -std::numeric_limits<double>::infinity();
        for (double m : grid) {
            const double v = objective(mp, F, prefs, m);
            if (v > best_v) best_v = v, best_m = m;
        }
        maxima.push_back({best_m, best_v});
    }
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& lm : maxima) best = std::max(best, lm.objective);
    double chosen = maxima.front().m;
    for (const auto& lm : maxima) {
        if (lm.objective >= best - kTieTolerance) {
            chosen = lm.m;
            break;
        }
    }
    SingleSolution sol = detail::finish(mp, F, prefs, chosen, iterations);
    sol.diagnostics.local_maxima = std::move(maxima);
    return sol;
}

struct HorizonLimit {
    double m_at_horizon;
    double m_short_horizon;
    double short_horizon;
};

/// Solves at the market horizon and at T = 1e-6; the short-horizon decision
/// approaches m*(E[gamma]).
inline HorizonLimit horizon_limit_check(const MarketParams& mp, const TypeDistribution& F,
                                        double eta) {
    constexpr double kShort = 1e-6;
    const auto prefs = PlannerPreferences::power(eta);
    return {solve(mp, F, prefs).m_star, solve(mp.with_horizon(kShort), F, prefs).m_star, kShort};
}

} // namespace riskmenu

#endif // RISKMENU_SINGLE_DECISION_HPP
