#ifndef RISKMENU_ROBUST_HPP
#define RISKMENU_ROBUST_HPP

// Decisions for a logarithmic planner who only knows that risk types lie in
// [a, b]. An adversary picks the type distribution.
//
// Absolute criterion: A(m, F) = E_F[log CE(gamma, m)].
// Relative criterion: R(m, F) = A(m, F) - A(m*_F, F) <= 0, with
// m*_F = m*(E_F[gamma]). Against a point mass F_g and the decision
// m = m*(Gamma):
//     R = Z (1/Gamma - g / (2 Gamma^2) - 1 / (2g)),   Z = (mu - r)^2 T / sigma^2.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "riskmenu/core_model.hpp"
#include "riskmenu/distributions.hpp"
#include "riskmenu/partitioning.hpp"

namespace riskmenu {

/// Z = (mu - r)^2 T / sigma^2.
inline double regret_scale(const MarketParams& mp) {
    return mp.excess_return() * mp.excess_return() * mp.T() / mp.variance();
}

/// rT + (mu - r) m T - m^2 sigma^2 T E_F[gamma] / 2.
inline double absolute_criterion(const MarketParams& mp, double m, const TypeDistribution& F) {
    const double T = mp.T();
    return mp.r() * T + mp.excess_return() * m * T - 0.5 * m * m * mp.variance() * T * mean(F);
}

/// R(m, F) given only E_F[gamma]; the criterion depends on F through its mean.
inline double relative_criterion_at_mean(const MarketParams& mp, double m, double mean_gamma) {
    require_risk_type(mean_gamma);
    const double T = mp.T(), e = mp.excess_return(), v = mp.variance();
    return e * m * T - 0.5 * m * m * v * T * mean_gamma - 0.5 * e * e * T / (v * mean_gamma);
}

inline double relative_criterion(const MarketParams& mp, double m, const TypeDistribution& F) {
    return relative_criterion_at_mean(mp, m, mean(F));
}

/// Relative criterion of a menu against F_g: agents of type g take their best decision.
inline double menu_regret_at(const MarketParams& mp, const DecisionMenu& menu, double g) {
    double best = -std::numeric_limits<double>::infinity();
    for (double m : menu.decisions()) best = std::max(best, relative_criterion_at_mean(mp, m, g));
    return best;
}

struct GameOutcome {
    std::vector<double> planner_decisions;
    std::vector<double> adversary_support; ///< locations of the point masses F_x
    std::optional<double> mixing_probability; ///< probability of F_a (relative game)
    double value;
};

/// Absolute-criterion game: the adversary concentrates all types at b and the
/// planner answers with m*(b).
inline GameOutcome acg_equilibrium(const MarketParams& mp, double a, double b) {
    if (!(a > 0.0) || !(b >= a)) throw DomainError("game needs 0 < a <= b");
    const double m = merton_fraction(mp, b);
    return {{m}, {b}, std::nullopt, absolute_criterion(mp, m, TypeDistribution::point(b))};
}

/// Relative-criterion game. The adversary mixes F_a with probability
/// p* = sqrt(b) / (sqrt(a) + sqrt(b)) and F_b otherwise; the planner plays
/// m*(sqrt(ab)); the value is -(Z/2)(1/sqrt(a) - 1/sqrt(b))^2.
/// For a = b the outcome is the pure pair (m*(a), F_a) with value 0.
inline GameOutcome rcg_equilibrium(const MarketParams& mp, double a, double b) {
    if (!(a > 0.0) || !(b >= a)) throw DomainError("game needs 0 < a <= b");
    if (a == b) return {{merton_fraction(mp, a)}, {a}, 1.0, 0.0};
    const double sa = std::sqrt(a), sb = std::sqrt(b);
    const double gap = 1.0 / sa - 1.0 / sb;
    return {{merton_fraction(mp, sa * sb)}, {a, b}, sb / (sa + sb),
            -0.5 * regret_scale(mp) * gap * gap};
}

struct RobustMenu {
    std::size_t n;
    std::vector<double> h;               ///< h_0..h_n, from sqrt(b) down to sqrt(a)
    std::vector<double> targeted_types;  ///< Gamma*_1..Gamma*_n
    std::vector<double> boundaries;      ///< g*_0 = a .. g*_n = b
    std::vector<double> decisions;       ///< m*_i = m*(Gamma*_i)
    double regret_guarantee;             ///< R*

    DecisionMenu menu() const { return DecisionMenu(decisions); }
};

/// The n-decision menu whose worst-case relative criterion over all type
/// distributions on [a, b] is R* = -(Z / (2 n^2)) (1/sqrt(a) - 1/sqrt(b))^2.
///
/// h_i = sqrt(a) i/n + sqrt(b) (n - i)/n, Gamma*_i = ab / (h_{i-1} h_i),
/// g*_i = ab / h_i^2. For a = b every type and boundary equals a.
inline RobustMenu robust_menu(const MarketParams& mp, double a, double b, std::size_t n) {
    if (!(a > 0.0) || !(b >= a)) throw DomainError("robust menu needs 0 < a <= b");
    if (n < 1) throw DomainError("robust menu needs n >= 1");
    const double sa = std::sqrt(a), sb = std::sqrt(b), ab = a * b;
    const double dn = static_cast<double>(n);
    RobustMenu out;
    out.n = n;
    out.h.resize(n + 1);
    for (std::size_t i = 0; i <= n; ++i) {
        const double t = static_cast<double>(i) / dn;
        out.h[i] = sa * t + sb * (1.0 - t);
    }
    out.h.front() = sb;
    out.h.back() = sa;
    out.boundaries.resize(n + 1);
    for (std::size_t i = 0; i <= n; ++i) out.boundaries[i] = a == b ? a : ab / (out.h[i] * out.h[i]);
    out.boundaries.front() = a;
    out.boundaries.back() = b;
    for (std::size_t i = 1; i <= n; ++i) {
        out.targeted_types.push_back(a == b ? a : ab / (out.h[i - 1] * out.h[i]));
        out.decisions.push_back(merton_fraction(mp, out.targeted_types.back()));
    }
    const double gap = 1.0 / sa - 1.0 / sb;
    out.regret_guarantee = -regret_scale(mp) * gap * gap / (2.0 * dn * dn);
    return out;
}

struct IndifferenceReport {
    double max_deviation;        ///< max |R(m_j, F_{g_i}) - R*| over candidate types
    double cell_formula_deviation; ///< max |-(Z/(2ab))(h_{i-1}-h_i)^2 - R*|
    double h_step_deviation;     ///< max |(h_{i-1}-h_i) - (sqrt(b)-sqrt(a))/n|
};

/// Checks that the adversary is indifferent between the n + 1 point masses at
/// a, the menu's indifference types, and b.
///
/// Indifference types are recomputed from the decisions, so a perturbed menu
/// shows up as a deviation. At an interior type both adjacent decisions are
/// evaluated.
inline IndifferenceReport verify_indifference(const MarketParams& mp, const RobustMenu& rm) {
    const DecisionMenu menu(rm.decisions);
    const double a = rm.boundaries.front(), b = rm.boundaries.back();
    std::vector<double> g{a};
    for (double x : boundaries_from_menu(mp, menu)) g.push_back(x);
    g.push_back(b);

    IndifferenceReport rep{0.0, 0.0, 0.0};
    const std::size_t n = menu.size();
    for (std::size_t i = 0; i <= n; ++i) {
        for (std::size_t j : {i, i + 1}) {
            if (j == 0 || j > n) continue;
            const double v = relative_criterion_at_mean(mp, menu[j - 1], g[i]);
            rep.max_deviation = std::max(rep.max_deviation, std::abs(v - rm.regret_guarantee));
        }
    }
    const double Z = regret_scale(mp);
    const double step = (std::sqrt(b) - std::sqrt(a)) / static_cast<double>(n);
    for (std::size_t i = 1; i <= n; ++i) {
        const double dh = rm.h[i - 1] - rm.h[i];
        rep.h_step_deviation = std::max(rep.h_step_deviation, std::abs(dh - step));
        const double cell = -Z / (2.0 * a * b) * dh * dh;
        rep.cell_formula_deviation =
            std::max(rep.cell_formula_deviation, std::abs(cell - rm.regret_guarantee));
    }
    return rep;
}

struct WorstCase {
    double value;
    double location; ///< risk type of the worst point mass
};

/// Worst relative criterion of a menu over all distributions on [a, b].
///
/// Within each self-selection cell the criterion is concave in the type, so
/// the minimum over point masses sits at a, b or an interior indifference
/// type. Ties keep the smallest location.
inline WorstCase worst_case_regret(const MarketParams& mp, const DecisionMenu& menu, double a,
                                   double b) {
    if (!(a > 0.0) || !(b >= a)) throw DomainError("worst case needs 0 < a <= b");
    std::vector<double> candidates{a};
    for (double g : boundaries_from_menu(mp, menu))
        if (g > a && g < b) candidates.push_back(g);
    candidates.push_back(b);
    WorstCase worst{std::numeric_limits<double>::infinity(), a};
    for (double g : candidates) {
        const double v = menu_regret_at(mp, menu, g);
        if (v < worst.value) worst = {v, g};
    }
    return worst;
}

/// Brute-force counterpart of worst_case_regret on a uniform grid including a and b.
inline WorstCase worst_case_regret_scan(const MarketParams& mp, const DecisionMenu& menu,
                                        double a, double b, std::size_t points = 10000) {
    WorstCase worst{std::numeric_limits<double>::infinity(), a};
    for (std::size_t k = 0; k < points; ++k) {
        const double g = k + 1 == points ? b : a + (b - a) * static_cast<double>(k) / (points - 1.0);
        const double v = menu_regret_at(mp, menu, g);
        if (v < worst.value) worst = {v, g};
    }
    return worst;
}

struct StaticsRow {
    std::size_t i;
    double boundary;      ///< g*_i
    double targeted_type; ///< Gamma*_i
    double r;             ///< (g*_i - a) / (b - a)
    double rho;           ///< (Gamma*_i - a) / (b - a)
};

struct ComparativeStatics {
    bool defined; ///< false for a = b, where the relative locations are 0/0
    std::vector<StaticsRow> rows;
};

/// Relative locations of the robust boundaries and targeted types for i = 1..n.
///
/// Differences to a are expanded algebraically, so the b -> a limit is
/// evaluated without cancellation.
inline ComparativeStatics comparative_statics(double a, double b, std::size_t n) {
    if (!(a > 0.0) || !(b >= a)) throw DomainError("comparative statics needs 0 < a <= b");
    if (n < 1) throw DomainError("comparative statics needs n >= 1");
    const MarketParams unit(0.0, 1.0, 1.0, 1.0);
    const RobustMenu rm = robust_menu(unit, a, b, n);
    ComparativeStatics out{b > a, {}};
    const double sa = std::sqrt(a), sb = std::sqrt(b), dn = static_cast<double>(n);
    const double d = (sb - sa) / dn;
    for (std::size_t i = 1; i <= n; ++i) {
        StaticsRow row{i, rm.boundaries[i], rm.targeted_types[i - 1],
                       std::numeric_limits<double>::quiet_NaN(),
                       std::numeric_limits<double>::quiet_NaN()};
        if (out.defined) {
            const double t = static_cast<double>(i) / dn;
            const double hi = rm.h[i], hprev = rm.h[i - 1];
            row.r = i == n ? 1.0 : a * t * (sb + hi) / (hi * hi * (sb + sa));
            const double di = static_cast<double>(i);
            row.rho = a * ((2.0 * di - 1.0) * sb - di * (di - 1.0) * d) / (dn * hprev * hi * (sb + sa));
        }
        out.rows.push_back(row);
    }
    return out;
}

struct ClaimsReport {
    double regret_target;
    std::vector<double> boundaries;     ///< g_0 = a, g_1, ...
    std::vector<double> targeted_types; ///< Gamma_1, ...
};

namespace detail {

// Bisection on a decreasing function with f(lo) > 0 > f(hi).
template <class Fn>
double bisect_decreasing(Fn&& f, double lo, double hi) {
    for (int it = 0; it < 400; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi || hi - lo <= 1e-15 * hi) break;
        if (f(mid) > 0.0) lo = mid;
        else hi = mid;
    }
    return 0.5 * (lo + hi);
}

} // namespace detail

/// Rebuilds the indifference sequence g_0 = a < Gamma_1 < g_1 < ... for a
/// target regret R < 0, taking `steps` steps. With S = -2R/Z:
///   Gamma_i from g_{i-1}:  S = g x^2 - 2x + 1/g, x = 1/Gamma in (0, 1/g)
///   g_i from Gamma_i:      1/g = S + 2/Gamma - g/Gamma^2, g > Gamma
/// Each equation is solved by bisection. Throws InfeasibleError naming the
/// step when S >= 1/g_{i-1}, i.e. no decision can cause a loss of R.
inline ClaimsReport claims_check(const MarketParams& mp, double a, double regret_target,
                                 std::size_t steps) {
    if (!(a > 0.0)) throw DomainError("claims check needs a > 0");
    if (!(regret_target < 0.0)) throw DomainError("claims check needs a negative regret target");
    const double S = -2.0 * regret_target / regret_scale(mp);
    ClaimsReport rep{regret_target, {a}, {}};
    for (std::size_t i = 1; i <= steps; ++i) {
        const double g = rep.boundaries.back();
        if (!(S < 1.0 / g))
            throw InfeasibleError("regret target infeasible at step " + std::to_string(i) +
                                      ": no targeted type reaches it from g = " + std::to_string(g),
                                  i);
        const double x = detail::bisect_decreasing(
            [&](double x) { return g * x * x - 2.0 * x + 1.0 / g - S; }, 0.0, 1.0 / g);
        const double gamma = 1.0 / x;
        rep.targeted_types.push_back(gamma);

        auto phi = [&](double gn) { return S + 2.0 / gamma - gn / (gamma * gamma) - 1.0 / gn; };
        double hi = 2.0 * gamma;
        while (phi(hi) > 0.0) hi *= 2.0;
        rep.boundaries.push_back(detail::bisect_decreasing(phi, gamma, hi));
    }
    return rep;
}

/// True iff a more negative target moves every g_i and Gamma_i strictly up.
inline bool claims_monotone_in_target(const MarketParams& mp, double a,
                                      std::vector<double> targets, std::size_t steps) {
    std::sort(targets.begin(), targets.end());
    std::vector<ClaimsReport> reps;
    for (double R : targets) reps.push_back(claims_check(mp, a, R, steps));
    for (std::size_t k = 0; k + 1 < reps.size(); ++k) {
        for (std::size_t i = 1; i <= steps; ++i) {
            if (!(reps[k].boundaries[i] > reps[k + 1].boundaries[i])) return false;
            if (!(reps[k].targeted_types[i - 1] > reps[k + 1].targeted_types[i - 1])) return false;
        }
    }
    return true;
}

} // namespace riskmenu

#endif // RISKMENU_ROBUST_HPP
