#ifndef RISKMENU_WELFARE_BOUNDS_HPP
#define RISKMENU_WELFARE_BOUNDS_HPP

// Growth-rate decomposition of a logarithmic planner's welfare and bounds on
// the loss from offering only n decisions.
//
// For a strategy with implied risk aversion G(gamma), the welfare growth
// rate is r + (sharpe^2 / 2) E with E = E_F[2/G - gamma/G^2]. E_1* = 1/E[gamma],
// E_inf* = E[1/gamma], and E_n* is E at the optimal n-cell partition.

#include <cmath>
#include <limits>
#include <variant>
#include <vector>

#include "riskmenu/core_model.hpp"
#include "riskmenu/distributions.hpp"
#include "riskmenu/partitioning.hpp"
#include "riskmenu/single_decision.hpp"

namespace riskmenu {

/// Step function over a partition, or the identity (individually optimal decisions).
class ImpliedRiskAversionFn {
public:
    struct Step {
        Partition partition;
        std::vector<double> values;
    };
    struct Identity {};

    static ImpliedRiskAversionFn identity() { return ImpliedRiskAversionFn(Identity{}); }

    static ImpliedRiskAversionFn step(Partition partition, std::vector<double> values) {
        if (values.size() != partition.cells())
            throw DomainError("one implied risk aversion per cell is required");
        for (double v : values)
            if (!(v >= partition.lower() && v <= partition.upper()))
                throw DomainError("implied risk aversion must lie in [a, b]");
        return ImpliedRiskAversionFn(Step{std::move(partition), std::move(values)});
    }

    /// G constant equal to `value` on [a, b].
    static ImpliedRiskAversionFn constant(double a, double b, double value) {
        return step(Partition(a == b ? std::vector<double>{a, a} : std::vector<double>{a, b}), {value});
    }

    const std::variant<Step, Identity>& representation() const noexcept { return rep_; }

    double operator()(double gamma) const {
        if (const auto* s = std::get_if<Step>(&rep_)) return s->values[s->partition.cell_of(gamma)];
        return gamma;
    }

private:
    explicit ImpliedRiskAversionFn(std::variant<Step, Identity> rep) : rep_(std::move(rep)) {}
    std::variant<Step, Identity> rep_;
};

/// E_F[2/G(gamma) - gamma/G(gamma)^2].
inline double growth_factor(const TypeDistribution& F, const ImpliedRiskAversionFn& G) {
    const auto* s = std::get_if<ImpliedRiskAversionFn::Step>(&G.representation());
    if (!s) return mean_reciprocal(F);
    double e = 0.0;
    const std::size_t n = s->values.size();
    for (std::size_t i = 0; i < n; ++i) {
        const double lo = s->partition[i], hi = s->partition[i + 1];
        const bool last = i + 1 == n;
        const double mass = interval_mass(F, lo, hi, last);
        if (mass == 0.0) continue;
        const double first = interval_first_moment(F, lo, hi, last);
        const double g = s->values[i];
        e += 2.0 * mass / g - first / (g * g);
    }
    return e;
}

/// r + (1/2) ((mu - r) / sigma)^2 E, the logarithmic planner's growth rate.
inline double welfare_rate(const MarketParams& mp, const TypeDistribution& F,
                           const ImpliedRiskAversionFn& G) {
    const double sr = mp.sharpe_ratio();
    return mp.r() + 0.5 * sr * sr * growth_factor(F, G);
}

enum class EmptyCells { reject, contribute_zero };

/// sum_i P_i^2 / M_i with P_i the mass and M_i the first moment of cell i.
///
/// Equals E at the step function G_i = E[gamma | cell i]. Cells are
/// half-open except the last. Empty cells raise ZeroMassError unless
/// `empty` is contribute_zero (needed for discrete F with more cells than atoms).
inline double e_star(const TypeDistribution& F, const Partition& partition,
                     EmptyCells empty = EmptyCells::reject) {
    double e = 0.0;
    const std::size_t n = partition.cells();
    for (std::size_t i = 0; i < n; ++i) {
        const double lo = partition[i], hi = partition[i + 1];
        const bool last = i + 1 == n;
        const double mass = interval_mass(F, lo, hi, last);
        if (!(mass > 0.0)) {
            if (empty == EmptyCells::contribute_zero) continue;
            throw ZeroMassError(lo, hi);
        }
        e += mass * mass / interval_first_moment(F, lo, hi, last);
    }
    return e;
}

inline double e_star_infinity(const TypeDistribution& F) { return mean_reciprocal(F); }

/// ((b/a)^{1/n} + (a/b)^{1/n} + 2) / 4.
inline double bound_factor(double a, double b, std::size_t n) {
    if (!(a > 0.0) || !(b >= a)) throw DomainError("bound factor needs 0 < a <= b");
    if (n < 1) throw DomainError("bound factor needs n >= 1");
    const double q = std::pow(b / a, 1.0 / static_cast<double>(n));
    return (q + 1.0 / q + 2.0) / 4.0;
}

/// log(b/a) / log(4R - 3): the real-valued lower bound on the menu size that
/// keeps E_inf* <= R E_n*. It can be below one. Infinite for R = 1 < b/a.
inline double min_menu_size(double a, double b, double R) {
    if (!(a > 0.0) || !(b >= a)) throw DomainError("min menu size needs 0 < a <= b");
    if (!(R >= 1.0)) throw DomainError("min menu size needs R >= 1");
    if (b == a) return 0.0;
    if (R == 1.0) return std::numeric_limits<double>::infinity();
    return std::log(b / a) / std::log(4.0 * R - 3.0);
}

struct SharpnessWitness {
    TypeDistribution distribution;
    double gap; ///< |E_inf* E[gamma] 4ab/(a+b)^2 - 1|
};

/// The equal-weight two-point law on {a, b}, where the n = 1 bound is attained.
inline SharpnessWitness sharpness_witness(double a, double b) {
    if (!(a > 0.0) || !(b > a)) throw DomainError("sharpness witness needs 0 < a < b");
    auto F = TypeDistribution::two_point(a, b, 0.5);
    const double product = e_star_infinity(F) * mean(F) * 4.0 * a * b / ((a + b) * (a + b));
    return {std::move(F), std::abs(product - 1.0)};
}

struct BoundReport {
    std::size_t n;
    double e_value;      ///< E_n*
    double bound_factor;
    double e_infinity;   ///< E_inf*
    double ratio;        ///< E_inf* / E_n*
};

/// E_n* and the bound for the optimal n-cell partition of a logarithmic planner.
///
/// Continuous F uses the solve_grouping partition. For discrete F with
/// n >= 2 every geometric partition isolates each atom in its own cell, so
/// E_n* = E_inf* and e_star is evaluated on it with empty cells ignored.
inline BoundReport bound_report(const TypeDistribution& F, std::size_t n) {
    const double a = F.support_low(), b = F.support_high();
    const double e_inf = e_star_infinity(F);
    double e_n;
    if (n == 1 || F.is_degenerate()) {
        e_n = 1.0 / mean(F);
    } else if (F.is_discrete()) {
        e_n = e_star(F, geometric_partition(a, b, n), EmptyCells::contribute_zero);
    } else {
        // The log planner's optimal partition does not depend on the market.
        const MarketParams unit(0.0, 1.0, 1.0, 1.0);
        const auto sol = solve_grouping(unit, F, PlannerPreferences::logarithmic(), n);
        e_n = e_star(F, sol.partition);
    }
    return {n, e_n, bound_factor(a, b, n), e_inf, e_inf / e_n};
}

} // namespace riskmenu

#endif // RISKMENU_WELFARE_BOUNDS_HPP
