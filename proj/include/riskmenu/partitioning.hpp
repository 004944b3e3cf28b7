#ifndef RISKMENU_PARTITIONING_HPP
#define RISKMENU_PARTITIONING_HPP

// Optimal n-group partitions of the risk-type support and the equivalent
// self-selection decision menus.
//
// An interior boundary g_i of an optimal partition sits at the harmonic mean
// of the risk types targeted by the two adjacent decisions; this is also the
// type that is indifferent between them. solve_grouping alternates between
// per-cell optimal decisions and indifference boundaries (a Lloyd-style
// iteration) starting from the geometric partition.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

#include "riskmenu/core_model.hpp"
#include "riskmenu/distributions.hpp"
#include "riskmenu/single_decision.hpp"

namespace riskmenu {

/// Boundaries a = g_0 < ... < g_n = b. All-equal boundaries are accepted for
/// the degenerate support a = b.
class Partition {
public:
    explicit Partition(std::vector<double> boundaries) : g_(std::move(boundaries)) {
        if (g_.size() < 2) throw DomainError("a partition needs at least two boundaries");
        if (!(g_.front() > 0.0)) throw DomainError("partition boundaries must be positive");
        const bool flat = g_.front() == g_.back();
        for (std::size_t i = 1; i < g_.size(); ++i) {
            if (!std::isfinite(g_[i])) throw DomainError("partition boundaries must be finite");
            if (flat ? g_[i] != g_[0] : !(g_[i] > g_[i - 1]))
                throw DomainError("partition boundaries must be strictly increasing");
        }
    }

    const std::vector<double>& boundaries() const noexcept { return g_; }
    std::size_t cells() const noexcept { return g_.size() - 1; }
    double lower() const noexcept { return g_.front(); }
    double upper() const noexcept { return g_.back(); }
    double operator[](std::size_t i) const { return g_[i]; }

    /// Index of the cell [g_{i}, g_{i+1}) containing gamma; the last cell is closed.
    std::size_t cell_of(double gamma) const {
        const auto it = std::upper_bound(g_.begin() + 1, g_.end() - 1, gamma);
        return static_cast<std::size_t>(it - (g_.begin() + 1));
    }

private:
    std::vector<double> g_;
};

/// Strictly decreasing, positive decisions m_1 > ... > m_n.
class DecisionMenu {
public:
    explicit DecisionMenu(std::vector<double> decisions) : m_(std::move(decisions)) {
        if (m_.empty()) throw DomainError("a decision menu needs at least one decision");
        for (std::size_t i = 0; i < m_.size(); ++i) {
            if (!(m_[i] > 0.0) || !std::isfinite(m_[i]))
                throw DomainError("menu decisions must be finite and positive");
            if (i > 0 && !(m_[i] < m_[i - 1]))
                throw DomainError("menu decisions must be strictly decreasing");
        }
    }

    const std::vector<double>& decisions() const noexcept { return m_; }
    std::size_t size() const noexcept { return m_.size(); }
    double operator[](std::size_t i) const { return m_[i]; }

private:
    std::vector<double> m_;
};

inline double harmonic_mean(double x, double y) {
    if (!(x > 0.0) || !(y > 0.0)) throw DomainError("harmonic mean needs positive arguments");
    return 2.0 / (1.0 / x + 1.0 / y);
}

/// Interior indifference types g_i = H(g*(m_i), g*(m_{i+1})), i = 1..n-1.
inline std::vector<double> boundaries_from_menu(const MarketParams& mp, const DecisionMenu& menu) {
    std::vector<double> g;
    g.reserve(menu.size() - 1);
    for (std::size_t i = 0; i + 1 < menu.size(); ++i)
        g.push_back(harmonic_mean(implied_risk_type(mp, menu[i]), implied_risk_type(mp, menu[i + 1])));
    return g;
}

/// Zero-based index of the decision an agent of type gamma picks.
/// An agent exactly at an indifference boundary takes the riskier (lower-index) decision.
inline std::size_t agent_choice(const MarketParams& mp, double gamma, const DecisionMenu& menu) {
    require_risk_type(gamma);
    const auto g = boundaries_from_menu(mp, menu);
    return static_cast<std::size_t>(std::lower_bound(g.begin(), g.end(), gamma) - g.begin());
}

/// sum_i integral over cell i of v(CE(g, m_i)) dF(g).
inline double grouped_welfare(const MarketParams& mp, const TypeDistribution& F,
                              const PlannerPreferences& prefs, const Partition& partition,
                              const DecisionMenu& menu) {
    if (partition.cells() != menu.size())
        throw DomainError("partition and menu sizes differ");
    double total = 0.0;
    const std::size_t n = menu.size();
    for (std::size_t i = 0; i < n; ++i) {
        const double m = menu[i];
        total += interval_integral(
            F, [&](double g) { return prefs.value(log_certainty_equivalent(mp, g, m)); },
            partition[i], partition[i + 1], i + 1 == n);
    }
    return total;
}

/// g_i = a^{1 - i/n} b^{i/n}.
inline Partition geometric_partition(double a, double b, std::size_t n) {
    if (n < 1) throw DomainError("geometric partition needs n >= 1");
    if (!(a > 0.0) || !(b >= a)) throw DomainError("geometric partition needs 0 < a <= b");
    std::vector<double> g(n + 1);
    g.front() = a;
    g.back() = b;
    const double ratio = std::log(b / a);
    for (std::size_t i = 1; i < n; ++i)
        g[i] = a * std::exp(ratio * static_cast<double>(i) / static_cast<double>(n));
    return Partition(std::move(g));
}

struct GroupingDiagnostics {
    int iterations = 0;
    bool converged = false;
    bool multistart_used = false;
    std::vector<double> welfare_trace;
};

struct GroupedSolution {
    Partition partition;
    DecisionMenu menu;
    std::vector<double> targeted_types; ///< Gamma_i = g*(m_i)
    double welfare;
    GroupingDiagnostics diagnostics;
};

struct GroupingOptions {
    int max_iterations = 1000;
    double boundary_tolerance = 1e-12; ///< relative change of every boundary
    int multistart_count = 16;
    std::uint64_t seed = 20240607;
};

namespace detail {

inline GroupedSolution lloyd(const MarketParams& mp, const TypeDistribution& F,
                             const PlannerPreferences& prefs, std::vector<double> g,
                             const GroupingOptions& opt) {
    const std::size_t n = g.size() - 1;
    GroupingDiagnostics diag;
    std::vector<double> m(n), gammas(n);
    double welfare = -std::numeric_limits<double>::infinity();
    for (int it = 0; it < opt.max_iterations; ++it) {
        for (std::size_t i = 0; i < n; ++i) {
            const SingleSolution s = solve(mp, restrict(F, g[i], g[i + 1]), prefs);
            m[i] = s.m_star;
            gammas[i] = s.gamma_star;
        }
        const double w = grouped_welfare(mp, F, prefs, Partition(g), DecisionMenu(m));
        diag.welfare_trace.push_back(w);
        diag.iterations = it + 1;

        double change = 0.0;
        std::vector<double> next = g;
        for (std::size_t i = 1; i < n; ++i) {
            next[i] = harmonic_mean(gammas[i - 1], gammas[i]);
            change = std::max(change, std::abs(next[i] - g[i]) / g[i]);
        }
        welfare = w;
        if (change < opt.boundary_tolerance) {
            diag.converged = true;
            break;
        }
        if (it + 1 == opt.max_iterations) break;
        g = std::move(next);
    }
    return {Partition(g), DecisionMenu(m), gammas, welfare, std::move(diag)};
}

} // namespace detail

/// Optimal n-cell partition with per-cell optimal decisions.
///
/// Lloyd alternation from the geometric partition until boundaries move by
/// less than boundary_tolerance (relative). When the iteration cap is hit,
/// multistart_count random increasing partitions are also tried and the best
/// welfare is returned with diagnostics.multistart_used set. Continuous
/// distributions only for n >= 2.
inline GroupedSolution solve_grouping(const MarketParams& mp, const TypeDistribution& F,
                                      const PlannerPreferences& prefs, std::size_t n,
                                      const GroupingOptions& opt = {}) {
    if (n < 1) throw DomainError("solve_grouping needs n >= 1");
    const double a = F.support_low(), b = F.support_high();
    if (n == 1) {
        const SingleSolution s = solve(mp, F, prefs);
        GroupingDiagnostics diag;
        diag.iterations = 1;
        diag.converged = true;
        diag.welfare_trace.push_back(s.objective_value);
        std::vector<double> bounds{a, b};
        if (a == b) bounds = {a, a};
        return {Partition(bounds), DecisionMenu({s.m_star}), {s.gamma_star}, s.objective_value,
                std::move(diag)};
    }
    if (F.is_discrete() || a == b)
        throw DomainError("solve_grouping with n >= 2 needs a continuous distribution");

    GroupedSolution best = detail::lloyd(mp, F, prefs, geometric_partition(a, b, n).boundaries(), opt);
    if (best.diagnostics.converged) return best;

    std::mt19937_64 gen(opt.seed);
    std::uniform_real_distribution<double> unif(a, b);
    for (int s = 0; s < opt.multistart_count; ++s) {
        std::vector<double> g(n + 1);
        g.front() = a;
        g.back() = b;
        for (std::size_t i = 1; i < n; ++i) g[i] = unif(gen);
        std::sort(g.begin() + 1, g.end() - 1);
        if (std::adjacent_find(g.begin(), g.end()) != g.end()) continue;
        GroupedSolution cand = detail::lloyd(mp, F, prefs, g, opt);
        if (cand.welfare > best.welfare) best = std::move(cand);
    }
    best.diagnostics.multistart_used = true;
    return best;
}

struct MenuEquivalenceReport {
    bool consistent;
    std::size_t checked;
    std::size_t mismatches;
};

/// Checks that self-selection from the menu reproduces the partition's cell
/// membership on a uniform grid of `points` risk types. Grid points within a
/// relative 1e-9 of an interior boundary are skipped as ties.
inline MenuEquivalenceReport menu_equivalence_check(const MarketParams& mp, const Partition& partition,
                                                    const DecisionMenu& menu,
                                                    std::size_t points = 10000) {
    const double a = partition.lower(), b = partition.upper();
    std::size_t checked = 0, mismatches = 0;
    for (std::size_t k = 0; k < points; ++k) {
        const double g = points == 1 ? a : a + (b - a) * static_cast<double>(k) / (points - 1.0);
        bool tie = false;
        for (std::size_t i = 1; i < partition.cells(); ++i)
            tie = tie || std::abs(g - partition[i]) <= 1e-9 * partition[i];
        if (tie) continue;
        ++checked;
        if (agent_choice(mp, g, menu) != partition.cell_of(g)) ++mismatches;
    }
    return {mismatches == 0, checked, mismatches};
}

inline MenuEquivalenceReport menu_equivalence_check(const MarketParams& mp,
                                                    const GroupedSolution& solution,
                                                    std::size_t points = 10000) {
    return menu_equivalence_check(mp, solution.partition, solution.menu, points);
}

} // namespace riskmenu

#endif // RISKMENU_PARTITIONING_HPP
