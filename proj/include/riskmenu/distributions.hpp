#ifndef RISKMENU_DISTRIBUTIONS_HPP
#define RISKMENU_DISTRIBUTIONS_HPP

// Risk-type distributions on a bounded support [a, b] and the expectation
// functionals evaluated against them.
//
// Four representations share one value type:
//   uniform     Uniform(a, b)
//   point       all mass at x (a = b = x)
//   two_point   mass p at a and 1 - p at b
//   density     piecewise-linear density through (gamma, f) knots
//
// Expectations over continuous variants use Gauss-Legendre panels with
// doubling (see quadrature.hpp); discrete variants use exact sums.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "riskmenu/errors.hpp"
#include "riskmenu/quadrature.hpp"

namespace riskmenu {

struct Uniform {
    double a;
    double b;
};

struct PointMass {
    double x;
};

struct TwoPoint {
    double a;
    double b;
    double p; ///< mass at a
};

/// Normalized piecewise-linear density; x strictly increasing.
struct PiecewiseLinearDensity {
    std::vector<double> x;
    std::vector<double> f;
    std::vector<double> cdf; ///< cumulative mass at each knot

    double operator()(double g) const {
        if (g <= x.front()) return g < x.front() ? 0.0 : f.front();
        if (g >= x.back()) return g > x.back() ? 0.0 : f.back();
        const auto it = std::upper_bound(x.begin(), x.end(), g);
        const std::size_t k = static_cast<std::size_t>(it - x.begin()) - 1;
        const double t = (g - x[k]) / (x[k + 1] - x[k]);
        return f[k] + t * (f[k + 1] - f[k]);
    }
};

/// Number of uniform knots used when a transformed density is re-sampled.
inline constexpr std::size_t kResampleKnots = 512;

class TypeDistribution {
public:
    using Variant = std::variant<Uniform, PointMass, TwoPoint, PiecewiseLinearDensity>;

    static TypeDistribution uniform(double a, double b) {
        check_support(a, b);
        return TypeDistribution(Uniform{a, b});
    }

    static TypeDistribution point(double x) {
        check_support(x, x);
        return TypeDistribution(PointMass{x});
    }

    static TypeDistribution two_point(double a, double b, double p) {
        check_support(a, b);
        if (!(p >= 0.0 && p <= 1.0)) throw DomainError("two-point mass p must lie in [0, 1]");
        return TypeDistribution(TwoPoint{a, b, p});
    }

    /// Knots (gamma, density) with strictly increasing gamma. The density is
    /// renormalized to integrate to one. Interior knots must be positive; the
    /// end knots may be zero.
    static TypeDistribution density(std::span<const std::pair<double, double>> knots) {
        if (knots.size() < 2) throw DomainError("density needs at least two knots");
        PiecewiseLinearDensity d;
        d.x.reserve(knots.size());
        d.f.reserve(knots.size());
        for (const auto& [g, v] : knots) {
            if (!std::isfinite(v) || v < 0.0) throw DomainError("density values must be >= 0");
            if (!d.x.empty() && !(g > d.x.back()))
                throw DomainError("density knots must be strictly increasing");
            d.x.push_back(g);
            d.f.push_back(v);
        }
        check_support(d.x.front(), d.x.back());
        for (std::size_t k = 1; k + 1 < d.x.size(); ++k)
            if (!(d.f[k] > 0.0))
                throw DomainError("density must be strictly positive inside the support");
        if (d.x.size() == 2 && !(d.f[0] > 0.0 || d.f[1] > 0.0))
            throw DomainError("density must be strictly positive inside the support");
        normalize(d);
        return TypeDistribution(std::move(d));
    }

    static TypeDistribution density(const std::vector<std::pair<double, double>>& knots) {
        return density(std::span<const std::pair<double, double>>(knots));
    }

    const Variant& variant() const noexcept { return v_; }

    double support_low() const {
        return std::visit(
            [](const auto& d) -> double {
                using T = std::decay_t<decltype(d)>;
                if constexpr (std::is_same_v<T, PointMass>) return d.x;
                else if constexpr (std::is_same_v<T, PiecewiseLinearDensity>) return d.x.front();
                else return d.a;
            },
            v_);
    }

    double support_high() const {
        return std::visit(
            [](const auto& d) -> double {
                using T = std::decay_t<decltype(d)>;
                if constexpr (std::is_same_v<T, PointMass>) return d.x;
                else if constexpr (std::is_same_v<T, PiecewiseLinearDensity>) return d.x.back();
                else return d.b;
            },
            v_);
    }

    bool is_discrete() const {
        return std::holds_alternative<PointMass>(v_) || std::holds_alternative<TwoPoint>(v_);
    }

    /// True when all mass sits on a single risk type.
    bool is_degenerate() const {
        if (support_low() == support_high()) return true;
        if (const auto* t = std::get_if<TwoPoint>(&v_)) return t->p == 0.0 || t->p == 1.0;
        return false;
    }

private:
    explicit TypeDistribution(Variant v) : v_(std::move(v)) {}

    static void check_support(double a, double b) {
        if (!std::isfinite(a) || !std::isfinite(b) || !(a > 0.0) || !(b >= a))
            throw DomainError("support must satisfy 0 < a <= b < inf");
    }

    static void normalize(PiecewiseLinearDensity& d) {
        d.cdf.assign(d.x.size(), 0.0);
        for (std::size_t k = 0; k + 1 < d.x.size(); ++k)
            d.cdf[k + 1] = d.cdf[k] + 0.5 * (d.f[k] + d.f[k + 1]) * (d.x[k + 1] - d.x[k]);
        const double total = d.cdf.back();
        for (double& v : d.f) v /= total;
        for (double& c : d.cdf) c /= total;
        d.cdf.back() = 1.0;
    }

    Variant v_;
};

/// Positive initial-wealth profile V0(gamma), piecewise linear through knots and
/// constant beyond the outer knots.
class WealthProfile {
public:
    explicit WealthProfile(std::vector<std::pair<double, double>> knots) : knots_(std::move(knots)) {
        if (knots_.empty()) throw DomainError("wealth profile needs at least one knot");
        for (std::size_t k = 0; k < knots_.size(); ++k) {
            if (!(knots_[k].second > 0.0)) throw DomainError("wealth must be strictly positive");
            if (k > 0 && !(knots_[k].first > knots_[k - 1].first))
                throw DomainError("wealth knots must be strictly increasing");
        }
    }

    static WealthProfile constant(double v) { return WealthProfile({{1.0, v}}); }

    double operator()(double g) const {
        if (g <= knots_.front().first) return knots_.front().second;
        if (g >= knots_.back().first) return knots_.back().second;
        const auto it = std::upper_bound(knots_.begin(), knots_.end(), g,
                                         [](double v, const auto& kn) { return v < kn.first; });
        const auto& hi = *it;
        const auto& lo = *(it - 1);
        const double t = (g - lo.first) / (hi.first - lo.first);
        return lo.second + t * (hi.second - lo.second);
    }

    bool is_constant() const {
        return std::all_of(knots_.begin(), knots_.end(),
                           [&](const auto& kn) { return kn.second == knots_.front().second; });
    }

private:
    std::vector<std::pair<double, double>> knots_;
};

namespace detail {

inline bool atom_in(double x, double lo, double hi, bool include_hi) {
    return x >= lo && (include_hi ? x <= hi : x < hi);
}

} // namespace detail

/// Integral of `integrand` against F over [lo, hi] (or [lo, hi) when
/// include_hi is false). Not normalized by the interval mass. The half-open
/// form only matters for atoms.
template <class Fn>
double interval_integral(const TypeDistribution& F, Fn&& integrand, double lo, double hi,
                         bool include_hi = true) {
    return std::visit(
        [&](const auto& d) -> double {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, PointMass>) {
                return detail::atom_in(d.x, lo, hi, include_hi) ? integrand(d.x) : 0.0;
            } else if constexpr (std::is_same_v<T, TwoPoint>) {
                double s = 0.0;
                if (d.a == d.b) {
                    return detail::atom_in(d.a, lo, hi, include_hi) ? integrand(d.a) : 0.0;
                }
                if (d.p > 0.0 && detail::atom_in(d.a, lo, hi, include_hi))
                    s += d.p * integrand(d.a);
                if (d.p < 1.0 && detail::atom_in(d.b, lo, hi, include_hi))
                    s += (1.0 - d.p) * integrand(d.b);
                return s;
            } else if constexpr (std::is_same_v<T, Uniform>) {
                if (d.a == d.b)
                    return detail::atom_in(d.a, lo, hi, include_hi) ? integrand(d.a) : 0.0;
                const double l = std::max(lo, d.a), h = std::min(hi, d.b);
                if (!(h > l)) return 0.0;
                const double dens = 1.0 / (d.b - d.a);
                return dens * quadrature::integrate(integrand, l, h);
            } else {
                const double l = std::max(lo, d.x.front()), h = std::min(hi, d.x.back());
                if (!(h > l)) return 0.0;
                std::vector<double> breaks{l};
                for (double x : d.x)
                    if (x > l && x < h) breaks.push_back(x);
                breaks.push_back(h);
                return quadrature::integrate([&](double g) { return integrand(g) * d(g); },
                                             std::span<const double>(breaks));
            }
        },
        F.variant());
}

/// E_F[integrand(gamma)].
template <class Fn>
double quadrature_expectation(const TypeDistribution& F, Fn&& integrand) {
    return interval_integral(F, std::forward<Fn>(integrand), F.support_low(), F.support_high());
}

/// P(gamma in [lo, hi]) (or [lo, hi) when include_hi is false), exact for every variant.
inline double interval_mass(const TypeDistribution& F, double lo, double hi,
                            bool include_hi = true) {
    return std::visit(
        [&](const auto& d) -> double {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, Uniform>) {
                if (d.a == d.b) return detail::atom_in(d.a, lo, hi, include_hi) ? 1.0 : 0.0;
                const double l = std::max(lo, d.a), h = std::min(hi, d.b);
                return h > l ? (h - l) / (d.b - d.a) : 0.0;
            } else if constexpr (std::is_same_v<T, PiecewiseLinearDensity>) {
                auto cdf = [&](double g) {
                    if (g <= d.x.front()) return 0.0;
                    if (g >= d.x.back()) return 1.0;
                    const auto it = std::upper_bound(d.x.begin(), d.x.end(), g);
                    const std::size_t k = static_cast<std::size_t>(it - d.x.begin()) - 1;
                    const double t = g - d.x[k];
                    return d.cdf[k] + 0.5 * (d.f[k] + d(g)) * t;
                };
                return std::max(0.0, cdf(hi) - cdf(lo));
            } else {
                return interval_integral(F, [](double) { return 1.0; }, lo, hi, include_hi);
            }
        },
        F.variant());
}

/// First moment over [lo, hi], unnormalized.
inline double interval_first_moment(const TypeDistribution& F, double lo, double hi,
                                    bool include_hi = true) {
    if (const auto* u = std::get_if<Uniform>(&F.variant()); u && u->a < u->b) {
        const double l = std::max(lo, u->a), h = std::min(hi, u->b);
        return h > l ? 0.5 * (h * h - l * l) / (u->b - u->a) : 0.0;
    }
    return interval_integral(F, [](double g) { return g; }, lo, hi, include_hi);
}

inline double mean(const TypeDistribution& F) {
    if (const auto* u = std::get_if<Uniform>(&F.variant())) return 0.5 * (u->a + u->b);
    return quadrature_expectation(F, [](double g) { return g; });
}

/// E_F[1 / gamma].
inline double mean_reciprocal(const TypeDistribution& F) {
    if (const auto* u = std::get_if<Uniform>(&F.variant()); u && u->a < u->b)
        return std::log(u->b / u->a) / (u->b - u->a);
    return quadrature_expectation(F, [](double g) { return 1.0 / g; });
}

/// E_F[gamma | gamma in [lo, hi]]. Throws ZeroMassError when the interval carries no mass.
inline double conditional_mean(const TypeDistribution& F, double lo, double hi) {
    const double mass = interval_mass(F, lo, hi);
    if (!(mass > 0.0)) throw ZeroMassError(lo, hi);
    if (const auto* u = std::get_if<Uniform>(&F.variant()); u && u->a < u->b)
        return 0.5 * (std::max(lo, u->a) + std::min(hi, u->b));
    const double first = interval_first_moment(F, lo, hi);
    return std::clamp(first / mass, std::max(lo, F.support_low()),
                      std::min(hi, F.support_high()));
}

/// Mean of gamma under the exponential tilt e^{theta gamma}:
/// E[gamma e^{theta gamma}] / E[e^{theta gamma}].
///
/// The exponent is shifted by theta times the support end it peaks at, so
/// the weights never exceed one.
inline double tilted_mean(const TypeDistribution& F, double theta) {
    if (theta == 0.0) return mean(F);
    const double a = F.support_low(), b = F.support_high();
    if (F.is_degenerate()) return mean(F);
    const double shift = theta > 0.0 ? b : a;
    auto weight = [&](double g) { return std::exp(theta * (g - shift)); };
    const double z = quadrature_expectation(F, weight);
    const double first = quadrature_expectation(F, [&](double g) { return g * weight(g); });
    return std::clamp(first / z, a, b);
}

/// Renormalized restriction of F to [lo, hi].
inline TypeDistribution restrict(const TypeDistribution& F, double lo, double hi) {
    const double a = F.support_low(), b = F.support_high();
    if (!(lo < hi) && !(lo == hi && a == b)) throw DomainError("restrict requires lo < hi");
    lo = std::max(lo, a);
    hi = std::min(hi, b);
    if (!(interval_mass(F, lo, hi) > 0.0)) throw ZeroMassError(lo, hi);
    if (lo == a && hi == b) return F;
    return std::visit(
        [&](const auto& d) -> TypeDistribution {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, Uniform>) {
                return TypeDistribution::uniform(lo, hi);
            } else if constexpr (std::is_same_v<T, PointMass>) {
                return F;
            } else if constexpr (std::is_same_v<T, TwoPoint>) {
                const bool has_a = d.p > 0.0 && d.a >= lo && d.a <= hi;
                return TypeDistribution::point(has_a ? d.a : d.b);
            } else {
                std::vector<std::pair<double, double>> knots{{lo, d(lo)}};
                for (std::size_t k = 0; k < d.x.size(); ++k)
                    if (d.x[k] > lo && d.x[k] < hi) knots.emplace_back(d.x[k], d.f[k]);
                knots.emplace_back(hi, d(hi));
                return TypeDistribution::density(knots);
            }
        },
        F.variant());
}

/// Density proportional to V0(g)^{1 - eta} f(g).
///
/// Continuous variants are re-sampled onto kResampleKnots uniform knots, so
/// the result is exact only when the reweighted density is itself piecewise
/// linear on that grid. eta = 1 and constant profiles return F unchanged.
inline TypeDistribution reweight_by_wealth(const TypeDistribution& F, const WealthProfile& w,
                                           double eta) {
    if (!std::isfinite(eta)) throw DomainError("eta must be finite");
    if (eta == 1.0 || w.is_constant() || F.is_degenerate()) return F;
    const double power = 1.0 - eta;
    return std::visit(
        [&](const auto& d) -> TypeDistribution {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, TwoPoint>) {
                const double wa = d.p * std::pow(w(d.a), power);
                const double wb = (1.0 - d.p) * std::pow(w(d.b), power);
                return TypeDistribution::two_point(d.a, d.b, wa / (wa + wb));
            } else if constexpr (std::is_same_v<T, PointMass>) {
                return F;
            } else {
                const double a = F.support_low(), b = F.support_high();
                std::vector<std::pair<double, double>> knots;
                knots.reserve(kResampleKnots);
                for (std::size_t k = 0; k < kResampleKnots; ++k) {
                    const double g = k + 1 == kResampleKnots
                                         ? b
                                         : a + (b - a) * static_cast<double>(k) /
                                                   static_cast<double>(kResampleKnots - 1);
                    double f;
                    if constexpr (std::is_same_v<T, Uniform>) f = 1.0;
                    else f = d(g);
                    knots.emplace_back(g, std::pow(w(g), power) * f);
                }
                return TypeDistribution::density(knots);
            }
        },
        F.variant());
}

/// n draws by inverse-CDF sampling; deterministic for a given seed.
inline std::vector<double> sample(const TypeDistribution& F, std::size_t n, std::uint64_t seed) {
    if (n == 0) throw DomainError("sample requires n >= 1");
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::vector<double> out;
    out.reserve(n);
    std::visit(
        [&](const auto& d) {
            using T = std::decay_t<decltype(d)>;
            for (std::size_t i = 0; i < n; ++i) {
                const double u = unif(gen);
                if constexpr (std::is_same_v<T, PointMass>) {
                    out.push_back(d.x);
                } else if constexpr (std::is_same_v<T, TwoPoint>) {
                    out.push_back(u < d.p ? d.a : d.b);
                } else if constexpr (std::is_same_v<T, Uniform>) {
                    out.push_back(d.a + (d.b - d.a) * u);
                } else {
                    const auto it = std::upper_bound(d.cdf.begin(), d.cdf.end(), u);
                    std::size_t k = static_cast<std::size_t>(it - d.cdf.begin());
                    k = std::clamp<std::size_t>(k, 1, d.x.size() - 1) - 1;
                    const double h = d.x[k + 1] - d.x[k];
                    const double f0 = d.f[k], f1 = d.f[k + 1];
                    const double delta = u - d.cdf[k];
                    // Solve f0 t + (f1 - f0) t^2 / (2h) = delta without cancellation.
                    const double disc = std::max(0.0, f0 * f0 + 2.0 * (f1 - f0) * delta / h);
                    const double denom = f0 + std::sqrt(disc);
                    const double t = denom > 0.0 ? 2.0 * delta / denom : 0.0;
                    out.push_back(std::clamp(d.x[k] + t, d.x[k], d.x[k + 1]));
                }
            }
        },
        F.variant());
    return out;
}

} // namespace riskmenu

#endif // RISKMENU_DISTRIBUTIONS_HPP
