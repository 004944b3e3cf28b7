#ifndef RISKMENU_CORE_MODEL_HPP
#define RISKMENU_CORE_MODEL_HPP

// Closed-form primitives of the lognormal CRRA model: payoffs, utilities,
// certainty equivalents and the Merton fraction with its inverse.
//
// Risk types (gamma) and decisions (m) are plain doubles. A decision is any
// finite real; exposures are never clamped to [0, 1].

#include <cmath>
#include <string>

#include "riskmenu/errors.hpp"

namespace riskmenu {

/// Risk-return environment shared by every computation.
class MarketParams {
public:
    /// Throws DomainError unless mu > r, sigma > 0, T > 0 and all are finite.
    MarketParams(double r, double mu, double sigma, double horizon)
        : r_(r), mu_(mu), sigma_(sigma), T_(horizon) {
        if (!std::isfinite(r) || !std::isfinite(mu) || !std::isfinite(sigma) ||
            !std::isfinite(horizon))
            throw DomainError("market parameters must be finite");
        if (!(mu > r)) throw DomainError("market requires mu > r");
        if (!(sigma > 0.0)) throw DomainError("market requires sigma > 0");
        if (!(horizon > 0.0)) throw DomainError("market requires T > 0");
    }

    double r() const noexcept { return r_; }
    double mu() const noexcept { return mu_; }
    double sigma() const noexcept { return sigma_; }
    double T() const noexcept { return T_; }

    double excess_return() const noexcept { return mu_ - r_; }
    double variance() const noexcept { return sigma_ * sigma_; }
    double sharpe_ratio() const noexcept { return (mu_ - r_) / sigma_; }
    /// (mu - r) / sigma^2, the Merton fraction of a log-utility agent.
    double merton_scale() const noexcept { return (mu_ - r_) / (sigma_ * sigma_); }

    /// Same market over a different horizon.
    MarketParams with_horizon(double horizon) const { return {r_, mu_, sigma_, horizon}; }

private:
    double r_;
    double mu_;
    double sigma_;
    double T_;
};

/// Relative risk aversions closer to 1 than this use the logarithmic branch.
inline constexpr double kLogBand = 1e-8;

inline void require_risk_type(double gamma) {
    if (!(gamma > 0.0) || !std::isfinite(gamma))
        throw DomainError("risk type must be finite and > 0, got " + std::to_string(gamma));
}

/// R(m, z) = exp(rT + (mu - r) m T - sigma^2 m^2 T / 2 + m sigma z sqrt(T)).
inline double payoff(const MarketParams& mp, double m, double z) {
    const double T = mp.T();
    return std::exp(mp.r() * T + mp.excess_return() * m * T - 0.5 * mp.variance() * m * m * T +
                    m * mp.sigma() * z * std::sqrt(T));
}

struct PayoffDecomposition {
    double deterministic_factor; ///< D(m) = exp(rT + (mu - r) m T)
    double second_moment;        ///< E[Y^2] = exp(m^2 sigma^2 T)
    double variance;             ///< Var(Y) = exp(m^2 sigma^2 T) - 1
};

/// Splits R(m, Z) = D(m) Y(m, Z) with E[Y] = 1.
///
/// Both the second moment and the variance of Y are reported. The variance
/// is E[Y^2] - 1; it is the quantity the Monte Carlo tests check.
inline PayoffDecomposition payoff_decomposition(const MarketParams& mp, double m) {
    const double T = mp.T();
    const double s = m * m * mp.variance() * T;
    return {std::exp(mp.r() * T + mp.excess_return() * m * T), std::exp(s), std::expm1(s)};
}

/// CRRA utility; log branch for |gamma - 1| < kLogBand.
inline double utility(double gamma, double w) {
    require_risk_type(gamma);
    if (!(w > 0.0)) throw DomainError("utility requires w > 0");
    const double lw = std::log(w);
    if (std::abs(gamma - 1.0) < kLogBand) return lw;
    const double k = 1.0 - gamma;
    return std::expm1(k * lw) / k;
}

/// log CE(gamma, m) = rT + (mu - r) m T - gamma m^2 sigma^2 T / 2.
inline double log_certainty_equivalent(const MarketParams& mp, double gamma, double m) {
    const double T = mp.T();
    return mp.r() * T + mp.excess_return() * m * T - 0.5 * gamma * m * m * mp.variance() * T;
}

inline double certainty_equivalent(const MarketParams& mp, double gamma, double m) {
    require_risk_type(gamma);
    return std::exp(log_certainty_equivalent(mp, gamma, m));
}

/// m*(gamma) = (mu - r) / (sigma^2 gamma).
inline double merton_fraction(const MarketParams& mp, double gamma) {
    require_risk_type(gamma);
    return mp.merton_scale() / gamma;
}

/// g*(m) = (mu - r) / (m sigma^2), the risk type for which m is optimal.
inline double implied_risk_type(const MarketParams& mp, double m) {
    if (!(m > 0.0) || !std::isfinite(m))
        throw DomainError("implied risk type requires a finite decision m > 0");
    return mp.merton_scale() / m;
}

} // namespace riskmenu

#endif // RISKMENU_CORE_MODEL_HPP
