#ifndef RISKMENU_MULTI_ASSET_HPP
#define RISKMENU_MULTI_ASSET_HPP

// Deterministic time-varying exposures, the reduction of a d-asset market to
// a single tangency asset, and exact Monte Carlo simulation of terminal wealth.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <thread>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "riskmenu/core_model.hpp"

namespace riskmenu {

/// Piecewise-constant exposure: values[j] on [t_j, t_{j+1}), t_0 = 0, t_k = T.
class StepStrategy {
public:
    StepStrategy(std::vector<double> breakpoints, std::vector<double> values)
        : t_(std::move(breakpoints)), m_(std::move(values)) {
        if (t_.size() < 2 || m_.size() + 1 != t_.size())
            throw DomainError("a step strategy needs k values and k + 1 breakpoints");
        if (t_.front() != 0.0) throw DomainError("step strategy breakpoints must start at 0");
        for (std::size_t j = 1; j < t_.size(); ++j)
            if (!(t_[j] > t_[j - 1]) || !std::isfinite(t_[j]))
                throw DomainError("step strategy breakpoints must be strictly increasing");
        for (double m : m_)
            if (!std::isfinite(m)) throw DomainError("step strategy values must be finite");
    }

    static StepStrategy constant(double m, double T) { return StepStrategy({0.0, T}, {m}); }

    const std::vector<double>& breakpoints() const noexcept { return t_; }
    const std::vector<double>& values() const noexcept { return m_; }
    std::size_t pieces() const noexcept { return m_.size(); }
    double horizon() const noexcept { return t_.back(); }
    double duration(std::size_t j) const { return t_[j + 1] - t_[j]; }

    double integral() const {
        double s = 0.0;
        for (std::size_t j = 0; j < m_.size(); ++j) s += m_[j] * duration(j);
        return s;
    }
    double integral_of_square() const {
        double s = 0.0;
        for (std::size_t j = 0; j < m_.size(); ++j) s += m_[j] * m_[j] * duration(j);
        return s;
    }
    /// kappa = (1/T) integral of m dt.
    double average() const { return integral() / horizon(); }
    bool is_constant() const {
        return std::all_of(m_.begin(), m_.end(), [&](double m) { return m == m_.front(); });
    }

private:
    std::vector<double> t_;
    std::vector<double> m_;
};

namespace detail {
inline void require_matching_horizon(const MarketParams& mp, const StepStrategy& s) {
    if (std::abs(s.horizon() - mp.T()) > 1e-12 * mp.T())
        throw DomainError("strategy horizon differs from the market horizon");
}
} // namespace detail

/// rT + (mu - r) int m dt - (1/2) sigma^2 gamma int m^2 dt.
inline double log_ce_time_varying(const MarketParams& mp, double gamma, const StepStrategy& s) {
    require_risk_type(gamma);
    detail::require_matching_horizon(mp, s);
    return mp.r() * mp.T() + mp.excess_return() * s.integral() -
           0.5 * mp.variance() * gamma * s.integral_of_square();
}

inline double ce_time_varying(const MarketParams& mp, double gamma, const StepStrategy& s) {
    return std::exp(log_ce_time_varying(mp, gamma, s));
}

struct ParetoReport {
    bool dominates;           ///< constant kappa weakly better for every gamma, strictly if s varies
    std::vector<double> log_gaps; ///< log CE(kappa) - log CE(s) per gamma
};

/// Compares s with the constant strategy of the same average exposure.
/// The log gap is (1/2) sigma^2 gamma sum_j dt_j (m_j - kappa)^2.
inline ParetoReport pareto_dominance_check(const MarketParams& mp, const StepStrategy& s,
                                           const std::vector<double>& gammas) {
    detail::require_matching_horizon(mp, s);
    const double kappa = s.average();
    double dispersion = 0.0;
    for (std::size_t j = 0; j < s.pieces(); ++j) {
        const double d = s.values()[j] - kappa;
        dispersion += d * d * s.duration(j);
    }
    ParetoReport rep{true, {}};
    const bool varies = !s.is_constant();
    for (double g : gammas) {
        require_risk_type(g);
        const double gap = 0.5 * mp.variance() * g * dispersion;
        rep.log_gaps.push_back(gap);
        if (gap < 0.0 || (varies && !(gap > 0.0)) || (!varies && gap != 0.0)) rep.dominates = false;
    }
    return rep;
}

/// Condition number above which the covariance is rejected.
inline constexpr double kMaxCondition = 1e12;

/// d risky assets with drifts mu and volatility matrix sigma (covariance sigma sigma^T).
class MultiAssetMarket {
public:
    MultiAssetMarket(double r, Eigen::VectorXd mu, Eigen::MatrixXd vol)
        : r_(r), mu_(std::move(mu)), vol_(std::move(vol)) {
        const auto d = mu_.size();
        if (d < 1) throw DomainError("multi-asset market needs at least one asset");
        if (vol_.rows() != d || vol_.cols() != d)
            throw DomainError("volatility matrix must be d x d");
        if (!std::isfinite(r_)) throw DomainError("r must be finite");
        for (Eigen::Index i = 0; i < d; ++i)
            if (!(mu_[i] > r_) || !std::isfinite(mu_[i]))
                throw DomainError("every drift must exceed r");
        if (!vol_.allFinite()) throw DomainError("volatility matrix must be finite");
        cov_ = vol_ * vol_.transpose();
        const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov_, Eigen::EigenvaluesOnly);
        const double lo = eig.eigenvalues().minCoeff(), hi = eig.eigenvalues().maxCoeff();
        condition_ = lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
        if (!(condition_ <= kMaxCondition))
            throw ConditioningError("covariance matrix is near-singular", condition_);
        llt_.compute(cov_);
        if (llt_.info() != Eigen::Success)
            throw ConditioningError("covariance matrix is not positive definite", condition_);
    }

    double r() const noexcept { return r_; }
    const Eigen::VectorXd& mu() const noexcept { return mu_; }
    const Eigen::MatrixXd& vol() const noexcept { return vol_; }
    const Eigen::MatrixXd& covariance() const noexcept { return cov_; }
    double condition_number() const noexcept { return condition_; }
    Eigen::Index dimension() const noexcept { return mu_.size(); }
    Eigen::VectorXd excess() const { return mu_.array() - r_; }

    /// Solves covariance * x = rhs with the Cholesky factor.
    Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const { return llt_.solve(rhs); }

private:
    double r_;
    Eigen::VectorXd mu_;
    Eigen::MatrixXd vol_;
    Eigen::MatrixXd cov_;
    Eigen::LLT<Eigen::MatrixXd> llt_;
    double condition_;
};

/// (sigma sigma^T)^{-1} (mu - r).
inline Eigen::VectorXd tangency_portfolio(const MultiAssetMarket& mkt) {
    return mkt.solve(mkt.excess());
}

/// || (sigma sigma^T) w - (mu - r) ||.
inline double tangency_residual(const MultiAssetMarket& mkt, const Eigen::VectorXd& w) {
    return (mkt.covariance() * w - mkt.excess()).norm();
}

/// k = (mu - r)^T (sigma sigma^T)^{-1} (mu - r).
inline double effective_sharpe_squared(const MultiAssetMarket& mkt) {
    return mkt.excess().dot(tangency_portfolio(mkt));
}

/// Single asset with excess return k and variance k: MarketParams(r, r + k, sqrt(k), T).
inline MarketParams reduce_to_single_asset(const MultiAssetMarket& mkt, double T) {
    const double k = effective_sharpe_squared(mkt);
    if (!(k > 0.0)) throw DomainError("effective squared Sharpe ratio must be positive");
    return MarketParams(mkt.r(), mkt.r() + k, std::sqrt(k), T);
}

/// rT + w^T (mu - r) T - (1/2) gamma w^T sigma sigma^T w T for a constant weight vector w.
inline double multi_asset_log_ce(const MultiAssetMarket& mkt, double gamma,
                                 const Eigen::VectorXd& w, double T) {
    require_risk_type(gamma);
    return mkt.r() * T + w.dot(mkt.excess()) * T - 0.5 * gamma * w.dot(mkt.covariance() * w) * T;
}

/// Number of independently seeded chunks a simulation is split into.
inline constexpr std::size_t kSimulationChunks = 16;

/// log V_T per path, with log V accumulating (r + m(mu - r) - sigma^2 m^2 / 2) dt
/// + m sigma sqrt(dt) xi on each piece. Chunk c of the paths draws from a
/// generator seeded by (seed, c), so the result depends only on (paths, seed).
inline std::vector<double> simulate_log_terminal_wealth(const MarketParams& mp,
                                                        const StepStrategy& s, std::size_t paths,
                                                        std::uint64_t seed) {
    if (paths < 1) throw DomainError("simulation needs at least one path");
    detail::require_matching_horizon(mp, s);
    const std::size_t k = s.pieces();
    std::vector<double> drift(k), scale(k);
    for (std::size_t j = 0; j < k; ++j) {
        const double m = s.values()[j], dt = s.duration(j);
        drift[j] = (mp.r() + m * mp.excess_return() - 0.5 * mp.variance() * m * m) * dt;
        scale[j] = m * mp.sigma() * std::sqrt(dt);
    }
    std::vector<double> out(paths);
    auto run_chunk = [&](std::size_t c) {
        const std::size_t begin = paths * c / kSimulationChunks;
        const std::size_t end = paths * (c + 1) / kSimulationChunks;
        std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                          static_cast<std::uint32_t>(c)};
        std::mt19937_64 gen(seq);
        std::normal_distribution<double> xi;
        for (std::size_t p = begin; p < end; ++p) {
            double x = 0.0;
            for (std::size_t j = 0; j < k; ++j) {
                const double z = xi(gen);
                x += drift[j] + scale[j] * z;
            }
            out[p] = x;
        }
    };
    const std::size_t workers =
        std::clamp<std::size_t>(std::thread::hardware_concurrency(), 1, kSimulationChunks);
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w)
        pool.emplace_back([&, w] {
            for (std::size_t c = w; c < kSimulationChunks; c += workers) run_chunk(c);
        });
    for (auto& t : pool) t.join();
    return out;
}

inline std::vector<double> simulate_terminal_wealth(const MarketParams& mp, const StepStrategy& s,
                                                    std::size_t paths, std::uint64_t seed) {
    auto v = simulate_log_terminal_wealth(mp, s, paths, seed);
    for (double& x : v) x = std::exp(x);
    return v;
}

struct SampleCertaintyEquivalent {
    double value;
    double std_error; ///< delta-method standard error
};

/// u^{-1}(mean u(V)) from simulated log-wealth, with u the CRRA utility of type gamma.
inline SampleCertaintyEquivalent sample_certainty_equivalent(const std::vector<double>& log_wealth,
                                                             double gamma) {
    require_risk_type(gamma);
    const std::size_t n = log_wealth.size();
    if (n < 2) throw DomainError("sample certainty equivalent needs at least two paths");
    const double dn = static_cast<double>(n);
    // Shifting by the first path keeps powers near one and makes a riskless
    // sample reproduce its wealth exactly.
    const double c = log_wealth.front();
    if (std::abs(gamma - 1.0) <= kLogBand) {
        double mean = 0.0;
        for (double x : log_wealth) mean += x - c;
        mean /= dn;
        double ss = 0.0;
        for (double x : log_wealth) ss += (x - c - mean) * (x - c - mean);
        const double ce = std::exp(c + mean);
        return {ce, ce * std::sqrt(ss / (dn - 1.0) / dn)};
    }
    const double k = 1.0 - gamma;
    double mean = 0.0;
    for (double x : log_wealth) mean += std::exp(k * (x - c));
    mean /= dn;
    double ss = 0.0;
    for (double x : log_wealth) {
        const double d = std::exp(k * (x - c)) - mean;
        ss += d * d;
    }
    const double se_mean = std::sqrt(ss / (dn - 1.0) / dn);
    const double ce = std::exp(c + std::log(mean) / k);
    // d CE / d mean = CE / (k mean).
    return {ce, std::abs(ce / (k * mean)) * se_mean};
}

/// sup |F_n(x) - cdf(x)| of a sample.
template <class Cdf>
double ks_statistic(std::vector<double> sample, Cdf&& cdf) {
    std::sort(sample.begin(), sample.end());
    const double n = static_cast<double>(sample.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sample.size(); ++i) {
        const double f = cdf(sample[i]);
        d = std::max({d, (i + 1.0) / n - f, f - static_cast<double>(i) / n});
    }
    return d;
}

/// Asymptotic 1% critical value of the one-sample KS statistic.
inline double ks_critical_1pct(std::size_t n) { return 1.62762 / std::sqrt(static_cast<double>(n)); }

inline double normal_cdf(double x, double mean, double sd) {
    return 0.5 * std::erfc(-(x - mean) / (sd * std::sqrt(2.0)));
}

} // namespace riskmenu

#endif // RISKMENU_MULTI_ASSET_HPP
