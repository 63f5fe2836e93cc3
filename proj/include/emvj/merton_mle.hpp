#pragma once

// Maximum-likelihood calibration of the Merton jump-diffusion to a series
// of log-returns. The return density is the Poisson mixture of Gaussians
// truncated at m_max jumps per interval; the negative log-likelihood is
// minimized by Nelder-Mead over (mu, log sigma, log zeta, mu_j, log sigma_j).

#include "emvj/equilibrium_policy.hpp"
#include "emvj/errors.hpp"
#include "emvj/market.hpp"
#include "emvj/nelder_mead.hpp"
#include "emvj/random.hpp"
#include "emvj/text.hpp"

#include <cmath>
#include <cstdint>
#include <istream>
#include <limits>
#include <map>
#include <numbers>
#include <ostream>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace emvj {

struct MertonParams {
    double mu = 0.0;
    double sigma = 0.0;
    double zeta = 0.0;
    double mu_j = 0.0;
    double sigma_j = 0.0;

    [[nodiscard]] MarketParams market() const { return {mu, sigma}; }
    [[nodiscard]] JumpParams jumps() const { return {zeta, mu_j, sigma_j}; }
    [[nodiscard]] Environment environment() const { return {market(), jumps()}; }

    /// Learner parameters implied by these estimates (delta via aggregation).
    [[nodiscard]] Theta theta() const { return {mu, sigma, delta_merton(jumps())}; }

    void validate() const
    {
        detail::require(std::isfinite(mu) && std::isfinite(mu_j), "MertonParams: mu and mu_j must be finite");
        detail::require(std::isfinite(sigma) && sigma > 0.0, "MertonParams: sigma must be > 0");
        detail::require(std::isfinite(zeta) && zeta > 0.0, "MertonParams: zeta must be > 0");
        detail::require(std::isfinite(sigma_j) && sigma_j > 0.0, "MertonParams: sigma_j must be > 0");
    }
};

struct ReturnSeries {
    std::vector<double> returns;
    double dt = 1.0 / 252.0;

    void validate() const
    {
        detail::require(std::isfinite(dt) && dt > 0.0, "ReturnSeries: dt must be > 0");
        for (double r : returns) detail::require(std::isfinite(r), "ReturnSeries: returns must be finite");
    }
};

/// R_i = log(S_i / S_{i-1}).
inline ReturnSeries log_returns(std::span<const double> prices, double dt)
{
    detail::require(prices.size() >= 2, "log_returns: need at least two prices");
    detail::require(std::isfinite(dt) && dt > 0.0, "log_returns: dt must be > 0");
    ReturnSeries rs{{}, dt};
    rs.returns.reserve(prices.size() - 1);
    for (std::size_t i = 0; i < prices.size(); ++i)
        detail::require(std::isfinite(prices[i]) && prices[i] > 0.0, "log_returns: prices must be > 0");
    for (std::size_t i = 1; i < prices.size(); ++i) rs.returns.push_back(std::log(prices[i] / prices[i - 1]));
    return rs;
}

/// Log of the truncated mixture density, evaluated by log-sum-exp.
inline double merton_log_density(double ret, const MertonParams& p, double dt, int m_max)
{
    detail::require(m_max >= 0, "merton_density: m_max must be >= 0");
    const double lam = p.zeta * dt;
    const double kappa = std::expm1(p.mu_j + 0.5 * p.sigma_j * p.sigma_j);
    const double base_mean = (p.mu - 0.5 * p.sigma * p.sigma - p.zeta * kappa) * dt;
    const double base_var = p.sigma * p.sigma * dt;

    double terms_max = -std::numeric_limits<double>::infinity();
    std::vector<double> terms(static_cast<std::size_t>(m_max) + 1);
    for (int m = 0; m <= m_max; ++m) {
        double log_weight;
        if (m == 0) {
            log_weight = -lam;
        } else {
            log_weight = lam > 0.0 ? -lam + m * std::log(lam) - std::lgamma(m + 1.0)
                                   : -std::numeric_limits<double>::infinity();
        }
        const double mean = base_mean + m * p.mu_j;
        const double var = base_var + m * p.sigma_j * p.sigma_j;
        const double z = ret - mean;
        const double log_phi = -0.5 * (std::log(2.0 * std::numbers::pi * var) + z * z / var);
        terms[static_cast<std::size_t>(m)] = log_weight + log_phi;
        terms_max = std::max(terms_max, terms[static_cast<std::size_t>(m)]);
    }
    if (!std::isfinite(terms_max)) return -std::numeric_limits<double>::infinity();
    double acc = 0.0;
    for (double t : terms) acc += std::exp(t - terms_max);
    return terms_max + std::log(acc);
}

/// Sum over m = 0..m_max of Poisson(zeta dt) weights times Normal(nu_m, tau_m^2)
/// densities, with nu_m = (mu - sigma^2/2 - zeta kappa) dt + m mu_j and
/// tau_m^2 = sigma^2 dt + m sigma_j^2.
inline double merton_density(double ret, const MertonParams& p, double dt, int m_max)
{
    return std::exp(merton_log_density(ret, p, dt, m_max));
}

/// Poisson mass beyond m_max jumps: the density's missing normalization.
inline double truncation_tail(double zeta, double dt, int m_max)
{
    const double lam = zeta * dt;
    double kept = 0.0;
    double term = std::exp(-lam);
    for (int m = 0; m <= m_max; ++m) {
        kept += term;
        term *= lam / (m + 1.0);
    }
    return std::max(0.0, 1.0 - kept);
}

/// Sum of log densities; -infinity if any density vanishes.
inline double log_likelihood(const MertonParams& p, const ReturnSeries& rs, int m_max = 2)
{
    detail::require(!rs.returns.empty(), "log_likelihood: empty return series");
    double total = 0.0;
    for (double r : rs.returns) {
        const double ld = merton_log_density(r, p, rs.dt, m_max);
        if (!std::isfinite(ld)) return -std::numeric_limits<double>::infinity();
        total += ld;
    }
    return total;
}

struct FitOptions {
    int m_max = 2;
    int restarts = 1;          ///< number of starts (jittered after the first); best kept
    int refinements = 1;       ///< simplex restarts from the incumbent after each start
    std::uint64_t seed = 0;    ///< jitter seed for restarts > 1
    NelderMeadOptions simplex{20000, 1e-9, 1e-13, 0.25};
};

struct FitResult {
    MertonParams params;
    double loglik = 0.0;
    double init_loglik = 0.0;
    int iterations = 0;
    bool converged = false;
};

namespace detail {

inline std::vector<double> to_unconstrained(const MertonParams& p)
{
    return {p.mu, std::log(p.sigma), std::log(p.zeta), p.mu_j, std::log(p.sigma_j)};
}

inline MertonParams from_unconstrained(const std::vector<double>& x)
{
    return {x[0], std::exp(x[1]), std::exp(x[2]), x[3], std::exp(x[4])};
}

} // namespace detail

/// Moment-based starting point: 70% of the return variance to diffusion,
/// the rest to ten symmetric jumps a year.
inline MertonParams default_init(const ReturnSeries& rs)
{
    rs.validate();
    detail::require(rs.returns.size() >= 2, "default_init: need at least two returns");
    const double n = static_cast<double>(rs.returns.size());
    double mean = 0.0;
    for (double r : rs.returns) mean += r;
    mean /= n;
    double var = 0.0;
    for (double r : rs.returns) var += (r - mean) * (r - mean);
    var /= (n - 1.0);
    var = std::max(var, 1e-12);
    MertonParams p;
    p.sigma = std::sqrt(0.7 * var / rs.dt);
    p.zeta = 10.0;
    p.mu_j = 0.0;
    p.sigma_j = std::sqrt(0.3 * var / (p.zeta * rs.dt));
    p.mu = mean / rs.dt + 0.5 * var / rs.dt;
    return p;
}

inline FitResult fit(const ReturnSeries& rs, const MertonParams& init, const FitOptions& opts = {})
{
    rs.validate();
    init.validate();
    detail::require(!rs.returns.empty(), "fit: empty return series");
    detail::require(opts.restarts >= 1, "fit: restarts must be >= 1");
    const double n = static_cast<double>(rs.returns.size());
    auto objective = [&](const std::vector<double>& x) {
        return -log_likelihood(detail::from_unconstrained(x), rs, opts.m_max) / n;
    };

    FitResult best;
    best.init_loglik = log_likelihood(init, rs, opts.m_max);
    detail::require(std::isfinite(best.init_loglik), "fit: log-likelihood not finite at the initial point");
    best.params = init;
    best.loglik = best.init_loglik;

    Rng rng = make_rng(opts.seed, 0);
    std::normal_distribution<double> jitter(0.0, 0.3);
    for (int s = 0; s < opts.restarts; ++s) {
        std::vector<double> x = detail::to_unconstrained(init);
        if (s > 0)
            for (double& xi : x) xi += jitter(rng) * std::max(std::abs(xi), 0.1);
        if (!std::isfinite(objective(x))) continue;
        NelderMeadResult nm = nelder_mead(objective, x, opts.simplex);
        int iterations = nm.iterations;
        for (int k = 0; k < opts.refinements; ++k) {
            NelderMeadResult again = nelder_mead(objective, nm.argmin, opts.simplex);
            iterations += again.iterations;
            if (again.value <= nm.value) nm = std::move(again);
        }
        const double ll = -nm.value * n;
        if (ll > best.loglik || (s == 0 && ll >= best.loglik)) {
            best.params = detail::from_unconstrained(nm.argmin);
            best.loglik = ll;
            best.converged = nm.converged;
        }
        best.iterations += iterations;
    }
    return best;
}

inline void write_fit(std::ostream& os, const FitResult& res)
{
    const auto& p = res.params;
    os << "mu = " << text::format_number(p.mu) << '\n'
       << "sigma = " << text::format_number(p.sigma) << '\n'
       << "zeta = " << text::format_number(p.zeta) << '\n'
       << "mu_j = " << text::format_number(p.mu_j) << '\n'
       << "sigma_j = " << text::format_number(p.sigma_j) << '\n'
       << "loglik = " << text::format_number(res.loglik) << '\n'
       << "converged = " << (res.converged ? "true" : "false") << '\n';
}

/// Reads the key = value block written by write_fit.
inline FitResult read_fit(std::istream& is)
{
    std::map<std::string, std::string> kv;
    std::string line;
    while (std::getline(is, line)) {
        const auto t = text::trim(line);
        if (t.empty() || t.front() == '#') continue;
        const auto eq = t.find('=');
        if (eq == std::string_view::npos) throw DataError("fit file: expected key = value, got '" + line + "'");
        kv[std::string(text::trim(t.substr(0, eq)))] = std::string(text::trim(t.substr(eq + 1)));
    }
    auto num = [&](const char* key) {
        const auto it = kv.find(key);
        if (it == kv.end()) throw DataError(std::string("fit file: missing key '") + key + "'");
        const auto v = text::parse_number(it->second);
        if (!v) throw DataError(std::string("fit file: bad number for '") + key + "'");
        return *v;
    };
    FitResult res;
    res.params = {num("mu"), num("sigma"), num("zeta"), num("mu_j"), num("sigma_j")};
    res.loglik = num("loglik");
    const auto it = kv.find("converged");
    if (it == kv.end()) throw DataError("fit file: missing key 'converged'");
    res.converged = it->second == "true";
    return res;
}

} // namespace emvj
