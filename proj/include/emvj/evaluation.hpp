#pragma once

// Monte-Carlo investment evaluation and performance statistics.

#include "emvj/equilibrium_policy.hpp"
#include "emvj/errors.hpp"
#include "emvj/levy_market.hpp"
#include "emvj/market.hpp"
#include "emvj/random.hpp"
#include "emvj/text.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <ostream>
#include <span>
#include <string>
#include <vector>

namespace emvj {

enum class EvalMode {
    ThetaProcess,  ///< wealth simulated directly from the parameterized dynamics
    SampledPolicy, ///< a fresh policy draw held over every step
    PolicyMean,    ///< hold the policy mean in the stock, rest in cash, against simulated prices
};

struct PerformanceReport {
    std::size_t n_paths = 0;
    double realized_mean = 0.0;
    double realized_vol = 0.0;
    double se_mean = 0.0;
    double se_vol = 0.0;
    double sharpe = 0.0;
    bool sharpe_degenerate = false; ///< zero volatility; sharpe reported as 0
    double j_empirical = 0.0;
    double se_j = 0.0;
    double riskfree_terminal = 0.0;
    double theoretical_mean = 0.0;
    double theoretical_V = 0.0;
};

/// Self-financing portfolio holding `u` dollars of stock, rebalanced at each
/// grid point; cash earns simple interest r dt per step.
inline double rebalance_step(double x, double u, double gross_stock_return, double cash_rate_per_step)
{
    return x + u * (gross_stock_return - 1.0) + (x - u) * cash_rate_per_step;
}

/// Terminal wealths of n_paths independent runs; path i draws from stream i of `seed`.
inline std::vector<double> run_evaluation(EvalMode mode, const Theta& theta, const PreferenceParams& pref,
                                          const Environment& env, const TimeGrid& grid, double x0,
                                          std::size_t n_paths, std::uint64_t seed, const SimOptions& opts = {})
{
    detail::require(n_paths >= 2, "run_evaluation: n_paths must be >= 2");
    env.validate();
    const GaussianPolicy pol = equilibrium_policy(theta, pref);
    const double cash_step = pref.r * grid.dt();

    std::vector<double> terminals;
    terminals.reserve(n_paths);
    for (std::size_t i = 0; i < n_paths; ++i) {
        Rng rng = make_rng(seed, i);
        switch (mode) {
        case EvalMode::ThetaProcess:
            terminals.push_back(simulate_wealth_theta(theta, env, pref, grid, x0, rng, opts).terminal());
            break;
        case EvalMode::SampledPolicy:
            terminals.push_back(simulate_wealth_sampled(pol, env, pref.r, grid, x0, rng, opts).terminal());
            break;
        case EvalMode::PolicyMean: {
            const PathGrid stock = simulate_stock_path(env.market, env.jumps, grid, 1.0, rng, opts);
            double x = x0;
            for (std::size_t n = 0; n + 1 < stock.size(); ++n)
                x = rebalance_step(x, pol.mean, stock.values[n + 1] / stock.values[n], cash_step);
            terminals.push_back(x);
            break;
        }
        }
    }
    return terminals;
}

/// Mean, sample volatility (divisor n-1), Monte-Carlo standard errors,
/// Sharpe ratio against the risk-free terminal value, and the empirical
/// objective mean - (gamma/2) variance.
///
/// se_mean = sd/sqrt(n) and se_vol = sd/sqrt(2(n-1)). se_j is the delta-method
/// error of mean - (gamma/2) s^2 under normality:
/// sqrt(s^2/n + gamma^2 s^4 / (2(n-1))).
inline PerformanceReport performance_stats(std::span<const double> terminals, double gamma, double riskfree_terminal)
{
    detail::require(terminals.size() >= 2, "performance_stats: need at least two terminal values");
    const double n = static_cast<double>(terminals.size());
    double mean = 0.0;
    for (double x : terminals) mean += x;
    mean /= n;
    double ss = 0.0;
    for (double x : terminals) ss += (x - mean) * (x - mean);
    // Identical terminals have exactly zero spread; rounding in the mean
    // would otherwise leave a residue of order 1e-16.
    const auto [lo, hi] = std::minmax_element(terminals.begin(), terminals.end());
    const double var = *lo == *hi ? 0.0 : ss / (n - 1.0);
    const double sd = std::sqrt(var);

    PerformanceReport rep;
    rep.n_paths = terminals.size();
    rep.realized_mean = mean;
    rep.realized_vol = sd;
    rep.se_mean = sd / std::sqrt(n);
    rep.se_vol = sd / std::sqrt(2.0 * (n - 1.0));
    rep.riskfree_terminal = riskfree_terminal;
    if (sd > 0.0) {
        rep.sharpe = (mean - riskfree_terminal) / sd;
    } else {
        rep.sharpe = 0.0;
        rep.sharpe_degenerate = true;
    }
    rep.j_empirical = mean - 0.5 * gamma * var;
    rep.se_j = std::sqrt(var / n + gamma * gamma * var * var / (2.0 * (n - 1.0)));
    return rep;
}

struct Benchmarks {
    double mean = 0.0;
    double V = 0.0;
};

/// Expected terminal wealth x0 + h(0) and value x0 + C(0) over horizon T.
inline Benchmarks theoretical_benchmarks(const Theta& theta, const PreferenceParams& pref, double horizon, double x0)
{
    detail::require(horizon >= 0.0, "theoretical_benchmarks: horizon must be >= 0");
    return {x0 + aux_h(0.0, theta, pref, horizon), x0 + value_C(0.0, theta, pref, horizon)};
}

inline constexpr const char* kReportCsvHeader =
    "n_paths,mean,se_mean,vol,se_vol,sharpe,j_emp,se_j,riskfree,theo_mean,theo_V";

inline std::string report_csv_row(const PerformanceReport& r)
{
    using text::format_number;
    return std::to_string(r.n_paths) + ',' + format_number(r.realized_mean) + ',' + format_number(r.se_mean) + ',' +
           format_number(r.realized_vol) + ',' + format_number(r.se_vol) + ',' + format_number(r.sharpe) + ',' +
           format_number(r.j_empirical) + ',' + format_number(r.se_j) + ',' + format_number(r.riskfree_terminal) +
           ',' + format_number(r.theoretical_mean) + ',' + format_number(r.theoretical_V);
}

inline void write_report_csv(std::ostream& os, std::span<const PerformanceReport> reports)
{
    os << kReportCsvHeader << '\n';
    for (const auto& r : reports) os << report_csv_row(r) << '\n';
}

} // namespace emvj
