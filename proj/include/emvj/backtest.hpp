#pragma once

// Rolling-window backtest: per window, calibrate the Merton model on the
// training years, refine the policy parameters by OC training on paths
// simulated from the calibrated model, then replay portfolios on the
// realized prices of the training and evaluation years.

#include "emvj/data_io.hpp"
#include "emvj/equilibrium_policy.hpp"
#include "emvj/evaluation.hpp"
#include "emvj/merton_mle.hpp"
#include "emvj/oc_trainer.hpp"
#include "emvj/random.hpp"
#include "emvj/text.hpp"

#include <cmath>
#include <cstdint>
#include <ostream>
#include <span>
#include <string>
#include <vector>

namespace emvj {

struct BacktestConfig {
    WindowSpec windows;
    double gamma = 5.0;
    double lambda_rl = 5.0;     ///< exploration weight while training
    double lambda_train = 0.01; ///< exploration weight when investing over training years
    double lambda_eval = 0.1;   ///< exploration weight when investing over evaluation years
    std::size_t n_portfolios = 100;
    double x0 = 1.0;
    double periods_per_year = 252.0;
    double rate_divisor = 252.0;
    FitOptions mle;
    int n_epochs = 500;
    std::array<double, 3> base_rates{4.0e-5, 1.0e-4, 3.8e-4};
    LinearSchedule scheduler{1.0, 0.1};
    std::size_t min_train_returns = 100;
    std::uint64_t seed = 0;
    SimOptions sim;
};

struct PeriodResult {
    std::string period; ///< "train", "eval" or "eval_mle"
    std::vector<double> terminals;
    PerformanceReport report;
};

struct WindowResult {
    RollingWindow window;
    FitResult mle;
    Theta theta_rl;
    double r_train = 0.0; ///< annualized average risk-free rate of the training years
    std::vector<PeriodResult> periods;
};

/// n portfolios rebalanced daily on a realized price path, each step holding
/// a fresh policy draw u in the stock and X - u in cash at that day's rate.
/// Portfolio i draws from stream i of `seed`.
inline std::vector<double> replay_portfolios(const GaussianPolicy& pol, std::span<const double> prices,
                                             std::span<const double> daily_rates, double x0, std::size_t n,
                                             std::uint64_t seed)
{
    detail::require(prices.size() >= 2 && daily_rates.size() >= prices.size() - 1,
                    "replay_portfolios: need rates for every step");
    std::vector<double> out;
    out.reserve(n);
    const double sd = pol.stddev();
    for (std::size_t i = 0; i < n; ++i) {
        Rng rng = make_rng(seed, i);
        std::normal_distribution<double> n01(0.0, 1.0);
        double x = x0;
        for (std::size_t k = 0; k + 1 < prices.size(); ++k) {
            const double u = sd > 0.0 ? pol.mean + sd * n01(rng) : pol.mean;
            x = rebalance_step(x, u, prices[k + 1] / prices[k], daily_rates[k]);
        }
        out.push_back(x);
    }
    return out;
}

/// Value of x0 held in cash over the steps of a period.
inline double riskfree_terminal(std::span<const double> daily_rates, std::size_t n_steps, double x0 = 1.0)
{
    double x = x0;
    for (std::size_t k = 0; k < n_steps; ++k) x *= 1.0 + daily_rates[k];
    return x;
}

namespace detail {

inline PeriodResult invest_period(const std::string& name, const Theta& theta, const PreferenceParams& pref,
                                  const DatedSeries& prices, const DatedSeries& rates, const BacktestConfig& cfg,
                                  std::uint64_t seed)
{
    const GaussianPolicy pol = equilibrium_policy(theta, pref);
    PeriodResult res;
    res.period = name;
    res.terminals = replay_portfolios(pol, prices.values, rates.values, cfg.x0, cfg.n_portfolios, seed);
    const double rf = riskfree_terminal(rates.values, prices.size() - 1, cfg.x0);
    res.report = performance_stats(res.terminals, pref.gamma, rf);
    const double years = static_cast<double>(prices.size() - 1) / cfg.periods_per_year;
    const Benchmarks b = theoretical_benchmarks(theta, pref, years, cfg.x0);
    res.report.theoretical_mean = b.mean;
    res.report.theoretical_V = b.V;
    return res;
}

} // namespace detail

/// Runs every window that fits in the span of `prices`. `rate_quotes` holds
/// annualized percentage quotes; they are carried forward onto price dates.
inline std::vector<WindowResult> run_backtest(const DatedSeries& prices, const DatedSeries& rate_quotes,
                                              const BacktestConfig& cfg)
{
    prices.validate(SeriesRole::Price);
    rate_quotes.validate();
    detail::require(cfg.n_portfolios >= 2, "backtest: need at least two portfolios");
    detail::require(!prices.empty(), "backtest: empty price series");

    DatedSeries daily = reindex_carry_forward(rate_quotes, prices.dates);
    for (double& q : daily.values) q = tbill_to_daily_rate(q, cfg.rate_divisor);

    const int first_year = static_cast<int>(prices.dates.front().year());
    const int last_year = static_cast<int>(prices.dates.back().year());
    const auto windows = rolling_windows(first_year, last_year, cfg.windows);
    const double dt = 1.0 / cfg.periods_per_year;

    std::vector<WindowResult> out;
    for (std::size_t w = 0; w < windows.size(); ++w) {
        const RollingWindow& win = windows[w];
        const DatedSeries train_px = slice(prices, win.train);
        const DatedSeries eval_px = slice(prices, win.eval);
        if (train_px.size() < cfg.min_train_returns + 1 || eval_px.size() < 2)
            throw DataError("backtest: insufficient data in window " + win.label());
        const DatedSeries train_r = slice(daily, win.train);
        const DatedSeries eval_r = slice(daily, win.eval);

        auto stream = [&](std::uint64_t k) { return derive_seed(cfg.seed, w * 8 + k); };

        WindowResult res;
        res.window = win;
        const ReturnSeries rs = log_returns(train_px.values, dt);
        FitOptions mle = cfg.mle;
        mle.seed = stream(0);
        res.mle = fit(rs, default_init(rs), mle);

        double mean_rate = 0.0;
        for (double r : train_r.values) mean_rate += r;
        res.r_train = mean_rate / static_cast<double>(train_r.size()) * cfg.rate_divisor;

        RunConfig rc;
        rc.n_epochs = cfg.n_epochs;
        rc.horizon = 1.0;
        rc.dt = dt;
        rc.pref = {cfg.gamma, cfg.lambda_rl, res.r_train};
        rc.x0 = cfg.x0;
        rc.base_rates = cfg.base_rates;
        rc.scheduler = cfg.scheduler;
        rc.seed = stream(1);
        rc.sim = cfg.sim;
        const Theta theta_mle = res.mle.params.theta();
        res.theta_rl = train(theta_mle, res.mle.params.environment(), rc).final_theta();

        const PreferenceParams train_pref{cfg.gamma, cfg.lambda_train, res.r_train};
        const PreferenceParams eval_pref{cfg.gamma, cfg.lambda_eval, res.r_train};
        res.periods.push_back(detail::invest_period("train", res.theta_rl, train_pref, train_px, train_r, cfg, stream(2)));
        res.periods.push_back(detail::invest_period("eval", res.theta_rl, eval_pref, eval_px, eval_r, cfg, stream(3)));
        res.periods.push_back(detail::invest_period("eval_mle", theta_mle, eval_pref, eval_px, eval_r, cfg, stream(4)));
        out.push_back(std::move(res));
    }
    return out;
}

inline constexpr const char* kBacktestCsvHeader = "window,period,n_paths,mean,se_mean,vol,se_vol,sharpe,riskfree";

inline void write_backtest_csv(std::ostream& os, std::span<const WindowResult> results)
{
    using text::format_number;
    os << kBacktestCsvHeader << '\n';
    for (const auto& w : results) {
        for (const auto& p : w.periods) {
            const auto& r = p.report;
            os << w.window.label() << ',' << p.period << ',' << r.n_paths << ',' << format_number(r.realized_mean)
               << ',' << format_number(r.se_mean) << ',' << format_number(r.realized_vol) << ','
               << format_number(r.se_vol) << ',' << format_number(r.sharpe) << ','
               << format_number(r.riskfree_terminal) << '\n';
        }
    }
}

inline void write_backtest_terminals_csv(std::ostream& os, std::span<const WindowResult> results)
{
    os << "window,period,portfolio,terminal\n";
    for (const auto& w : results)
        for (const auto& p : w.periods)
            for (std::size_t i = 0; i < p.terminals.size(); ++i)
                os << w.window.label() << ',' << p.period << ',' << i << ',' << text::format_number(p.terminals[i])
                   << '\n';
}

inline void write_backtest_params_csv(std::ostream& os, std::span<const WindowResult> results)
{
    os << "window,mle_mu,mle_sigma,mle_zeta,mle_mu_j,mle_sigma_j,mle_delta,mle_loglik,mle_converged,rl_mu,rl_sigma,"
          "rl_delta,r_train\n";
    for (const auto& w : results) {
        const auto& p = w.mle.params;
        os << w.window.label() << ','
           << text::join_numbers(std::array{p.mu, p.sigma, p.zeta, p.mu_j, p.sigma_j, delta_merton(p.jumps()),
                                            w.mle.loglik})
           << ',' << (w.mle.converged ? "true" : "false") << ','
           << text::join_numbers(std::array{w.theta_rl.mu, w.theta_rl.sigma, w.theta_rl.delta, w.r_train}) << '\n';
    }
}

} // namespace emvj
