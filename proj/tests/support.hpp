#pragma once

#include "emvj/emvj.hpp"

#include <chrono>
#include <cmath>
#include <functional>
#include <span>
#include <vector>

namespace emvj::testing {

// Calibrated S&P 500 environment used throughout the experiments.
inline constexpr MarketParams kMarket{0.0878, 0.1321};
inline constexpr JumpParams kJumps{27.6813, -0.0040, 0.0274};
inline constexpr Environment kEnv{kMarket, kJumps};
inline constexpr double kDeltaTrue = 0.1449;

// Rounded as reported alongside the calibration.
inline Theta theta_true() { return {kMarket.mu, kMarket.sigma, kDeltaTrue}; }

struct Moments {
    double mean = 0.0;
    double var = 0.0; ///< divisor n - 1
    double n = 0.0;
    double m4 = 0.0; ///< fourth central moment

    [[nodiscard]] double se() const { return std::sqrt(var / n); }
    /// Standard error of the sample variance.
    [[nodiscard]] double se_var() const { return std::sqrt(std::max(m4 - var * var, 0.0) / n); }
};

inline Moments moments(std::span<const double> xs)
{
    Moments m;
    m.n = static_cast<double>(xs.size());
    for (double x : xs) m.mean += x;
    m.mean /= m.n;
    double ss = 0.0, s4 = 0.0;
    for (double x : xs) {
        const double d = x - m.mean;
        ss += d * d;
        s4 += d * d * d * d;
    }
    m.var = ss / (m.n - 1.0);
    m.m4 = s4 / m.n;
    return m;
}

/// Adaptive Simpson quadrature on [a, b].
inline double integrate(const std::function<double(double)>& f, double a, double b, double tol = 1e-13,
                        int depth = 60)
{
    const std::function<double(double, double, double, double, double, double, double, int)> rec =
        [&](double lo, double hi, double flo, double fmid, double fhi, double whole, double eps, int d) {
            const double mid = 0.5 * (lo + hi);
            const double lm = 0.5 * (lo + mid), rm = 0.5 * (mid + hi);
            const double flm = f(lm), frm = f(rm);
            const double left = (mid - lo) / 6.0 * (flo + 4.0 * flm + fmid);
            const double right = (hi - mid) / 6.0 * (fmid + 4.0 * frm + fhi);
            if (d <= 0 || std::abs(left + right - whole) <= 15.0 * eps)
                return left + right + (left + right - whole) / 15.0;
            return rec(lo, mid, flo, flm, fmid, left, 0.5 * eps, d - 1) +
                   rec(mid, hi, fmid, frm, fhi, right, 0.5 * eps, d - 1);
        };
    const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    return rec(a, b, fa, fm, fb, (b - a) / 6.0 * (fa + 4.0 * fm + fb), tol, depth);
}

inline double rel_err(double got, double want) { return std::abs(got - want) / std::abs(want); }

/// Every Monday-to-Friday date from Jan 1 of first_year to Dec 31 of last_year.
inline std::vector<Date> weekdays(int first_year, int last_year)
{
    using namespace std::chrono;
    std::vector<Date> out;
    for (sys_days d = year{first_year} / January / 1; d <= sys_days{year{last_year} / December / 31}; d += days{1}) {
        const weekday wd{d};
        if (wd != Saturday && wd != Sunday) out.emplace_back(d);
    }
    return out;
}

/// Daily closes on weekdays, simulated with one step of 1/252 years per date.
inline DatedSeries synthetic_prices(const Environment& env, int first_year, int last_year, std::uint64_t seed)
{
    DatedSeries s;
    s.dates = weekdays(first_year, last_year);
    const std::size_t steps = s.dates.size() - 1;
    Rng rng = make_rng(seed, 0);
    const TimeGrid grid(static_cast<double>(steps) / 252.0, steps);
    s.values = simulate_stock_path(env.market, env.jumps, grid, 100.0, rng).values;
    return s;
}

/// A constant quote on the first date of each year.
inline DatedSeries yearly_quotes(int first_year, int last_year, double percent)
{
    using namespace std::chrono;
    DatedSeries s;
    for (int y = first_year; y <= last_year; ++y) {
        s.dates.push_back(year{y} / January / 1);
        s.values.push_back(percent);
    }
    return s;
}

} // namespace emvj::testing
