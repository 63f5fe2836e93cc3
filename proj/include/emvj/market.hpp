#pragma once

// Market description shared by the simulators, the policy formulas and the
// calibrator: diffusion parameters, Merton jump law, and time grids.

#include "emvj/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

namespace emvj {

/// Drift and diffusion volatility of the stock, annualized.
struct MarketParams {
    double mu = 0.0;
    double sigma = 0.0;

    void validate() const
    {
        detail::require(std::isfinite(mu), "MarketParams: mu must be finite");
        detail::require(std::isfinite(sigma) && sigma >= 0.0, "MarketParams: sigma must be >= 0");
    }
};

/// Merton jump law: Poisson arrivals with rate `zeta`, log jump sizes
/// Normal(mu_j, sigma_j^2).
struct JumpParams {
    double zeta = 0.0;
    double mu_j = 0.0;
    double sigma_j = 0.0;

    void validate() const
    {
        detail::require(std::isfinite(zeta) && zeta >= 0.0, "JumpParams: zeta must be >= 0");
        detail::require(std::isfinite(mu_j), "JumpParams: mu_j must be finite");
        detail::require(std::isfinite(sigma_j) && sigma_j >= 0.0, "JumpParams: sigma_j must be >= 0");
        // Second moment of the relative jump must exist.
        detail::require(std::isfinite(std::exp(2.0 * mu_j + 2.0 * sigma_j * sigma_j)),
                        "JumpParams: exp(2 mu_j + 2 sigma_j^2) is not finite");
    }

    /// E[e^Z - 1], the mean relative jump size.
    [[nodiscard]] double kappa() const { return std::expm1(mu_j + 0.5 * sigma_j * sigma_j); }
};

/// The true (data-generating) environment.
struct Environment {
    MarketParams market;
    JumpParams jumps;

    void validate() const
    {
        market.validate();
        jumps.validate();
    }
};

/// Uniform partition t0 < t0 + dt < ... < t0 + horizon.
class TimeGrid {
public:
    TimeGrid(double horizon, std::size_t n_steps, double t0 = 0.0)
        : t0_(t0), horizon_(horizon), n_steps_(n_steps)
    {
        detail::require(n_steps >= 1, "TimeGrid: n_steps must be >= 1");
        detail::require(std::isfinite(horizon) && horizon > 0.0, "TimeGrid: horizon must be > 0");
        detail::require(std::isfinite(t0), "TimeGrid: t0 must be finite");
    }

    /// Grid with mesh `dt`; horizon/dt must be an integer up to rounding.
    static TimeGrid from_mesh(double horizon, double dt, double t0 = 0.0)
    {
        detail::require(std::isfinite(dt) && dt > 0.0, "TimeGrid: dt must be > 0");
        const double ratio = horizon / dt;
        const double steps = std::round(ratio);
        detail::require(steps >= 1.0 && std::abs(ratio - steps) <= 1e-9 * std::max(1.0, ratio),
                        "TimeGrid: horizon must be an integer multiple of dt");
        return TimeGrid(horizon, static_cast<std::size_t>(steps), t0);
    }

    [[nodiscard]] double t0() const { return t0_; }
    [[nodiscard]] double horizon() const { return horizon_; }
    [[nodiscard]] double end() const { return t0_ + horizon_; }
    [[nodiscard]] std::size_t n_steps() const { return n_steps_; }
    [[nodiscard]] double dt() const { return horizon_ / static_cast<double>(n_steps_); }
    [[nodiscard]] double time(std::size_t n) const
    {
        return n == n_steps_ ? end() : t0_ + static_cast<double>(n) * dt();
    }

    [[nodiscard]] std::vector<double> times() const
    {
        std::vector<double> out(n_steps_ + 1);
        for (std::size_t n = 0; n <= n_steps_; ++n) out[n] = time(n);
        return out;
    }

private:
    double t0_;
    double horizon_;
    std::size_t n_steps_;
};

/// A discretized trajectory: values[n] observed at times[n].
struct PathGrid {
    std::vector<double> times;
    std::vector<double> values;

    [[nodiscard]] std::size_t size() const { return values.size(); }
    [[nodiscard]] double terminal() const { return values.back(); }

    void validate() const
    {
        detail::require(times.size() == values.size(), "PathGrid: times and values differ in length");
        detail::require(!times.empty(), "PathGrid: empty path");
        for (std::size_t i = 1; i < times.size(); ++i)
            detail::require(times[i] > times[i - 1], "PathGrid: times must be strictly increasing");
    }
};

} // namespace emvj
