#pragma once

// Seeded simulation of the Merton jump-diffusion stock and of wealth under
// the parameterized Gaussian policy.
//
// Random draws per step are consumed in a fixed order (policy action,
// Brownian increment, jump count, jump sizes, per-jump actions) and no draw
// is made for a component that is switched off (zero intensity, zero policy
// variance), so a jump-free run reproduces the diffusion-only path exactly.

#include "emvj/equilibrium_policy.hpp"
#include "emvj/errors.hpp"
#include "emvj/market.hpp"
#include "emvj/random.hpp"

#include <cmath>
#include <cstddef>
#include <random>
#include <vector>

namespace emvj {

/// How jump arrivals are laid out over a path.
enum class JumpSchedule {
    PerStep, ///< independent Poisson(zeta dt) count in every step
    PerPath, ///< a single Poisson(zeta dt) count per path, landing in one uniformly chosen step
};

/// Dollar exposure applied to each jump in the wealth process.
enum class JumpCoefficient {
    PolicyMean,    ///< every jump scaled by the policy mean
    SampledAction, ///< each jump scaled by its own draw from the policy
};

struct SimOptions {
    bool compensate = true;
    JumpSchedule schedule = JumpSchedule::PerStep;
    JumpCoefficient coefficient = JumpCoefficient::SampledAction;
};

/// Jumps arriving in one interval of length dt.
struct JumpIncrement {
    int count = 0;
    double total_mult = 1.0;      ///< product of e^{Z_j}
    double compensated_sum = 0.0; ///< sum of (e^{Z_j} - 1) minus zeta dt kappa
};

namespace detail {

template <class G>
double standard_normal(G& rng)
{
    std::normal_distribution<double> n01(0.0, 1.0);
    return n01(rng);
}

template <class G>
double draw_log_jump(const JumpParams& jp, G& rng)
{
    if (jp.sigma_j == 0.0) return jp.mu_j;
    return jp.mu_j + jp.sigma_j * standard_normal(rng);
}

template <class G>
int draw_poisson(double mean, G& rng)
{
    if (!(mean > 0.0)) return 0;
    std::poisson_distribution<int> pois(mean);
    return pois(rng);
}

/// Produces the log jump sizes of each step under a JumpSchedule.
class JumpStream {
public:
    template <class G>
    JumpStream(const JumpParams& jp, const TimeGrid& grid, const SimOptions& opts, G& rng)
        : jp_(jp), dt_(grid.dt()), schedule_(opts.schedule)
    {
        const double path_mean = jp.zeta * dt_;
        if (schedule_ == JumpSchedule::PerStep) {
            expected_per_step_ = path_mean;
        } else {
            expected_per_step_ = path_mean / static_cast<double>(grid.n_steps());
            if (path_mean > 0.0) {
                std::uniform_int_distribution<std::size_t> pick(0, grid.n_steps() - 1);
                jump_step_ = pick(rng);
                const int count = draw_poisson(path_mean, rng);
                for (int j = 0; j < count; ++j) path_jumps_.push_back(draw_log_jump(jp_, rng));
            }
        }
        if (!opts.compensate) expected_per_step_ = 0.0;
    }

    /// Fills `out` with the log jump sizes landing in step n.
    template <class G>
    void draw(std::size_t n, G& rng, std::vector<double>& out) const
    {
        out.clear();
        if (schedule_ == JumpSchedule::PerStep) {
            const int count = draw_poisson(jp_.zeta * dt_, rng);
            for (int j = 0; j < count; ++j) out.push_back(draw_log_jump(jp_, rng));
        } else if (n == jump_step_) {
            out = path_jumps_;
        }
    }

    /// Compensator applied per step to a unit exposure: E[count] * kappa
    /// (zero when compensation is disabled).
    [[nodiscard]] double compensator() const { return expected_per_step_ * jp_.kappa(); }

private:
    JumpParams jp_;
    double dt_;
    JumpSchedule schedule_;
    double expected_per_step_ = 0.0;
    std::size_t jump_step_ = static_cast<std::size_t>(-1);
    std::vector<double> path_jumps_;
};

inline PathGrid make_path(const TimeGrid& grid)
{
    PathGrid path;
    path.times = grid.times();
    path.values.resize(grid.n_steps() + 1);
    return path;
}

} // namespace detail

/// Jumps over one interval of length dt.
template <class G>
JumpIncrement sample_jump_increment(const JumpParams& jp, double dt, G& rng, bool compensate = true)
{
    detail::require(std::isfinite(dt) && dt > 0.0, "sample_jump_increment: dt must be > 0");
    JumpIncrement inc;
    inc.count = detail::draw_poisson(jp.zeta * dt, rng);
    double log_mult = 0.0;
    for (int j = 0; j < inc.count; ++j) {
        const double z = detail::draw_log_jump(jp, rng);
        log_mult += z;
        inc.compensated_sum += std::expm1(z);
    }
    inc.total_mult = std::exp(log_mult);
    if (compensate && jp.zeta > 0.0) inc.compensated_sum -= jp.zeta * dt * jp.kappa();
    return inc;
}

/// Stock price on `grid` by the exact log scheme:
/// S_{n+1} = S_n exp((mu - sigma^2/2) dt - E[N] kappa + sigma dW) prod e^{Z}.
template <class G>
PathGrid simulate_stock_path(const MarketParams& mp, const JumpParams& jp, const TimeGrid& grid,
                             double s0, G& rng, const SimOptions& opts = {})
{
    mp.validate();
    jp.validate();
    detail::require(std::isfinite(s0) && s0 > 0.0, "simulate_stock_path: s0 must be > 0");

    const double dt = grid.dt();
    const double sqrt_dt = std::sqrt(dt);
    const double drift = (mp.mu - 0.5 * mp.sigma * mp.sigma) * dt;

    detail::JumpStream jumps(jp, grid, opts, rng);
    std::vector<double> z;
    PathGrid path = detail::make_path(grid);
    path.values[0] = s0;
    double log_s = std::log(s0);
    for (std::size_t n = 0; n < grid.n_steps(); ++n) {
        const double dw = sqrt_dt * detail::standard_normal(rng);
        jumps.draw(n, rng, z);
        double jump_log = 0.0;
        for (double zj : z) jump_log += zj;
        log_s += drift - jumps.compensator() + mp.sigma * dw + jump_log;
        path.values[n + 1] = std::exp(log_s);
    }
    return path;
}

/// Wealth under the Gaussian policy pi^theta, stepped by Euler:
/// dX = a dt + b dW + (jump term), with
///   a = (mu_true - r) m,  b = sigma_true sqrt(v + m^2),
/// m, v the policy mean and variance. The jump term is the compensated
/// relative-jump sum scaled by m (PolicyMean) or by an independent policy
/// draw per jump (SampledAction).
template <class G>
PathGrid simulate_wealth_theta(const Theta& theta, const Environment& env, const PreferenceParams& pref,
                               const TimeGrid& grid, double x0, G& rng, const SimOptions& opts = {})
{
    env.validate();
    detail::require(std::isfinite(x0), "simulate_wealth_theta: x0 must be finite");
    const GaussianPolicy pol = equilibrium_policy(theta, pref);

    const double dt = grid.dt();
    const double sqrt_dt = std::sqrt(dt);
    const double a = (env.market.mu - pref.r) * pol.mean;
    const double b = env.market.sigma * std::sqrt(pol.variance + pol.mean * pol.mean);
    const double pol_sd = pol.stddev();
    const bool per_jump_action = opts.coefficient == JumpCoefficient::SampledAction && pol_sd > 0.0;

    detail::JumpStream jumps(env.jumps, grid, opts, rng);
    std::vector<double> z;
    PathGrid path = detail::make_path(grid);
    path.values[0] = x0;
    double x = x0;
    for (std::size_t n = 0; n < grid.n_steps(); ++n) {
        const double dw = sqrt_dt * detail::standard_normal(rng);
        jumps.draw(n, rng, z);
        double jump = -pol.mean * jumps.compensator();
        for (double zj : z) {
            const double u = per_jump_action ? pol.mean + pol_sd * detail::standard_normal(rng) : pol.mean;
            jump += u * std::expm1(zj);
        }
        x += a * dt + b * dw + jump;
        path.values[n + 1] = x;
    }
    return path;
}

/// Wealth when a fresh action u ~ policy is drawn every step and held over
/// the step: dX = u (mu_true - r) dt + u sigma_true dW + u (compensated jumps).
template <class G>
PathGrid simulate_wealth_sampled(const GaussianPolicy& policy, const Environment& env, double r,
                                 const TimeGrid& grid, double x0, G& rng, const SimOptions& opts = {})
{
    env.validate();
    detail::require(std::isfinite(x0), "simulate_wealth_sampled: x0 must be finite");
    detail::require(policy.variance >= 0.0 && std::isfinite(policy.mean), "simulate_wealth_sampled: bad policy");

    const double dt = grid.dt();
    const double sqrt_dt = std::sqrt(dt);
    const double pol_sd = policy.stddev();

    detail::JumpStream jumps(env.jumps, grid, opts, rng);
    std::vector<double> z;
    PathGrid path = detail::make_path(grid);
    path.values[0] = x0;
    double x = x0;
    for (std::size_t n = 0; n < grid.n_steps(); ++n) {
        const double u = pol_sd > 0.0 ? policy.mean + pol_sd * detail::standard_normal(rng) : policy.mean;
        const double dw = sqrt_dt * detail::standard_normal(rng);
        jumps.draw(n, rng, z);
        double rel_jump = -jumps.compensator();
        for (double zj : z) rel_jump += std::expm1(zj);
        x += u * ((env.market.mu - r) * dt + env.market.sigma * dw + rel_jump);
        path.values[n + 1] = x;
    }
    return path;
}

} // namespace emvj
