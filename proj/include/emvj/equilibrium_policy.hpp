#pragma once

// Closed-form exploratory equilibrium for mean-variance investing under a
// jump-diffusion: Gaussian policy, value function V(t,x) = x + C(t),
// auxiliary function g(t,x) = x + h(t), and the value-function
// sensitivities used as test functions by the trainer.

#include "emvj/errors.hpp"
#include "emvj/market.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

namespace emvj {

/// Learned parameter triple: drift, diffusion volatility, aggregated jump
/// scale (delta^2 = integral of (e^z - 1)^2 against the Levy measure).
struct Theta {
    double mu = 0.0;
    double sigma = 0.0;
    double delta = 0.0;

    /// Total instantaneous return variance sigma^2 + delta^2.
    [[nodiscard]] double total_variance() const { return sigma * sigma + delta * delta; }

    [[nodiscard]] bool finite() const
    {
        return std::isfinite(mu) && std::isfinite(sigma) && std::isfinite(delta);
    }

    void validate() const
    {
        detail::require(finite(), "Theta: entries must be finite");
        detail::require(total_variance() > 0.0, "Theta: sigma^2 + delta^2 must be > 0");
    }

    [[nodiscard]] std::array<double, 3> as_array() const { return {mu, sigma, delta}; }
    static Theta from_array(const std::array<double, 3>& a) { return {a[0], a[1], a[2]}; }

    friend bool operator==(const Theta&, const Theta&) = default;
};

struct PreferenceParams {
    double gamma = 1.0;  ///< risk aversion
    double lambda = 0.0; ///< exploration (entropy) weight
    double r = 0.0;      ///< risk-free rate

    void validate() const
    {
        detail::require(std::isfinite(gamma) && gamma > 0.0, "PreferenceParams: gamma must be > 0");
        detail::require(std::isfinite(lambda) && lambda >= 0.0, "PreferenceParams: lambda must be >= 0");
        detail::require(std::isfinite(r), "PreferenceParams: r must be finite");
    }
};

/// State-independent Gaussian investment distribution (dollar position).
struct GaussianPolicy {
    double mean = 0.0;
    double variance = 0.0;

    [[nodiscard]] double stddev() const { return std::sqrt(variance); }
};

/// Which mu-sensitivity to use as the first test function.
enum class TestFunctionForm {
    Printed,  ///< (T-t)[(mu-r)/(gamma S) + (lambda/2) log(2 pi lambda/(gamma S))]
    Analytic, ///< dC/dmu = (T-t)(mu-r)/(gamma S)
};

struct TestFunctionValues {
    double d_mu = 0.0;
    double d_sigma = 0.0;
    double d_delta = 0.0;

    [[nodiscard]] std::array<double, 3> as_array() const { return {d_mu, d_sigma, d_delta}; }
};

namespace detail {

inline double checked_total_variance(const Theta& theta, const PreferenceParams& pref)
{
    const double s = theta.total_variance();
    require(std::isfinite(s) && s > 0.0, "sigma^2 + delta^2 must be > 0");
    require(std::isfinite(pref.gamma) && pref.gamma > 0.0, "gamma must be > 0");
    require(std::isfinite(pref.lambda) && pref.lambda >= 0.0, "lambda must be >= 0");
    return s;
}

/// lambda * log(k * lambda / (gamma S)), extended by continuity to 0 at lambda = 0.
inline double lambda_log(double lambda, double k, double gamma, double s)
{
    if (lambda == 0.0) return 0.0;
    return lambda * std::log(k * lambda / (gamma * s));
}

inline void require_time(double t, double horizon)
{
    require(t >= 0.0 && t <= horizon, "t must lie in [0, T]");
}

} // namespace detail

/// delta^2 for the Merton law:
/// zeta (exp(2 mu_j + 2 sigma_j^2) - 2 exp(mu_j + sigma_j^2/2) + 1).
inline double delta_squared_merton(const JumpParams& jp)
{
    jp.validate();
    const double v = jp.sigma_j * jp.sigma_j;
    // Written as E[(e^Z-1)^2] = expm1(2mu+2v) - 2 expm1(mu+v/2) to avoid cancellation.
    const double second = std::expm1(2.0 * jp.mu_j + 2.0 * v) - 2.0 * std::expm1(jp.mu_j + 0.5 * v);
    return jp.zeta * std::max(second, 0.0);
}

inline double delta_merton(const JumpParams& jp) { return std::sqrt(delta_squared_merton(jp)); }

inline GaussianPolicy equilibrium_policy(const Theta& theta, const PreferenceParams& pref)
{
    const double s = detail::checked_total_variance(theta, pref);
    return {(theta.mu - pref.r) / (pref.gamma * s), pref.lambda / (pref.gamma * s)};
}

/// C(t) in V(t,x) = x + C(t).
inline double value_C(double t, const Theta& theta, const PreferenceParams& pref, double horizon)
{
    const double s = detail::checked_total_variance(theta, pref);
    detail::require_time(t, horizon);
    const double excess = theta.mu - pref.r;
    const double rate = excess * excess / (2.0 * pref.gamma * s) +
                        0.5 * detail::lambda_log(pref.lambda, 2.0 * std::numbers::pi, pref.gamma, s);
    return (horizon - t) * rate;
}

/// h(t) in g(t,x) = x + h(t), the expected terminal gain.
inline double aux_h(double t, const Theta& theta, const PreferenceParams& pref, double horizon)
{
    const double s = detail::checked_total_variance(theta, pref);
    detail::require_time(t, horizon);
    const double excess = theta.mu - pref.r;
    return (horizon - t) * excess * excess / (pref.gamma * s);
}

inline double value_V(double t, double x, const Theta& theta, const PreferenceParams& pref, double horizon)
{
    return x + value_C(t, theta, pref, horizon);
}

inline double aux_g(double t, double x, const Theta& theta, const PreferenceParams& pref, double horizon)
{
    return x + aux_h(t, theta, pref, horizon);
}

/// Differential entropy of the Gaussian policy.
inline double policy_entropy(const GaussianPolicy& pol)
{
    detail::require(pol.variance > 0.0, "policy_entropy: variance must be > 0");
    return 0.5 * std::log(2.0 * std::numbers::pi * std::numbers::e * pol.variance);
}

/// Per-unit-time entropy bonus (lambda/2) log(2 pi e lambda/(gamma S));
/// zero at lambda = 0.
inline double entropy_rate(const Theta& theta, const PreferenceParams& pref)
{
    const double s = detail::checked_total_variance(theta, pref);
    return 0.5 * detail::lambda_log(pref.lambda, 2.0 * std::numbers::pi * std::numbers::e, pref.gamma, s);
}

/// Sensitivities of V with respect to (mu, sigma, delta) at time t.
inline TestFunctionValues test_functions(double t, const Theta& theta, const PreferenceParams& pref,
                                         double horizon, TestFunctionForm form = TestFunctionForm::Printed)
{
    const double s = detail::checked_total_variance(theta, pref);
    detail::require_time(t, horizon);
    const double tau = horizon - t;
    const double excess = theta.mu - pref.r;
    const double gs = pref.gamma * s;

    TestFunctionValues out;
    out.d_mu = tau * excess / gs;
    if (form == TestFunctionForm::Printed)
        out.d_mu += tau * 0.5 * detail::lambda_log(pref.lambda, 2.0 * std::numbers::pi, pref.gamma, s);
    const double common = excess * excess / (gs * s) + pref.lambda / s;
    out.d_sigma = -tau * common * theta.sigma;
    out.d_delta = -tau * common * theta.delta;
    return out;
}

} // namespace emvj
