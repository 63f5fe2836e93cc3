#include "support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace emvj;
using namespace emvj::testing;

namespace {

// zeta * integral of (e^z - 1)^2 against the Normal(mu_j, sigma_j^2) density.
double delta_squared_quadrature(const JumpParams& jp)
{
    const double sj = jp.sigma_j;
    auto f = [&](double z) {
        const double d = (z - jp.mu_j) / sj;
        const double e = std::expm1(z);
        return e * e * std::exp(-0.5 * d * d) / (sj * std::sqrt(2.0 * std::numbers::pi));
    };
    return jp.zeta * integrate(f, jp.mu_j - 10.0 * sj, jp.mu_j + 10.0 * sj, 1e-16);
}

const PreferenceParams kUnitPref{1.0, 1.0, 0.0};

} // namespace

TEST(DeltaAggregation, CalibratedLaw)
{
    EXPECT_NEAR(delta_squared_merton(kJumps), 0.021006, 5e-6);
    EXPECT_NEAR(delta_merton(kJumps), kDeltaTrue, 1e-4);
    EXPECT_EQ(delta_squared_merton({0.0, -0.2, 0.3}), 0.0);
}

TEST(DeltaAggregation, MatchesQuadratureOnRandomLaws)
{
    std::mt19937_64 rng(20);
    std::uniform_real_distribution<double> zeta(0.1, 100.0), mu(-0.2, 0.2), sd(0.005, 0.3);
    for (int i = 0; i < 20; ++i) {
        const JumpParams jp{zeta(rng), mu(rng), sd(rng)};
        const double want = delta_squared_quadrature(jp);
        EXPECT_LT(rel_err(delta_squared_merton(jp), want), 5e-7) << jp.zeta << ' ' << jp.mu_j << ' ' << jp.sigma_j;
    }
}

TEST(DeltaAggregation, MonotoneInIntensity)
{
    double prev = 0.0;
    for (double z = 0.0; z <= 50.0; z += 2.5) {
        const double d2 = delta_squared_merton({z, -0.004, 0.0274});
        EXPECT_GE(d2, prev);
        prev = d2;
    }
}

TEST(Policy, CalibratedMeanAndVariance)
{
    const GaussianPolicy p = equilibrium_policy(theta_true(), kUnitPref);
    EXPECT_NEAR(p.mean, 2.2837, 1e-4);
    EXPECT_NEAR(p.variance, 26.011, 1e-3);
}

TEST(Policy, ZeroExcessReturnAndNoExploration)
{
    const Theta t{0.03, 0.2, 0.1};
    EXPECT_EQ(equilibrium_policy(t, {2.0, 1.0, 0.03}).mean, 0.0);
    EXPECT_EQ(equilibrium_policy(t, {2.0, 0.0, 0.01}).variance, 0.0);
}

TEST(Policy, VarianceScalesWithLambdaMeanDoesNot)
{
    const Theta t{0.09, 0.15, 0.12};
    const auto a = equilibrium_policy(t, {3.0, 0.4, 0.01});
    const auto b = equilibrium_policy(t, {3.0, 0.8, 0.01});
    EXPECT_EQ(a.mean, b.mean);
    EXPECT_DOUBLE_EQ(b.variance, 2.0 * a.variance);
    EXPECT_DOUBLE_EQ(a.variance, 0.4 / (3.0 * t.total_variance()));
}

TEST(Policy, RejectsDegenerateInputs)
{
    EXPECT_THROW(equilibrium_policy({0.1, 0.0, 0.0}, kUnitPref), InvalidParameter);
    EXPECT_THROW(equilibrium_policy({0.1, 0.1, 0.1}, {0.0, 1.0, 0.0}), InvalidParameter);
    EXPECT_THROW(equilibrium_policy({0.1, 0.1, 0.1}, {-1.0, 1.0, 0.0}), InvalidParameter);
}

TEST(ValueFunction, TerminalConditions)
{
    const Theta t{0.09, 0.15, 0.12};
    const PreferenceParams pref{2.0, 0.3, 0.01};
    EXPECT_EQ(value_C(1.5, t, pref, 1.5), 0.0);
    EXPECT_EQ(aux_h(1.5, t, pref, 1.5), 0.0);
    EXPECT_EQ(value_V(1.5, 2.0, t, pref, 1.5), 2.0);
    EXPECT_EQ(aux_g(1.5, 2.0, t, pref, 1.5), 2.0);
}

TEST(ValueFunction, ClassicalValues)
{
    const PreferenceParams g5{5.0, 0.0, 0.0}, g1{1.0, 0.0, 0.0};
    EXPECT_NEAR(value_C(0.0, theta_true(), g5, 1.0), 0.02005, 1e-5);
    EXPECT_NEAR(value_C(0.0, theta_true(), g1, 1.0), 0.10025, 1e-5);
    EXPECT_LT(rel_err(value_V(0.0, 1.0, theta_true(), g5, 1.0), 1.0202), 0.005);
    EXPECT_LT(rel_err(value_V(0.0, 1.0, theta_true(), g1, 1.0), 1.1011), 0.005);
}

TEST(ValueFunction, AuxiliaryValues)
{
    EXPECT_NEAR(aux_h(0.0, theta_true(), {1.0, 0.0, 0.0}, 1.0), 0.20051, 1e-5);
    const double h01 = aux_h(0.0, theta_true(), {0.1, 0.0, 0.0}, 1.0);
    EXPECT_NEAR(h01, 2.0051, 1e-4);
    EXPECT_LT(rel_err(1.0 + h01, 3.0213), 0.01);
}

TEST(ValueFunction, LinearInTimeToGo)
{
    const Theta t{0.09, 0.15, 0.12};
    const PreferenceParams pref{2.0, 0.3, 0.01};
    const double T = 2.0;
    const double c0 = value_C(0.0, t, pref, T), h0 = aux_h(0.0, t, pref, T);
    for (double s : {0.0, 0.25, 0.5, 1.0, 1.75, 2.0}) {
        EXPECT_DOUBLE_EQ(value_C(s, t, pref, T), (T - s) / T * c0);
        EXPECT_DOUBLE_EQ(aux_h(s, t, pref, T), (T - s) / T * h0);
    }
}

TEST(ValueFunction, LambdaLogTermVanishesAtZero)
{
    const Theta t{0.09, 0.15, 0.12};
    const double c_zero = value_C(0.0, t, {2.0, 0.0, 0.0}, 1.0);
    const double c_tiny = value_C(0.0, t, {2.0, 1e-12, 0.0}, 1.0);
    EXPECT_NEAR(c_tiny, c_zero, 1e-9);
    EXPECT_EQ(entropy_rate(t, {2.0, 0.0, 0.0}), 0.0);
}

TEST(Entropy, Values)
{
    const double unit = 1.0 / (2.0 * std::numbers::pi * std::numbers::e);
    EXPECT_NEAR(policy_entropy({0.0, unit}), 0.0, 1e-15);
    EXPECT_NEAR(policy_entropy({1.0, 26.011}), 3.048, 5e-4);
    EXPECT_NEAR(policy_entropy({0.0, 2.0 * 0.37}) - policy_entropy({0.0, 0.37}), 0.5 * std::log(2.0), 1e-14);
    EXPECT_THROW(policy_entropy({0.0, 0.0}), InvalidParameter);
}

TEST(Entropy, RateIsLambdaTimesPolicyEntropy)
{
    const PreferenceParams pref{1.5, 0.7, 0.0};
    const Theta t{0.09, 0.15, 0.12};
    EXPECT_NEAR(entropy_rate(t, pref), pref.lambda * policy_entropy(equilibrium_policy(t, pref)), 1e-14);
}

TEST(TestFunctions, VanishAtHorizon)
{
    const auto v = test_functions(1.0, theta_true(), kUnitPref, 1.0);
    EXPECT_EQ(v.d_mu, 0.0);
    EXPECT_EQ(v.d_sigma, 0.0);
    EXPECT_EQ(v.d_delta, 0.0);
}

TEST(TestFunctions, SigmaDeltaSymmetry)
{
    const Theta t{0.09, 0.15, 0.12};
    const auto v = test_functions(0.3, t, {2.0, 0.5, 0.01}, 1.0);
    EXPECT_DOUBLE_EQ(v.d_sigma / t.sigma, v.d_delta / t.delta);
}

TEST(TestFunctions, VolatilitySensitivitiesMatchFiniteDifferences)
{
    const Theta t0 = theta_true();
    const auto v = test_functions(0.0, t0, kUnitPref, 1.0);
    const double h = 1e-5;
    auto c_at = [&](Theta t) { return value_C(0.0, t, kUnitPref, 1.0); };
    const double fd_sigma =
        (c_at({t0.mu, t0.sigma + h, t0.delta}) - c_at({t0.mu, t0.sigma - h, t0.delta})) / (2.0 * h);
    const double fd_delta =
        (c_at({t0.mu, t0.sigma, t0.delta + h}) - c_at({t0.mu, t0.sigma, t0.delta - h})) / (2.0 * h);
    EXPECT_LT(rel_err(v.d_sigma, fd_sigma), 1e-6);
    EXPECT_LT(rel_err(v.d_delta, fd_delta), 1e-6);
}

TEST(TestFunctions, PrintedDriftSensitivityIsNotTheDerivative)
{
    const Theta t0 = theta_true();
    const double h = 1e-5;
    auto c_at = [&](double mu) { return value_C(0.0, {mu, t0.sigma, t0.delta}, kUnitPref, 1.0); };
    const double fd = (c_at(t0.mu + h) - c_at(t0.mu - h)) / (2.0 * h);
    const auto printed = test_functions(0.0, t0, kUnitPref, 1.0, TestFunctionForm::Printed);
    const auto analytic = test_functions(0.0, t0, kUnitPref, 1.0, TestFunctionForm::Analytic);
    EXPECT_GT(rel_err(printed.d_mu, fd), 0.1);
    EXPECT_LT(rel_err(analytic.d_mu, fd), 1e-6);
    EXPECT_EQ(printed.d_sigma, analytic.d_sigma);
}
