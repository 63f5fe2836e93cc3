#pragma once

// Orthogonality-condition training. The process
//   M_t = V(t, X_t) - (gamma/2) g(t, X_t)^2 + lambda * int_0^t H(pi) ds
// is a martingale at the true parameters; each loss pairs a value-function
// sensitivity with the increments of M along one simulated wealth path, and
// the parameters move by theta_j += eta_j * L_j.

#include "emvj/equilibrium_policy.hpp"
#include "emvj/errors.hpp"
#include "emvj/levy_market.hpp"
#include "emvj/market.hpp"
#include "emvj/random.hpp"
#include "emvj/text.hpp"

#include <array>
#include <cmath>
#include <cstdint>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace emvj {

struct LinearSchedule {
    double start_factor = 1.0;
    double end_factor = 1.0;
};

struct RunConfig {
    int n_epochs = 1;
    double horizon = 1.0;
    double dt = 1.0 / 252.0;
    PreferenceParams pref{1.0, 1.0, 0.0};
    double x0 = 1.0;
    std::array<double, 3> base_rates{0.0, 0.0, 0.0}; ///< (mu, sigma, delta)
    LinearSchedule scheduler;
    std::uint64_t seed = 0;
    int batch_size = 1; ///< paths averaged per epoch
    SimOptions sim;
    TestFunctionForm test_form = TestFunctionForm::Printed;

    void validate() const
    {
        detail::require(n_epochs >= 1, "RunConfig: n_epochs must be >= 1");
        detail::require(batch_size >= 1, "RunConfig: batch_size must be >= 1");
        detail::require(std::isfinite(x0), "RunConfig: x0 must be finite");
        for (double eta : base_rates)
            detail::require(std::isfinite(eta) && eta >= 0.0, "RunConfig: learning rates must be >= 0");
        detail::require(std::isfinite(scheduler.start_factor) && std::isfinite(scheduler.end_factor),
                        "RunConfig: scheduler factors must be finite");
        pref.validate();
        (void)grid();
    }

    [[nodiscard]] TimeGrid grid() const { return TimeGrid::from_mesh(horizon, dt); }
};

using LossTriple = std::array<double, 3>;

struct EpochRecord {
    int epoch = 0;
    Theta theta;              ///< parameters after this epoch's update
    LossTriple losses{};      ///< losses evaluated at the pre-update parameters
    std::array<double, 3> rates{};
};

struct TrainTrace {
    std::vector<EpochRecord> records;

    [[nodiscard]] const Theta& final_theta() const { return records.back().theta; }
};

class TrainingDiverged : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// All three discretized OC losses along one wealth path whose times lie in
/// [0, horizon].
inline LossTriple oc_losses(const PathGrid& path, const Theta& theta, const PreferenceParams& pref,
                            double horizon, TestFunctionForm form = TestFunctionForm::Printed)
{
    path.validate();
    detail::require(path.size() >= 2, "oc_loss: path needs at least two points");
    // C and h are linear in time-to-go; evaluate their rates once.
    const double c_rate = value_C(0.0, theta, pref, 1.0);
    const double h_rate = aux_h(0.0, theta, pref, 1.0);
    const double bonus = entropy_rate(theta, pref);
    const TestFunctionValues unit = test_functions(0.0, theta, pref, 1.0, form);
    const double half_gamma = 0.5 * pref.gamma;

    LossTriple loss{0.0, 0.0, 0.0};
    double t = path.times[0];
    double x = path.values[0];
    detail::require(t >= 0.0 && path.times.back() <= horizon * (1.0 + 1e-12), "oc_loss: path outside [0, T]");
    double v = x + (horizon - t) * c_rate;
    double g = x + (horizon - t) * h_rate;
    for (std::size_t n = 0; n + 1 < path.size(); ++n) {
        const double t_next = path.times[n + 1];
        const double x_next = path.values[n + 1];
        const double v_next = x_next + (horizon - t_next) * c_rate;
        const double g_next = x_next + (horizon - t_next) * h_rate;
        const double dm = v_next - v - half_gamma * (g_next * g_next - g * g) + bonus * (t_next - t);
        const double tau = horizon - t;
        loss[0] += tau * unit.d_mu * dm;
        loss[1] += tau * unit.d_sigma * dm;
        loss[2] += tau * unit.d_delta * dm;
        t = t_next;
        v = v_next;
        g = g_next;
    }
    return loss;
}

/// Loss for parameter index j in {1, 2, 3} = (mu, sigma, delta).
inline double oc_loss(int j, const PathGrid& path, const Theta& theta, const RunConfig& cfg)
{
    detail::require(j >= 1 && j <= 3, "oc_loss: parameter index must be 1, 2 or 3");
    return oc_losses(path, theta, cfg.pref, cfg.horizon, cfg.test_form)[static_cast<std::size_t>(j - 1)];
}

/// Linearly interpolated per-parameter learning rates at `epoch`.
inline std::array<double, 3> lr_schedule(int epoch, const RunConfig& cfg)
{
    detail::require(epoch >= 0 && epoch < cfg.n_epochs, "lr_schedule: epoch out of range");
    double factor = cfg.scheduler.start_factor;
    if (cfg.n_epochs > 1)
        factor += (cfg.scheduler.end_factor - cfg.scheduler.start_factor) * static_cast<double>(epoch) /
                  static_cast<double>(cfg.n_epochs - 1);
    return {cfg.base_rates[0] * factor, cfg.base_rates[1] * factor, cfg.base_rates[2] * factor};
}

inline constexpr double kSigmaFloor = 1e-4;

struct EpochResult {
    Theta theta;
    LossTriple losses{};
    std::array<double, 3> rates{};
    bool rejected = false; ///< update discarded because it would make sigma and delta vanish
};

/// One pass of the training loop: simulate `batch_size` wealth paths under
/// the current theta, average the OC losses, and update all coordinates
/// simultaneously.
template <class G>
EpochResult train_epoch(const Theta& theta, const Environment& env, const RunConfig& cfg, int epoch, G& rng)
{
    theta.validate();
    const TimeGrid grid = cfg.grid();
    EpochResult out;
    out.rates = lr_schedule(epoch, cfg);
    for (int b = 0; b < cfg.batch_size; ++b) {
        const PathGrid path = simulate_wealth_theta(theta, env, cfg.pref, grid, cfg.x0, rng, cfg.sim);
        const LossTriple l = oc_losses(path, theta, cfg.pref, cfg.horizon, cfg.test_form);
        for (std::size_t j = 0; j < 3; ++j) out.losses[j] += l[j];
    }
    for (double& l : out.losses) l /= static_cast<double>(cfg.batch_size);

    Theta next{theta.mu + out.rates[0] * out.losses[0], theta.sigma + out.rates[1] * out.losses[1],
               theta.delta + out.rates[2] * out.losses[2]};
    if (!next.finite() || !std::isfinite(next.total_variance())) {
        std::ostringstream msg;
        msg << "training diverged at epoch " << epoch << ": theta = (" << next.mu << ", " << next.sigma << ", "
            << next.delta << ")";
        throw TrainingDiverged(msg.str());
    }
    if (next.sigma <= 0.0 && next.delta <= 0.0) {
        out.theta = theta;
        out.rejected = true;
        return out;
    }
    next.sigma = std::max(next.sigma, kSigmaFloor);
    next.delta = std::max(next.delta, 0.0);
    out.theta = next;
    return out;
}

/// Runs exactly cfg.n_epochs epochs; epoch k draws from stream k of cfg.seed.
inline TrainTrace train(const Theta& theta0, const Environment& env, const RunConfig& cfg)
{
    cfg.validate();
    env.validate();
    theta0.validate();
    TrainTrace trace;
    trace.records.reserve(static_cast<std::size_t>(cfg.n_epochs));
    Theta theta = theta0;
    for (int k = 0; k < cfg.n_epochs; ++k) {
        Rng rng = make_rng(cfg.seed, static_cast<std::uint64_t>(k));
        const EpochResult res = train_epoch(theta, env, cfg, k, rng);
        theta = res.theta;
        trace.records.push_back({k, theta, res.losses, res.rates});
    }
    return trace;
}

inline constexpr const char* kTraceCsvHeader =
    "epoch,mu,sigma,delta,loss_mu,loss_sigma,loss_delta,eta_mu,eta_sigma,eta_delta";

inline void write_trace_csv(std::ostream& os, const TrainTrace& trace)
{
    os << kTraceCsvHeader << '\n';
    for (const auto& rec : trace.records) {
        os << rec.epoch << ',' << text::join_numbers(rec.theta.as_array()) << ','
           << text::join_numbers(rec.losses) << ',' << text::join_numbers(rec.rates) << '\n';
    }
}

} // namespace emvj
