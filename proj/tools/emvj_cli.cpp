// emvj: command-line front end for calibration, training, simulation,
// evaluation and rolling-window backtests.
//
// Every option `--section.key` may also be given in the --config file as
//
//   [section]
//   key = value
//
// and command-line flags take precedence over the file.

#include "emvj/emvj.hpp"

#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace emvj;

namespace {

constexpr int kExitError = 1;
constexpr int kExitNotConverged = 3;

std::optional<std::string> prescan_config(int argc, char** argv)
{
    for (int i = 1; i < argc; ++i) {
        const std::string a = argv[i];
        if (a == "--config" && i + 1 < argc) return std::string(argv[i + 1]);
        if (a.starts_with("--config=")) return a.substr(9);
    }
    return std::nullopt;
}

template <class T>
T convert(const std::string& key, const std::string& raw)
{
    T out{};
    if (!CLI::detail::lexical_conversion<T, T>({raw}, out))
        throw DataError("config: cannot parse value '" + raw + "' for '" + key + "'");
    return out;
}

/// Registers options whose defaults may come from the config file.
class Binder {
public:
    explicit Binder(const Config& cfg) : cfg_(cfg) {}

    template <class T>
    CLI::Option* add(CLI::App* app, const std::string& key, T& var, const std::string& desc)
    {
        if (const auto v = cfg_.get(key)) var = convert<T>(key, *v);
        keys_[app->get_name()].insert(key);
        return app->add_option("--" + key, var, desc)->capture_default_str();
    }

    /// Rejects config keys that belong to a section used by `app` but match no option.
    void check_unknown(const CLI::App* app) const
    {
        const auto it = keys_.find(app->get_name());
        if (it == keys_.end()) return;
        std::set<std::string> sections;
        for (const auto& k : it->second)
            if (const auto dot = k.find('.'); dot != std::string::npos) sections.insert(k.substr(0, dot));
        for (const auto& [k, v] : cfg_.values()) {
            const auto dot = k.find('.');
            if (dot == std::string::npos) {
                if (k != "seed" && k != "out") throw DataError("config: unknown key '" + k + "'");
                continue;
            }
            if (sections.count(k.substr(0, dot)) && !it->second.count(k))
                throw DataError("config: unknown key '" + k + "'");
        }
    }

private:
    const Config& cfg_;
    std::map<std::string, std::set<std::string>> keys_;
};

struct Common {
    std::string config;
    std::uint64_t seed = 0;
    std::string out = ".";
};

void add_common(CLI::App* app, Binder& b, Common& c, const Config& cfg)
{
    app->add_option("--config", c.config, "key = value configuration file");
    if (const auto v = cfg.get("seed")) c.seed = convert<std::uint64_t>("seed", *v);
    if (const auto v = cfg.get("out")) c.out = *v;
    app->add_option("--seed", c.seed, "master random seed")->capture_default_str();
    app->add_option("--out", c.out, "output directory")->capture_default_str();
    (void)b;
}

struct EnvOpts {
    double mu = 0.0878, sigma = 0.1321, zeta = 27.6813, mu_j = -0.0040, sigma_j = 0.0274;
    [[nodiscard]] Environment env() const { return {{mu, sigma}, {zeta, mu_j, sigma_j}}; }
};

void add_env(CLI::App* app, Binder& b, EnvOpts& e)
{
    b.add(app, "market.mu", e.mu, "true drift");
    b.add(app, "market.sigma", e.sigma, "true diffusion volatility");
    b.add(app, "jumps.zeta", e.zeta, "jump arrival rate per year");
    b.add(app, "jumps.mu_j", e.mu_j, "mean log jump size");
    b.add(app, "jumps.sigma_j", e.sigma_j, "std of log jump size");
}

struct SimOpts {
    bool compensate = true;
    std::string schedule = "per_step";
    std::string coefficient = "sampled_action";

    [[nodiscard]] SimOptions options() const
    {
        SimOptions o;
        o.compensate = compensate;
        if (schedule == "per_step") o.schedule = JumpSchedule::PerStep;
        else if (schedule == "per_path") o.schedule = JumpSchedule::PerPath;
        else throw InvalidParameter("sim.jump_schedule: expected per_step or per_path");
        if (coefficient == "sampled_action") o.coefficient = JumpCoefficient::SampledAction;
        else if (coefficient == "policy_mean") o.coefficient = JumpCoefficient::PolicyMean;
        else throw InvalidParameter("sim.jump_coefficient: expected sampled_action or policy_mean");
        return o;
    }
};

void add_sim(CLI::App* app, Binder& b, SimOpts& s)
{
    b.add(app, "sim.compensate", s.compensate, "subtract the jump compensator");
    b.add(app, "sim.jump_schedule", s.schedule, "per_step | per_path");
    b.add(app, "sim.jump_coefficient", s.coefficient, "sampled_action | policy_mean");
}

fs::path prepare_out(const std::string& dir)
{
    fs::path p(dir);
    fs::create_directories(p);
    return p;
}

void write_file(const fs::path& path, const std::string& content)
{
    std::ofstream os(path, std::ios::binary);
    if (!os) throw DataError(path.string() + ": cannot open for writing");
    os << content;
    if (!os) throw DataError(path.string() + ": write failed");
}

void write_theta(std::ostream& os, const Theta& t)
{
    os << "mu = " << text::format_number(t.mu) << '\n'
       << "sigma = " << text::format_number(t.sigma) << '\n'
       << "delta = " << text::format_number(t.delta) << '\n';
}

/// Accepts a theta file (mu, sigma, delta) or a fit file (Merton estimates).
Theta read_theta_file(const std::string& path)
{
    const Config kv = Config::load(path);
    auto num = [&](const char* key) {
        const auto v = kv.get(key);
        if (!v) throw DataError(path + ": missing key '" + key + "'");
        const auto x = text::parse_number(*v);
        if (!x) throw DataError(path + ": bad number for '" + key + "'");
        return *x;
    };
    if (kv.get("delta")) return {num("mu"), num("sigma"), num("delta")};
    const MertonParams p{num("mu"), num("sigma"), num("zeta"), num("mu_j"), num("sigma_j")};
    return p.theta();
}

std::vector<double> parse_list(const std::string& key, const std::string& s)
{
    std::vector<double> out;
    for (const auto& f : text::split(s)) {
        const auto v = text::parse_number(f);
        if (!v) throw InvalidParameter(key + ": bad number '" + f + "'");
        out.push_back(*v);
    }
    if (out.empty()) throw InvalidParameter(key + ": empty list");
    return out;
}

} // namespace

int main(int argc, char** argv)
{
    Config cfg;
    try {
        if (const auto path = prescan_config(argc, argv)) cfg = Config::load(*path);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitError;
    }

    CLI::App app{"emvj: exploratory mean-variance investing with jumps"};
    app.require_subcommand(1);
    Binder b(cfg);
    Common common;

    // fit
    auto* fit_cmd = app.add_subcommand("fit", "calibrate the Merton jump-diffusion to a price CSV");
    std::string fit_prices, fit_date_col = "date", fit_value_col = "close";
    double fit_dt = 1.0 / 252.0;
    int fit_m_max = 2, fit_restarts = 1;
    MertonParams fit_init{};
    bool fit_has_init = false;
    add_common(fit_cmd, b, common, cfg);
    b.add(fit_cmd, "fit.prices", fit_prices, "price CSV")->required(!cfg.get("fit.prices"));
    b.add(fit_cmd, "fit.date_column", fit_date_col, "date column name");
    b.add(fit_cmd, "fit.value_column", fit_value_col, "price column name");
    b.add(fit_cmd, "fit.dt", fit_dt, "sampling interval in years");
    b.add(fit_cmd, "fit.m_max", fit_m_max, "maximum jumps per interval in the mixture");
    b.add(fit_cmd, "fit.restarts", fit_restarts, "jittered simplex restarts");
    b.add(fit_cmd, "fit.init_mu", fit_init.mu, "initial mu (with all init_* set)");
    b.add(fit_cmd, "fit.init_sigma", fit_init.sigma, "initial sigma");
    b.add(fit_cmd, "fit.init_zeta", fit_init.zeta, "initial zeta");
    b.add(fit_cmd, "fit.init_mu_j", fit_init.mu_j, "initial mu_j");
    b.add(fit_cmd, "fit.init_sigma_j", fit_init.sigma_j, "initial sigma_j");

    // train
    auto* train_cmd = app.add_subcommand("train", "learn (mu, sigma, delta) with the OC loss on simulated paths");
    EnvOpts train_env;
    SimOpts train_sim;
    RunConfig rc;
    rc.n_epochs = 2000;
    rc.base_rates = {4.0e-5, 1.0e-4, 3.8e-4};
    rc.scheduler = {1.0, 0.1};
    Theta theta0{0.1, 0.1, 0.05};
    std::string test_form = "printed";
    add_common(train_cmd, b, common, cfg);
    add_env(train_cmd, b, train_env);
    add_sim(train_cmd, b, train_sim);
    b.add(train_cmd, "pref.gamma", rc.pref.gamma, "risk aversion");
    b.add(train_cmd, "pref.lambda", rc.pref.lambda, "exploration weight");
    b.add(train_cmd, "pref.r", rc.pref.r, "risk-free rate");
    b.add(train_cmd, "train.epochs", rc.n_epochs, "number of epochs");
    b.add(train_cmd, "train.horizon", rc.horizon, "horizon T in years");
    b.add(train_cmd, "train.dt", rc.dt, "time step in years");
    b.add(train_cmd, "train.x0", rc.x0, "initial wealth");
    b.add(train_cmd, "train.eta_mu", rc.base_rates[0], "base learning rate for mu");
    b.add(train_cmd, "train.eta_sigma", rc.base_rates[1], "base learning rate for sigma");
    b.add(train_cmd, "train.eta_delta", rc.base_rates[2], "base learning rate for delta");
    b.add(train_cmd, "train.lr_start", rc.scheduler.start_factor, "learning-rate factor at the first epoch");
    b.add(train_cmd, "train.lr_end", rc.scheduler.end_factor, "learning-rate factor at the last epoch");
    b.add(train_cmd, "train.batch", rc.batch_size, "paths averaged per epoch");
    b.add(train_cmd, "train.test_function", test_form, "printed | analytic");
    b.add(train_cmd, "theta0.mu", theta0.mu, "initial mu");
    b.add(train_cmd, "theta0.sigma", theta0.sigma, "initial sigma");
    b.add(train_cmd, "theta0.delta", theta0.delta, "initial delta");

    // simulate
    auto* sim_cmd = app.add_subcommand("simulate", "write simulated stock or wealth paths");
    EnvOpts sim_env;
    SimOpts sim_sim;
    std::string sim_what = "stock";
    int sim_paths = 10;
    double sim_horizon = 1.0, sim_dt = 1.0 / 252.0, sim_s0 = 1.0;
    PreferenceParams sim_pref{1.0, 1.0, 0.0};
    Theta sim_theta{0.0878, 0.1321, 0.1449};
    add_common(sim_cmd, b, common, cfg);
    add_env(sim_cmd, b, sim_env);
    add_sim(sim_cmd, b, sim_sim);
    b.add(sim_cmd, "simulate.what", sim_what, "stock | wealth")->check(CLI::IsMember({"stock", "wealth"}));
    b.add(sim_cmd, "simulate.paths", sim_paths, "number of paths")->check(CLI::PositiveNumber);
    b.add(sim_cmd, "simulate.horizon", sim_horizon, "horizon in years");
    b.add(sim_cmd, "simulate.dt", sim_dt, "time step in years");
    b.add(sim_cmd, "simulate.start", sim_s0, "initial price or wealth");
    b.add(sim_cmd, "pref.gamma", sim_pref.gamma, "risk aversion (wealth)");
    b.add(sim_cmd, "pref.lambda", sim_pref.lambda, "exploration weight (wealth)");
    b.add(sim_cmd, "pref.r", sim_pref.r, "risk-free rate (wealth)");
    b.add(sim_cmd, "theta.mu", sim_theta.mu, "policy mu (wealth)");
    b.add(sim_cmd, "theta.sigma", sim_theta.sigma, "policy sigma (wealth)");
    b.add(sim_cmd, "theta.delta", sim_theta.delta, "policy delta (wealth)");

    // evaluate
    auto* eval_cmd = app.add_subcommand("evaluate", "Monte-Carlo performance over a sweep of risk aversions");
    EnvOpts eval_env;
    SimOpts eval_sim;
    std::string eval_theta_file, eval_gammas = "0.1,0.5,1,2,5", eval_mode = "policy_mean";
    int eval_paths = 100;
    double eval_horizon = 1.0, eval_dt = 1.0 / 252.0, eval_x0 = 1.0, eval_lambda = 0.0, eval_r = 0.0;
    add_common(eval_cmd, b, common, cfg);
    add_env(eval_cmd, b, eval_env);
    add_sim(eval_cmd, b, eval_sim);
    b.add(eval_cmd, "evaluate.theta", eval_theta_file, "theta or fit file")->required(!cfg.get("evaluate.theta"));
    b.add(eval_cmd, "evaluate.gammas", eval_gammas, "comma-separated risk aversions");
    b.add(eval_cmd, "evaluate.mode", eval_mode, "policy_mean | sampled_policy | theta_process")
        ->check(CLI::IsMember({"policy_mean", "sampled_policy", "theta_process"}));
    b.add(eval_cmd, "evaluate.paths", eval_paths, "paths per gamma");
    b.add(eval_cmd, "evaluate.horizon", eval_horizon, "horizon in years");
    b.add(eval_cmd, "evaluate.dt", eval_dt, "rebalancing interval in years");
    b.add(eval_cmd, "evaluate.x0", eval_x0, "initial wealth");
    b.add(eval_cmd, "pref.lambda", eval_lambda, "exploration weight for policy and V");
    b.add(eval_cmd, "pref.r", eval_r, "risk-free rate");

    // backtest
    auto* bt_cmd = app.add_subcommand("backtest", "rolling-window backtest on price and T-bill CSVs");
    BacktestConfig bt;
    std::string bt_prices, bt_rates, bt_date_col = "date", bt_price_col = "close", bt_rate_col = "close";
    add_common(bt_cmd, b, common, cfg);
    b.add(bt_cmd, "backtest.prices", bt_prices, "price CSV")->required(!cfg.get("backtest.prices"));
    b.add(bt_cmd, "backtest.rates", bt_rates, "T-bill quote CSV (annualized percent)")
        ->required(!cfg.get("backtest.rates"));
    b.add(bt_cmd, "backtest.date_column", bt_date_col, "date column in both files");
    b.add(bt_cmd, "backtest.price_column", bt_price_col, "price column");
    b.add(bt_cmd, "backtest.rate_column", bt_rate_col, "rate column");
    b.add(bt_cmd, "backtest.train_years", bt.windows.train_years, "training years per window");
    b.add(bt_cmd, "backtest.eval_years", bt.windows.eval_years, "evaluation years per window");
    b.add(bt_cmd, "backtest.gamma", bt.gamma, "risk aversion");
    b.add(bt_cmd, "backtest.lambda_rl", bt.lambda_rl, "exploration weight during training");
    b.add(bt_cmd, "backtest.lambda_train", bt.lambda_train, "exploration weight investing over training years");
    b.add(bt_cmd, "backtest.lambda_eval", bt.lambda_eval, "exploration weight investing over evaluation years");
    b.add(bt_cmd, "backtest.portfolios", bt.n_portfolios, "portfolios per period");
    b.add(bt_cmd, "backtest.epochs", bt.n_epochs, "training epochs per window");
    b.add(bt_cmd, "backtest.eta_mu", bt.base_rates[0], "base learning rate for mu");
    b.add(bt_cmd, "backtest.eta_sigma", bt.base_rates[1], "base learning rate for sigma");
    b.add(bt_cmd, "backtest.eta_delta", bt.base_rates[2], "base learning rate for delta");
    b.add(bt_cmd, "backtest.rate_divisor", bt.rate_divisor, "days per year when converting quotes");
    b.add(bt_cmd, "backtest.periods_per_year", bt.periods_per_year, "trading days per year");

    CLI11_PARSE(app, argc, argv);

    try {
        const fs::path out = prepare_out(common.out);

        if (*fit_cmd) {
            b.check_unknown(fit_cmd);
            const DatedSeries px = load_csv(fit_prices, fit_date_col, fit_value_col, SeriesRole::Price);
            const ReturnSeries rs = log_returns(px.values, fit_dt);
            if (rs.returns.size() < 10)
                throw DataError(fit_prices + ": too few returns to fit (" + std::to_string(rs.returns.size()) + ")");
            fit_has_init = fit_init.sigma > 0.0 && fit_init.zeta > 0.0 && fit_init.sigma_j > 0.0;
            FitOptions fo;
            fo.m_max = fit_m_max;
            fo.restarts = fit_restarts;
            fo.seed = common.seed;
            const FitResult res = fit(rs, fit_has_init ? fit_init : default_init(rs), fo);
            std::ostringstream os;
            write_fit(os, res);
            write_file(out / "fit.txt", os.str());
            if (!res.converged) {
                std::cerr << "error: simplex search did not converge after " << res.iterations
                          << " iterations; best log-likelihood " << res.loglik << '\n';
                return kExitNotConverged;
            }
        } else if (*train_cmd) {
            b.check_unknown(train_cmd);
            rc.seed = common.seed;
            rc.sim = train_sim.options();
            if (test_form == "printed") rc.test_form = TestFunctionForm::Printed;
            else if (test_form == "analytic") rc.test_form = TestFunctionForm::Analytic;
            else throw InvalidParameter("train.test_function: expected printed or analytic");
            const TrainTrace trace = train(theta0, train_env.env(), rc);
            std::ostringstream csv, th;
            write_trace_csv(csv, trace);
            write_theta(th, trace.final_theta());
            write_file(out / "trace.csv", csv.str());
            write_file(out / "theta.txt", th.str());
        } else if (*sim_cmd) {
            b.check_unknown(sim_cmd);
            const Environment env = sim_env.env();
            const SimOptions so = sim_sim.options();
            const TimeGrid grid = TimeGrid::from_mesh(sim_horizon, sim_dt);
            std::vector<PathGrid> paths;
            for (int i = 0; i < sim_paths; ++i) {
                Rng rng = make_rng(common.seed, static_cast<std::uint64_t>(i));
                paths.push_back(sim_what == "stock"
                                    ? simulate_stock_path(env.market, env.jumps, grid, sim_s0, rng, so)
                                    : simulate_wealth_theta(sim_theta, env, sim_pref, grid, sim_s0, rng, so));
            }
            std::ostringstream os;
            os << "time";
            for (int i = 0; i < sim_paths; ++i) os << ",path_" << i;
            os << '\n';
            for (std::size_t n = 0; n <= grid.n_steps(); ++n) {
                os << text::format_number(grid.time(n));
                for (const auto& p : paths) os << ',' << text::format_number(p.values[n]);
                os << '\n';
            }
            write_file(out / "paths.csv", os.str());
        } else if (*eval_cmd) {
            b.check_unknown(eval_cmd);
            if (!fs::exists(eval_theta_file)) throw DataError(eval_theta_file + ": theta file not found");
            const Theta theta = read_theta_file(eval_theta_file);
            const EvalMode mode = eval_mode == "policy_mean"      ? EvalMode::PolicyMean
                                  : eval_mode == "sampled_policy" ? EvalMode::SampledPolicy
                                                                  : EvalMode::ThetaProcess;
            const TimeGrid grid = TimeGrid::from_mesh(eval_horizon, eval_dt);
            const double rf = eval_x0 * std::pow(1.0 + eval_r * grid.dt(), static_cast<double>(grid.n_steps()));
            std::vector<PerformanceReport> reports;
            for (double gamma : parse_list("evaluate.gammas", eval_gammas)) {
                const PreferenceParams pref{gamma, eval_lambda, eval_r};
                const auto terminals = run_evaluation(mode, theta, pref, eval_env.env(), grid, eval_x0,
                                                      static_cast<std::size_t>(eval_paths), common.seed,
                                                      eval_sim.options());
                PerformanceReport rep = performance_stats(terminals, gamma, rf);
                const Benchmarks bm = theoretical_benchmarks(theta, pref, eval_horizon, eval_x0);
                rep.theoretical_mean = bm.mean;
                rep.theoretical_V = bm.V;
                reports.push_back(rep);
            }
            std::ostringstream os;
            write_report_csv(os, reports);
            write_file(out / "evaluate.csv", os.str());
        } else if (*bt_cmd) {
            b.check_unknown(bt_cmd);
            bt.seed = common.seed;
            const DatedSeries px = load_csv(bt_prices, bt_date_col, bt_price_col, SeriesRole::Price);
            const DatedSeries rq = load_csv(bt_rates, bt_date_col, bt_rate_col);
            const auto results = run_backtest(px, rq, bt);
            std::ostringstream rows, terms, params;
            write_backtest_csv(rows, results);
            write_backtest_terminals_csv(terms, results);
            write_backtest_params_csv(params, results);
            write_file(out / "backtest.csv", rows.str());
            write_file(out / "backtest_terminals.csv", terms.str());
            write_file(out / "backtest_params.csv", params.str());
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitError;
    }
    return 0;
}
