// Command-line front end: simulation, estimation, order selection, inference,
// spillover testing, stationarity checking, forecasting and VaR backtesting.
// Every run writes its artifacts plus a manifest into the output directory.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mgarch/inference.hpp"
#include "mgarch/likelihood.hpp"
#include "mgarch/panel.hpp"
#include "mgarch/riskcast.hpp"
#include "mgarch/selection.hpp"
#include "mgarch/simulate.hpp"
#include "mgarch/stationarity.hpp"
#include "mgarch/volfilter.hpp"

namespace {

constexpr const char* kVersion = "0.1.0";

using nlohmann::json;
using namespace mgarch;

struct RunContext {
    std::string out_dir;
    std::string command;
    json config;
    std::vector<std::string> artifacts;
    std::chrono::steady_clock::time_point started = std::chrono::steady_clock::now();

    void emit(const std::string& name, const std::string& content) {
        std::filesystem::create_directories(out_dir);
        write_file(out_dir + "/" + name, content);
        artifacts.push_back(name);
    }

    void finish(std::uint64_t seed) {
        json manifest;
        manifest["command"] = command;
        manifest["config"] = config;
        manifest["seed"] = seed;
        manifest["version"] = kVersion;
        manifest["wall_ms"] = std::chrono::duration_cast<std::chrono::milliseconds>(
                                  std::chrono::steady_clock::now() - started)
                                  .count();
        manifest["artifacts"] = artifacts;
        std::filesystem::create_directories(out_dir);
        write_file(out_dir + "/manifest.json", manifest.dump(2));
    }
};

std::pair<int, int> parse_order(const std::string& text) {
    const auto comma = text.find(',');
    if (comma == std::string::npos)
        throw ParseError("order must be given as r,s (for example 1,0)");
    try {
        return {std::stoi(text.substr(0, comma)), std::stoi(text.substr(comma + 1))};
    } catch (...) {
        throw ParseError("cannot parse order: " + text);
    }
}

std::string default_out_dir() {
    if (const char* env = std::getenv("MGARCH_OUT")) return env;
    return "mgarch_out";
}

json matrix_rows(const MatrixXd& a) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        rows.push_back(std::vector<double>(a.row(i).begin(), a.row(i).end()));
    return rows;
}

// Applies values from a config file for flags the user did not pass.
void merge_config(CLI::App* cmd, const std::string& config_path) {
    if (config_path.empty()) return;
    json cfg;
    try {
        cfg = json::parse(read_file(config_path));
    } catch (const json::exception& e) {
        throw ParseError(std::string("invalid config JSON: ") + e.what());
    }
    for (const auto& [key, value] : cfg.items()) {
        CLI::Option* opt = cmd->get_option_no_throw("--" + key);
        if (!opt) throw ParseError("config key not recognized by subcommand: " + key);
        if (opt->count() > 0) continue;  // explicit flag wins
        const std::string text = value.is_string() ? value.get<std::string>() : value.dump();
        opt->add_result(text);
        opt->run_callback();
    }
}

json fit_summary(const FitReport& fit) {
    json j;
    j["neg_loglik"] = fit.neg_loglik;
    j["converged"] = fit.converged;
    j["stationarity_margin"] = fit.stationarity_margin;
    j["gradient_norm"] = fit.gradient_norm;
    return j;
}

struct CommonArgs {
    std::string out = default_out_dir();
    std::string config;
    int threads = 1;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--out", args.out, "output directory");
    cmd->add_option("--config", args.config, "JSON file with defaults for this subcommand");
    cmd->add_option("--threads", args.threads, "parallel worker cap")->check(CLI::PositiveNumber);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"efficient multivariate volatility modeling toolkit"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kVersion);

    // ---- simulate ----
    auto* sim_cmd = app.add_subcommand("simulate", "generate a panel from the model");
    CommonArgs sim_common;
    std::string sim_dgp, sim_params_file, sim_dist = "normal";
    int sim_n = 1000, sim_burn = -1;
    std::uint64_t sim_seed = 0;
    bool sim_force = false;
    sim_cmd->add_option("--dgp", sim_dgp, "catalog entry DGP1..DGP5");
    sim_cmd->add_option("--params", sim_params_file, "parameter JSON file");
    sim_cmd->add_option("--n", sim_n, "sample size")->check(CLI::PositiveNumber);
    sim_cmd->add_option("--burn", sim_burn, "burn-in length (default max(500, 5k))");
    sim_cmd->add_option("--dist", sim_dist, "innovations: normal | t5 | t(nu)");
    sim_cmd->add_option("--seed", sim_seed, "random seed")->required();
    sim_cmd->add_flag("--force", sim_force, "skip the stationarity guard");
    add_common(sim_cmd, sim_common);

    // ---- fit ----
    auto* fit_cmd = app.add_subcommand("fit", "quasi-likelihood estimation");
    CommonArgs fit_common;
    std::string fit_data, fit_order_text = "1,0";
    int fit_kwindow = -1;
    bool fit_lowrank_flag = false, fit_center = false;
    FitOptions fit_opts;
    fit_opts.n_starts = 20;
    fit_cmd->add_option("--data", fit_data, "panel CSV")->required();
    fit_cmd->add_option("--order", fit_order_text, "orders r,s");
    fit_cmd->add_option("--kwindow", fit_kwindow, "correlation window (default m)");
    fit_cmd->add_flag("--lowrank", fit_lowrank_flag, "factor-restricted estimator");
    fit_cmd->add_flag("--center", fit_center, "demean the panel columns");
    fit_cmd->add_option("--seed", fit_opts.seed, "random seed")->required();
    fit_cmd->add_option("--starts", fit_opts.n_starts, "multistart count");
    fit_cmd->add_option("--max-iter", fit_opts.max_iter, "optimizer iteration cap");
    add_common(fit_cmd, fit_common);

    // ---- select ----
    auto* sel_cmd = app.add_subcommand("select", "order selection over the grid");
    CommonArgs sel_common;
    std::string sel_data;
    int sel_omax = 2, sel_kwindow = -1;
    bool sel_lowrank = false, sel_center = false;
    FitOptions sel_opts;
    sel_cmd->add_option("--data", sel_data, "panel CSV")->required();
    sel_cmd->add_option("--omax", sel_omax, "largest admissible r + 2s");
    sel_cmd->add_option("--kwindow", sel_kwindow, "correlation window (default m)");
    sel_cmd->add_flag("--lowrank", sel_lowrank, "factor-restricted estimator");
    sel_cmd->add_flag("--center", sel_center, "demean the panel columns");
    sel_cmd->add_option("--seed", sel_opts.seed, "random seed")->required();
    sel_cmd->add_option("--starts", sel_opts.n_starts, "multistart count per cell");
    sel_cmd->add_option("--max-iter", sel_opts.max_iter, "optimizer iteration cap");
    add_common(sel_cmd, sel_common);

    // ---- infer ----
    auto* inf_cmd = app.add_subcommand("infer", "asymptotic covariance and standard errors");
    CommonArgs inf_common;
    std::string inf_data, inf_fit;
    bool inf_center = false, inf_gaussian = false;
    inf_cmd->add_option("--data", inf_data, "panel CSV")->required();
    inf_cmd->add_option("--fit", inf_fit, "fit report JSON")->required();
    inf_cmd->add_flag("--center", inf_center, "demean the panel columns");
    inf_cmd->add_flag("--gaussian", inf_gaussian, "also report the Gaussian-innovation covariance");
    add_common(inf_cmd, inf_common);

    // ---- spillover ----
    auto* spill_cmd = app.add_subcommand("spillover", "significance tests of cross effects");
    CommonArgs spill_common;
    std::string spill_data, spill_fit;
    bool spill_center = false;
    spill_cmd->add_option("--data", spill_data, "panel CSV")->required();
    spill_cmd->add_option("--fit", spill_fit, "fit report JSON")->required();
    spill_cmd->add_flag("--center", spill_center, "demean the panel columns");
    add_common(spill_cmd, spill_common);

    // ---- stationarity ----
    auto* stat_cmd = app.add_subcommand("stationarity", "sufficient-condition check");
    CommonArgs stat_common;
    std::string stat_params, stat_fit;
    stat_cmd->add_option("--params", stat_params, "parameter JSON file");
    stat_cmd->add_option("--fit", stat_fit, "fit report JSON");
    add_common(stat_cmd, stat_common);

    // ---- forecast ----
    auto* fc_cmd = app.add_subcommand("forecast", "one-step-ahead covariance and weights");
    CommonArgs fc_common;
    std::string fc_data, fc_fit;
    bool fc_center = false;
    fc_cmd->add_option("--data", fc_data, "panel CSV")->required();
    fc_cmd->add_option("--fit", fc_fit, "fit report JSON")->required();
    fc_cmd->add_flag("--center", fc_center, "demean the panel columns");
    add_common(fc_cmd, fc_common);

    // ---- backtest ----
    auto* bt_cmd = app.add_subcommand("backtest", "rolling VaR production and backtests");
    CommonArgs bt_common;
    std::string bt_data, bt_order_text = "1,0", bt_levels_text = "0.01,0.025,0.05,0.95,0.975,0.99";
    int bt_window = 0, bt_refit = 1, bt_kwindow = -1;
    bool bt_lowrank = false, bt_center = false;
    FitOptions bt_opts;
    bt_cmd->add_option("--data", bt_data, "panel CSV")->required();
    bt_cmd->add_option("--order", bt_order_text, "orders r,s");
    bt_cmd->add_option("--kwindow", bt_kwindow, "correlation window (default m)");
    bt_cmd->add_option("--window", bt_window, "moving fit window length")->required();
    bt_cmd->add_option("--levels", bt_levels_text, "comma-separated quantile levels");
    bt_cmd->add_option("--refit-every", bt_refit, "periods between refits (weekly preset: 5)");
    bt_cmd->add_flag("--lowrank", bt_lowrank, "factor-restricted estimator");
    bt_cmd->add_flag("--center", bt_center, "demean the panel columns");
    bt_cmd->add_option("--seed", bt_opts.seed, "random seed")->required();
    bt_cmd->add_option("--starts", bt_opts.n_starts, "multistart count per refit");
    bt_cmd->add_option("--max-iter", bt_opts.max_iter, "optimizer iteration cap");
    add_common(bt_cmd, bt_common);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    int exit_code = 0;
    try {
        if (sim_cmd->parsed()) {
            merge_config(sim_cmd, sim_common.config);
            RunContext ctx;
            ctx.out_dir = sim_common.out;
            ctx.command = "simulate";
            GeneralParams params = !sim_params_file.empty()
                                       ? params_from_json(read_file(sim_params_file))
                                       : dgp_catalog(sim_dgp.empty() ? "DGP1" : sim_dgp);
            if (sim_burn < 0) sim_burn = std::max(500, 5 * params.order.k_window);
            const InnovationSpec dist = InnovationSpec::parse(sim_dist);
            ctx.config = {{"dgp", sim_dgp},   {"n", sim_n},       {"burn", sim_burn},
                          {"dist", dist.name()}, {"seed", sim_seed}, {"force", sim_force}};
            const SimResult sim = simulate_path(params, sim_n, sim_burn, dist, sim_seed, sim_force);
            ctx.emit("panel.csv", panel_to_csv(sim.panel));
            ctx.emit("params.json", params_to_json(params));
            json diag;
            diag["stationarity_min_sum"] = sim.diag.stationarity_min_sum;
            diag["stationarity_ok"] = sim.diag.stationarity_ok;
            diag["floored_logs"] = sim.diag.floored_logs;
            diag["max_abs_log_h"] = sim.diag.max_abs_log_h;
            ctx.emit("diagnostics.json", diag.dump(2));
            ctx.finish(sim_seed);
        } else if (fit_cmd->parsed()) {
            merge_config(fit_cmd, fit_common.config);
            RunContext ctx;
            ctx.out_dir = fit_common.out;
            ctx.command = "fit";
            fit_opts.threads = fit_common.threads;
            const auto [r, s] = parse_order(fit_order_text);
            LoadOptions load;
            load.center = fit_center;
            const ReturnsPanel panel = load_panel(fit_data, load);
            const ModelOrder order(static_cast<int>(panel.y.cols()), r, s, fit_kwindow);
            ctx.config = {{"data", fit_data},   {"order", fit_order_text},
                          {"lowrank", fit_lowrank_flag}, {"seed", fit_opts.seed},
                          {"starts", fit_opts.n_starts}, {"center", fit_center},
                          {"zero_filled", panel.zero_filled}, {"dropped_rows", panel.dropped_rows}};
            const FitReport fit = fit_lowrank_flag ? fit_lowrank(panel.y, order, fit_opts)
                                                   : fit_general(panel.y, order, fit_opts);
            ctx.emit("fit.json", fit_report_to_json(fit, fit_opts));
            ctx.finish(fit_opts.seed);
            if (!fit.converged) exit_code = 2;
            std::printf("neg_loglik=%.6f converged=%d\n", fit.neg_loglik, fit.converged);
        } else if (sel_cmd->parsed()) {
            merge_config(sel_cmd, sel_common.config);
            RunContext ctx;
            ctx.out_dir = sel_common.out;
            ctx.command = "select";
            sel_opts.threads = sel_common.threads;
            LoadOptions load;
            load.center = sel_center;
            const ReturnsPanel panel = load_panel(sel_data, load);
            ctx.config = {{"data", sel_data}, {"omax", sel_omax},    {"lowrank", sel_lowrank},
                          {"seed", sel_opts.seed}, {"starts", sel_opts.n_starts}};
            const SelectionResult sel =
                select_order(panel.y, sel_omax, sel_lowrank, sel_opts, sel_kwindow);
            ctx.emit("bic.csv", selection_to_csv(sel));
            ctx.emit("fit.json", fit_report_to_json(sel.best_fit, sel_opts));
            json best;
            best["r"] = sel.r_hat;
            best["s"] = sel.s_hat;
            ctx.emit("selected.json", best.dump(2));
            ctx.finish(sel_opts.seed);
            std::printf("selected order (r,s) = (%d,%d)\n", sel.r_hat, sel.s_hat);
            bool any_bad = false;
            for (const auto& cell : sel.table) any_bad = any_bad || !cell.valid;
            if (any_bad) exit_code = 2;
        } else if (inf_cmd->parsed()) {
            merge_config(inf_cmd, inf_common.config);
            RunContext ctx;
            ctx.out_dir = inf_common.out;
            ctx.command = "infer";
            LoadOptions load;
            load.center = inf_center;
            const ReturnsPanel panel = load_panel(inf_data, load);
            const FitReport fit = fit_report_from_json(read_file(inf_fit));
            ctx.config = {{"data", inf_data}, {"fit", inf_fit}, {"gaussian", inf_gaussian}};
            const CovReport cov = asymptotic_cov(fit, panel.y);
            json j = json::parse(cov_report_to_json(cov));
            if (inf_gaussian) j["avar_gaussian"] = matrix_rows(gaussian_avar(cov));
            j["fit"] = fit_summary(fit);
            ctx.emit("cov.json", j.dump(2));
            ctx.finish(0);
        } else if (spill_cmd->parsed()) {
            merge_config(spill_cmd, spill_common.config);
            RunContext ctx;
            ctx.out_dir = spill_common.out;
            ctx.command = "spillover";
            LoadOptions load;
            load.center = spill_center;
            const ReturnsPanel panel = load_panel(spill_data, load);
            const FitReport fit = fit_report_from_json(read_file(spill_fit));
            ctx.config = {{"data", spill_data}, {"fit", spill_fit}};
            const CovReport cov = asymptotic_cov(fit, panel.y);
            std::string csv = "i,j,estimate,se,z,p\n";
            char buf[200];
            const int m = fit.params.order.m;
            for (int i = 0; i < m; ++i)
                for (int j = 0; j < m; ++j) {
                    if (i == j) continue;
                    const SpilloverResult res = spillover_test(fit.params, cov, i, j);
                    std::snprintf(buf, sizeof(buf), "%d,%d,%.17g,%.17g,%.17g,%.17g\n", i + 1,
                                  j + 1, res.estimate, res.se, res.z, res.p);
                    csv += buf;
                }
            ctx.emit("spillover.csv", csv);
            ctx.finish(0);
        } else if (stat_cmd->parsed()) {
            merge_config(stat_cmd, stat_common.config);
            RunContext ctx;
            ctx.out_dir = stat_common.out;
            ctx.command = "stationarity";
            GeneralParams params;
            if (!stat_params.empty())
                params = params_from_json(read_file(stat_params));
            else if (!stat_fit.empty())
                params = fit_report_from_json(read_file(stat_fit)).params;
            else
                throw ParseError("stationarity: pass --params or --fit");
            ctx.config = {{"params", stat_params}, {"fit", stat_fit}};
            const StationarityReport rep = check_stationarity(params);
            json j;
            j["sum_one"] = rep.sum_one;
            j["sum_inf"] = rep.sum_inf;
            j["sum_two"] = rep.sum_two;
            j["min_sum"] = rep.min_sum;
            j["satisfied"] = rep.satisfied;
            if (!rep.satisfied) j["note"] = "condition not verified (sufficient only)";
            ctx.emit("stationarity.json", j.dump(2));
            ctx.finish(0);
            std::printf("min sum = %.6f (%s)\n", rep.min_sum,
                        rep.satisfied ? "satisfied" : "not verified");
        } else if (fc_cmd->parsed()) {
            merge_config(fc_cmd, fc_common.config);
            RunContext ctx;
            ctx.out_dir = fc_common.out;
            ctx.command = "forecast";
            LoadOptions load;
            load.center = fc_center;
            const ReturnsPanel panel = load_panel(fc_data, load);
            const FitReport fit = fit_report_from_json(read_file(fc_fit));
            ctx.config = {{"data", fc_data}, {"fit", fc_fit}};
            const MatrixXd H = forecast_H(fit.params, panel.y);
            const VectorXd weights = mv_weights(H);
            json j;
            j["H"] = matrix_rows(H);
            j["mv_weights"] = std::vector<double>(weights.data(), weights.data() + weights.size());
            j["portfolio_variance"] = weights.dot(H * weights);
            ctx.emit("forecast.json", j.dump(2));
            ctx.finish(0);
        } else if (bt_cmd->parsed()) {
            merge_config(bt_cmd, bt_common.config);
            RunContext ctx;
            ctx.out_dir = bt_common.out;
            ctx.command = "backtest";
            bt_opts.threads = bt_common.threads;
            const auto [r, s] = parse_order(bt_order_text);
            LoadOptions load;
            load.center = bt_center;
            const ReturnsPanel panel = load_panel(bt_data, load);
            const ModelOrder order(static_cast<int>(panel.y.cols()), r, s, bt_kwindow);
            std::vector<double> levels;
            std::string token;
            for (std::size_t pos = 0; pos <= bt_levels_text.size(); ++pos) {
                if (pos == bt_levels_text.size() || bt_levels_text[pos] == ',') {
                    if (!token.empty()) levels.push_back(std::stod(token));
                    token.clear();
                } else {
                    token += bt_levels_text[pos];
                }
            }
            ctx.config = {{"data", bt_data},     {"order", bt_order_text},
                          {"window", bt_window}, {"levels", bt_levels_text},
                          {"refit_every", bt_refit}, {"lowrank", bt_lowrank},
                          {"seed", bt_opts.seed}};
            RollingOptions ropts;
            ropts.refit_every = bt_refit;
            ropts.lowrank = bt_lowrank;
            ropts.fit = bt_opts;
            const auto reports = rolling_var(panel.y, bt_window, order, levels, ropts);
            ctx.emit("backtest.json", backtest_to_json(reports));
            char name[64];
            for (const auto& rep : reports) {
                std::snprintf(name, sizeof(name), "var_%g.csv", rep.tau);
                ctx.emit(name, backtest_to_csv(rep));
            }
            ctx.finish(bt_opts.seed);
            for (const auto& rep : reports)
                std::printf("tau=%g ecr=%.2f%% pe=%.2f cc_p=%.3f dq_p=%.3f\n", rep.tau, rep.ecr,
                            rep.pe, rep.cc_p, rep.dq_p);
            bool failures = false;
            for (const auto& rep : reports) failures = failures || rep.failed_origins > 0;
            if (failures) exit_code = 2;
        }
    } catch (const NoConvergence& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return exit_code;
}
