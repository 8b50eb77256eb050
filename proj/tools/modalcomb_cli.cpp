// Command-line interface: batch fitting, simulation studies and
// rolling-window evaluation for Bayesian modal-regression forecast
// combinations.
//
// Exit codes: 0 success, 2 configuration error, 3 data error, 4 sampler
// failure.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "modalcomb/csv.hpp"
#include "modalcomb/errors.hpp"
#include "modalcomb/forecast.hpp"
#include "modalcomb/gibbs.hpp"
#include "modalcomb/model.hpp"
#include "modalcomb/simstudy.hpp"

namespace fs = std::filesystem;
using namespace modalcomb;

namespace {

struct CommonOpts {
    std::uint64_t seed = 0;
    int threads = 1;
    std::string out_dir = ".";
    std::string family = "ald";
    std::string priors = "";  // sim-defaults | data-defaults | path
    double lambda = 0.0;
    int n_chains = 0;  // 0 = per-command default
    int burn_in = 0;
    int draws = 0;
};

void add_common(CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("--seed", o.seed, "random seed (runs are deterministic given the seed)")
        ->required();
    cmd->add_option("--threads", o.threads, "worker threads; results identical for any count")
        ->check(CLI::Range(1, 256));
    cmd->add_option("--out", o.out_dir, "output directory");
    cmd->add_option("--family", o.family, "error family")
        ->check(CLI::IsMember({"ald", "an", "rg", "ald-latent"}));
    cmd->add_option("--priors", o.priors, "prior set: sim-defaults, data-defaults, or a file");
    cmd->add_option("--lambda", o.lambda, "exponential discounting rate (0 = none)")
        ->check(CLI::NonNegativeNumber);
    cmd->add_option("--chains", o.n_chains, "number of MCMC chains");
    cmd->add_option("--burn-in", o.burn_in, "burn-in iterations per chain");
    cmd->add_option("--draws", o.draws, "kept iterations per chain");
}

PriorSpec parse_prior_line(const std::string& line, const std::string& origin) {
    std::istringstream ss(line);
    std::string dist;
    ss >> dist;
    std::vector<double> a;
    double v;
    while (ss >> v) a.push_back(v);
    auto need = [&](std::size_t k) {
        if (a.size() != k)
            throw ConfigError(origin + ": '" + dist + "' takes " + std::to_string(k) +
                              " parameters, got " + std::to_string(a.size()));
    };
    PriorSpec spec;
    if (dist == "normal") {
        need(2);
        spec = prior::Normal{a[0], a[1]};
    } else if (dist == "dirichlet") {
        if (a.size() < 2) throw ConfigError(origin + ": dirichlet needs >= 2 concentrations");
        spec = prior::Dirichlet{a};
    } else if (dist == "half_cauchy") {
        need(2);
        spec = prior::HalfCauchy{a[0], a[1]};
    } else if (dist == "beta") {
        need(2);
        spec = prior::Beta{a[0], a[1]};
    } else if (dist == "inv_gamma") {
        need(2);
        spec = prior::InvGamma{a[0], a[1]};
    } else if (dist == "gamma") {
        need(2);
        spec = prior::Gamma{a[0], a[1]};
    } else if (dist == "uniform") {
        need(2);
        spec = prior::Uniform{a[0], a[1]};
    } else if (dist == "exponential") {
        need(1);
        spec = prior::Exponential{a[0]};
    } else {
        throw ConfigError(origin + ": unknown distribution '" + dist + "'");
    }
    try {
        validate(spec);
    } catch (const std::domain_error& e) {
        throw ConfigError(origin + ": " + e.what());
    }
    return spec;
}

// priors file: one `<block> <distribution> <params...>` per line, blocks
// intercept/weights/scale/asymmetry; '#' comments allowed
PriorSet parse_prior_file(const std::string& path, ErrorFamily family, int m) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open priors file " + path);
    PriorSet set = data_default_priors(family, m);
    std::string line;
    int lineno = 0;
    while (std::getline(f, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ss(line);
        std::string block;
        if (!(ss >> block)) continue;
        std::string rest;
        std::getline(ss, rest);
        const std::string origin = path + ":" + std::to_string(lineno);
        if (block == "intercept") {
            set.intercept = parse_prior_line(rest, origin);
        } else if (block == "weights") {
            set.weights = parse_prior_line(rest, origin);
        } else if (block == "scale") {
            set.scale = parse_prior_line(rest, origin);
        } else if (block == "asymmetry") {
            set.asymmetry = parse_prior_line(rest, origin);
        } else {
            throw ConfigError(origin + ": unknown parameter block '" + block + "'");
        }
    }
    return set;
}

PriorSet resolve_priors(const CommonOpts& o, ErrorFamily family, int m,
                        const std::string& fallback) {
    const std::string name = o.priors.empty() ? fallback : o.priors;
    if (name == "sim-defaults") return sim_default_priors(family, m);
    if (name == "data-defaults") return data_default_priors(family, m);
    return parse_prior_file(name, family, m);
}

ChainConfig resolve_chains(const CommonOpts& o, std::uint64_t seed, int def_chains, int def_burn,
                           int def_draws) {
    ChainConfig cfg;
    cfg.n_chains = o.n_chains > 0 ? o.n_chains : def_chains;
    cfg.burn_in = o.burn_in > 0 ? o.burn_in : def_burn;
    cfg.post_burn_in = o.draws > 0 ? o.draws : def_draws;
    cfg.seed = seed;
    if (cfg.n_chains < 1) throw ConfigError("--chains must be >= 1");
    return cfg;
}

fs::path ensure_out_dir(const CommonOpts& o) {
    fs::path dir{o.out_dir};
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw DataError("cannot create output directory " + dir.string());
    return dir;
}

ModelSpec make_spec(const CommonOpts& o, ErrorFamily family, int m, const std::string& fallback) {
    ModelSpec spec;
    spec.family = family;
    spec.priors = resolve_priors(o, family, m, fallback);
    spec.discount_lambda = o.lambda;
    return spec;
}

// ---- simulate ---------------------------------------------------------------

struct SimulateOpts {
    CommonOpts common;
    double tau = -1.0, beta = -1.0, kappa = -1.0;
    int n_reps = 100;
    int n_obs = 100;
    int n_forecasters = 4;
};

int cmd_simulate(const SimulateOpts& o) {
    const ErrorFamily family = family_from_name(o.common.family);
    if (o.tau >= 0.0 && !(o.tau > 0.0 && o.tau < 1.0))
        throw ConfigError("--tau: value " + std::to_string(o.tau) + " must lie in (0,1)");
    if (o.beta >= 0.0 && !(o.beta > 0.0)) throw ConfigError("--beta: must be positive");
    if (o.kappa >= 0.0 && !(o.kappa > 0.0)) throw ConfigError("--kappa: must be positive");
    if (o.n_reps < 2) throw ConfigError("--n-reps: need at least 2 replications");

    std::vector<double> grid;
    switch (family) {
        case ErrorFamily::ald:
        case ErrorFamily::an:
            if (o.beta >= 0 || o.kappa >= 0)
                throw ConfigError("--beta/--kappa do not apply to family " + o.common.family);
            grid = o.tau >= 0 ? std::vector<double>{o.tau} : default_grid(family);
            break;
        case ErrorFamily::rg:
            if (o.tau >= 0 || o.kappa >= 0)
                throw ConfigError("--tau/--kappa do not apply to family rg");
            grid = o.beta >= 0 ? std::vector<double>{o.beta} : default_grid(family);
            break;
        case ErrorFamily::ald_latent:
            if (o.tau >= 0 || o.beta >= 0)
                throw ConfigError("--tau/--beta do not apply to family ald-latent");
            grid = o.kappa >= 0 ? std::vector<double>{o.kappa} : default_grid(family);
            break;
    }

    const fs::path dir = ensure_out_dir(o.common);
    std::vector<SimStudyReport> reports;
    for (std::size_t gi = 0; gi < grid.size(); ++gi) {
        SimConfig cfg;
        cfg.family = family;
        cfg.grid_value = grid[gi];
        cfg.n_replications = o.n_reps;
        cfg.n_obs = o.n_obs;
        cfg.n_forecasters = o.n_forecasters;
        cfg.chains = resolve_chains(o.common, 0, 2, 1000, 2000);
        cfg.priors = resolve_priors(o.common, family, o.n_forecasters, "sim-defaults");
        cfg.seed = o.common.seed ^ (0x9e3779b97f4a7c15ULL * (gi + 1));
        cfg.threads = o.common.threads;
        reports.push_back(run_sim_study(cfg));
    }

    const std::string stem = "sim_" + o.common.family;
    write_csv_file((dir / (stem + ".csv")).string(), report_to_csv(reports));
    std::ofstream txt(dir / (stem + ".txt"));
    report_to_text(txt, reports);
    std::cout << "wrote " << (dir / (stem + ".csv")).string() << " and "
              << (dir / (stem + ".txt")).string() << "\n";
    return 0;
}

// ---- shared fitting helpers -------------------------------------------------

const ForecastPanel& select_panel(const std::vector<ForecastPanel>& panels,
                                  const std::string& ticker) {
    if (ticker.empty()) {
        if (panels.size() != 1)
            throw DataError("panel holds " + std::to_string(panels.size()) +
                            " tickers; choose one with --ticker");
        return panels.front();
    }
    for (const auto& p : panels)
        if (p.ticker == ticker) return p;
    throw DataError("no ticker '" + ticker + "' in the panel");
}

TrainingWindow window_from_panel(const ForecastPanel& p, int length) {
    const int L = length > 0 ? length : p.length();
    if (L > p.length())
        throw DataError(p.ticker + ": window " + std::to_string(L) + " exceeds panel length " +
                        std::to_string(p.length()));
    TrainingWindow w;
    w.y.resize(L);
    w.x.resize(L);
    for (int t = 0; t < L; ++t) {
        w.y[t] = p.actual[t];
        w.x[t] = impute_missing(p.forecasts[t], nullptr);
    }
    return w;
}

PosteriorDraws fit_window(const ModelSpec& spec, const TrainingWindow& w, ChainConfig cfg,
                          int threads) {
    cfg.threads = std::min(threads, cfg.n_chains);
    return spec.family == ErrorFamily::ald_latent ? gibbs_ald(w, spec, cfg)
                                                  : fit_metropolis(spec, w, cfg);
}

CsvTable summary_table(const PosteriorDraws& pd) {
    CsvTable t;
    t.header = {"param", "mean", "sd", "q025", "q975", "rhat", "ess"};
    for (int j = 0; j < pd.n_params(); ++j) {
        const ParamDiag& dg = pd.diagnostics[j];
        t.rows.push_back({pd.names[j], csv_num(pd.mean(j)), csv_num(pd.sd(j)),
                          csv_num(pd.quantile(j, 0.025)), csv_num(pd.quantile(j, 0.975)),
                          dg.r_hat_valid ? csv_num(dg.r_hat) : "", csv_num(dg.ess)});
    }
    return t;
}

// ---- fit --------------------------------------------------------------------

struct FitOpts {
    CommonOpts common;
    std::string panel_path;
    std::string ticker;
    int window = 0;  // 0 = whole panel
};

int cmd_fit(const FitOpts& o) {
    const ErrorFamily family = family_from_name(o.common.family);
    const auto panels = read_panels_csv(o.panel_path);
    const ForecastPanel& panel = select_panel(panels, o.ticker);
    const TrainingWindow w = window_from_panel(panel, o.window);
    const ModelSpec spec = make_spec(o.common, family, panel.n_forecasters(), "data-defaults");
    const ChainConfig cfg = resolve_chains(o.common, o.common.seed, 4, 5000, 10000);

    const PosteriorDraws pd = fit_window(spec, w, cfg, o.common.threads);
    const fs::path dir = ensure_out_dir(o.common);
    {
        std::ofstream f(dir / "draws.csv");
        pd.to_csv(f);
    }
    write_csv_file((dir / "summary.csv").string(), summary_table(pd));
    std::cout << "wrote " << (dir / "draws.csv").string() << " and "
              << (dir / "summary.csv").string() << "\n";
    return 0;
}

// ---- evaluate ---------------------------------------------------------------

struct EvaluateOpts {
    CommonOpts common;
    std::string panel_path;
    std::string families = "ald,an,rg";
    int window = 12;
    int folds = 0;
    int ppd_samples = 200;
    bool stochastic_imputation = false;
    bool forecast_median = false;
};

std::vector<ErrorFamily> parse_family_list(const std::string& s) {
    std::vector<ErrorFamily> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(family_from_name(item));
    if (out.empty()) throw ConfigError("--families: empty list");
    return out;
}

int cmd_evaluate(const EvaluateOpts& o) {
    const auto families = parse_family_list(o.families);
    const auto panels = read_panels_csv(o.panel_path);
    const fs::path dir = ensure_out_dir(o.common);

    CsvTable hits, wins;
    hits.header = {"ticker"};
    wins.header = {"ticker"};
    for (const auto f : families) {
        hits.header.push_back(family_name(f));
        wins.header.push_back(family_name(f));
    }
    for (const auto& p : panels) {
        hits.rows.push_back({p.ticker});
        wins.rows.push_back({p.ticker});
    }
    hits.rows.push_back({"Mean"});
    wins.rows.push_back({"Mean"});

    for (const auto family : families) {
        const std::string fam = family_name(family);
        CsvTable perfold;
        perfold.header = {"ticker", "fold",      "period", "actual",
                          "forecast", "consensus", "hit",    "win"};
        CsvTable asymq;
        asymq.header = {"ticker", "fold", "period", "q05", "q25", "q50", "q75", "q95"};
        CsvTable ppd;
        ppd.header = {"ticker", "fold", "period", "draw", "y_rep", "centered_residual"};

        double hit_sum = 0.0, win_sum = 0.0;
        for (std::size_t e = 0; e < panels.size(); ++e) {
            const ForecastPanel& panel = panels[e];
            const ModelSpec spec =
                make_spec(o.common, family, panel.n_forecasters(), "data-defaults");
            RollingWindowConfig rw;
            rw.window_length = o.window;
            rw.n_folds = o.folds;
            rw.stochastic_imputation = o.stochastic_imputation;
            RollingCvOptions opt;
            opt.seed = o.common.seed ^ (0x2545f4914f6cdd1dULL * (e + 1));
            opt.threads = o.common.threads;
            opt.forecast_median = o.forecast_median;
            opt.retain_draws = o.ppd_samples;
            const ChainConfig cfg = resolve_chains(o.common, 0, 4, 5000, 10000);
            const EvalReport rep = run_rolling_cv(panel, spec, rw, cfg, opt);

            hits.rows[e].push_back(csv_num(rep.hit_rate));
            wins.rows[e].push_back(csv_num(rep.win_rate));
            hit_sum += rep.hit_rate;
            win_sum += rep.win_rate;

            Rng ppd_rng(opt.seed, stream_id(7, e));
            for (const auto& f : rep.folds) {
                perfold.rows.push_back({panel.ticker, std::to_string(f.fold), f.period,
                                        csv_num(f.actual), csv_num(f.point_forecast),
                                        csv_num(f.consensus), f.hit ? "1" : "0",
                                        f.win ? "1" : "0"});
                if (!f.asym_quantiles.empty()) {
                    std::vector<std::string> row{panel.ticker, std::to_string(f.fold), f.period};
                    for (double q : f.asym_quantiles) row.push_back(csv_num(q));
                    asymq.rows.push_back(std::move(row));
                }
                const int m = panel.n_forecasters();
                for (std::size_t d = 0; d < f.retained_draws.size(); ++d) {
                    const auto& draw = f.retained_draws[d];
                    double mode = draw[0];
                    for (int j = 0; j < m; ++j) mode += draw[1 + j] * f.x_next[j];
                    double scale = draw[1 + m];
                    double asym = spec.has_asymmetry() ? draw[2 + m] : 0.5;
                    const double y_rep = mode + sample_error(family, scale, asym, ppd_rng);
                    ppd.rows.push_back({panel.ticker, std::to_string(f.fold), f.period,
                                        std::to_string(d), csv_num(y_rep),
                                        csv_num(f.actual - y_rep)});
                }
            }
        }
        hits.rows.back().push_back(csv_num(hit_sum / panels.size()));
        wins.rows.back().push_back(csv_num(win_sum / panels.size()));

        write_csv_file((dir / ("perfold_" + fam + ".csv")).string(), perfold);
        if (!asymq.rows.empty())
            write_csv_file((dir / ("asym_quantiles_" + fam + ".csv")).string(), asymq);
        if (!ppd.rows.empty()) write_csv_file((dir / ("ppd_" + fam + ".csv")).string(), ppd);
    }

    write_csv_file((dir / "hit_rates.csv").string(), hits);
    write_csv_file((dir / "win_rates.csv").string(), wins);
    std::cout << "wrote " << (dir / "hit_rates.csv").string() << " and "
              << (dir / "win_rates.csv").string() << "\n";
    return 0;
}

// ---- ppd --------------------------------------------------------------------

struct PpdOpts {
    CommonOpts common;
    std::string panel_path;
    std::string ticker;
    int window = 12;
};

int cmd_ppd(const PpdOpts& o) {
    const ErrorFamily family = family_from_name(o.common.family);
    const auto panels = read_panels_csv(o.panel_path);
    const ForecastPanel& panel = select_panel(panels, o.ticker);
    if (o.window + 1 > panel.length())
        throw DataError(panel.ticker + ": need at least window+1 rows for a predictive draw");
    const TrainingWindow w = window_from_panel(panel, o.window);
    const ModelSpec spec = make_spec(o.common, family, panel.n_forecasters(), "data-defaults");
    const ChainConfig cfg = resolve_chains(o.common, o.common.seed, 4, 5000, 10000);
    const PosteriorDraws pd = fit_window(spec, w, cfg, o.common.threads);

    const std::vector<double> x_next = impute_missing(panel.forecasts[o.window], nullptr);
    const double actual = panel.actual[o.window];
    Rng rng(o.common.seed, stream_id(8, 0));

    CsvTable t;
    t.header = {"draw", "y_rep", "centered_residual"};
    const int m = panel.n_forecasters();
    for (int i = 0; i < pd.n_draws(); ++i) {
        double mode = pd.value(i, 0);
        for (int j = 0; j < m; ++j) mode += pd.value(i, 1 + j) * x_next[j];
        const double scale = pd.value(i, 1 + m);
        const double asym = spec.has_asymmetry() ? pd.value(i, 2 + m) : 0.5;
        const double y_rep = mode + sample_error(family, scale, asym, rng);
        t.rows.push_back({std::to_string(i), csv_num(y_rep), csv_num(actual - y_rep)});
    }
    const fs::path dir = ensure_out_dir(o.common);
    write_csv_file((dir / "ppd_samples.csv").string(), t);
    std::cout << "wrote " << (dir / "ppd_samples.csv").string() << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Bayesian modal-regression forecast combination engine"};
    app.require_subcommand(1);
    app.set_config("--config", "", "read options from a config file");
    app.allow_config_extras(CLI::config_extras_mode::error);  // unknown keys rejected

    SimulateOpts sim;
    CLI::App* simulate = app.add_subcommand("simulate", "Monte Carlo parameter-recovery study");
    add_common(simulate, sim.common);
    simulate->add_option("--tau", sim.tau, "asymmetry for ald/an (omit to run the full grid)");
    simulate->add_option("--beta", sim.beta, "scale for rg (omit to run the full grid)");
    simulate->add_option("--kappa", sim.kappa, "asymmetry for ald-latent (omit for the grid)");
    simulate->add_option("--n-reps", sim.n_reps, "number of replicated datasets");
    simulate->add_option("--n", sim.n_obs, "observations per dataset")->check(CLI::Range(10, 100000));
    simulate->add_option("--m", sim.n_forecasters, "number of forecasters")->check(CLI::Range(2, 64));

    FitOpts fit;
    CLI::App* fitc = app.add_subcommand("fit", "fit one training window from a panel CSV");
    add_common(fitc, fit.common);
    fitc->add_option("panel", fit.panel_path, "panel CSV (ticker,period,actual,f1..fm)")
        ->required();
    fitc->add_option("--ticker", fit.ticker, "entity to fit (required for multi-ticker panels)");
    fitc->add_option("--window", fit.window, "training rows (default: whole panel)");

    EvaluateOpts ev;
    CLI::App* evaluate = app.add_subcommand("evaluate", "rolling-window hit/win evaluation");
    add_common(evaluate, ev.common);
    evaluate->add_option("panel", ev.panel_path, "panel CSV")->required();
    evaluate->add_option("--families", ev.families, "comma list of families to evaluate");
    evaluate->add_option("--window", ev.window, "rolling window length");
    evaluate->add_option("--folds", ev.folds, "fold count (default: all available)");
    evaluate->add_option("--ppd-samples", ev.ppd_samples,
                         "posterior-predictive draws kept per fold (0 = none)");
    evaluate->add_flag("--stochastic-imputation", ev.stochastic_imputation,
                       "draw missing forecasts from the cross-sectional law instead of mean fill");
    evaluate->add_flag("--forecast-median", ev.forecast_median,
                       "use the posterior median of the conditional mode as the point forecast");

    PpdOpts ppd;
    CLI::App* ppdc = app.add_subcommand("ppd", "posterior-predictive draws for one window");
    add_common(ppdc, ppd.common);
    ppdc->add_option("panel", ppd.panel_path, "panel CSV")->required();
    ppdc->add_option("--ticker", ppd.ticker, "entity (required for multi-ticker panels)");
    ppdc->add_option("--window", ppd.window, "training rows before the predicted row");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    }

    try {
        if (simulate->parsed()) return cmd_simulate(sim);
        if (fitc->parsed()) return cmd_fit(fit);
        if (evaluate->parsed()) return cmd_evaluate(ev);
        if (ppdc->parsed()) return cmd_ppd(ppd);
        std::cerr << "config error: no subcommand\n";
        return 2;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 3;
    } catch (const LeakageError& e) {
        std::cerr << "leakage error: " << e.what() << "\n";
        return 4;
    } catch (const SamplerError& e) {
        std::cerr << "sampler error: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
