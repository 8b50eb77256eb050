#pragma once

#include <cmath>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "modalcomb/csv.hpp"
#include "modalcomb/gibbs.hpp"
#include "modalcomb/model.hpp"
#include "modalcomb/parallel.hpp"

namespace modalcomb {

/// Monte Carlo study setup: N replicated datasets of size n x m with
/// standard-normal regressors, zero intercept and equal weights, response
/// drawn from the chosen family at the given grid value.
struct SimConfig {
    ErrorFamily family = ErrorFamily::ald;
    double grid_value = 0.5;  // tau (ald/an), beta (rg), kappa (latent)
    int n_replications = 100;
    int n_obs = 100;
    int n_forecasters = 4;
    double sigma_true = 1.0;  // scale for ald/an; beta for the latent protocol
    ChainConfig chains;
    PriorSet priors;
    std::uint64_t seed = 0;
    int threads = 1;
};

inline std::vector<double> default_grid(ErrorFamily family) {
    switch (family) {
        case ErrorFamily::ald:
        case ErrorFamily::an: return {0.25, 0.5, 0.75};
        case ErrorFamily::rg: return {1.0, 5.0, 10.0};
        case ErrorFamily::ald_latent: return {0.5, 1.0, 2.0};
    }
    return {};
}

/// True parameter values by flattened name for one study cell.
inline std::map<std::string, double> true_params(const SimConfig& cfg) {
    std::map<std::string, double> p;
    p["w0"] = 0.0;
    for (int j = 1; j <= cfg.n_forecasters; ++j)
        p["w" + std::to_string(j)] = 1.0 / cfg.n_forecasters;
    switch (cfg.family) {
        case ErrorFamily::ald:
        case ErrorFamily::an:
            p["sigma"] = cfg.sigma_true;
            p["tau"] = cfg.grid_value;
            break;
        case ErrorFamily::rg:
            p["beta"] = cfg.grid_value;
            break;
        case ErrorFamily::ald_latent:
            p["beta"] = cfg.sigma_true;
            p["kappa"] = cfg.grid_value;
            break;
    }
    return p;
}

/// One simulated dataset; deterministic in (seed, replicate).
inline TrainingWindow generate_dataset(const SimConfig& cfg, int replicate) {
    Rng rng(cfg.seed, stream_id(4, static_cast<std::uint64_t>(replicate)));
    TrainingWindow w;
    w.fold_index = replicate;
    w.y.resize(cfg.n_obs);
    w.x.assign(cfg.n_obs, std::vector<double>(cfg.n_forecasters));
    const double wj = 1.0 / cfg.n_forecasters;
    for (int t = 0; t < cfg.n_obs; ++t) {
        double mode = 0.0;
        for (int j = 0; j < cfg.n_forecasters; ++j) {
            w.x[t][j] = rng.normal();
            mode += wj * w.x[t][j];
        }
        switch (cfg.family) {
            case ErrorFamily::ald:
                w.y[t] = mode + AsymmetricLaplace{0.0, cfg.sigma_true, cfg.grid_value}.sample(rng);
                break;
            case ErrorFamily::an:
                w.y[t] = mode + AsymmetricNormal{0.0, cfg.sigma_true, cfg.grid_value}.sample(rng);
                break;
            case ErrorFamily::rg:
                w.y[t] = mode + ReverseGumbel{0.0, cfg.grid_value}.sample(rng);
                break;
            case ErrorFamily::ald_latent: {
                // draw through the latent representation itself
                const double beta = cfg.sigma_true, kappa = cfg.grid_value;
                const double v = rng.exponential();
                w.y[t] = rng.normal(mode + beta * (1.0 / kappa - kappa) * v,
                                    std::sqrt(2.0 * beta * beta * v));
                break;
            }
        }
    }
    return w;
}

/// Posterior summaries retained per replicate.
struct ReplicateSummary {
    std::vector<std::string> names;
    std::vector<double> post_mean, post_sd, q025, q975;
};

inline ReplicateSummary summarize(const PosteriorDraws& d) {
    ReplicateSummary s;
    s.names = d.names;
    for (int j = 0; j < d.n_params(); ++j) {
        s.post_mean.push_back(d.mean(j));
        s.post_sd.push_back(d.sd(j));
        s.q025.push_back(d.quantile(j, 0.025));
        s.q975.push_back(d.quantile(j, 0.975));
    }
    return s;
}

struct CellStats {
    std::string param;
    double bias = 0.0;
    double avg_se = 0.0;
    double mcse = 0.0;
    double cov = 0.0;
};

struct SimStudyReport {
    std::string family;
    double grid_value = 0.0;
    std::string grid_symbol;  // "tau", "beta" or "kappa"
    std::vector<CellStats> rows;

    const CellStats& row(const std::string& param) const {
        for (const auto& r : rows)
            if (r.param == param) return r;
        throw std::invalid_argument("no simulation row for " + param);
    }
};

/// Study metrics over N replicates, per parameter:
///   BIAS   = mean_j(post_mean_j) - true value
///   AVG.SE = mean_j(post_sd_j)
///   MCSE   = sqrt( sum_j (post_mean_j - grand mean)^2 / (N (N-1)) )
///   COV    = fraction of replicates with true value inside [q025, q975]
inline std::vector<CellStats> evaluate_replicates(std::span<const ReplicateSummary> reps,
                                                  const std::map<std::string, double>& truth) {
    if (reps.size() < 2) throw std::invalid_argument("need at least two replicates");
    const auto N = static_cast<double>(reps.size());
    std::vector<CellStats> out;
    for (std::size_t j = 0; j < reps.front().names.size(); ++j) {
        CellStats c;
        c.param = reps.front().names[j];
        const double truth_j = truth.at(c.param);
        double grand = 0.0;
        for (const auto& r : reps) grand += r.post_mean[j];
        grand /= N;
        c.bias = grand - truth_j;
        double ss = 0.0;
        for (const auto& r : reps) {
            c.avg_se += r.post_sd[j];
            ss += (r.post_mean[j] - grand) * (r.post_mean[j] - grand);
            c.cov += (truth_j >= r.q025[j] && truth_j <= r.q975[j]) ? 1.0 : 0.0;
        }
        c.avg_se /= N;
        c.mcse = std::sqrt(ss / (N * (N - 1.0)));
        c.cov /= N;
        out.push_back(std::move(c));
    }
    return out;
}

/// Full pipeline for one study cell: simulate, fit every replicate
/// (Metropolis, or the Gibbs sampler for the latent family), aggregate.
/// Deterministic in the master seed for any thread count.
inline SimStudyReport run_sim_study(const SimConfig& cfg) {
    std::vector<ReplicateSummary> reps(cfg.n_replications);
    parallel_for(cfg.n_replications, cfg.threads, [&](int r) {
        const TrainingWindow w = generate_dataset(cfg, r);
        ModelSpec spec;
        spec.family = cfg.family;
        spec.priors = cfg.priors;
        ChainConfig cc = cfg.chains;
        cc.seed = cfg.seed ^ (0xbf58476d1ce4e5b9ULL * static_cast<std::uint64_t>(r + 1));
        const PosteriorDraws d = cfg.family == ErrorFamily::ald_latent
                                     ? gibbs_ald(w, spec, cc)
                                     : fit_metropolis(spec, w, cc);
        reps[r] = summarize(d);
    });

    SimStudyReport report;
    report.family = family_name(cfg.family);
    report.grid_value = cfg.grid_value;
    report.grid_symbol = cfg.family == ErrorFamily::rg || cfg.family == ErrorFamily::ald_latent
                             ? (cfg.family == ErrorFamily::rg ? "beta" : "kappa")
                             : "tau";
    report.rows = evaluate_replicates(reps, true_params(cfg));
    return report;
}

inline CsvTable report_to_csv(std::span<const SimStudyReport> reports) {
    CsvTable t;
    t.header = {"family", "grid_symbol", "grid_value", "param", "bias", "avg_se", "mcse", "cov"};
    for (const auto& rep : reports)
        for (const auto& r : rep.rows)
            t.rows.push_back({rep.family, rep.grid_symbol, csv_num(rep.grid_value), r.param,
                              csv_num(r.bias), csv_num(r.avg_se), csv_num(r.mcse), csv_num(r.cov)});
    return t;
}

/// Aligned text table, one block per parameter with one line per grid value
/// (columns: Parameter, grid, BIAS, AVG.SE, MCSE, COV at three decimals).
inline void report_to_text(std::ostream& os, std::span<const SimStudyReport> reports) {
    if (reports.empty()) return;
    os << std::left << std::setw(10) << "Parameter" << std::right << std::setw(8)
       << reports.front().grid_symbol << std::setw(10) << "BIAS" << std::setw(10) << "AVG.SE"
       << std::setw(10) << "MCSE" << std::setw(10) << "COV" << "\n";
    std::vector<std::string> params;
    for (const auto& r : reports.front().rows) params.push_back(r.param);
    os << std::fixed << std::setprecision(3);
    for (const auto& p : params) {
        bool first = true;
        for (const auto& rep : reports) {
            os << std::left << std::setw(10) << (first ? p : "") << std::right << std::setw(8)
               << rep.grid_value;
            const CellStats& c = rep.row(p);
            os << std::setw(10) << c.bias << std::setw(10) << c.avg_se << std::setw(10) << c.mcse
               << std::setw(10) << c.cov << "\n";
            first = false;
        }
    }
}

}  // namespace modalcomb
