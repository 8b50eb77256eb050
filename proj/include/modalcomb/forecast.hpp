#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "modalcomb/csv.hpp"
#include "modalcomb/errors.hpp"
#include "modalcomb/gibbs.hpp"
#include "modalcomb/model.hpp"
#include "modalcomb/parallel.hpp"

namespace modalcomb {

/// Time-ordered ground truths plus an m-column expert forecast matrix with
/// missingness (NaN = missing) for one entity.
///
/// Ground-truth reads go through y(t), which enforces an optional visibility
/// horizon: while a FoldScope is alive, reading y beyond the horizon throws
/// LeakageError. An optional observer receives every (fold, t) read so tests
/// can audit access patterns.
class ForecastPanel {
public:
    std::string ticker;
    std::vector<std::string> periods;
    std::vector<double> actual;
    std::vector<std::vector<double>> forecasts;  // T x m

    int length() const { return static_cast<int>(actual.size()); }
    int n_forecasters() const { return forecasts.empty() ? 0 : static_cast<int>(forecasts.front().size()); }

    double y(int t) const {
        if (observer_) observer_(fold_, t);
        if (visibility_limit_ >= 0 && t > visibility_limit_)
            throw LeakageError(ticker + ": fold " + std::to_string(fold_) +
                               " attempted to read ground truth at t=" + std::to_string(t) +
                               " beyond its horizon " + std::to_string(visibility_limit_));
        return actual[t];
    }

    void set_observer(std::function<void(int fold, int t)> obs) const { observer_ = std::move(obs); }

    /// Basic shape checks: strictly increasing periods, at least one
    /// observed forecaster per time point.
    void validate() const {
        if (length() == 0) throw DataError(ticker + ": empty panel");
        for (int t = 1; t < length(); ++t)
            if (!(periods[t - 1] < periods[t]))
                throw DataError(ticker + ": periods not strictly increasing at row " +
                                std::to_string(t + 1) + " ('" + periods[t] + "')");
        for (int t = 0; t < length(); ++t) {
            bool any = false;
            for (double v : forecasts[t]) any = any || !std::isnan(v);
            if (!any)
                throw DataError(ticker + ": no observed forecast in period " + periods[t]);
        }
    }

    class FoldScope {
    public:
        FoldScope(const ForecastPanel& p, int fold, int last_visible)
            : p_(p), saved_limit_(p.visibility_limit_), saved_fold_(p.fold_) {
            p_.visibility_limit_ = last_visible;
            p_.fold_ = fold;
        }
        ~FoldScope() {
            p_.visibility_limit_ = saved_limit_;
            p_.fold_ = saved_fold_;
        }
        FoldScope(const FoldScope&) = delete;
        FoldScope& operator=(const FoldScope&) = delete;

    private:
        const ForecastPanel& p_;
        int saved_limit_;
        int saved_fold_;
    };

private:
    mutable int visibility_limit_ = -1;  // -1 = unrestricted
    mutable int fold_ = -1;
    mutable std::function<void(int, int)> observer_;
};

/// Cross-sectional mean and (n-1)-divisor variance of the observed
/// forecasts in one row; the variance falls back to 0 when fewer than two
/// are observed.
struct RowMoments {
    double mean = 0.0;
    double sd = 0.0;
    int n_observed = 0;
};

inline RowMoments row_moments(std::span<const double> row) {
    RowMoments m;
    double s = 0.0;
    for (double v : row)
        if (!std::isnan(v)) {
            s += v;
            ++m.n_observed;
        }
    if (m.n_observed == 0) return m;
    m.mean = s / m.n_observed;
    if (m.n_observed >= 2) {
        double ss = 0.0;
        for (double v : row)
            if (!std::isnan(v)) ss += (v - m.mean) * (v - m.mean);
        m.sd = std::sqrt(ss / (m.n_observed - 1));
    }
    return m;
}

/// Fill the missing entries of one forecast row. Stochastic mode draws each
/// missing value from N(mean_t, sd_t^2) of the observed entries; the
/// deterministic mode substitutes the mean. Throws DataError when the row is
/// entirely missing.
inline std::vector<double> impute_missing(std::span<const double> row, Rng* rng) {
    const RowMoments m = row_moments(row);
    if (m.n_observed == 0) throw DataError("cannot impute a fully missing forecast row");
    std::vector<double> out(row.begin(), row.end());
    for (double& v : out)
        if (std::isnan(v)) v = rng ? rng->normal(m.mean, m.sd) : m.mean;
    return out;
}

/// Equally weighted mean of the observed (never imputed) forecasts.
inline double consensus_forecast(std::span<const double> row) {
    const RowMoments m = row_moments(row);
    if (m.n_observed == 0) throw DataError("consensus undefined: fully missing forecast row");
    return m.mean;
}

struct RollingWindowConfig {
    int window_length = 12;  // L
    int n_folds = 0;         // F; 0 = all available (T - L)
    bool stochastic_imputation = false;
};

struct FoldResult {
    int fold = 0;
    std::string period;           // predicted period label
    double point_forecast = 0.0;
    double consensus = 0.0;
    double actual = 0.0;
    bool hit = false;
    bool win = false;
    // posterior summaries of the fitted window
    std::vector<std::string> param_names;
    std::vector<double> post_mean, post_sd, post_q025, post_q975;
    std::vector<double> asym_quantiles;  // 5/25/50/75/95% of tau (or kappa)
    double max_r_hat = 0.0;
    double min_ess = 0.0;
    // thinned posterior rows plus the (imputed) predictor row, kept when the
    // caller wants predictive draws after the fold completes
    std::vector<std::vector<double>> retained_draws;
    std::vector<double> x_next;
};

struct EvalReport {
    std::string ticker;
    std::vector<FoldResult> folds;
    double hit_rate = 0.0;
    double win_rate = 0.0;
};

inline double sign_plus(double v) { return v >= 0.0 ? 1.0 : -1.0; }

/// Fraction of folds whose forecast falls on the same side of the consensus
/// as the truth; a zero surprise counts as positive on both sides.
inline double hit_rate(std::span<const FoldResult> rows) {
    if (rows.empty()) throw std::invalid_argument("hit_rate: empty report");
    double s = 0.0;
    for (const auto& r : rows)
        s += sign_plus(r.actual - r.consensus) == sign_plus(r.point_forecast - r.consensus) ? 1.0 : 0.0;
    return s / rows.size();
}

/// Fraction of folds where the forecast is strictly closer to the truth
/// than the consensus; ties count as losses.
inline double win_rate(std::span<const FoldResult> rows) {
    if (rows.empty()) throw std::invalid_argument("win_rate: empty report");
    double s = 0.0;
    for (const auto& r : rows)
        s += std::abs(r.actual - r.point_forecast) < std::abs(r.actual - r.consensus) ? 1.0 : 0.0;
    return s / rows.size();
}

struct RollingCvOptions {
    std::uint64_t seed = 0;
    int threads = 1;
    bool forecast_median = false;  // point forecast = posterior median of the mode
    int retain_draws = 0;          // thinned posterior rows kept per fold
};

/// Rolling-window one-step-ahead cross-validation. Fold f trains on rows
/// f..f+L-1 and predicts row f+L; ground-truth visibility during fitting is
/// capped at f+L-1 by a FoldScope, so leakage is a hard error, not a test
/// convention. Folds are independent (seeded by fold index) and may run in
/// parallel; results are identical for any thread count.
inline EvalReport run_rolling_cv(const ForecastPanel& panel, const ModelSpec& spec,
                                 const RollingWindowConfig& rw, const ChainConfig& chains,
                                 const RollingCvOptions& opt = {}) {
    panel.validate();
    const int T = panel.length();
    const int L = rw.window_length;
    const int m = panel.n_forecasters();
    if (L < m + 2) throw DataError(panel.ticker + ": window length must be at least m+2");
    const int max_folds = T - L;
    const int F = rw.n_folds > 0 ? rw.n_folds : max_folds;
    if (F < 1 || F > max_folds)
        throw DataError(panel.ticker + ": panel too short for " + std::to_string(F) +
                        " folds of window " + std::to_string(L));

    EvalReport report;
    report.ticker = panel.ticker;
    report.folds.resize(F);

    parallel_for(F, opt.threads, [&](int f) {
        FoldResult& out = report.folds[f];
        out.fold = f;
        out.period = panel.periods[f + L];

        // each fold fits against its own panel copy so visibility scopes
        // never interleave across threads
        const ForecastPanel local = panel;
        Rng fold_rng(opt.seed, stream_id(3, static_cast<std::uint64_t>(f)));
        PosteriorDraws draws;
        {
            ForecastPanel::FoldScope scope(local, f, f + L - 1);
            TrainingWindow w;
            w.fold_index = f;
            w.y.resize(L);
            w.x.resize(L);
            for (int t = 0; t < L; ++t) {
                w.y[t] = local.y(f + t);
                w.x[t] = impute_missing(local.forecasts[f + t],
                                        rw.stochastic_imputation ? &fold_rng : nullptr);
            }
            ChainConfig cc = chains;
            cc.seed = opt.seed ^ (0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(f + 1));
            try {
                draws = spec.family == ErrorFamily::ald_latent ? gibbs_ald(w, spec, cc)
                                                               : fit_metropolis(spec, w, cc);
            } catch (const SamplerError& e) {
                throw SamplerError(local.ticker + " fold " + std::to_string(f) + ": " + e.what());
            }

            const std::vector<double> x_next =
                impute_missing(local.forecasts[f + L],
                               rw.stochastic_imputation ? &fold_rng : nullptr);
            // intercept and weights occupy positions 0..m in every layout
            std::vector<double> modes(draws.n_draws());
            for (int i = 0; i < draws.n_draws(); ++i) {
                double mode = draws.value(i, 0);
                for (int j = 0; j < m; ++j) mode += draws.value(i, 1 + j) * x_next[j];
                modes[i] = mode;
            }
            if (opt.retain_draws > 0) {
                out.x_next = x_next;
                const int keep = std::min(opt.retain_draws, draws.n_draws());
                const int stride = std::max(1, draws.n_draws() / keep);
                for (int i = 0; i < draws.n_draws() && static_cast<int>(out.retained_draws.size()) < keep;
                     i += stride) {
                    const auto row = draws.row(i);
                    out.retained_draws.emplace_back(row.begin(), row.end());
                }
            }
            if (opt.forecast_median) {
                std::vector<double> sorted = modes;
                std::sort(sorted.begin(), sorted.end());
                out.point_forecast = sorted[sorted.size() / 2];
            } else {
                double s = 0.0;
                for (double v : modes) s += v;
                out.point_forecast = s / modes.size();
            }
        }

        // evaluation quantities live outside the fold's visibility scope
        out.consensus = consensus_forecast(local.forecasts[f + L]);
        out.actual = local.y(f + L);
        out.hit = sign_plus(out.actual - out.consensus) ==
                  sign_plus(out.point_forecast - out.consensus);
        out.win = std::abs(out.actual - out.point_forecast) <
                  std::abs(out.actual - out.consensus);

        out.param_names = draws.names;
        for (int j = 0; j < draws.n_params(); ++j) {
            out.post_mean.push_back(draws.mean(j));
            out.post_sd.push_back(draws.sd(j));
            out.post_q025.push_back(draws.quantile(j, 0.025));
            out.post_q975.push_back(draws.quantile(j, 0.975));
            if (draws.diagnostics[j].r_hat_valid)
                out.max_r_hat = std::max(out.max_r_hat, draws.diagnostics[j].r_hat);
            out.min_ess = out.min_ess == 0.0 ? draws.diagnostics[j].ess
                                             : std::min(out.min_ess, draws.diagnostics[j].ess);
        }
        const char* asym_name = spec.family == ErrorFamily::ald_latent ? "kappa" : "tau";
        if (spec.has_asymmetry()) {
            const int jt = draws.index_of(asym_name);
            for (double q : {0.05, 0.25, 0.5, 0.75, 0.95})
                out.asym_quantiles.push_back(draws.quantile(jt, q));
        }
    });

    report.hit_rate = hit_rate(report.folds);
    report.win_rate = win_rate(report.folds);
    return report;
}

// ---- panel CSV -------------------------------------------------------------

/// Columns: ticker, period, actual, f1..fm; empty forecast cells = missing.
inline std::vector<ForecastPanel> read_panels_csv(const std::string& path) {
    const CsvTable t = read_csv_file(path);
    if (t.header.size() < 4 || t.header[0] != "ticker" || t.header[1] != "period" ||
        t.header[2] != "actual")
        throw DataError(path + ": expected header ticker,period,actual,f1,...");
    const int m = static_cast<int>(t.header.size()) - 3;
    for (int j = 0; j < m; ++j)
        if (t.header[3 + j] != "f" + std::to_string(j + 1))
            throw DataError(path + ": forecast column " + std::to_string(j + 4) +
                            " must be named f" + std::to_string(j + 1));

    std::vector<ForecastPanel> panels;
    auto find = [&](const std::string& ticker) -> ForecastPanel& {
        for (auto& p : panels)
            if (p.ticker == ticker) return p;
        panels.emplace_back();
        panels.back().ticker = ticker;
        return panels.back();
    };
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        const auto& r = t.rows[i];
        ForecastPanel& p = find(r[0]);
        p.periods.push_back(r[1]);
        const double a = parse_cell(r[2], path, static_cast<int>(i) + 2, "actual");
        if (std::isnan(a))
            throw DataError(path + ": row " + std::to_string(i + 2) + " column actual: missing");
        p.actual.push_back(a);
        std::vector<double> row(m);
        for (int j = 0; j < m; ++j)
            row[j] = parse_cell(r[3 + j], path, static_cast<int>(i) + 2, t.header[3 + j]);
        p.forecasts.push_back(std::move(row));
    }
    if (panels.empty()) throw DataError(path + ": no data rows");
    for (const auto& p : panels) p.validate();
    return panels;
}

inline void write_panels_csv(const std::string& path, std::span<const ForecastPanel> panels) {
    CsvTable t;
    const int m = panels.empty() ? 0 : panels.front().n_forecasters();
    t.header = {"ticker", "period", "actual"};
    for (int j = 1; j <= m; ++j) t.header.push_back("f" + std::to_string(j));
    for (const auto& p : panels)
        for (int i = 0; i < p.length(); ++i) {
            std::vector<std::string> row{p.ticker, p.periods[i], csv_num(p.actual[i])};
            for (double v : p.forecasts[i]) row.push_back(csv_num(v));
            t.rows.push_back(std::move(row));
        }
    write_csv_file(path, t);
}

}  // namespace modalcomb
