#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "modalcomb/mcmc.hpp"
#include "modalcomb/priors.hpp"
#include "modalcomb/splitdist.hpp"
#include "modalcomb/transforms.hpp"

namespace modalcomb {

enum class ErrorFamily { ald, an, rg, ald_latent };

inline std::string family_name(ErrorFamily f) {
    switch (f) {
        case ErrorFamily::ald: return "ald";
        case ErrorFamily::an: return "an";
        case ErrorFamily::rg: return "rg";
        case ErrorFamily::ald_latent: return "ald-latent";
    }
    return "?";
}

inline ErrorFamily family_from_name(const std::string& s) {
    if (s == "ald") return ErrorFamily::ald;
    if (s == "an") return ErrorFamily::an;
    if (s == "rg") return ErrorFamily::rg;
    if (s == "ald-latent" || s == "ald_latent") return ErrorFamily::ald_latent;
    throw ConfigError("unknown error family: " + s);
}

/// Full parameter state of one combination model: intercept, convex weights
/// on the simplex, scale (sigma or beta) and asymmetry (tau, or kappa for
/// the rate parametrization; unused for the reverse Gumbel).
struct CombinationParams {
    double intercept = 0.0;
    std::vector<double> weights;
    double scale = 1.0;
    double asymmetry = 0.5;
};

/// Conditional mode of the response: intercept + weights . x_row.
/// The location parameter is the mode under every supported family.
inline double predict_mode(const CombinationParams& p, std::span<const double> x_row) {
    if (x_row.size() != p.weights.size())
        throw std::invalid_argument("predict_mode: dimension mismatch");
    double y = p.intercept;
    for (std::size_t j = 0; j < x_row.size(); ++j) y += p.weights[j] * x_row[j];
    return y;
}

/// Exponential discounting weights p_t, t = 1..L:
///   p_t = exp(-lambda (L-t)) / sum_s exp(-lambda (L-s)),
/// nondecreasing in t, summing to one; lambda = 0 gives the uniform limit.
inline std::vector<double> discount_weights(double lambda, int window_len) {
    if (lambda < 0.0) throw std::domain_error("discount rate must be nonnegative");
    if (window_len < 1) throw std::domain_error("window length must be >= 1");
    std::vector<double> p(window_len);
    if (lambda == 0.0) {
        std::fill(p.begin(), p.end(), 1.0 / window_len);
        return p;
    }
    double total = 0.0;
    for (int t = 1; t <= window_len; ++t) {
        p[t - 1] = std::exp(-lambda * (window_len - t));
        total += p[t - 1];
    }
    for (double& v : p) v /= total;
    return p;
}

/// Priors for one model, one entry per parameter block.
struct PriorSet {
    PriorSpec intercept = prior::Normal{0.0, 1000.0};
    PriorSpec weights = prior::Dirichlet{{1.0, 1.0, 1.0, 1.0}};
    PriorSpec scale = prior::InvGamma{2.0, 2.0};
    PriorSpec asymmetry = prior::Beta{1.0, 1.0};
};

/// Simulation-study priors: flat weights/asymmetry, diffuse intercept,
/// inverse-gamma scales.
inline PriorSet sim_default_priors(ErrorFamily family, int m) {
    PriorSet p;
    p.intercept = prior::Normal{0.0, 1000.0};
    p.weights = prior::Dirichlet{std::vector<double>(m, 1.0)};
    p.scale = prior::InvGamma{2.0, 2.0};
    if (family == ErrorFamily::ald_latent) {
        p.asymmetry = prior::Uniform{0.001, 4.0};
        p.scale = prior::Gamma{2.0, 2.0};
    } else {
        p.asymmetry = prior::Beta{1.0, 1.0};
    }
    return p;
}

/// Data-analysis priors: half-Cauchy scales, Beta(2,2) asymmetry, unit
/// normal intercept.
inline PriorSet data_default_priors(ErrorFamily family, int m) {
    PriorSet p;
    p.intercept = prior::Normal{0.0, 1.0};
    p.weights = prior::Dirichlet{std::vector<double>(m, 1.0)};
    if (family == ErrorFamily::ald_latent) {
        p.scale = prior::InvGamma{2.0, 2.0};
        p.asymmetry = prior::Uniform{0.001, 4.0};
    } else {
        p.scale = prior::HalfCauchy{0.0, 1.0};
        p.asymmetry = prior::Beta{2.0, 2.0};
    }
    return p;
}

struct ModelSpec {
    ErrorFamily family = ErrorFamily::ald;
    PriorSet priors;
    double discount_lambda = 0.0;

    bool has_asymmetry() const { return family != ErrorFamily::rg; }
};

/// One complete training window: response vector plus the imputed forecast
/// matrix (row per time point). No missing entries at this stage.
struct TrainingWindow {
    std::vector<double> y;
    std::vector<std::vector<double>> x;
    int fold_index = 0;

    int length() const { return static_cast<int>(y.size()); }
    int n_forecasters() const { return x.empty() ? 0 : static_cast<int>(x.front().size()); }
};

inline double log_density(ErrorFamily family, double resid, double scale, double asym) {
    switch (family) {
        case ErrorFamily::ald: return AsymmetricLaplace::log_pdf(resid, scale, asym);
        case ErrorFamily::an: return AsymmetricNormal::log_pdf(resid, scale, asym);
        case ErrorFamily::rg: return ReverseGumbel::log_pdf(resid, scale);
        case ErrorFamily::ald_latent: return AsymmetricLaplaceRate::log_pdf(resid, scale, asym);
    }
    return 0.0;
}

/// Log likelihood sum_t w_t log f(y_t - mode_t). With discounting the
/// observation weights are n * p_t(lambda) so that lambda -> 0 recovers unit
/// weights; lambda = 0 uses unit weights exactly. -inf contributions are
/// valid (zero likelihood); NaN raises with the offending index.
inline double log_likelihood(const ModelSpec& spec, const CombinationParams& p,
                             const TrainingWindow& w) {
    const int n = w.length();
    std::vector<double> obs_weight;
    if (spec.discount_lambda > 0.0) {
        obs_weight = discount_weights(spec.discount_lambda, n);
        for (double& v : obs_weight) v *= n;
    }
    double ll = 0.0;
    for (int t = 0; t < n; ++t) {
        const double resid = w.y[t] - predict_mode(p, w.x[t]);
        double term = log_density(spec.family, resid, p.scale, p.asymmetry);
        if (std::isnan(term))
            throw std::runtime_error("non-finite likelihood contribution at t=" + std::to_string(t));
        if (!obs_weight.empty()) term *= obs_weight[t];
        ll += term;
    }
    return ll;
}

inline double log_prior_sum(const ModelSpec& spec, const CombinationParams& p) {
    double lp = log_prior(spec.priors.intercept, p.intercept);
    lp += log_prior(spec.priors.weights, std::span<const double>(p.weights));
    lp += log_prior(spec.priors.scale, p.scale);
    if (spec.has_asymmetry()) lp += log_prior(spec.priors.asymmetry, p.asymmetry);
    return lp;
}

/// Log posterior up to a constant; -inf off the support (never throws for
/// out-of-support values). Weights off the simplex are off-support.
inline double log_posterior(const ModelSpec& spec, const CombinationParams& p,
                            const TrainingWindow& w) {
    if (!(p.scale > 0.0)) return -std::numeric_limits<double>::infinity();
    double wsum = 0.0;
    for (double v : p.weights) {
        if (v < 0.0) return -std::numeric_limits<double>::infinity();
        wsum += v;
    }
    if (std::abs(wsum - 1.0) > 1e-9) return -std::numeric_limits<double>::infinity();
    const double lp = log_prior_sum(spec, p);
    if (!std::isfinite(lp)) return -std::numeric_limits<double>::infinity();
    return lp + log_likelihood(spec, p, w);
}

// ---- MCMC plumbing --------------------------------------------------------

/// Flattened parameter vector order: w0, w1..wm, scale, [asymmetry].
inline ParamLayout make_layout(const ModelSpec& spec, int m) {
    ParamLayout layout;
    layout.add("w0", ParamTransform::identity());
    layout.add("w", ParamTransform::stick_breaking(m));
    layout.add(spec.family == ErrorFamily::rg || spec.family == ErrorFamily::ald_latent
                   ? "beta"
                   : "sigma",
               ParamTransform::log_positive());
    if (spec.family == ErrorFamily::ald_latent) {
        const auto* u = std::get_if<prior::Uniform>(&spec.priors.asymmetry);
        if (!u) throw ConfigError("rate-parametrized model requires a uniform asymmetry prior");
        layout.add("kappa", ParamTransform::scaled_logit(u->lo, u->hi));
    } else if (spec.has_asymmetry()) {
        layout.add("tau", ParamTransform::logit_unit());
    }
    return layout;
}

inline CombinationParams unpack_params(const ModelSpec& spec, int m, std::span<const double> x) {
    CombinationParams p;
    p.intercept = x[0];
    p.weights.assign(x.begin() + 1, x.begin() + 1 + m);
    p.scale = x[1 + m];
    p.asymmetry = spec.has_asymmetry() ? x[2 + m] : 0.5;
    return p;
}

inline std::vector<double> pack_params(const ModelSpec& spec, const CombinationParams& p) {
    std::vector<double> x;
    x.push_back(p.intercept);
    x.insert(x.end(), p.weights.begin(), p.weights.end());
    x.push_back(p.scale);
    if (spec.has_asymmetry()) x.push_back(p.asymmetry);
    return x;
}

inline LogTargetFn make_log_target(const ModelSpec& spec, const TrainingWindow& window) {
    const int m = window.n_forecasters();
    return [&spec, &window, m](std::span<const double> x) {
        return log_posterior(spec, unpack_params(spec, m, x), window);
    };
}

/// Prior draw in the flattened order (half-Cauchy scales truncated at the
/// 0.99 prior quantile for sane starting points).
inline InitSampler make_init_sampler(const ModelSpec& spec, int m) {
    return [spec, m](Rng& rng) {
        std::vector<double> x;
        x.push_back(sample_prior(spec.priors.intercept, rng)[0]);
        auto w = sample_prior(spec.priors.weights, rng);
        if (static_cast<int>(w.size()) != m)
            throw ConfigError("weights prior dimension does not match forecaster count");
        x.insert(x.end(), w.begin(), w.end());
        x.push_back(sample_prior_truncated(spec.priors.scale, rng)[0]);
        if (spec.has_asymmetry()) x.push_back(sample_prior(spec.priors.asymmetry, rng)[0]);
        return x;
    };
}

/// Fit one window by adaptive Metropolis (all families; the latent family
/// targets its marginal likelihood here, see gibbs.hpp for the
/// data-augmented sampler).
inline PosteriorDraws fit_metropolis(const ModelSpec& spec, const TrainingWindow& window,
                                     const ChainConfig& cfg) {
    const int m = window.n_forecasters();
    const ParamLayout layout = make_layout(spec, m);
    return run_chains(make_log_target(spec, window), layout, cfg, make_init_sampler(spec, m));
}

// ---- posterior predictive --------------------------------------------------

inline double sample_error(ErrorFamily family, double scale, double asym, Rng& rng) {
    switch (family) {
        case ErrorFamily::ald: return AsymmetricLaplace{0.0, scale, asym}.sample(rng);
        case ErrorFamily::an: return AsymmetricNormal{0.0, scale, asym}.sample(rng);
        case ErrorFamily::rg: return ReverseGumbel{0.0, scale}.sample(rng);
        case ErrorFamily::ald_latent:
            return AsymmetricLaplaceRate{0.0, scale, asym}.sample(rng);
    }
    return 0.0;
}

struct PosteriorPredictive {
    std::vector<double> samples;   // one simulated response per posterior draw
    double point_forecast = 0.0;   // posterior mean of the conditional mode
    double point_forecast_median = 0.0;
};

/// For each retained draw, simulate one response from the error family
/// centered at that draw's conditional mode. The point forecast is the
/// posterior mean of the conditional mode (median also reported).
inline PosteriorPredictive posterior_predictive(const ModelSpec& spec, const PosteriorDraws& draws,
                                                std::span<const double> x_next, Rng& rng) {
    if (draws.n_draws() == 0) throw std::invalid_argument("posterior_predictive: no draws");
    const int m = static_cast<int>(x_next.size());
    PosteriorPredictive out;
    out.samples.reserve(draws.n_draws());
    std::vector<double> modes(draws.n_draws());
    for (int i = 0; i < draws.n_draws(); ++i) {
        const CombinationParams p = unpack_params(spec, m, draws.row(i));
        const double mode = predict_mode(p, x_next);
        modes[i] = mode;
        out.samples.push_back(mode + sample_error(spec.family, p.scale, p.asymmetry, rng));
    }
    out.point_forecast = std::accumulate(modes.begin(), modes.end(), 0.0) / modes.size();
    std::vector<double> sorted = modes;
    std::sort(sorted.begin(), sorted.end());
    out.point_forecast_median = sorted.size() % 2 == 1
                                    ? sorted[sorted.size() / 2]
                                    : 0.5 * (sorted[sorted.size() / 2 - 1] + sorted[sorted.size() / 2]);
    return out;
}

}  // namespace modalcomb
