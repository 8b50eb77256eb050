#pragma once

#include <cmath>
#include <vector>

#include "modalcomb/errors.hpp"
#include "modalcomb/model.hpp"

namespace modalcomb {

/// One draw from the generalized inverse Gaussian with index 1/2,
///   f(v) ~ v^{-1/2} exp(-(chi/v + psi v)/2),
/// via the reciprocal inverse-Gaussian identity: 1/V ~ IG(sqrt(psi/chi), psi).
/// chi -> 0 degenerates to Gamma(1/2, rate psi/2).
inline double sample_gig_half(double chi, double psi, Rng& rng) {
    double v;
    if (chi < 1e-100) {
        v = rng.gamma(0.5, 2.0 / psi);
    } else {
        v = 1.0 / rng.inverse_gaussian(std::sqrt(psi / chi), psi);
    }
    // the conditional carries immeasurable mass outside this range; clamping
    // keeps downstream precision sums finite
    return std::clamp(v, 1e-30, 1e+30);
}

namespace detail {

struct GibbsState {
    double w0;
    std::vector<double> weights;
    double beta;
    double kappa;
    std::vector<double> v;
};

// log p(y | v, state), Gaussian kernel of the augmented model:
//   y_t | v_t ~ N(mu_t + beta (1/kappa - kappa) v_t, 2 beta^2 v_t)
inline double augmented_loglik(const TrainingWindow& w, const GibbsState& s) {
    const double a = 1.0 / s.kappa - s.kappa;
    double ll = 0.0;
    for (int t = 0; t < w.length(); ++t) {
        double mu = s.w0;
        for (std::size_t j = 0; j < s.weights.size(); ++j) mu += s.weights[j] * w.x[t][j];
        const double var = 2.0 * s.beta * s.beta * s.v[t];
        const double r = w.y[t] - mu - s.beta * a * s.v[t];
        ll += -0.5 * std::log(2.0 * M_PI * var) - r * r / (2.0 * var);
    }
    return ll;
}

}  // namespace detail

/// Data-augmentation sampler for the asymmetric Laplace combination model in
/// the rate parametrization (w0, weights, beta, kappa):
///
///   latent v_t exact full-conditional draws (GIG with index 1/2),
///   w0 conjugate normal draw,
///   weights / beta / kappa Metropolis-within-Gibbs on transformed scales
///   with Robbins-Monro step adaptation frozen after burn-in.
///
/// Drawn values are reported in (w0, w1..wm, beta, kappa) order; convert to
/// the mode-scale parametrization with tau = kappa^2/(1+kappa^2) and
/// sigma = beta kappa/(1+kappa^2).
inline PosteriorDraws gibbs_ald(const TrainingWindow& window, const ModelSpec& spec,
                                const ChainConfig& cfg) {
    if (spec.family != ErrorFamily::ald_latent)
        throw SamplerError("gibbs_ald requires the latent asymmetric Laplace family");
    const int n = window.length();
    const int m = window.n_forecasters();
    const auto* kappa_prior = std::get_if<prior::Uniform>(&spec.priors.asymmetry);
    if (!kappa_prior) throw ConfigError("gibbs_ald requires a uniform prior on kappa");
    const auto* w0_prior = std::get_if<prior::Normal>(&spec.priors.intercept);
    if (!w0_prior) throw ConfigError("gibbs_ald requires a normal prior on the intercept");
    const auto* dir_prior = std::get_if<prior::Dirichlet>(&spec.priors.weights);
    if (!dir_prior || static_cast<int>(dir_prior->alpha.size()) != m)
        throw ConfigError("gibbs_ald: Dirichlet weight prior dimension mismatch");

    const ParamTransform simplex_t = ParamTransform::stick_breaking(m);
    const ParamTransform kappa_t = ParamTransform::scaled_logit(kappa_prior->lo, kappa_prior->hi);

    const int P = m + 3;  // w0, w1..wm, beta, kappa
    PosteriorDraws pd;
    pd.names.push_back("w0");
    for (int j = 1; j <= m; ++j) pd.names.push_back("w" + std::to_string(j));
    pd.names.push_back("beta");
    pd.names.push_back("kappa");
    pd.n_chains = cfg.n_chains;
    pd.per_chain = cfg.post_burn_in;
    pd.data.resize(static_cast<std::size_t>(pd.n_draws()) * P);

    for (int chain = 0; chain < cfg.n_chains; ++chain) {
        Rng rng(cfg.seed, stream_id(2, static_cast<std::uint64_t>(chain)));

        detail::GibbsState s;
        s.w0 = sample_prior(spec.priors.intercept, rng)[0];
        s.weights = sample_prior(spec.priors.weights, rng);
        s.beta = sample_prior_truncated(spec.priors.scale, rng)[0];
        s.kappa = sample_prior(spec.priors.asymmetry, rng)[0];
        s.v.assign(n, 1.0);

        std::vector<double> zw = simplex_t.to_unconstrained(s.weights);
        std::vector<double> step_w(m - 1, std::log(0.3));
        double step_beta = std::log(0.3), step_kappa = std::log(0.3);
        std::vector<int> count_w(m - 1, 0);
        int count_beta = 0, count_kappa = 0;
        long accepted = 0, proposed = 0;

        auto rm_update = [&](double& log_step, int& count, double alpha) {
            ++count;
            log_step += std::pow(static_cast<double>(count), -0.6) *
                        (alpha - cfg.target_acceptance);
            log_step = std::clamp(log_step, -20.0, 5.0);
        };

        auto sweep = [&](bool adapt) {
            const double a = 1.0 / s.kappa - s.kappa;

            // latent scales: v_t | rest ~ GIG(1/2, r_t^2/(2 beta^2), 2 + a^2/2)
            const double psi = 2.0 + 0.5 * a * a;
            for (int t = 0; t < n; ++t) {
                double mu = s.w0;
                for (int j = 0; j < m; ++j) mu += s.weights[j] * window.x[t][j];
                const double r = window.y[t] - mu;
                const double chi = r * r / (2.0 * s.beta * s.beta);
                s.v[t] = sample_gig_half(chi, psi, rng);
            }

            // intercept: conjugate normal
            {
                double prec = 1.0 / w0_prior->variance;
                double lin = w0_prior->mean / w0_prior->variance;
                for (int t = 0; t < n; ++t) {
                    double mu_rest = 0.0;
                    for (int j = 0; j < m; ++j) mu_rest += s.weights[j] * window.x[t][j];
                    const double var = 2.0 * s.beta * s.beta * s.v[t];
                    const double resid = window.y[t] - mu_rest - s.beta * a * s.v[t];
                    prec += 1.0 / var;
                    lin += resid / var;
                }
                s.w0 = rng.normal(lin / prec, std::sqrt(1.0 / prec));
            }

            // weights: componentwise Metropolis on the stick-breaking scale
            {
                double cur_lp = detail::augmented_loglik(window, s) +
                                log_prior(spec.priors.weights, std::span<const double>(s.weights));
                TransformResult cur_tr = simplex_t.to_constrained(zw);
                cur_lp += cur_tr.log_jacobian;
                for (int k = 0; k < m - 1; ++k) {
                    std::vector<double> zprop = zw;
                    zprop[k] += std::exp(step_w[k]) * rng.normal();
                    TransformResult tr = simplex_t.to_constrained(zprop);
                    detail::GibbsState sp = s;
                    sp.weights = tr.x;
                    const double lp =
                        detail::augmented_loglik(window, sp) +
                        log_prior(spec.priors.weights, std::span<const double>(sp.weights)) +
                        tr.log_jacobian;
                    const double alpha = std::isfinite(lp) ? std::min(1.0, std::exp(lp - cur_lp)) : 0.0;
                    ++proposed;
                    if (rng.uniform() < alpha) {
                        zw = zprop;
                        s.weights = tr.x;
                        cur_lp = lp;
                        ++accepted;
                    }
                    if (adapt) rm_update(step_w[k], count_w[k], alpha);
                }
            }

            // scale: Metropolis on log beta
            {
                const double zb = std::log(s.beta);
                const double cur_lp = detail::augmented_loglik(window, s) +
                                      log_prior(spec.priors.scale, s.beta) + zb;
                const double zprop = zb + std::exp(step_beta) * rng.normal();
                detail::GibbsState sp = s;
                sp.beta = std::exp(zprop);
                const double lp = detail::augmented_loglik(window, sp) +
                                  log_prior(spec.priors.scale, sp.beta) + zprop;
                const double alpha = std::isfinite(lp) ? std::min(1.0, std::exp(lp - cur_lp)) : 0.0;
                ++proposed;
                if (rng.uniform() < alpha) {
                    s.beta = sp.beta;
                    ++accepted;
                }
                if (adapt) rm_update(step_beta, count_beta, alpha);
            }

            // asymmetry: Metropolis on the scaled-logit of kappa
            {
                const double zk = kappa_t.to_unconstrained({&s.kappa, 1})[0];
                TransformResult cur_tr = kappa_t.to_constrained({&zk, 1});
                const double cur_lp = detail::augmented_loglik(window, s) +
                                      log_prior(spec.priors.asymmetry, s.kappa) +
                                      cur_tr.log_jacobian;
                const double zprop = zk + std::exp(step_kappa) * rng.normal();
                TransformResult tr = kappa_t.to_constrained({&zprop, 1});
                detail::GibbsState sp = s;
                sp.kappa = tr.x[0];
                const double lp = detail::augmented_loglik(window, sp) +
                                  log_prior(spec.priors.asymmetry, sp.kappa) + tr.log_jacobian;
                const double alpha = std::isfinite(lp) ? std::min(1.0, std::exp(lp - cur_lp)) : 0.0;
                ++proposed;
                if (rng.uniform() < alpha) {
                    s.kappa = sp.kappa;
                    ++accepted;
                }
                if (adapt) rm_update(step_kappa, count_kappa, alpha);
            }
        };

        for (int it = 0; it < cfg.burn_in; ++it) sweep(true);
        accepted = proposed = 0;
        for (int it = 0; it < cfg.post_burn_in; ++it) {
            sweep(false);
            double* row = pd.data.data() +
                          (static_cast<std::size_t>(chain) * cfg.post_burn_in + it) * P;
            row[0] = s.w0;
            for (int j = 0; j < m; ++j) row[1 + j] = s.weights[j];
            row[1 + m] = s.beta;
            row[2 + m] = s.kappa;
        }
        pd.acceptance_rate.push_back(proposed > 0 ? static_cast<double>(accepted) / proposed : 0.0);
        pd.acceptance_trace.emplace_back();
    }
    compute_diagnostics(pd);
    return pd;
}

}  // namespace modalcomb
