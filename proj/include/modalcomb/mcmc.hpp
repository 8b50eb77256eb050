#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "modalcomb/csv.hpp"
#include "modalcomb/errors.hpp"
#include "modalcomb/parallel.hpp"
#include "modalcomb/rng.hpp"
#include "modalcomb/transforms.hpp"

namespace modalcomb {

/// Ordered list of named parameter blocks with their constraining
/// transforms; defines both the flattened constrained vector (what users
/// see) and the unconstrained vector the sampler moves in.
class ParamLayout {
public:
    void add(const std::string& name, ParamTransform t) {
        const int cd = t.constrained_dim();
        if (cd == 1) {
            names_.push_back(name);
        } else {
            for (int i = 1; i <= cd; ++i) names_.push_back(name + std::to_string(i));
        }
        cdim_ += cd;
        udim_ += t.unconstrained_dim();
        blocks_.push_back(std::move(t));
    }

    int constrained_dim() const { return cdim_; }
    int unconstrained_dim() const { return udim_; }
    int n_blocks() const { return static_cast<int>(blocks_.size()); }
    const std::vector<std::string>& names() const { return names_; }
    const ParamTransform& block(int b) const { return blocks_[b]; }

    std::vector<double> to_unconstrained(std::span<const double> x) const {
        std::vector<double> z;
        z.reserve(udim_);
        int off = 0;
        for (const auto& t : blocks_) {
            auto zi = t.to_unconstrained(x.subspan(off, t.constrained_dim()));
            z.insert(z.end(), zi.begin(), zi.end());
            off += t.constrained_dim();
        }
        return z;
    }

    TransformResult to_constrained(std::span<const double> z) const {
        TransformResult out;
        out.x.reserve(cdim_);
        out.log_jacobian = 0.0;
        int off = 0;
        for (const auto& t : blocks_) {
            auto r = t.to_constrained(z.subspan(off, t.unconstrained_dim()));
            out.x.insert(out.x.end(), r.x.begin(), r.x.end());
            out.log_jacobian += r.log_jacobian;
            off += t.unconstrained_dim();
        }
        return out;
    }

private:
    std::vector<ParamTransform> blocks_;
    std::vector<std::string> names_;
    int cdim_ = 0;
    int udim_ = 0;
};

struct ChainConfig {
    int n_chains = 2;
    int burn_in = 5000;
    int post_burn_in = 10000;  // kept draws per chain
    std::uint64_t seed = 0;
    int adapt_window = 50;
    double target_acceptance = 0.3;
    std::vector<int> update_order;  // permutation of z components; empty = natural
    int threads = 1;                // chain-level parallelism
};

struct ParamDiag {
    double r_hat = std::numeric_limits<double>::quiet_NaN();
    double ess = 0.0;
    double mcse = 0.0;
    bool r_hat_valid = false;
};

/// Post-burn-in draws on the constrained scale, chain-major order.
class PosteriorDraws {
public:
    std::vector<std::string> names;
    std::vector<double> data;  // row-major, n_draws() x n_params()
    int n_chains = 0;
    int per_chain = 0;
    std::vector<ParamDiag> diagnostics;          // per parameter
    std::vector<double> acceptance_rate;         // per chain, post burn-in
    std::vector<std::vector<double>> acceptance_trace;  // per chain, per window

    int n_params() const { return static_cast<int>(names.size()); }
    int n_draws() const { return n_chains * per_chain; }

    double value(int draw, int param) const { return data[static_cast<std::size_t>(draw) * names.size() + param]; }
    std::span<const double> row(int draw) const {
        return {data.data() + static_cast<std::size_t>(draw) * names.size(), names.size()};
    }

    std::vector<double> column(int param) const {
        std::vector<double> c(n_draws());
        for (int i = 0; i < n_draws(); ++i) c[i] = value(i, param);
        return c;
    }

    int index_of(const std::string& name) const {
        for (int j = 0; j < n_params(); ++j)
            if (names[j] == name) return j;
        throw std::invalid_argument("no parameter named " + name);
    }

    double mean(int param) const {
        double s = 0.0;
        for (int i = 0; i < n_draws(); ++i) s += value(i, param);
        return s / n_draws();
    }

    double sd(int param) const {
        const double m = mean(param);
        double s = 0.0;
        for (int i = 0; i < n_draws(); ++i) {
            const double d = value(i, param) - m;
            s += d * d;
        }
        return std::sqrt(s / (n_draws() - 1));
    }

    /// Empirical quantile by linear interpolation of order statistics.
    double quantile(int param, double q) const {
        std::vector<double> c = column(param);
        std::sort(c.begin(), c.end());
        const double h = q * (c.size() - 1);
        const auto lo = static_cast<std::size_t>(h);
        if (lo + 1 >= c.size()) return c.back();
        return c[lo] + (h - lo) * (c[lo + 1] - c[lo]);
    }

    /// One row per draw, header = parameter names.
    void to_csv(std::ostream& os) const {
        for (int j = 0; j < n_params(); ++j) os << names[j] << (j + 1 < n_params() ? "," : "\n");
        for (int i = 0; i < n_draws(); ++i)
            for (int j = 0; j < n_params(); ++j)
                os << csv_num(value(i, j)) << (j + 1 < n_params() ? "," : "\n");
    }
};

using LogTargetFn = std::function<double(std::span<const double>)>;
using InitSampler = std::function<std::vector<double>(Rng&)>;

namespace detail {

struct ZTarget {
    const LogTargetFn* target;
    const ParamLayout* layout;

    // returns log target on z space (log posterior + log Jacobian) and the
    // corresponding constrained point
    double operator()(std::span<const double> z, std::vector<double>& x_out) const {
        TransformResult r = layout->to_constrained(z);
        const double lp = (*target)(r.x);
        x_out = std::move(r.x);
        return std::isfinite(lp) ? lp + r.log_jacobian : lp;
    }
};

inline void cholesky_in_place(std::vector<double>& a, int d) {
    for (int i = 0; i < d; ++i) {
        for (int j = 0; j <= i; ++j) {
            double s = a[i * d + j];
            for (int k = 0; k < j; ++k) s -= a[i * d + k] * a[j * d + k];
            if (i == j) {
                a[i * d + j] = std::sqrt(std::max(s, 1e-12));
            } else {
                a[i * d + j] = s / a[j * d + j];
            }
        }
        for (int j = i + 1; j < d; ++j) a[i * d + j] = 0.0;
    }
}

struct ChainResult {
    std::vector<double> draws;  // per_chain x cdim, row-major (constrained)
    double acceptance = 0.0;
    std::vector<double> acceptance_trace;
};

inline ChainResult run_single_chain(const LogTargetFn& target, const ParamLayout& layout,
                                    const ChainConfig& cfg, const InitSampler& init_draw,
                                    const std::optional<std::vector<double>>& init,
                                    int chain_index) {
    const int d = layout.unconstrained_dim();
    const int cd = layout.constrained_dim();
    Rng rng(cfg.seed, stream_id(1, static_cast<std::uint64_t>(chain_index)));
    ZTarget zt{&target, &layout};

    // initial state: supplied point or prior draws until the target is finite
    std::vector<double> z, x;
    double lp = -std::numeric_limits<double>::infinity();
    if (init.has_value()) {
        z = layout.to_unconstrained(*init);
        lp = zt(z, x);
        if (!std::isfinite(lp)) throw SamplerError("log target not finite at supplied init");
    } else {
        for (int attempt = 0; attempt < 100 && !std::isfinite(lp); ++attempt) {
            z = layout.to_unconstrained(init_draw(rng));
            lp = zt(z, x);
        }
        if (!std::isfinite(lp))
            throw SamplerError("failed to find a finite-target starting point in 100 prior draws");
    }

    std::vector<int> order(d);
    std::iota(order.begin(), order.end(), 0);
    if (!cfg.update_order.empty()) {
        if (static_cast<int>(cfg.update_order.size()) != d)
            throw SamplerError("update_order length does not match parameter dimension");
        order = cfg.update_order;
    }

    std::vector<double> log_step(d, std::log(0.5));
    std::vector<int> adapt_count(d, 0);
    double joint_log_step = std::log(2.38 / std::sqrt(static_cast<double>(d)));
    int joint_count = 0;
    std::vector<double> chol;  // d x d lower factor of the empirical covariance
    bool have_joint = false;

    const int burn = cfg.burn_in;
    const int comp_phase_end = burn / 2;
    const int cov_lo = burn / 4;
    std::vector<double> cov_samples;
    cov_samples.reserve(static_cast<std::size_t>(std::max(0, comp_phase_end - cov_lo)) * d);

    std::vector<double> zprop(d), xprop;
    ChainResult out;
    out.draws.resize(static_cast<std::size_t>(cfg.post_burn_in) * cd);

    long accepted_post = 0, proposed_post = 0;
    long accepted_win = 0, proposed_win = 0;

    auto component_sweep = [&](bool adapt) {
        for (int idx : order) {
            zprop = z;
            zprop[idx] += std::exp(log_step[idx]) * rng.normal();
            const double lp_new = zt(zprop, xprop);
            const double alpha = std::isfinite(lp_new) ? std::min(1.0, std::exp(lp_new - lp)) : 0.0;
            const bool accept = rng.uniform() < alpha;
            if (accept) {
                z = zprop;
                x = xprop;
                lp = lp_new;
            }
            if (adapt) {
                ++adapt_count[idx];
                const double gain = std::pow(static_cast<double>(adapt_count[idx]), -0.6);
                log_step[idx] += gain * (alpha - cfg.target_acceptance);
                log_step[idx] = std::clamp(log_step[idx], -20.0, 5.0);
            }
            ++proposed_win;
            accepted_win += accept ? 1 : 0;
        }
    };

    auto joint_move = [&](bool adapt) {
        if (!have_joint) return;
        for (int i = 0; i < d; ++i) zprop[i] = rng.normal();
        // zprop <- z + exp(step) * L * eta  (L lower triangular)
        std::vector<double> delta(d, 0.0);
        for (int i = 0; i < d; ++i) {
            double s = 0.0;
            for (int k = 0; k <= i; ++k) s += chol[i * d + k] * zprop[k];
            delta[i] = s;
        }
        const double step = std::exp(joint_log_step);
        for (int i = 0; i < d; ++i) zprop[i] = z[i] + step * delta[i];
        const double lp_new = zt(zprop, xprop);
        const double alpha = std::isfinite(lp_new) ? std::min(1.0, std::exp(lp_new - lp)) : 0.0;
        const bool accept = rng.uniform() < alpha;
        if (accept) {
            z = zprop;
            x = xprop;
            lp = lp_new;
        }
        if (adapt) {
            ++joint_count;
            const double gain = std::pow(static_cast<double>(joint_count), -0.6);
            joint_log_step += gain * (alpha - cfg.target_acceptance);
            joint_log_step = std::clamp(joint_log_step, -20.0, 5.0);
        }
        ++proposed_win;
        accepted_win += accept ? 1 : 0;
    };

    auto note_window = [&](int it) {
        if (cfg.adapt_window > 0 && (it + 1) % cfg.adapt_window == 0 && proposed_win > 0) {
            out.acceptance_trace.push_back(static_cast<double>(accepted_win) / proposed_win);
            accepted_win = proposed_win = 0;
        }
    };

    // burn-in: componentwise Robbins-Monro phase, then an empirical-covariance
    // joint proposal tuned on the second half; everything frozen afterwards
    for (int it = 0; it < burn; ++it) {
        if (it < comp_phase_end || !have_joint) {
            component_sweep(it < comp_phase_end);
            if (it >= cov_lo && it < comp_phase_end)
                cov_samples.insert(cov_samples.end(), z.begin(), z.end());
            if (it == comp_phase_end - 1) {
                const int n_s = static_cast<int>(cov_samples.size()) / d;
                if (n_s >= std::max(10, 2 * d)) {
                    std::vector<double> mean(d, 0.0);
                    for (int s = 0; s < n_s; ++s)
                        for (int i = 0; i < d; ++i) mean[i] += cov_samples[s * d + i];
                    for (int i = 0; i < d; ++i) mean[i] /= n_s;
                    chol.assign(static_cast<std::size_t>(d) * d, 0.0);
                    for (int s = 0; s < n_s; ++s)
                        for (int i = 0; i < d; ++i)
                            for (int j = 0; j <= i; ++j)
                                chol[i * d + j] += (cov_samples[s * d + i] - mean[i]) *
                                                   (cov_samples[s * d + j] - mean[j]);
                    double tr = 0.0;
                    for (int i = 0; i < d; ++i) tr += chol[i * d + i] / (n_s - 1);
                    for (int i = 0; i < d; ++i)
                        for (int j = 0; j <= i; ++j) {
                            chol[i * d + j] /= (n_s - 1);
                            if (i == j) chol[i * d + j] += 1e-8 * std::max(1.0, tr / d);
                        }
                    for (int i = 0; i < d; ++i)
                        for (int j = i + 1; j < d; ++j) chol[i * d + j] = chol[j * d + i];
                    cholesky_in_place(chol, d);
                    have_joint = true;
                }
            }
        } else {
            // alternate joint moves with occasional frozen component sweeps
            if (it % 2 == 0) {
                joint_move(true);
            } else {
                component_sweep(false);
            }
        }
        note_window(it);
    }

    accepted_win = proposed_win = 0;
    out.acceptance_trace.clear();

    for (int it = 0; it < cfg.post_burn_in; ++it) {
        const long before_prop = proposed_win, before_acc = accepted_win;
        if (have_joint && it % 2 == 0) {
            joint_move(false);
        } else {
            component_sweep(false);
        }
        proposed_post += proposed_win - before_prop;
        accepted_post += accepted_win - before_acc;
        note_window(it);
        std::copy(x.begin(), x.end(), out.draws.begin() + static_cast<std::size_t>(it) * cd);
    }
    out.acceptance = proposed_post > 0 ? static_cast<double>(accepted_post) / proposed_post : 0.0;
    return out;
}

}  // namespace detail

/// Per-parameter convergence diagnostics: split-chain R-hat, effective
/// sample size with Geyer pairwise truncation, and mcse = sd/sqrt(ESS).
/// R-hat is marked invalid (not an error) for single-chain input.
inline void compute_diagnostics(PosteriorDraws& pd) {
    const int P = pd.n_params();
    const int C = pd.n_chains;
    const int n = pd.per_chain;
    pd.diagnostics.assign(P, ParamDiag{});
    if (n < 4) return;

    for (int j = 0; j < P; ++j) {
        ParamDiag& dg = pd.diagnostics[j];

        // chain means / variances
        std::vector<double> cmean(C, 0.0), cvar(C, 0.0);
        for (int c = 0; c < C; ++c) {
            for (int i = 0; i < n; ++i) cmean[c] += pd.value(c * n + i, j);
            cmean[c] /= n;
            for (int i = 0; i < n; ++i) {
                const double dd = pd.value(c * n + i, j) - cmean[c];
                cvar[c] += dd * dd;
            }
            cvar[c] /= (n - 1);
        }

        // split R-hat over 2C half-chains
        if (C >= 2 || n >= 8) {
            const int half = n / 2;
            std::vector<double> hmean, hvar;
            for (int c = 0; c < C; ++c) {
                for (int part = 0; part < 2; ++part) {
                    double m = 0.0;
                    for (int i = 0; i < half; ++i) m += pd.value(c * n + part * half + i, j);
                    m /= half;
                    double v = 0.0;
                    for (int i = 0; i < half; ++i) {
                        const double dd = pd.value(c * n + part * half + i, j) - m;
                        v += dd * dd;
                    }
                    hmean.push_back(m);
                    hvar.push_back(v / (half - 1));
                }
            }
            const int M = static_cast<int>(hmean.size());
            double W = 0.0;
            for (double v : hvar) W += v;
            W /= M;
            double gm = 0.0;
            for (double m : hmean) gm += m;
            gm /= M;
            double B = 0.0;
            for (double m : hmean) B += (m - gm) * (m - gm);
            B *= static_cast<double>(half) / (M - 1);
            if (W > 0.0) {
                const double var_plus = (half - 1.0) / half * W + B / half;
                dg.r_hat = std::sqrt(var_plus / W);
                dg.r_hat_valid = C >= 2;
            } else {
                dg.r_hat = 1.0;
                dg.r_hat_valid = C >= 2;
            }
        }

        // ESS from chain-averaged autocorrelations, truncated at the first
        // negative pair sum
        double W = 0.0;
        for (double v : cvar) W += v;
        W /= C;
        double gmean = 0.0;
        for (double m : cmean) gmean += m;
        gmean /= C;
        double B = 0.0;
        if (C >= 2) {
            for (double m : cmean) B += (m - gmean) * (m - gmean);
            B *= static_cast<double>(n) / (C - 1);
        }
        const double var_plus = (n - 1.0) / n * W + (C >= 2 ? B / n : 0.0);
        if (!(var_plus > 0.0)) {
            dg.ess = static_cast<double>(C) * n;
            dg.mcse = 0.0;
            continue;
        }

        auto mean_acov = [&](int lag) {
            double acc = 0.0;
            for (int c = 0; c < C; ++c) {
                double s = 0.0;
                for (int i = 0; i < n - lag; ++i)
                    s += (pd.value(c * n + i, j) - cmean[c]) *
                         (pd.value(c * n + i + lag, j) - cmean[c]);
                acc += s / n;
            }
            return acc / C;
        };

        double tau_int = 0.0;
        const int max_lag = n - 2;
        bool first = true;
        for (int k = 0; 2 * k + 1 <= max_lag; ++k) {
            const double rho_even =
                first ? 1.0 : 1.0 - (W - mean_acov(2 * k)) / var_plus;
            const double rho_odd = 1.0 - (W - mean_acov(2 * k + 1)) / var_plus;
            first = false;
            const double pair = rho_even + rho_odd;
            if (pair < 0.0) break;
            tau_int += 2.0 * pair;
        }
        tau_int -= 1.0;
        tau_int = std::max(tau_int, 1.0 / (C * static_cast<double>(n)));
        dg.ess = std::min(static_cast<double>(C) * n / tau_int,
                          static_cast<double>(C) * n * 10.0);
        const double overall_sd = pd.sd(j);
        dg.mcse = overall_sd / std::sqrt(dg.ess);
    }
}

/// Adaptive random-walk Metropolis on the unconstrained space with
/// component-blocked proposals, Robbins-Monro step tuning toward the target
/// acceptance and a joint empirical-covariance proposal tuned in the second
/// half of burn-in. Adaptation is frozen after burn-in; chains are
/// independent streams (seed + chain index) and may run in parallel with
/// results identical to the single-threaded order.
inline PosteriorDraws run_chains(const LogTargetFn& target, const ParamLayout& layout,
                                 const ChainConfig& cfg, const InitSampler& init_draw,
                                 const std::optional<std::vector<double>>& init = {}) {
    if (cfg.n_chains < 1) throw SamplerError("n_chains must be >= 1");
    if (cfg.post_burn_in < 1) throw SamplerError("post_burn_in must be >= 1");

    std::vector<detail::ChainResult> results(cfg.n_chains);
    parallel_for(cfg.n_chains, cfg.threads, [&](int c) {
        results[c] = detail::run_single_chain(target, layout, cfg, init_draw, init, c);
    });

    PosteriorDraws pd;
    pd.names = layout.names();
    pd.n_chains = cfg.n_chains;
    pd.per_chain = cfg.post_burn_in;
    pd.data.reserve(static_cast<std::size_t>(pd.n_draws()) * pd.names.size());
    for (const auto& r : results) pd.data.insert(pd.data.end(), r.draws.begin(), r.draws.end());
    for (const auto& r : results) {
        pd.acceptance_rate.push_back(r.acceptance);
        pd.acceptance_trace.push_back(r.acceptance_trace);
    }
    compute_diagnostics(pd);
    return pd;
}

}  // namespace modalcomb
