#pragma once

#include <cmath>
#include <concepts>
#include <limits>
#include <span>
#include <stdexcept>

#include <boost/math/special_functions/erf.hpp>

#include "modalcomb/rng.hpp"

namespace modalcomb {

inline constexpr double kLogTwo = 0.6931471805599453;
inline constexpr double kLogTwoPi = 1.8378770664093453;

inline void check_scale_asym(double scale, double asym) {
    if (!(scale > 0.0)) throw std::domain_error("scale parameter must be positive");
    if (!(asym > 0.0 && asym < 1.0))
        throw std::domain_error("asymmetry parameter must lie in (0,1)");
}

/// A symmetric unimodal density g on the real line with mode 0:
/// g(-u) = g(u) <= g(0), integral 1. partial_moment(k) is the one-sided
/// moment integral of u^k g(u) over (0, inf).
template <class K>
concept SymmetricKernel = requires(double u, double q, int k) {
    { K::log_density(u) } -> std::convertible_to<double>;
    { K::cdf(u) } -> std::convertible_to<double>;
    { K::quantile(q) } -> std::convertible_to<double>;
    { K::partial_moment(k) } -> std::convertible_to<double>;
};

/// g(u) = exp(-|u|)/2.
struct LaplaceKernel {
    static double log_density(double u) { return -std::abs(u) - kLogTwo; }

    static double cdf(double u) {
        return u <= 0.0 ? 0.5 * std::exp(u) : 1.0 - 0.5 * std::exp(-u);
    }

    static double quantile(double q) {
        return q <= 0.5 ? std::log(2.0 * q) : -std::log(2.0 * (1.0 - q));
    }

    // integral of u^k g(u) over (0,inf) = k!/2
    static double partial_moment(int k) {
        double f = 1.0;
        for (int i = 2; i <= k; ++i) f *= i;
        return 0.5 * f;
    }
};

/// g(u) = standard normal density.
struct NormalKernel {
    static double log_density(double u) { return -0.5 * u * u - 0.5 * kLogTwoPi; }

    static double cdf(double u) { return 0.5 * std::erfc(-u / std::sqrt(2.0)); }

    static double quantile(double q) {
        return -std::sqrt(2.0) * boost::math::erfc_inv(2.0 * q);
    }

    // integral of u^k g(u) over (0,inf) = 2^{(k-2)/2} Gamma((k+1)/2) / sqrt(pi)
    static double partial_moment(int k) {
        return std::pow(2.0, 0.5 * (k - 2)) * std::tgamma(0.5 * (k + 1)) /
               std::sqrt(M_PI);
    }
};

/// Asymmetric distribution built by gluing two rescaled halves of a symmetric
/// kernel at the mode. With mode m, scale s > 0 and asymmetry t in (0,1):
///
///   f(y) = (2 t (1-t) / s) * g((1-t)(y-m)/s)   for y <= m,
///          (2 t (1-t) / s) * g(t (y-m)/s)      for y >  m.
///
/// The mode is m for every (s, t); the CDF at the mode equals t; t = 1/2
/// recovers the symmetric kernel. Sampling is by CDF inversion.
template <SymmetricKernel Kernel>
class SplitDistribution {
public:
    SplitDistribution(double mode, double scale, double asym)
        : mode_(mode), scale_(scale), asym_(asym) {
        check_scale_asym(scale, asym);
    }

    double mode() const { return mode_; }
    double scale() const { return scale_; }
    double asymmetry() const { return asym_; }

    double log_pdf(double y) const {
        const double e = y - mode_;
        const double u = e <= 0.0 ? (1.0 - asym_) * e / scale_ : asym_ * e / scale_;
        return std::log(2.0 * asym_ * (1.0 - asym_) / scale_) + Kernel::log_density(u);
    }

    double pdf(double y) const { return std::exp(log_pdf(y)); }

    double cdf(double y) const {
        const double e = y - mode_;
        if (e <= 0.0) return 2.0 * asym_ * Kernel::cdf((1.0 - asym_) * e / scale_);
        return asym_ + 2.0 * (1.0 - asym_) * (Kernel::cdf(asym_ * e / scale_) - 0.5);
    }

    double quantile(double q) const {
        if (!(q > 0.0 && q < 1.0)) throw std::domain_error("quantile level must lie in (0,1)");
        if (q <= asym_)
            return mode_ + scale_ / (1.0 - asym_) * Kernel::quantile(q / (2.0 * asym_));
        return mode_ + scale_ / asym_ *
                           Kernel::quantile((1.0 + q - 2.0 * asym_) / (2.0 - 2.0 * asym_));
    }

    /// k-th moment of the zero-mode distribution, k in {1,2,3}:
    ///   2 c_k s^k / (t (1-t))^k * [ (1-t)^{k+1} + (-1)^k t^{k+1} ].
    double moment(int k) const {
        if (k < 1 || k > 3) throw std::domain_error("moment order must be 1, 2 or 3");
        const double t = asym_;
        const double ck = Kernel::partial_moment(k);
        const double sign = (k % 2 == 0) ? 1.0 : -1.0;
        return 2.0 * ck * std::pow(scale_, k) / std::pow(t * (1.0 - t), k) *
               (std::pow(1.0 - t, k + 1) + sign * std::pow(t, k + 1));
    }

    double sample(Rng& rng) const { return quantile(rng.uniform()); }

    void sample(Rng& rng, std::span<double> out) const {
        for (double& v : out) v = sample(rng);
    }

private:
    double mode_;
    double scale_;
    double asym_;
};

/// Asymmetric Laplace AL(mu, sigma, tau):
///
///   f(y) = tau (1-tau)/sigma * exp((1-tau)(y-mu)/sigma)   for y <= mu,
///          tau (1-tau)/sigma * exp(-tau (y-mu)/sigma)     for y >  mu.
///
/// This is the split family with the Laplace kernel and identical (sigma,
/// tau); the leading factor 2 of the generic family is absorbed by
/// g(0) = 1/2. Closed-form CDF and quantile are used throughout.
class AsymmetricLaplace {
public:
    AsymmetricLaplace(double mode, double scale, double asym)
        : mode_(mode), scale_(scale), asym_(asym) {
        check_scale_asym(scale, asym);
    }

    double mode() const { return mode_; }
    double scale() const { return scale_; }
    double asymmetry() const { return asym_; }

    double log_pdf(double y) const {
        return log_pdf(y - mode_, scale_, asym_);
    }

    /// Log density of the zero-mode distribution at residual e.
    static double log_pdf(double e, double scale, double asym) {
        const double rate = e <= 0.0 ? (1.0 - asym) : -asym;
        return std::log(asym * (1.0 - asym) / scale) + rate * e / scale;
    }

    double pdf(double y) const { return std::exp(log_pdf(y)); }

    double cdf(double y) const {
        const double e = y - mode_;
        if (e <= 0.0) return asym_ * std::exp((1.0 - asym_) * e / scale_);
        return 1.0 - (1.0 - asym_) * std::exp(-asym_ * e / scale_);
    }

    double quantile(double q) const {
        if (!(q > 0.0 && q < 1.0)) throw std::domain_error("quantile level must lie in (0,1)");
        if (q <= asym_) return mode_ + scale_ / (1.0 - asym_) * std::log(q / asym_);
        return mode_ - scale_ / asym_ * std::log((1.0 - q) / (1.0 - asym_));
    }

    double sample(Rng& rng) const { return quantile(rng.uniform()); }

private:
    double mode_;
    double scale_;
    double asym_;
};

/// Asymmetric normal AN(mu, sigma, tau):
///
///   f(y) = C(tau) exp(-(1-tau)(y-mu)^2/sigma^2)   for y <= mu,
///          C(tau) exp(-tau (y-mu)^2/sigma^2)      for y >  mu,
///
/// with C(tau) = 2 sqrt(tau(1-tau)) / (sigma sqrt(pi)(sqrt(tau)+sqrt(1-tau))).
/// Identical to the split family with the normal kernel after the
/// reparametrization t = sqrt(tau)/(sqrt(tau)+sqrt(1-tau)),
/// s = sigma/(sqrt(2)(sqrt(tau)+sqrt(1-tau))); CDF, quantile and sampling
/// delegate to that form.
class AsymmetricNormal {
public:
    AsymmetricNormal(double mode, double scale, double asym)
        : mode_(mode), scale_(scale), asym_(asym), split_(make_split(mode, scale, asym)) {
        check_scale_asym(scale, asym);
    }

    double mode() const { return mode_; }
    double scale() const { return scale_; }
    double asymmetry() const { return asym_; }

    /// C(tau), recomputed from the parameters on every call.
    double normalizer() const { return normalizer(scale_, asym_); }

    static double normalizer(double scale, double asym) {
        return 2.0 * std::sqrt(asym * (1.0 - asym)) /
               (scale * std::sqrt(M_PI) * (std::sqrt(asym) + std::sqrt(1.0 - asym)));
    }

    double log_pdf(double y) const { return log_pdf(y - mode_, scale_, asym_); }

    static double log_pdf(double e, double scale, double asym) {
        const double w = e <= 0.0 ? (1.0 - asym) : asym;
        return std::log(normalizer(scale, asym)) - w * e * e / (scale * scale);
    }

    double pdf(double y) const { return std::exp(log_pdf(y)); }

    double cdf(double y) const { return split_.cdf(y); }
    double quantile(double q) const { return split_.quantile(q); }
    double sample(Rng& rng) const { return split_.sample(rng); }

    /// The equivalent generic split-family representation.
    const SplitDistribution<NormalKernel>& as_split() const { return split_; }

private:
    static SplitDistribution<NormalKernel> make_split(double mode, double scale, double asym) {
        check_scale_asym(scale, asym);
        const double r = std::sqrt(asym) + std::sqrt(1.0 - asym);
        return {mode, scale / (std::sqrt(2.0) * r), std::sqrt(asym) / r};
    }

    double mode_;
    double scale_;
    double asym_;
    SplitDistribution<NormalKernel> split_;
};

/// Reverse Gumbel RG(mu, beta) (the minimum-extreme-value law):
///
///   f(y) = (1/beta) exp(z - exp(z)),  z = (y - mu)/beta.
///
/// Mode at mu with density e^{-1}/beta; the left tail decays like exp(z),
/// the right tail doubly exponentially. For z > ~709 the exp overflows and
/// log_pdf returns -inf, which callers treat as zero likelihood.
class ReverseGumbel {
public:
    ReverseGumbel(double mode, double scale) : mode_(mode), scale_(scale) {
        if (!(scale > 0.0)) throw std::domain_error("scale parameter must be positive");
    }

    double mode() const { return mode_; }
    double scale() const { return scale_; }

    double log_pdf(double y) const { return log_pdf(y - mode_, scale_); }

    static double log_pdf(double e, double scale) {
        const double z = e / scale;
        return -std::log(scale) + z - std::exp(z);
    }

    double pdf(double y) const { return std::exp(log_pdf(y)); }

    double cdf(double y) const { return -std::expm1(-std::exp((y - mode_) / scale_)); }

    double quantile(double q) const {
        if (!(q > 0.0 && q < 1.0)) throw std::domain_error("quantile level must lie in (0,1)");
        return mode_ + scale_ * std::log(-std::log1p(-q));
    }

    double sample(Rng& rng) const { return quantile(rng.uniform()); }

private:
    double mode_;
    double scale_;
};

/// Asymmetric Laplace in the rate parametrization AL*(mu, beta, kappa),
/// kappa > 0, beta > 0:
///
///   f(y) = (1/beta) kappa/(1+kappa^2) * exp(-(kappa/beta)(y-mu))   for y >= mu,
///          (1/beta) kappa/(1+kappa^2) * exp(-(mu-y)/(kappa beta))  for y <  mu.
///
/// Equivalent to AL(mu, sigma, tau) with tau = kappa^2/(1+kappa^2) and
/// sigma = beta kappa/(1+kappa^2) (equal tail decay rates). It arises as a
/// normal compounded over an Exp(1) latent scale:
///   Y | V ~ N(mu + beta (1/kappa - kappa) V, 2 beta^2 V),  V ~ Exp(1),
/// which is the representation the Gibbs sampler augments.
class AsymmetricLaplaceRate {
public:
    AsymmetricLaplaceRate(double mode, double scale, double shape)
        : mode_(mode), scale_(scale), shape_(shape) {
        if (!(scale > 0.0)) throw std::domain_error("scale parameter must be positive");
        if (!(shape > 0.0)) throw std::domain_error("shape parameter must be positive");
    }

    double mode() const { return mode_; }
    double scale() const { return scale_; }
    double shape() const { return shape_; }

    static double tau_from_kappa(double kappa) { return kappa * kappa / (1.0 + kappa * kappa); }
    static double kappa_from_tau(double tau) { return std::sqrt(tau / (1.0 - tau)); }
    static double sigma_from_beta(double beta, double kappa) {
        return beta * kappa / (1.0 + kappa * kappa);
    }

    double log_pdf(double y) const { return log_pdf(y - mode_, scale_, shape_); }

    static double log_pdf(double e, double scale, double shape) {
        const double rate = e >= 0.0 ? shape / scale : -1.0 / (shape * scale);
        return -std::log(scale) + std::log(shape) - std::log1p(shape * shape) - rate * e;
    }

    AsymmetricLaplace as_mode_scale() const {
        const double tau = tau_from_kappa(shape_);
        return {mode_, sigma_from_beta(scale_, shape_), tau};
    }

    double cdf(double y) const { return as_mode_scale().cdf(y); }
    double quantile(double q) const { return as_mode_scale().quantile(q); }
    double sample(Rng& rng) const { return as_mode_scale().sample(rng); }

private:
    double mode_;
    double scale_;
    double shape_;
};

}  // namespace modalcomb
