#pragma once

#include <cmath>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "modalcomb/rng.hpp"

namespace modalcomb {

namespace prior {

struct Normal {
    double mean;
    double variance;  // note: variance, not sd
};
struct Dirichlet {
    std::vector<double> alpha;
};
struct HalfCauchy {
    double location;
    double scale;
};
struct Beta {
    double a;
    double b;
};
struct InvGamma {
    double shape;
    double scale;
};
struct Gamma {
    double shape;
    double rate;
};
struct Uniform {
    double lo;
    double hi;
};
struct Exponential {
    double rate;
};

}  // namespace prior

/// One prior distribution, parameterized as in the model statements
/// (normal by variance, gamma by rate, inverse gamma by scale).
using PriorSpec = std::variant<prior::Normal, prior::Dirichlet, prior::HalfCauchy,
                               prior::Beta, prior::InvGamma, prior::Gamma,
                               prior::Uniform, prior::Exponential>;

inline void validate(const PriorSpec& spec) {
    struct V {
        void operator()(const prior::Normal& p) const {
            if (!(p.variance > 0.0)) throw std::domain_error("normal prior: variance must be positive");
        }
        void operator()(const prior::Dirichlet& p) const {
            if (p.alpha.size() < 2) throw std::domain_error("dirichlet prior: dimension must be >= 2");
            for (double a : p.alpha)
                if (!(a > 0.0)) throw std::domain_error("dirichlet prior: concentrations must be positive");
        }
        void operator()(const prior::HalfCauchy& p) const {
            if (!(p.scale > 0.0)) throw std::domain_error("half-cauchy prior: scale must be positive");
        }
        void operator()(const prior::Beta& p) const {
            if (!(p.a > 0.0 && p.b > 0.0)) throw std::domain_error("beta prior: shapes must be positive");
        }
        void operator()(const prior::InvGamma& p) const {
            if (!(p.shape > 0.0 && p.scale > 0.0))
                throw std::domain_error("inverse-gamma prior: parameters must be positive");
        }
        void operator()(const prior::Gamma& p) const {
            if (!(p.shape > 0.0 && p.rate > 0.0))
                throw std::domain_error("gamma prior: parameters must be positive");
        }
        void operator()(const prior::Uniform& p) const {
            if (!(p.lo < p.hi)) throw std::domain_error("uniform prior: lower bound must be below upper");
        }
        void operator()(const prior::Exponential& p) const {
            if (!(p.rate > 0.0)) throw std::domain_error("exponential prior: rate must be positive");
        }
    };
    std::visit(V{}, spec);
}

inline int prior_dim(const PriorSpec& spec) {
    if (const auto* d = std::get_if<prior::Dirichlet>(&spec))
        return static_cast<int>(d->alpha.size());
    return 1;
}

namespace detail {
inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

inline double log_beta_fn(double a, double b) {
    return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
}
}  // namespace detail

/// Log prior density at x. Returns -inf for finite x outside the support;
/// throws only on dimension mismatch.
inline double log_prior(const PriorSpec& spec, std::span<const double> x) {
    if (static_cast<int>(x.size()) != prior_dim(spec))
        throw std::invalid_argument("log_prior: dimension mismatch");
    using detail::kNegInf;

    struct V {
        std::span<const double> x;

        double operator()(const prior::Normal& p) const {
            const double d = x[0] - p.mean;
            return -0.5 * std::log(2.0 * M_PI * p.variance) - d * d / (2.0 * p.variance);
        }
        double operator()(const prior::Dirichlet& p) const {
            double sum = 0.0, lp = 0.0, alpha0 = 0.0;
            for (std::size_t i = 0; i < p.alpha.size(); ++i) {
                if (!(x[i] > 0.0 && x[i] < 1.0)) return kNegInf;
                sum += x[i];
                lp += (p.alpha[i] - 1.0) * std::log(x[i]) - std::lgamma(p.alpha[i]);
                alpha0 += p.alpha[i];
            }
            if (std::abs(sum - 1.0) > 1e-9) return kNegInf;
            return lp + std::lgamma(alpha0);
        }
        double operator()(const prior::HalfCauchy& p) const {
            if (x[0] < p.location) return kNegInf;
            const double z = (x[0] - p.location) / p.scale;
            return std::log(2.0 / (M_PI * p.scale)) - std::log1p(z * z);
        }
        double operator()(const prior::Beta& p) const {
            if (!(x[0] > 0.0 && x[0] < 1.0)) return kNegInf;
            return (p.a - 1.0) * std::log(x[0]) + (p.b - 1.0) * std::log1p(-x[0]) -
                   detail::log_beta_fn(p.a, p.b);
        }
        double operator()(const prior::InvGamma& p) const {
            if (!(x[0] > 0.0)) return kNegInf;
            return p.shape * std::log(p.scale) - std::lgamma(p.shape) -
                   (p.shape + 1.0) * std::log(x[0]) - p.scale / x[0];
        }
        double operator()(const prior::Gamma& p) const {
            if (!(x[0] > 0.0)) return kNegInf;
            return p.shape * std::log(p.rate) - std::lgamma(p.shape) +
                   (p.shape - 1.0) * std::log(x[0]) - p.rate * x[0];
        }
        double operator()(const prior::Uniform& p) const {
            if (x[0] < p.lo || x[0] > p.hi) return kNegInf;
            return -std::log(p.hi - p.lo);
        }
        double operator()(const prior::Exponential& p) const {
            if (x[0] < 0.0) return kNegInf;
            return std::log(p.rate) - p.rate * x[0];
        }
    };
    return std::visit(V{x}, spec);
}

inline double log_prior(const PriorSpec& spec, double x) {
    return log_prior(spec, std::span<const double>{&x, 1});
}

/// Draw from the prior; scalar priors return a one-element vector.
inline std::vector<double> sample_prior(const PriorSpec& spec, Rng& rng) {
    struct V {
        Rng& rng;
        std::vector<double> operator()(const prior::Normal& p) const {
            return {rng.normal(p.mean, std::sqrt(p.variance))};
        }
        std::vector<double> operator()(const prior::Dirichlet& p) const {
            return rng.dirichlet(p.alpha);
        }
        std::vector<double> operator()(const prior::HalfCauchy& p) const {
            return {rng.half_cauchy(p.location, p.scale)};
        }
        std::vector<double> operator()(const prior::Beta& p) const { return {rng.beta(p.a, p.b)}; }
        std::vector<double> operator()(const prior::InvGamma& p) const {
            return {rng.inv_gamma(p.shape, p.scale)};
        }
        std::vector<double> operator()(const prior::Gamma& p) const {
            return {rng.gamma(p.shape, 1.0 / p.rate)};
        }
        std::vector<double> operator()(const prior::Uniform& p) const {
            return {rng.uniform(p.lo, p.hi)};
        }
        std::vector<double> operator()(const prior::Exponential& p) const {
            return {rng.exponential(p.rate)};
        }
    };
    return std::visit(V{rng}, spec);
}

/// Prior draw bounded at the q-th prior quantile where heavy tails would
/// otherwise produce absurd chain starting points (half-Cauchy scales).
inline std::vector<double> sample_prior_truncated(const PriorSpec& spec, Rng& rng,
                                                  double q = 0.99) {
    if (const auto* hc = std::get_if<prior::HalfCauchy>(&spec)) {
        const double cap = hc->location + hc->scale * std::tan(M_PI * 0.5 * q);
        double x;
        do {
            x = rng.half_cauchy(hc->location, hc->scale);
        } while (x > cap);
        return {x};
    }
    return sample_prior(spec, rng);
}

}  // namespace modalcomb
