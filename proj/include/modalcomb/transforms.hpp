#pragma once

#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

namespace modalcomb {

inline double logistic(double z) {
    return z >= 0.0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
}

inline double logit(double p) { return std::log(p) - std::log1p(-p); }

struct TransformResult {
    std::vector<double> x;   // constrained value
    double log_jacobian;     // log |det dx/dz|
};

/// Bijection between one constrained model parameter (block) and an
/// unconstrained vector, with the log-Jacobian correction that makes a
/// sampler on z target the constrained density:
///
///   identity        w in R                        z = w
///   log_positive    s > 0                         z = log s
///   logit_unit      t in (0,1)                    z = logit(t)
///   scaled_logit    k in (lo,hi)                  z = logit((k-lo)/(hi-lo))
///   stick_breaking  w on the m-simplex interior   z in R^{m-1}
///
/// The simplex map peels sticks with a logistic link and a centering offset
/// so z = 0 maps to the equal-weight point.
class ParamTransform {
public:
    enum class Kind { identity, log_positive, logit_unit, scaled_logit, stick_breaking };

    static ParamTransform identity() { return {Kind::identity, 1, 0.0, 1.0}; }
    static ParamTransform log_positive() { return {Kind::log_positive, 1, 0.0, 1.0}; }
    static ParamTransform logit_unit() { return {Kind::logit_unit, 1, 0.0, 1.0}; }
    static ParamTransform scaled_logit(double lo, double hi) {
        if (!(lo < hi)) throw std::domain_error("scaled_logit: lower bound must be below upper");
        return {Kind::scaled_logit, 1, lo, hi};
    }
    static ParamTransform stick_breaking(int m) {
        if (m < 2) throw std::domain_error("stick_breaking: simplex dimension must be >= 2");
        return {Kind::stick_breaking, m, 0.0, 1.0};
    }

    Kind kind() const { return kind_; }
    int constrained_dim() const { return kind_ == Kind::stick_breaking ? m_ : 1; }
    int unconstrained_dim() const { return kind_ == Kind::stick_breaking ? m_ - 1 : 1; }

    /// Inverse map. Throws std::domain_error on boundary or out-of-domain
    /// inputs (tau in {0,1}, nonpositive scales, simplex zeros).
    std::vector<double> to_unconstrained(std::span<const double> x) const {
        check_size(static_cast<int>(x.size()), constrained_dim());
        switch (kind_) {
            case Kind::identity:
                return {x[0]};
            case Kind::log_positive:
                if (!(x[0] > 0.0)) throw std::domain_error("log transform: value must be positive");
                return {std::log(x[0])};
            case Kind::logit_unit:
                if (!(x[0] > 0.0 && x[0] < 1.0))
                    throw std::domain_error("logit transform: value must lie in (0,1)");
                return {logit(x[0])};
            case Kind::scaled_logit:
                if (!(x[0] > lo_ && x[0] < hi_))
                    throw std::domain_error("scaled logit transform: value outside open interval");
                return {logit((x[0] - lo_) / (hi_ - lo_))};
            case Kind::stick_breaking: {
                std::vector<double> z(m_ - 1);
                double remaining = 1.0;
                for (int k = 0; k < m_ - 1; ++k) {
                    if (!(x[k] > 0.0)) throw std::domain_error("simplex component must be positive");
                    const double v = x[k] / remaining;
                    if (!(v > 0.0 && v < 1.0))
                        throw std::domain_error("simplex point outside the open simplex");
                    z[k] = logit(v) + std::log(static_cast<double>(m_ - 1 - k));
                    remaining -= x[k];
                }
                if (!(x[m_ - 1] > 0.0)) throw std::domain_error("simplex component must be positive");
                return z;
            }
        }
        return {};
    }

    TransformResult to_constrained(std::span<const double> z) const {
        check_size(static_cast<int>(z.size()), unconstrained_dim());
        switch (kind_) {
            case Kind::identity:
                return {{z[0]}, 0.0};
            case Kind::log_positive:
                return {{std::exp(z[0])}, z[0]};
            case Kind::logit_unit: {
                const double s = logistic(z[0]);
                return {{s}, std::log(s) + std::log1p(-s)};
            }
            case Kind::scaled_logit: {
                const double s = logistic(z[0]);
                return {{lo_ + (hi_ - lo_) * s},
                        std::log(hi_ - lo_) + std::log(s) + std::log1p(-s)};
            }
            case Kind::stick_breaking: {
                std::vector<double> x(m_);
                double remaining = 1.0;
                double lj = 0.0;
                for (int k = 0; k < m_ - 1; ++k) {
                    const double v = logistic(z[k] - std::log(static_cast<double>(m_ - 1 - k)));
                    x[k] = v * remaining;
                    lj += std::log(remaining) + std::log(v) + std::log1p(-v);
                    remaining -= x[k];
                }
                x[m_ - 1] = remaining;
                return {std::move(x), lj};
            }
        }
        return {{}, 0.0};
    }

private:
    ParamTransform(Kind k, int m, double lo, double hi) : kind_(k), m_(m), lo_(lo), hi_(hi) {}

    static void check_size(int got, int want) {
        if (got != want) throw std::invalid_argument("transform: dimension mismatch");
    }

    Kind kind_;
    int m_;
    double lo_;
    double hi_;
};

}  // namespace modalcomb
