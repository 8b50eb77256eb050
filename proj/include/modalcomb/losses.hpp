#pragma once

#include <cmath>
#include <span>
#include <stdexcept>

#include "modalcomb/splitdist.hpp"

namespace modalcomb {

enum class LossKind { lin_lin, asymmetric_quadratic, linex };

/// Asymmetric loss with asymmetry tau: tau in (0,1) for lin-lin and
/// asymmetric quadratic, tau > 0 for linex.
struct LossSpec {
    LossKind kind;
    double tau;

    LossSpec(LossKind k, double t) : kind(k), tau(t) {
        if (k == LossKind::linex) {
            if (!(t > 0.0)) throw std::domain_error("linex asymmetry must be positive");
        } else if (!(t > 0.0 && t < 1.0)) {
            throw std::domain_error("asymmetry must lie in (0,1)");
        }
    }
};

/// Pointwise loss of a forecast error. e = 0 takes the e >= 0 branch (both
/// branches agree there; fixed for bit-reproducibility).
inline double loss(const LossSpec& spec, double e) {
    switch (spec.kind) {
        case LossKind::lin_lin:
            return e >= 0.0 ? spec.tau * e : -(1.0 - spec.tau) * e;
        case LossKind::asymmetric_quadratic:
            return e >= 0.0 ? spec.tau * e * e : (1.0 - spec.tau) * e * e;
        case LossKind::linex:
            return std::exp(spec.tau * e) - spec.tau * e - 1.0;
    }
    return 0.0;
}

inline double loss_sum(const LossSpec& spec, std::span<const double> errors) {
    double s = 0.0;
    for (double e : errors) s += loss(spec, e);
    return s;
}

enum class GapFamily { ald, an, rg };

/// Difference [negative log-likelihood] - [scaled loss sum] for a residual
/// vector at fixed asymmetry/scale. For each family this gap depends only on
/// (n, scale, asymmetry), never on the combination parameters:
///
///   AL:  nll - (1/sigma)   * sum lin-lin        = -n log(tau(1-tau)/sigma)
///   AN:  nll - (1/sigma^2) * sum asym-quadratic = -n log C(tau)
///   RG:  nll -               sum linex(1/beta)  =  n log(beta) + n
inline double nll_loss_gap(GapFamily family, std::span<const double> errors,
                           double scale, double asym = 0.5) {
    const auto n = static_cast<double>(errors.size());
    double nll = 0.0;
    switch (family) {
        case GapFamily::ald: {
            for (double e : errors) nll -= AsymmetricLaplace::log_pdf(e, scale, asym);
            const LossSpec spec{LossKind::lin_lin, asym};
            return nll - loss_sum(spec, errors) / scale;
        }
        case GapFamily::an: {
            for (double e : errors) nll -= AsymmetricNormal::log_pdf(e, scale, asym);
            const LossSpec spec{LossKind::asymmetric_quadratic, asym};
            return nll - loss_sum(spec, errors) / (scale * scale);
        }
        case GapFamily::rg: {
            for (double e : errors) nll -= ReverseGumbel::log_pdf(e, scale);
            const LossSpec spec{LossKind::linex, 1.0 / scale};
            return nll - loss_sum(spec, errors);
        }
    }
    return n;
}

}  // namespace modalcomb
