#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace modalcomb {

/// Deterministic random stream.
///
/// Wraps std::mt19937_64 (whose output sequence is fully pinned by the
/// standard) and implements all variate transforms explicitly, so that a
/// given (seed, stream) pair produces bit-identical draws on every platform
/// and standard library. Each concurrent worker owns its own stream.
class Rng {
public:
    explicit Rng(std::uint64_t seed, std::uint64_t stream = 0) {
        std::seed_seq seq{static_cast<std::uint32_t>(seed),
                          static_cast<std::uint32_t>(seed >> 32),
                          static_cast<std::uint32_t>(stream),
                          static_cast<std::uint32_t>(stream >> 32)};
        engine_.seed(seq);
    }

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform on the open interval (0,1); never returns 0 or 1 exactly.
    double uniform() {
        return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Standard normal via Marsaglia's polar method (one spare cached).
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = 2.0 * uniform() - 1.0;
            v = 2.0 * uniform() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double f = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * f;
        has_spare_ = true;
        return u * f;
    }

    double normal(double mean, double sd) { return mean + sd * normal(); }

    double exponential(double rate = 1.0) { return -std::log(uniform()) / rate; }

    /// Gamma(shape, scale) by Marsaglia-Tsang; shape < 1 boosted via U^{1/a}.
    double gamma(double shape, double scale = 1.0) {
        if (shape < 1.0) {
            const double u = uniform();
            return gamma(shape + 1.0, scale) * std::pow(u, 1.0 / shape);
        }
        const double d = shape - 1.0 / 3.0;
        const double c = 1.0 / std::sqrt(9.0 * d);
        for (;;) {
            double x, v;
            do {
                x = normal();
                v = 1.0 + c * x;
            } while (v <= 0.0);
            v = v * v * v;
            const double u = uniform();
            if (u < 1.0 - 0.0331 * x * x * x * x) return d * v * scale;
            if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v * scale;
        }
    }

    double inv_gamma(double shape, double scale) { return scale / gamma(shape, 1.0); }

    double beta(double a, double b) {
        const double x = gamma(a);
        const double y = gamma(b);
        return x / (x + y);
    }

    double cauchy(double location, double scale) {
        return location + scale * std::tan(M_PI * (uniform() - 0.5));
    }

    double half_cauchy(double location, double scale) {
        return location + scale * std::tan(M_PI * 0.5 * uniform());
    }

    /// Inverse Gaussian(mean, shape) by Michael-Schucany-Haas, written in a
    /// cancellation-free form: with w = mean*y/(2 shape), the smaller root is
    /// mean * (1 - 2/(1 + sqrt(1 + 2/w))), strictly positive for any w.
    double inverse_gaussian(double mean, double shape) {
        const double nu = normal();
        const double y = nu * nu;
        const double w = mean * y / (2.0 * shape);
        const double z = w > 0.0 ? 1.0 - 2.0 / (1.0 + std::sqrt(1.0 + 2.0 / w)) : 1.0;
        const double x = mean * z;
        if (uniform() <= mean / (mean + x)) return x;
        return mean / z;
    }

    std::vector<double> dirichlet(std::span<const double> alpha) {
        std::vector<double> g(alpha.size());
        double total = 0.0;
        for (std::size_t i = 0; i < alpha.size(); ++i) {
            g[i] = gamma(alpha[i]);
            total += g[i];
        }
        for (double& v : g) v /= total;
        return g;
    }

private:
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

/// Stable per-unit stream id for parallel work (fold f, replicate j, chain c).
inline std::uint64_t stream_id(std::uint64_t kind, std::uint64_t index) {
    return (kind << 32) ^ index;
}

}  // namespace modalcomb
