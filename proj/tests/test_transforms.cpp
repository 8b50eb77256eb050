#include <doctest.h>
#include <numeric>

#include <cmath>

#include "modalcomb/priors.hpp"
#include "modalcomb/transforms.hpp"
#include "oracle.hpp"

using namespace modalcomb;

TEST_CASE("fixed points: centered simplex, unit log point") {
    const auto sb2 = ParamTransform::stick_breaking(2);
    const auto r = sb2.to_constrained(std::vector<double>{0.0});
    CHECK(r.x[0] == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(r.x[1] == doctest::Approx(0.5).epsilon(1e-14));

    const auto lg = ParamTransform::log_positive();
    const auto rl = lg.to_constrained(std::vector<double>{0.0});
    CHECK(rl.x[0] == doctest::Approx(1.0));
    CHECK(rl.log_jacobian == doctest::Approx(0.0));

    const auto sb4 = ParamTransform::stick_breaking(4);
    const auto r4 = sb4.to_constrained(std::vector<double>{0.0, 0.0, 0.0});
    for (double w : r4.x) CHECK(w == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("roundtrip identity over random points") {
    Rng rng(2024);

    const auto check_roundtrip = [&](const ParamTransform& t, auto draw) {
        for (int i = 0; i < 10000; ++i) {
            const std::vector<double> x = draw();
            const auto z = t.to_unconstrained(x);
            const auto back = t.to_constrained(z);
            for (std::size_t j = 0; j < x.size(); ++j)
                CHECK(std::abs(back.x[j] - x[j]) < 1e-12);
        }
    };

    check_roundtrip(ParamTransform::identity(),
                    [&] { return std::vector<double>{rng.normal(0, 10)}; });
    check_roundtrip(ParamTransform::log_positive(),
                    [&] { return std::vector<double>{std::exp(rng.uniform(-6, 6))}; });
    check_roundtrip(ParamTransform::logit_unit(),
                    [&] { return std::vector<double>{rng.uniform(0.001, 0.999)}; });
    check_roundtrip(ParamTransform::scaled_logit(0.001, 4.0),
                    [&] { return std::vector<double>{rng.uniform(0.01, 3.99)}; });
    std::vector<double> alpha{1, 1, 1, 1, 1};
    check_roundtrip(ParamTransform::stick_breaking(5), [&] { return rng.dirichlet(alpha); });
}

TEST_CASE("boundary inputs are rejected") {
    CHECK_THROWS_AS(ParamTransform::logit_unit().to_unconstrained(std::vector<double>{0.0}),
                    std::domain_error);
    CHECK_THROWS_AS(ParamTransform::logit_unit().to_unconstrained(std::vector<double>{1.0}),
                    std::domain_error);
    CHECK_THROWS_AS(ParamTransform::log_positive().to_unconstrained(std::vector<double>{0.0}),
                    std::domain_error);
    CHECK_THROWS_AS(
        ParamTransform::stick_breaking(3).to_unconstrained(std::vector<double>{0.5, 0.5, 0.0}),
        std::domain_error);
    CHECK_THROWS_AS(
        ParamTransform::stick_breaking(3).to_unconstrained(std::vector<double>{0.5, 0.25}),
        std::invalid_argument);
    CHECK_THROWS_AS(ParamTransform::scaled_logit(1.0, 1.0), std::domain_error);
}

namespace {

// importance-sampling oracle: draw z from N(0, s^2), weight by
// exp(log_jacobian) * prior(x(z)) / proposal(z); weighted moments of x must
// match the prior's moments
struct ImportanceMoments {
    std::vector<double> mean;
    std::vector<double> se;  // standard error of each weighted mean
};

ImportanceMoments weighted_prior_moments(const ParamTransform& t, const PriorSpec& prior,
                                         double proposal_sd, int n, Rng& rng) {
    const int uz = t.unconstrained_dim();
    const int cx = t.constrained_dim();
    std::vector<double> w(n);
    std::vector<std::vector<double>> xs(n);
    std::vector<double> z(uz);
    for (int i = 0; i < n; ++i) {
        double log_q = 0.0;
        for (int k = 0; k < uz; ++k) {
            z[k] = proposal_sd * rng.normal();
            log_q += -0.5 * z[k] * z[k] / (proposal_sd * proposal_sd) -
                     std::log(proposal_sd) - 0.5 * std::log(2.0 * M_PI);
        }
        auto r = t.to_constrained(z);
        w[i] = std::exp(r.log_jacobian + log_prior(prior, r.x) - log_q);
        xs[i] = std::move(r.x);
    }
    const double wsum = std::accumulate(w.begin(), w.end(), 0.0);
    ImportanceMoments out;
    for (int j = 0; j < cx; ++j) {
        double num = 0.0;
        for (int i = 0; i < n; ++i) num += w[i] * xs[i][j];
        const double mu = num / wsum;
        // delta-method SE of the self-normalized estimator:
        // sqrt(sum w_i^2 (x_i - mu)^2) / sum w_i
        double s2 = 0.0;
        for (int i = 0; i < n; ++i) s2 += w[i] * w[i] * (xs[i][j] - mu) * (xs[i][j] - mu);
        out.mean.push_back(mu);
        out.se.push_back(std::sqrt(s2) / wsum);
    }
    return out;
}

}  // namespace

TEST_CASE("measure correctness: importance-weighted moments match the prior") {
    Rng rng(555);
    const int n = 200000;

    SUBCASE("Beta(2,2) through the logit") {
        const auto m = weighted_prior_moments(ParamTransform::logit_unit(), prior::Beta{2.0, 2.0},
                                              1.8, n, rng);
        CHECK(std::abs(m.mean[0] - 0.5) < std::max(3.0 * m.se[0], 0.01));
    }

    SUBCASE("flat Dirichlet(1,1,1,1) through stick breaking") {
        const auto m = weighted_prior_moments(ParamTransform::stick_breaking(4),
                                              prior::Dirichlet{{1, 1, 1, 1}}, 1.5, n, rng);
        for (int j = 0; j < 4; ++j) CHECK(std::abs(m.mean[j] - 0.25) < std::max(3.0 * m.se[j], 0.01));
    }

    SUBCASE("half-Cauchy(0,1) median through the log transform") {
        // the mean does not exist; check the weighted cdf at the median
        const ParamTransform t = ParamTransform::log_positive();
        const PriorSpec hc = prior::HalfCauchy{0.0, 1.0};
        double below = 0.0, total = 0.0;
        for (int i = 0; i < n; ++i) {
            const double z = 2.2 * rng.normal();
            const double log_q =
                -0.5 * z * z / (2.2 * 2.2) - std::log(2.2) - 0.5 * std::log(2.0 * M_PI);
            const auto r = t.to_constrained(std::span<const double>{&z, 1});
            const double w = std::exp(r.log_jacobian + log_prior(hc, r.x) - log_q);
            total += w;
            if (r.x[0] <= 1.0) below += w;  // prior median of half-Cauchy(0,1) is 1
        }
        CHECK(std::abs(below / total - 0.5) < 0.01);
    }
}

TEST_CASE("stick-breaking pushforward reproduces the flat simplex measure") {
    // importance resampling from a wide normal proposal, then a chi-square
    // test of the first coordinate against its Beta(1,3) marginal
    Rng rng(808);
    const ParamTransform t = ParamTransform::stick_breaking(4);
    const PriorSpec dir = prior::Dirichlet{{1, 1, 1, 1}};
    const int n_proposals = 200000, n_resample = 20000;

    std::vector<double> w1(n_proposals), weights(n_proposals);
    std::vector<double> z(3);
    for (int i = 0; i < n_proposals; ++i) {
        double log_q = 0.0;
        for (int k = 0; k < 3; ++k) {
            z[k] = 1.5 * rng.normal();
            log_q += -0.5 * z[k] * z[k] / 2.25 - std::log(1.5) - 0.5 * std::log(2.0 * M_PI);
        }
        const auto r = t.to_constrained(z);
        w1[i] = r.x[0];
        weights[i] = std::exp(r.log_jacobian + log_prior(dir, r.x) - log_q);
    }
    std::vector<double> cum(n_proposals);
    double acc = 0.0;
    for (int i = 0; i < n_proposals; ++i) {
        acc += weights[i];
        cum[i] = acc;
    }
    const int bins = 10;
    std::vector<int> counts(bins, 0);
    for (int i = 0; i < n_resample; ++i) {
        const double u = rng.uniform(0.0, acc);
        const auto it = std::lower_bound(cum.begin(), cum.end(), u);
        const double x = w1[it - cum.begin()];
        // Beta(1,3) cdf = 1 - (1-x)^3; equal-probability bin index
        const double cdfv = 1.0 - (1.0 - x) * (1.0 - x) * (1.0 - x);
        counts[std::min(bins - 1, static_cast<int>(cdfv * bins))]++;
    }
    double chi2 = 0.0;
    const double expected = static_cast<double>(n_resample) / bins;
    for (int b = 0; b < bins; ++b)
        chi2 += (counts[b] - expected) * (counts[b] - expected) / expected;
    // 0.999 quantile of chi-square with 9 degrees of freedom
    CHECK(chi2 < 27.877);
}
