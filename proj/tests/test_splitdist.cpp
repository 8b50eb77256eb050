#include <doctest.h>

#include <cmath>

#include "modalcomb/splitdist.hpp"
#include "oracle.hpp"

using namespace modalcomb;

namespace {

// random parameter triples used by the property tests
struct Triple {
    double mu, scale, asym;
};

std::vector<Triple> random_triples(int n, std::uint64_t seed, double asym_lo = 0.05,
                                   double asym_hi = 0.95) {
    Rng rng(seed);
    std::vector<Triple> out;
    for (int i = 0; i < n; ++i)
        out.push_back({rng.uniform(-5.0, 5.0), std::exp(rng.uniform(-1.5, 1.5)),
                       rng.uniform(asym_lo, asym_hi)});
    return out;
}

}  // namespace

TEST_CASE("symmetric kernels: symmetry, mode, normalization, cdf identities") {
    auto check_kernel = [](auto kernel, const char* name) {
        CAPTURE(name);
        using K = decltype(kernel);
        const double g0 = std::exp(K::log_density(0.0));
        for (double u = 0.0; u <= 8.0; u += 0.25) {
            CHECK(std::exp(K::log_density(-u)) == doctest::Approx(std::exp(K::log_density(u))).epsilon(1e-14));
            CHECK(std::exp(K::log_density(u)) <= g0 + 1e-15);
            CHECK(K::cdf(-u) == doctest::Approx(1.0 - K::cdf(u)).epsilon(1e-12));
        }
        const double total = oracle::integrate([](double u) { return std::exp(K::log_density(u)); },
                                               -INFINITY, INFINITY);
        CHECK(std::abs(total - 1.0) < 1e-8);
        for (double q : {0.02, 0.2, 0.5, 0.8, 0.98})
            CHECK(std::abs(K::quantile(q) + K::quantile(1.0 - q)) < 1e-10);
        // one-sided moment integrals match their closed forms
        for (int k = 1; k <= 3; ++k) {
            const double ck = oracle::integrate(
                [k](double u) { return std::pow(u, k) * std::exp(K::log_density(u)); }, 0.0,
                INFINITY);
            CHECK(K::partial_moment(k) == doctest::Approx(ck).epsilon(1e-9));
        }
    };
    check_kernel(LaplaceKernel{}, "laplace");
    check_kernel(NormalKernel{}, "normal");
}

TEST_CASE("split pdf: closed-form values at the mode") {
    // Laplace kernel, sigma=1, tau=0.5: 2 tau (1-tau) g(0) = 0.5 * 0.5
    SplitDistribution<LaplaceKernel> d{0.0, 1.0, 0.5};
    CHECK(d.pdf(0.0) == doctest::Approx(0.25).epsilon(1e-14));

    // tau=0.2 at the mode: 2*0.2*0.8*0.5 = 0.16
    SplitDistribution<LaplaceKernel> s{0.0, 1.0, 0.2};
    CHECK(s.pdf(0.0) == doctest::Approx(0.16).epsilon(1e-14));

    // symmetry at tau = 1/2 for both kernels
    SplitDistribution<NormalKernel> g{1.0, 2.0, 0.5};
    for (double delta : {0.1, 0.5, 1.0, 3.0}) {
        CHECK(d.pdf(-delta) == doctest::Approx(d.pdf(delta)).epsilon(1e-14));
        CHECK(g.pdf(1.0 - delta) == doctest::Approx(g.pdf(1.0 + delta)).epsilon(1e-14));
    }

    CHECK_THROWS_AS((SplitDistribution<LaplaceKernel>{0.0, -1.0, 0.5}), std::domain_error);
    CHECK_THROWS_AS((SplitDistribution<LaplaceKernel>{0.0, 1.0, 1.0}), std::domain_error);
    CHECK_THROWS_AS((SplitDistribution<LaplaceKernel>{0.0, 1.0, 0.0}), std::domain_error);
}

TEST_CASE("split cdf: endpoints, mode value, quadrature agreement") {
    SplitDistribution<LaplaceKernel> d{0.0, 1.0, 0.3};
    CHECK(d.cdf(0.0) == doctest::Approx(0.3).epsilon(1e-15));
    CHECK(d.cdf(-1e8) == doctest::Approx(0.0));
    CHECK(d.cdf(1e8) == doctest::Approx(1.0));

    // integrate the pdf directly up to y=1 and compare
    const double by_quadrature =
        oracle::integrate([&](double u) { return d.pdf(u); }, -INFINITY, 1.0);
    CHECK(std::abs(d.cdf(1.0) - by_quadrature) < 1e-8);

    // monotone on a grid
    double prev = 0.0;
    for (double y = -30.0; y <= 30.0; y += 0.125) {
        const double c = d.cdf(y);
        CHECK(c >= prev);
        prev = c;
    }
}

TEST_CASE("split quantile: Q(tau)=mode, roundtrip, median formula") {
    for (const auto& t : random_triples(50, 11)) {
        SplitDistribution<LaplaceKernel> d{t.mu, t.scale, t.asym};
        CHECK(d.quantile(t.asym) == doctest::Approx(t.mu).epsilon(1e-12));
        for (double q : {0.01, 0.25, 0.5, 0.75, 0.99})
            CHECK(std::abs(d.cdf(d.quantile(q)) - q) < 1e-10);
    }
    for (const auto& t : random_triples(50, 12)) {
        SplitDistribution<NormalKernel> d{t.mu, t.scale, t.asym};
        for (double q : {0.01, 0.25, 0.5, 0.75, 0.99})
            CHECK(std::abs(d.cdf(d.quantile(q)) - q) < 1e-10);
    }

    // median of the Laplace-kernel split with tau=0.7, sigma=2, mu=1:
    // mu + sigma/(1-tau) * G^{-1}(1/(4 tau)) = 1 + (2/0.3) log(5/7)
    SplitDistribution<LaplaceKernel> d{1.0, 2.0, 0.7};
    const double expected = 1.0 + 2.0 / 0.3 * std::log(5.0 / 7.0);
    CHECK(expected == doctest::Approx(-1.2431482441414195).epsilon(1e-12));
    CHECK(d.quantile(0.5) == doctest::Approx(expected).epsilon(1e-12));
    // cross-check by bisection on the cdf
    double lo = -50.0, hi = 50.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (d.cdf(mid) < 0.5 ? lo : hi) = mid;
    }
    CHECK(d.quantile(0.5) == doctest::Approx(0.5 * (lo + hi)).epsilon(1e-10));

    CHECK_THROWS_AS(d.quantile(0.0), std::domain_error);
    CHECK_THROWS_AS(d.quantile(1.0), std::domain_error);

    // median sits at or left of the mode when tau >= 1/2, at or right when
    // tau <= 1/2
    for (const auto& t : random_triples(40, 13)) {
        SplitDistribution<LaplaceKernel> s{0.0, t.scale, t.asym};
        const double med = s.quantile(0.5);
        if (t.asym >= 0.5) CHECK(med <= 1e-12);
        if (t.asym <= 0.5) CHECK(med >= -1e-12);
    }
}

TEST_CASE("split moments: closed form vs quadrature and Monte Carlo") {
    // Laplace kernel (c1 = 1/2), sigma=1, tau=0.25:
    // 2 * (1/2) * (1-0.5) / (0.25*0.75) = 8/3
    SplitDistribution<LaplaceKernel> d{0.0, 1.0, 0.25};
    CHECK(d.moment(1) == doctest::Approx(8.0 / 3.0).epsilon(1e-14));
    CHECK(SplitDistribution<LaplaceKernel>{0.0, 1.0, 0.5}.moment(1) == doctest::Approx(0.0));
    CHECK_THROWS_AS(d.moment(4), std::domain_error);

    for (const auto& t : random_triples(25, 21, 0.15, 0.85)) {
        SplitDistribution<LaplaceKernel> s{0.0, t.scale, t.asym};
        for (int k = 1; k <= 3; ++k) {
            const double by_quad = oracle::integrate(
                [&](double e) { return std::pow(e, k) * s.pdf(e); }, -INFINITY, INFINITY);
            CHECK(s.moment(k) == doctest::Approx(by_quad).epsilon(1e-6));
        }
        CHECK(s.moment(2) > 0.0);
        // third moment carries the skew direction
        if (t.asym < 0.49) CHECK(s.moment(3) > 0.0);
        if (t.asym > 0.51) CHECK(s.moment(3) < 0.0);
    }

    // Monte Carlo mean within 3 standard errors of the first moment
    Rng rng(77);
    SplitDistribution<LaplaceKernel> s{0.0, 1.0, 0.25};
    const int n = 100000;
    double sum = 0.0, sumsq = 0.0;
    for (int i = 0; i < n; ++i) {
        const double x = s.sample(rng);
        sum += x;
        sumsq += x * x;
    }
    const double mean = sum / n;
    const double sd = std::sqrt((sumsq - n * mean * mean) / (n - 1));
    CHECK(std::abs(mean - s.moment(1)) < 3.0 * sd / std::sqrt(n));
}

TEST_CASE("split sampling: empty draw, symmetry, KS against the cdf") {
    Rng rng(5);
    SplitDistribution<LaplaceKernel> sym{0.0, 1.0, 0.5};
    std::vector<double> none;
    sym.sample(rng, none);
    CHECK(none.empty());

    const int n = 100000;
    std::vector<double> xs(n);
    sym.sample(rng, xs);
    double m1 = 0, m2 = 0, m3 = 0;
    for (double x : xs) {
        m1 += x;
        m2 += x * x;
        m3 += x * x * x;
    }
    m1 /= n;
    m2 /= n;
    m3 /= n;
    const double sd = std::sqrt(m2 - m1 * m1);
    const double skew = (m3 - 3 * m1 * m2 + 2 * m1 * m1 * m1) / (sd * sd * sd);
    // delta-method SE of sample skewness for this (symmetric, heavy-tailed)
    // law: sqrt(mu6 - 6 mu4 mu2 + 9 mu2^3) / (mu2^{3/2} sqrt(n)); the
    // tau=1/2 split of the Laplace kernel is Laplace with scale 2, whose
    // even moments are mu_k = k! 2^k
    const double mu2 = 8.0, mu4 = 384.0, mu6 = 46080.0;
    const double se_skew =
        std::sqrt((mu6 - 6 * mu4 * mu2 + 9 * mu2 * mu2 * mu2) / n) / std::pow(mu2, 1.5);
    CHECK(std::abs(skew) < 3.0 * se_skew);

    SplitDistribution<NormalKernel> skewed{1.0, 0.7, 0.25};
    std::vector<double> ys(n);
    skewed.sample(rng, ys);
    const double d = oracle::ks_statistic(ys, [&](double y) { return skewed.cdf(y); });
    CHECK(d < oracle::ks_critical(n, 0.001));
}

TEST_CASE("mode invariance: grid argmax lands on the mode") {
    for (const auto& t : random_triples(20, 31)) {
        SplitDistribution<LaplaceKernel> d{t.mu, t.scale, t.asym};
        const double lo = t.mu - 8.0 * t.scale / t.asym;
        const double hi = t.mu + 8.0 * t.scale / (1.0 - t.asym);
        const int grid = 10000;
        double best = lo, best_pdf = -1.0;
        for (int i = 0; i <= grid; ++i) {
            const double y = lo + (hi - lo) * i / grid;
            const double p = d.pdf(y);
            if (p > best_pdf) {
                best_pdf = p;
                best = y;
            }
        }
        CHECK(std::abs(best - t.mu) <= (hi - lo) / grid + 1e-12);
    }
}

TEST_CASE("asymmetric Laplace: closed forms and agreement with the generic family") {
    AsymmetricLaplace d{0.0, 1.0, 0.2};
    CHECK(d.pdf(0.0) == doctest::Approx(0.16).epsilon(1e-14));
    CHECK(d.log_pdf(0.0) == doctest::Approx(std::log(0.2 * 0.8)).epsilon(1e-12));
    CHECK(d.cdf(0.0) == doctest::Approx(0.2).epsilon(1e-15));

    // tail slopes of the log density: (1-tau)/sigma left, -tau/sigma right
    const double h = 1e-6;
    CHECK((d.log_pdf(5.0 + h) - d.log_pdf(5.0)) / h == doctest::Approx(-0.2).epsilon(1e-4));
    CHECK((d.log_pdf(-5.0 + h) - d.log_pdf(-5.0)) / h == doctest::Approx(0.8).epsilon(1e-4));

    // the mode-scale form carries the generic family's factor 2 inside g(0)
    for (const auto& t : random_triples(40, 41)) {
        AsymmetricLaplace a{t.mu, t.scale, t.asym};
        SplitDistribution<LaplaceKernel> s{t.mu, t.scale, t.asym};
        for (double y : {t.mu - 3.1, t.mu - 0.4, t.mu, t.mu + 0.7, t.mu + 2.9}) {
            CHECK(a.pdf(y) == doctest::Approx(s.pdf(y)).epsilon(1e-12));
            CHECK(a.cdf(y) == doctest::Approx(s.cdf(y)).epsilon(1e-12));
        }
        for (double q : {0.05, 0.3, 0.62, 0.97})
            CHECK(a.quantile(q) == doctest::Approx(s.quantile(q)).epsilon(1e-10));
    }

    // analytic cdf at the mode equals tau; quadrature confirms to 1e-10
    const double mass =
        oracle::integrate([&](double y) { return d.pdf(y); }, -INFINITY, 0.0, 1e-12);
    CHECK(std::abs(mass - 0.2) < 1e-10);
}

TEST_CASE("asymmetric normal: normalizer, symmetric case, split equivalence") {
    AsymmetricNormal d{0.0, 1.0, 0.25};
    const double C = 2.0 * std::sqrt(0.25 * 0.75) /
                     (1.0 * std::sqrt(M_PI) * (std::sqrt(0.25) + std::sqrt(0.75)));
    CHECK(d.normalizer() == doctest::Approx(C).epsilon(1e-14));
    CHECK(d.pdf(0.0) == doctest::Approx(C).epsilon(1e-14));

    // tau = 1/2: exponent -0.5 e^2/sigma^2 with C(1/2) = 1/(sigma sqrt(2 pi)),
    // i.e. exactly the N(mu, sigma^2) density
    AsymmetricNormal sym{0.5, 1.3, 0.5};
    for (double y = -4.0; y <= 5.0; y += 0.37) {
        const double normal_pdf = 1.0 / (1.3 * std::sqrt(2.0 * M_PI)) *
                                  std::exp(-(y - 0.5) * (y - 0.5) / (2.0 * 1.3 * 1.3));
        CHECK(sym.pdf(y) == doctest::Approx(normal_pdf).epsilon(1e-12));
    }

    // pdf of the wrapper matches its generic split representation everywhere
    for (const auto& t : random_triples(40, 51)) {
        AsymmetricNormal a{t.mu, t.scale, t.asym};
        for (double y : {t.mu - 2.2, t.mu - 0.1, t.mu, t.mu + 0.6, t.mu + 3.3})
            CHECK(a.pdf(y) == doctest::Approx(a.as_split().pdf(y)).epsilon(1e-12));
        const double total =
            oracle::integrate([&](double y) { return a.pdf(y); }, -INFINITY, INFINITY);
        CHECK(std::abs(total - 1.0) < 1e-8);
    }
}

TEST_CASE("reverse Gumbel: mode density, cdf, quantile roundtrip, tails") {
    ReverseGumbel d{2.0, 0.5};
    CHECK(d.pdf(2.0) == doctest::Approx(std::exp(-1.0) / 0.5).epsilon(1e-14));
    CHECK(d.cdf(2.0) == doctest::Approx(1.0 - std::exp(-1.0)).epsilon(1e-14));
    CHECK_THROWS_AS((ReverseGumbel{0.0, 0.0}), std::domain_error);

    // grid kept where the cdf stays representable in a double; beyond
    // mu + ~2.5 beta the mass 1-q falls under machine precision
    for (double y = -3.0; y <= 2.95; y += 0.23)
        CHECK(d.quantile(d.cdf(y)) == doctest::Approx(y).epsilon(1e-12));

    // argmax at mu, left tail log-slope 1/beta
    double best = -10, best_pdf = -1;
    for (double y = -6.0; y <= 6.0; y += 0.001) {
        if (d.pdf(y) > best_pdf) {
            best_pdf = d.pdf(y);
            best = y;
        }
    }
    CHECK(std::abs(best - 2.0) < 0.002);
    const double h = 1e-6;
    CHECK((d.log_pdf(-8.0 + h) - d.log_pdf(-8.0)) / h == doctest::Approx(2.0).epsilon(1e-4));

    // deep right tail underflows to -inf rather than NaN
    CHECK(std::isinf(ReverseGumbel::log_pdf(800.0, 1.0)));
    CHECK(ReverseGumbel::log_pdf(800.0, 1.0) < 0.0);

    const double total = oracle::integrate([&](double y) { return d.pdf(y); }, -INFINITY, INFINITY);
    CHECK(std::abs(total - 1.0) < 1e-8);

    Rng rng(9);
    const int n = 100000;
    std::vector<double> xs(n);
    for (double& x : xs) x = d.sample(rng);
    CHECK(oracle::ks_statistic(xs, [&](double y) { return d.cdf(y); }) <
          oracle::ks_critical(n, 0.001));
}

TEST_CASE("rate parametrization: conversion identities and density match") {
    // equal tail rates require tau = kappa^2/(1+kappa^2), sigma = beta kappa/(1+kappa^2)
    for (double kappa : {0.4, 1.0, 2.5}) {
        const double tau = AsymmetricLaplaceRate::tau_from_kappa(kappa);
        CHECK(AsymmetricLaplaceRate::kappa_from_tau(tau) == doctest::Approx(kappa).epsilon(1e-12));
        const double beta = 1.7;
        AsymmetricLaplaceRate r{0.3, beta, kappa};
        AsymmetricLaplace a = r.as_mode_scale();
        CHECK(a.asymmetry() == doctest::Approx(tau).epsilon(1e-14));
        for (double y : {-4.0, -0.2, 0.3, 0.9, 5.0})
            CHECK(r.log_pdf(y) == doctest::Approx(a.log_pdf(y)).epsilon(1e-12));
        const double total =
            oracle::integrate([&](double y) { return std::exp(r.log_pdf(y)); }, -INFINITY, INFINITY);
        CHECK(std::abs(total - 1.0) < 1e-8);
    }

    // compounding a normal over an Exp(1) latent scale reproduces the density
    Rng rng(123);
    const double beta = 0.8, kappa = 1.6;
    AsymmetricLaplaceRate r{0.0, beta, kappa};
    const int n = 200000;
    std::vector<double> ys(n);
    for (double& y : ys) {
        const double v = rng.exponential();
        y = rng.normal(beta * (1.0 / kappa - kappa) * v, std::sqrt(2.0 * beta * beta * v));
    }
    CHECK(oracle::ks_statistic(ys, [&](double y) { return r.cdf(y); }) <
          oracle::ks_critical(n, 0.001));
}
