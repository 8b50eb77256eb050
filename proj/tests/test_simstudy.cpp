#include <doctest.h>

#include <cmath>
#include <sstream>

#include "modalcomb/simstudy.hpp"
#include "oracle.hpp"

using namespace modalcomb;

TEST_CASE("dataset generation: determinism and residual law") {
    SimConfig cfg;
    cfg.family = ErrorFamily::ald;
    cfg.grid_value = 0.5;
    cfg.seed = 404;
    const TrainingWindow a = generate_dataset(cfg, 3);
    const TrainingWindow b = generate_dataset(cfg, 3);
    CHECK(a.y == b.y);
    CHECK(a.x == b.x);
    const TrainingWindow c = generate_dataset(cfg, 4);
    CHECK(a.y != c.y);

    SUBCASE("symmetric tau: residual skewness within 3 SE of zero") {
        cfg.n_obs = 120;
        double m1 = 0, m2 = 0, m3 = 0;
        int n_total = 0;
        for (int rep = 0; rep < 100; ++rep) {
            const TrainingWindow w = generate_dataset(cfg, rep);
            for (int t = 0; t < w.length(); ++t) {
                double resid = w.y[t];
                for (int j = 0; j < 4; ++j) resid -= 0.25 * w.x[t][j];
                m1 += resid;
                m2 += resid * resid;
                m3 += resid * resid * resid;
                ++n_total;
            }
        }
        m1 /= n_total;
        m2 /= n_total;
        m3 /= n_total;
        const double sd = std::sqrt(m2 - m1 * m1);
        const double skew = (m3 - 3 * m1 * m2 + 2 * m1 * m1 * m1) / (sd * sd * sd);
        // tau=1/2 residuals are Laplace(0, 2 sigma): delta-method skewness SE
        const double mu2 = 8.0, mu4 = 384.0, mu6 = 46080.0;
        const double se =
            std::sqrt((mu6 - 6 * mu4 * mu2 + 9 * mu2 * mu2 * mu2) / n_total) / std::pow(mu2, 1.5);
        CHECK(std::abs(skew) < 3.0 * se);
    }

    SUBCASE("reverse Gumbel residuals match the cdf (pooled KS)") {
        SimConfig rg;
        rg.family = ErrorFamily::rg;
        rg.grid_value = 5.0;
        rg.n_obs = 100;
        rg.seed = 7;
        std::vector<double> resid;
        for (int rep = 0; rep < 100; ++rep) {
            const TrainingWindow w = generate_dataset(rg, rep);
            for (int t = 0; t < w.length(); ++t) {
                double r = w.y[t];
                for (int j = 0; j < 4; ++j) r -= 0.25 * w.x[t][j];
                resid.push_back(r);
            }
        }
        const ReverseGumbel d{0.0, 5.0};
        CHECK(oracle::ks_statistic(resid, [&](double y) { return d.cdf(y); }) < 0.02);
    }

    SUBCASE("latent protocol draws through the scale mixture") {
        SimConfig lat;
        lat.family = ErrorFamily::ald_latent;
        lat.grid_value = 2.0;  // kappa
        lat.sigma_true = 1.0;  // beta
        lat.n_obs = 100;
        lat.seed = 8;
        std::vector<double> resid;
        for (int rep = 0; rep < 100; ++rep) {
            const TrainingWindow w = generate_dataset(lat, rep);
            for (int t = 0; t < w.length(); ++t) {
                double r = w.y[t];
                for (int j = 0; j < 4; ++j) r -= 0.25 * w.x[t][j];
                resid.push_back(r);
            }
        }
        const AsymmetricLaplaceRate d{0.0, 1.0, 2.0};
        CHECK(oracle::ks_statistic(resid, [&](double y) { return d.cdf(y); }) < 0.02);
    }
}

TEST_CASE("evaluate_replicates: degenerate, analytic normal oracle, formula identity") {
    SUBCASE("all replicate means at the truth") {
        std::vector<ReplicateSummary> reps(5);
        for (auto& r : reps) {
            r.names = {"w0"};
            r.post_mean = {0.3};
            r.post_sd = {0.1};
            r.q025 = {0.1};
            r.q975 = {0.5};
        }
        const auto rows = evaluate_replicates(reps, {{"w0", 0.3}});
        CHECK(rows[0].bias == doctest::Approx(0.0));
        CHECK(rows[0].mcse == doctest::Approx(0.0));
        CHECK(rows[0].avg_se == doctest::Approx(0.1));
        CHECK(rows[0].cov == doctest::Approx(1.0));
    }

    SUBCASE("normal replicates: coverage near 0.95, AVG.SE near 1") {
        // each replicate's posterior is N(theta_hat_j, 1) with theta_hat_j ~
        // N(theta_true, 1); interval j covers iff |theta_hat_j - theta| < 1.96
        Rng rng(3);
        const int N = 4000;
        std::vector<ReplicateSummary> reps(N);
        for (auto& r : reps) {
            const double centre = rng.normal(2.0, 1.0);
            r.names = {"p"};
            r.post_mean = {centre};
            r.post_sd = {1.0};
            r.q025 = {centre - 1.959963984540054};
            r.q975 = {centre + 1.959963984540054};
        }
        const auto rows = evaluate_replicates(reps, {{"p", 2.0}});
        CHECK(rows[0].avg_se == doctest::Approx(1.0));
        CHECK(std::abs(rows[0].cov - 0.95) < 3.0 * std::sqrt(0.95 * 0.05 / N));
        CHECK(std::abs(rows[0].bias) < 3.0 * rows[0].mcse);

        // the MCSE definition, recomputed independently
        double grand = 0.0;
        for (const auto& r : reps) grand += r.post_mean[0];
        grand /= N;
        double ss = 0.0;
        for (const auto& r : reps) ss += (r.post_mean[0] - grand) * (r.post_mean[0] - grand);
        const double mcse = std::sqrt(ss / (static_cast<double>(N) * (N - 1)));
        CHECK(rows[0].mcse == doctest::Approx(mcse).epsilon(1e-12));
    }

    std::vector<ReplicateSummary> one(1);
    one[0].names = {"x"};
    one[0].post_mean = {0.0};
    one[0].post_sd = {1.0};
    one[0].q025 = {-1.0};
    one[0].q975 = {1.0};
    CHECK_THROWS_AS(evaluate_replicates(one, {{"x", 0.0}}), std::invalid_argument);
}

TEST_CASE("small full pipeline: recovery and reproducibility") {
    SimConfig cfg;
    cfg.family = ErrorFamily::ald;
    cfg.grid_value = 0.25;
    cfg.n_replications = 40;
    cfg.n_obs = 60;
    cfg.chains.n_chains = 2;
    cfg.chains.burn_in = 400;
    cfg.chains.post_burn_in = 800;
    cfg.priors = sim_default_priors(cfg.family, 4);
    cfg.seed = 2024;
    cfg.threads = 2;

    const SimStudyReport rep = run_sim_study(cfg);
    REQUIRE(rep.rows.size() == 7);  // w0, w1..w4, sigma, tau

    // weights essentially unbiased; coverage inside a wide exact binomial
    // band for N=40
    const double lo = oracle::binomial_quantile(40, 0.95, 0.005) / 40.0;
    for (const auto& name : {"w1", "w2", "w3", "w4"}) {
        const CellStats& c = rep.row(name);
        CHECK(std::abs(c.bias) < std::max(4.0 * c.mcse, 0.02));
        CHECK(c.cov >= lo);
        CHECK(c.cov <= 1.0);
    }
    const CellStats& tau = rep.row("tau");
    CHECK(std::abs(tau.bias) < 0.05);
    CHECK(tau.cov >= lo);

    // same master seed, different thread count: identical report
    SimConfig again = cfg;
    again.threads = 1;
    const SimStudyReport rep2 = run_sim_study(again);
    for (std::size_t i = 0; i < rep.rows.size(); ++i) {
        CHECK(rep.rows[i].bias == rep2.rows[i].bias);
        CHECK(rep.rows[i].avg_se == rep2.rows[i].avg_se);
        CHECK(rep.rows[i].mcse == rep2.rows[i].mcse);
        CHECK(rep.rows[i].cov == rep2.rows[i].cov);
    }
}

TEST_CASE("report emission: csv fields and aligned text table") {
    SimStudyReport rep;
    rep.family = "ald";
    rep.grid_symbol = "tau";
    rep.grid_value = 0.25;
    rep.rows = {{"w0", 0.0271, 0.018, 0.0161, 0.97}, {"sigma", -0.003, 0.007, 0.006, 0.95}};
    SimStudyReport rep2 = rep;
    rep2.grid_value = 0.5;

    const std::vector<SimStudyReport> reports{rep, rep2};
    const CsvTable t = report_to_csv(reports);
    CHECK(t.header.size() == 8);
    CHECK(t.rows.size() == 4);
    CHECK(t.rows[0][3] == "w0");
    CHECK(std::stod(t.rows[0][4]) == doctest::Approx(0.0271));

    std::ostringstream os;
    report_to_text(os, reports);
    const std::string text = os.str();
    CHECK(text.find("Parameter") != std::string::npos);
    CHECK(text.find("BIAS") != std::string::npos);
    CHECK(text.find("0.027") != std::string::npos);  // three decimals
    CHECK(text.find("w0") != std::string::npos);
    CHECK(text.find("sigma") != std::string::npos);
}
