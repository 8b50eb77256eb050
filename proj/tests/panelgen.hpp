// Synthetic forecast-panel generator used by the forecast tests and the
// acceptance suite: heterogeneous sharp weight vectors per entity, biased
// experts around a drifting level, right-skewed asymmetric Laplace truth
// noise, and sparse random missingness.
#pragma once

#include <string>
#include <vector>

#include "modalcomb/forecast.hpp"
#include "modalcomb/splitdist.hpp"

namespace panelgen {

struct PanelGenConfig {
    int n_entities = 23;
    int n_quarters = 36;
    int n_forecasters = 4;
    double noise_scale = 0.35;   // ALD sigma of the truth noise
    double noise_asym = 0.3;     // ALD tau; < 0.5 = right skewed
    double expert_bias_sd = 3.0; // spread of fixed per-expert biases
    double expert_noise_sd = 0.6;
    double missing_rate = 0.07;
    std::uint64_t seed = 1;
};

inline std::vector<modalcomb::ForecastPanel> make_panels(const PanelGenConfig& cfg) {
    using modalcomb::Rng;
    std::vector<modalcomb::ForecastPanel> panels;
    for (int e = 0; e < cfg.n_entities; ++e) {
        Rng rng(cfg.seed, modalcomb::stream_id(9, static_cast<std::uint64_t>(e)));
        modalcomb::ForecastPanel p;
        p.ticker = "E" + std::string(e < 10 ? "0" : "") + std::to_string(e);

        // sharp weights: concentrated Dirichlet, far from equal weighting
        std::vector<double> alpha(cfg.n_forecasters, 0.35);
        std::vector<double> w = rng.dirichlet(alpha);
        const double w0 = rng.normal(0.0, 0.1);
        std::vector<double> bias(cfg.n_forecasters);
        for (double& b : bias) b = rng.normal(0.0, cfg.expert_bias_sd);

        modalcomb::AsymmetricLaplace noise{0.0, cfg.noise_scale, cfg.noise_asym};
        double level = 10.0;
        for (int t = 0; t < cfg.n_quarters; ++t) {
            level += rng.normal(0.0, 0.8);
            std::vector<double> row(cfg.n_forecasters);
            double mode = w0;
            for (int j = 0; j < cfg.n_forecasters; ++j) {
                row[j] = level + bias[j] + rng.normal(0.0, cfg.expert_noise_sd);
                mode += w[j] * row[j];
            }
            const double y = mode + noise.sample(rng);
            // sparse missingness, never the whole row
            int n_missing = 0;
            for (int j = 0; j < cfg.n_forecasters; ++j)
                if (rng.uniform() < cfg.missing_rate && n_missing + 1 < cfg.n_forecasters) {
                    row[j] = std::nan("");
                    ++n_missing;
                }
            char label[16];
            std::snprintf(label, sizeof(label), "%04dQ%d", 2015 + t / 4, t % 4 + 1);
            p.periods.emplace_back(label);
            p.actual.push_back(y);
            p.forecasts.push_back(std::move(row));
        }
        panels.push_back(std::move(p));
    }
    return panels;
}

}  // namespace panelgen
