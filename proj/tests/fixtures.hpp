#pragma once

#include "drfuse/panel.hpp"
#include "drfuse/rng.hpp"
#include "drfuse/simulator.hpp"

#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

namespace fixture {

// Two models: "perfect" puts 0.8 on the true class and 0.1 elsewhere,
// "random" emits Dirichlet(1, 1, 1) draws independent of the truth.
inline drfuse::PredictionPanel separable_panel(std::uint64_t seed) {
    using namespace drfuse;
    PanelSpec spec;
    spec.seed = seed;
    const auto labels = gen_labels(spec);
    Rng rng(derive_seed(seed, 99));
    std::vector<std::string> samples;
    std::vector<ProbVector> grid(2 * labels.size());
    for (std::size_t n = 0; n < labels.size(); ++n) {
        char id[32];
        std::snprintf(id, sizeof(id), "s%04zu", n);
        samples.push_back(id);
        std::vector<double> hot(3, 0.1);
        hot[static_cast<std::size_t>(labels[n])] = 0.8;
        grid[n] = ProbVector::validate(hot);
        std::vector<double> r(3);
        double s = 0;
        for (auto& v : r) s += v = -std::log(1.0 - rng.uniform());
        for (auto& v : r) v /= s;
        grid[labels.size() + n] = ProbVector::from_trusted(r);
    }
    return PredictionPanel({"perfect", "random"}, samples, 3, grid, labels);
}

}  // namespace fixture
