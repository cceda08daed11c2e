#pragma once

// Run configuration: an INI-style document with [split], [train], [multitask],
// [simulate], [ensemble] and [output] sections. Every key is optional and
// defaults to the owning module's value; unknown sections or keys are errors.

#include "drfuse/ensemble.hpp"
#include "drfuse/fusion_net.hpp"
#include "drfuse/losses.hpp"
#include "drfuse/simulator.hpp"
#include "drfuse/splitting.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace drfuse {

struct OutputPaths {
    std::string predictions = "predictions.csv";
    std::string labels = "labels.csv";
    std::string splits = "splits.csv";
    std::string metrics = "metrics.csv";
    std::string ensemble = "ensemble.csv";
    std::string model = "fusion_model.json";
    std::string history = "history.csv";
    std::string report = "report.txt";
};

struct MultiTaskRunConfig {
    MultiTaskConfig loss;
    std::vector<double> lambdas{0.0, 0.01, 0.1, 1.0};
    std::size_t n_samples = 600;
    std::uint64_t seed = 11;
};

struct RunConfig {
    SplitSpec split;
    TrainConfig train;
    MultiTaskRunConfig multitask;
    PanelSpec simulate;
    StrategyKind strategy = StrategyKind::Averaging;
    OutputPaths output;

    /// Fully qualified keys ("section.key") in canonical order.
    static const std::vector<std::string>& keys();

    /// Assigns one key; throws Config naming the key on unknown keys or bad values.
    void set(std::string_view key, std::string_view value);
    /// Current value of a key in the same textual form `set` accepts.
    std::string get(std::string_view key) const;

    /// Cross-field checks; failures are Config errors naming the key.
    void validate() const;

    /// key = value lines for every key, in canonical order.
    std::string canonical() const;
    /// fnv1a-64 of canonical(), hex.
    std::string hash() const;
};

/// Parses INI text over the defaults. Does not call validate().
RunConfig parse_run_config(std::string_view text);
RunConfig load_run_config(const std::string& path);

/// ToyMultiTaskSpec assembled from the multitask and train sections.
ToyMultiTaskSpec toy_spec(const RunConfig& cfg);

}  // namespace drfuse
