#pragma once

// Label-fusion network: concatenated panel probabilities (M*K) -> affine ->
// rectifier -> affine -> softmax over K grades, trained with mini-batch SGD
// under an exponentially decaying learning rate, keeping the epoch with the
// best validation QWK.

#include "drfuse/losses.hpp"
#include "drfuse/panel.hpp"
#include "drfuse/splitting.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace drfuse {

struct FusionDims {
    std::size_t input = 0;
    std::size_t hidden = 32;
    std::size_t output = kDefaultClasses;

    std::size_t parameter_count() const noexcept { return input * hidden + hidden + hidden * output + output; }
    friend bool operator==(const FusionDims&, const FusionDims&) = default;
};

class FusionNet {
public:
    FusionNet() = default;
    /// Zero-initialised parameters.
    explicit FusionNet(const FusionDims& dims);

    /// Glorot-uniform weights in +-sqrt(6 / (fan_in + fan_out)), zero biases.
    static FusionNet init(const FusionDims& dims, std::uint64_t seed);

    const FusionDims& dims() const noexcept { return dims_; }
    std::size_t parameter_count() const noexcept { return params_.size(); }

    /// Flat layout: W1 (hidden x input, row-major), b1, W2 (output x hidden), b2.
    std::span<const double> parameters() const noexcept { return params_; }
    std::span<double> parameters() noexcept { return params_; }

    std::span<const double> w1() const { return {params_.data(), dims_.hidden * dims_.input}; }
    std::span<const double> b1() const { return {params_.data() + b1_offset(), dims_.hidden}; }
    std::span<const double> w2() const { return {params_.data() + w2_offset(), dims_.output * dims_.hidden}; }
    std::span<const double> b2() const { return {params_.data() + b2_offset(), dims_.output}; }
    std::span<double> w1() { return {params_.data(), dims_.hidden * dims_.input}; }
    std::span<double> b1() { return {params_.data() + b1_offset(), dims_.hidden}; }
    std::span<double> w2() { return {params_.data() + w2_offset(), dims_.output * dims_.hidden}; }
    std::span<double> b2() { return {params_.data() + b2_offset(), dims_.output}; }

    std::size_t b1_offset() const noexcept { return dims_.hidden * dims_.input; }
    std::size_t w2_offset() const noexcept { return b1_offset() + dims_.hidden; }
    std::size_t b2_offset() const noexcept { return w2_offset() + dims_.output * dims_.hidden; }

    friend bool operator==(const FusionNet&, const FusionNet&) = default;

private:
    FusionDims dims_;
    std::vector<double> params_;
};

struct ForwardTrace {
    std::vector<double> input;
    std::vector<double> hidden_pre;
    std::vector<double> hidden;
    std::vector<double> logits;
    ProbVector output;
};

ForwardTrace forward(const FusionNet& net, std::span<const double> input);

/// Gradient of the weighted cross-entropy of a batch with respect to every
/// parameter, in the flat layout of FusionNet::parameters().
std::vector<double> backward(const FusionNet& net, std::span<const ForwardTrace> traces,
                             std::span<const Label> targets, const ClassWeights& weights,
                             Reduction reduction = Reduction::WeightedMean);

struct TrainConfig {
    double initial_lr = 0.001;
    double decay = 0.9;
    int epochs = 20;
    std::size_t batch_size = 25;
    std::uint64_t seed = 7;
    std::size_t hidden = 32;
    /// Per-batch loss reduction used for the SGD step.
    Reduction reduction = Reduction::Sum;
    /// Defaults to inverse-frequency weights of the training labels.
    std::optional<ClassWeights> class_weights;

    void validate() const;
    /// initial_lr * decay^epoch_index (epoch_index counted from 0)
    double learning_rate(int epoch_index) const;
};

/// Row-major samples x width design matrix with labels.
struct FusionDataset {
    std::size_t width = 0;
    std::vector<double> inputs;
    std::vector<Label> labels;

    std::size_t size() const noexcept { return labels.size(); }
    std::span<const double> row(std::size_t i) const { return {inputs.data() + i * width, width}; }
};

FusionDataset make_fusion_dataset(const PredictionPanel& panel, std::span<const std::size_t> sample_indices);

struct EpochRecord {
    int epoch = 0;  ///< 1-based
    double lr = 0.0;
    double train_loss = 0.0;  ///< weighted mean over the epoch
    double val_qwk = 0.0;
    double val_auc = 0.0;
    bool val_degenerate = false;
};

struct Checkpoint {
    int epoch = 0;
    FusionNet net;
    double val_qwk = 0.0;
    double val_auc = 0.0;
};

struct TrainResult {
    Checkpoint best;
    std::vector<EpochRecord> history;
    ClassWeights class_weights;
};

TrainResult train_fusion(const FusionDataset& train, const FusionDataset& val, std::size_t classes,
                         const TrainConfig& cfg);

/// Trains on the Train-tagged samples and checkpoints on the Val-tagged ones.
TrainResult train_fusion(const PredictionPanel& panel, const SplitAssignment& assignment, const TrainConfig& cfg);

struct TrainingMetadata {
    std::uint64_t seed = 0;
    TrainConfig config;
    int best_epoch = 0;
    double val_qwk = 0.0;
    double val_auc = 0.0;
};

/// JSON model document (schema_version 1).
std::string serialize(const FusionNet& net, const std::optional<TrainingMetadata>& meta = std::nullopt);
FusionNet deserialize(std::string_view text, std::optional<TrainingMetadata>* meta = nullptr);

void save_model(const std::string& path, const FusionNet& net, const std::optional<TrainingMetadata>& meta);
FusionNet load_model(const std::string& path, std::optional<TrainingMetadata>* meta = nullptr);

}  // namespace drfuse
