#pragma once

// Synthetic stand-ins for a real classifier panel: seeded label sequences,
// panels of imperfect base classifiers with controllable shared errors, and a
// toy shared-trunk two-head model for exercising the multi-task loss.

#include "drfuse/fusion_net.hpp"
#include "drfuse/losses.hpp"
#include "drfuse/panel.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace drfuse {

enum class ConfusionProfile {
    AdjacentBiased,  ///< wrong grade j drawn with weight 1/|j - y|^2
    Uniform,
};

std::string_view confusion_profile_name(ConfusionProfile p) noexcept;
ConfusionProfile parse_confusion_profile(std::string_view name);

struct PanelSpec {
    std::size_t n_models = 16;
    std::size_t n_samples = 611;
    std::size_t classes = kDefaultClasses;
    std::vector<double> class_distribution{0.538, 0.347, 0.115};
    /// One value per model, or a single value shared by all models.
    std::vector<double> per_model_accuracy{0.75};
    ConfusionProfile confusion_profile = ConfusionProfile::AdjacentBiased;
    /// Mass on the predicted class before noise is s / (s + K - 1).
    double sharpness = 4.0;
    /// Log-odds jitter applied to emitted probabilities.
    double noise = 0.5;
    /// Probability that a sample triggers a shared draw for all models.
    double correlation = 0.0;
    std::uint64_t seed = 1;

    void validate() const;
    double accuracy_of(std::size_t model) const;
};

/// Exact largest-remainder class counts in a seeded random order.
std::vector<Label> gen_labels(const PanelSpec& spec);

PredictionPanel gen_panel(std::span<const Label> labels, const PanelSpec& spec);

/// gen_panel(gen_labels(spec), spec)
PredictionPanel simulate_panel(const PanelSpec& spec);

// ---------------------------------------------------------------------------
// toy multi-task model

struct ToyMultiTaskSpec {
    std::size_t features = 8;
    std::size_t trunk = 4;
    std::size_t classes = kDefaultClasses;
    std::size_t quality_classes = 3;
    std::size_t n_samples = 600;
    double val_fraction = 0.2;
    double noise = 0.5;
    std::vector<double> class_distribution{0.538, 0.347, 0.115};
    std::vector<double> lambdas{0.0, 0.01, 0.1, 1.0};
    ClassWeights task2_weights = default_task2_weights();
    TrainConfig train;
    std::uint64_t seed = 11;

    void validate() const;
};

struct ToyData {
    std::size_t features = 0;
    std::vector<double> x;        ///< n x features
    std::vector<Label> grade;     ///< main task
    std::vector<Label> quality;   ///< auxiliary task

    std::size_t size() const noexcept { return grade.size(); }
};

ToyData gen_toy_data(const ToyMultiTaskSpec& spec);

/// Linear shared trunk followed by two affine heads. Flat layout:
/// W (trunk x features), b, A3 (classes x trunk), c3, A2 (quality x trunk), c2.
struct ToyModel {
    std::size_t features = 0, trunk = 0, classes = 0, quality = 0;
    std::vector<double> params;

    static ToyModel init(const ToyMultiTaskSpec& spec, std::uint64_t seed);
    std::size_t a3_offset() const noexcept { return trunk * features + trunk; }
    std::size_t a2_offset() const noexcept { return a3_offset() + classes * trunk + classes; }
};

enum class ToyTask { Grade, Quality };

/// Weighted CE of one head over a batch; gradient spans all model parameters
/// (zero on the other head).
LossValue toy_task_loss(const ToyModel& model, const ToyData& data, std::span<const std::size_t> batch,
                        ToyTask task, const ClassWeights& weights, Reduction reduction);

/// Grade-head logits for one sample.
std::vector<double> toy_grade_logits(const ToyModel& model, std::span<const double> x);

struct ToyEpoch {
    int epoch = 0;
    double lr = 0.0;
    double loss3 = 0.0;
    double loss2 = 0.0;
    double total = 0.0;
    double val_qwk = 0.0;
    double val_auc = 0.0;
    bool val_degenerate = false;
};

struct ToyRunResult {
    double lambda = 0.0;
    bool single_task = false;
    std::vector<ToyEpoch> history;
    int best_epoch = 0;
    double best_val_qwk = 0.0;
    ToyModel final_model;
};

/// One run per lambda in spec.lambdas.
std::vector<ToyRunResult> toy_multitask_run(const ToyMultiTaskSpec& spec);
/// One run with the given lambda.
ToyRunResult toy_train(const ToyMultiTaskSpec& spec, double lambda);
/// Main-task-only baseline with the same seed and schedule.
ToyRunResult toy_single_task_run(const ToyMultiTaskSpec& spec);

}  // namespace drfuse
