#pragma once

// Domain types for multi-model prediction data: validated probability
// vectors, raw prediction records and the aligned model x sample panel.

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace drfuse {

/// Class index in [0, K). Default grading classes: Normal=0, NPDR=1, PDR=2.
using Label = int;

inline constexpr int kDefaultClasses = 3;

/// Acceptance windows for |sum - 1| of incoming probability vectors.
struct TolerancePolicy {
    double accept = 1e-6;       ///< taken as-is at or below this deviation
    double renormalize = 1e-3;  ///< divided by the sum at or below this, rejected above
};

/// A point on the probability simplex.
class ProbVector {
public:
    ProbVector() = default;

    /// Checks finiteness, non-negativity and the sum under `policy`.
    /// Sets `*renormalized` when the vector had to be rescaled.
    static ProbVector validate(std::span<const double> raw, const TolerancePolicy& policy = {},
                               bool* renormalized = nullptr);

    /// Wraps values produced internally (softmax, averaging) that are on the
    /// simplex by construction. Only finiteness is checked.
    static ProbVector from_trusted(std::vector<double> values);

    static ProbVector uniform(std::size_t k);
    static ProbVector one_hot(std::size_t k, Label label);

    std::size_t size() const noexcept { return probs_.size(); }
    double operator[](std::size_t i) const { return probs_[i]; }
    std::span<const double> values() const noexcept { return probs_; }

    /// Highest-probability class; ties go to the lowest index.
    Label argmax() const;

    friend bool operator==(const ProbVector&, const ProbVector&) = default;

private:
    explicit ProbVector(std::vector<double> probs) : probs_(std::move(probs)) {}
    std::vector<double> probs_;
};

inline ProbVector validate_prob_vector(std::span<const double> raw, const TolerancePolicy& policy = {},
                                       bool* renormalized = nullptr) {
    return ProbVector::validate(raw, policy, renormalized);
}

/// Lowest-index argmax over raw values.
Label argmax(std::span<const double> values);

struct PredictionRecord {
    std::string sample_id;
    std::string model_id;
    ProbVector probs;
    std::optional<Label> true_label;
};

/// Complete model x sample grid of probability vectors. Models and samples are
/// kept in lexicographic id order.
class PredictionPanel {
public:
    PredictionPanel() = default;
    PredictionPanel(std::vector<std::string> models, std::vector<std::string> samples, std::size_t classes,
                    std::vector<ProbVector> grid, std::optional<std::vector<Label>> labels);

    std::size_t num_models() const noexcept { return models_.size(); }
    std::size_t num_samples() const noexcept { return samples_.size(); }
    std::size_t num_classes() const noexcept { return classes_; }

    const std::vector<std::string>& models() const noexcept { return models_; }
    const std::vector<std::string>& samples() const noexcept { return samples_; }

    const ProbVector& at(std::size_t model, std::size_t sample) const {
        return grid_[model * samples_.size() + sample];
    }

    /// The M probability vectors for one sample, in model order.
    std::vector<ProbVector> column(std::size_t sample) const;
    /// The N probability vectors of one model, in sample order.
    std::span<const ProbVector> row(std::size_t model) const {
        return {grid_.data() + model * samples_.size(), samples_.size()};
    }

    /// Concatenated probabilities of one sample (width M*K), model order.
    std::vector<double> flat_column(std::size_t sample) const;

    bool has_labels() const noexcept { return labels_.has_value(); }
    const std::vector<Label>& labels() const;

    /// Panel restricted to the given sample indices (kept in the given order).
    PredictionPanel select_samples(std::span<const std::size_t> indices) const;
    /// Panel restricted to the given model indices.
    PredictionPanel select_models(std::span<const std::size_t> indices) const;

    /// Index lookups; throw when absent.
    std::size_t model_index(const std::string& id) const;
    std::size_t sample_index(const std::string& id) const;

    /// Flattens back into records (sample-major, then model).
    std::vector<PredictionRecord> to_records() const;

    friend bool operator==(const PredictionPanel&, const PredictionPanel&) = default;

private:
    std::vector<std::string> models_;
    std::vector<std::string> samples_;
    std::size_t classes_ = 0;
    std::vector<ProbVector> grid_;
    std::optional<std::vector<Label>> labels_;
};

/// Builds the canonical panel from unordered records.
///
/// Labels are attached only when every sample carries one and all of its
/// records agree; a panel with no labels at all is valid (unlabeled test data).
PredictionPanel assemble_panel(std::span<const PredictionRecord> records);

}  // namespace drfuse
