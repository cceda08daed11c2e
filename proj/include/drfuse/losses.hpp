#pragma once

#include "drfuse/panel.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace drfuse {

/// Max-subtracted softmax.
ProbVector softmax(std::span<const double> logits);

/// Writes softmax(logits) into `out` (same length), no allocation.
void softmax_into(std::span<const double> logits, std::span<double> out);

class ClassWeights {
public:
    ClassWeights() = default;
    explicit ClassWeights(std::vector<double> weights);  ///< throws unless all finite and > 0

    static ClassWeights uniform(std::size_t classes) { return ClassWeights(std::vector<double>(classes, 1.0)); }

    std::size_t size() const noexcept { return weights_.size(); }
    double operator[](std::size_t i) const { return weights_[i]; }
    std::span<const double> values() const noexcept { return weights_; }

    friend bool operator==(const ClassWeights&, const ClassWeights&) = default;

private:
    std::vector<double> weights_;
};

/// Image-quality weights used for the auxiliary task.
ClassWeights default_task2_weights();

/// w_i = N / count_i, rescaled so the weights sum to K.
ClassWeights inverse_frequency_weights(std::span<const std::int64_t> class_counts);

enum class Reduction {
    WeightedMean,  ///< sum_n w[y_n] * l_n / sum_n w[y_n]
    Sum,           ///< sum_n w[y_n] * l_n
};

struct LossValue {
    double value = 0.0;
    std::vector<double> gradient;
};

/// Weighted cross-entropy over a row-major batch of logits (batch x K).
/// The gradient is with respect to the logits, same layout.
LossValue weighted_ce(std::span<const double> logits, std::span<const Label> targets, const ClassWeights& weights,
                      Reduction reduction = Reduction::WeightedMean);

struct MultiTaskConfig {
    double lambda = 0.1;
    ClassWeights task2_weights = default_task2_weights();
    ClassWeights task3_weights = ClassWeights::uniform(kDefaultClasses);
};

/// Loss_total = Loss_task3 + lambda * Loss_task2, gradients combined
/// element-wise in the shared parameter space. lambda == 0 returns loss3
/// unchanged.
LossValue multitask_loss(const LossValue& loss3, const LossValue& loss2, const MultiTaskConfig& cfg);

}  // namespace drfuse
