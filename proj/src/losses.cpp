#include "drfuse/losses.hpp"

#include "drfuse/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace drfuse {

void softmax_into(std::span<const double> logits, std::span<double> out) {
    double mx = -INFINITY;
    for (double z : logits) {
        if (!std::isfinite(z)) throw Error(ErrorKind::NonFiniteInput, "non-finite logit");
        mx = std::max(mx, z);
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        out[i] = std::exp(logits[i] - mx);
        sum += out[i];
    }
    for (std::size_t i = 0; i < logits.size(); ++i) out[i] /= sum;
}

ProbVector softmax(std::span<const double> logits) {
    if (logits.empty()) throw Error(ErrorKind::ShapeMismatch, "softmax of an empty vector");
    std::vector<double> p(logits.size());
    softmax_into(logits, p);
    return ProbVector::from_trusted(std::move(p));
}

ClassWeights::ClassWeights(std::vector<double> weights) : weights_(std::move(weights)) {
    if (weights_.empty()) throw Error(ErrorKind::ShapeMismatch, "class weights are empty");
    for (double w : weights_)
        if (!std::isfinite(w) || !(w > 0.0))
            throw Error(ErrorKind::NonFiniteInput, "class weights must be finite and positive");
}

ClassWeights default_task2_weights() { return ClassWeights({0.779, 0.146, 0.075}); }

ClassWeights inverse_frequency_weights(std::span<const std::int64_t> class_counts) {
    if (class_counts.empty()) throw Error(ErrorKind::ShapeMismatch, "no class counts");
    double n = 0.0;
    for (std::int64_t c : class_counts) {
        if (c <= 0) throw Error(ErrorKind::ZeroCount, "every class needs a positive count");
        n += static_cast<double>(c);
    }
    std::vector<double> w;
    w.reserve(class_counts.size());
    for (std::int64_t c : class_counts) w.push_back(n / static_cast<double>(c));
    const double scale = static_cast<double>(class_counts.size()) / std::accumulate(w.begin(), w.end(), 0.0);
    for (double& x : w) x *= scale;
    return ClassWeights(std::move(w));
}

LossValue weighted_ce(std::span<const double> logits, std::span<const Label> targets, const ClassWeights& weights,
                      Reduction reduction) {
    const std::size_t k = weights.size();
    const std::size_t batch = targets.size();
    if (batch == 0) throw Error(ErrorKind::EmptySubset, "empty batch");
    if (logits.size() != batch * k)
        throw Error(ErrorKind::ShapeMismatch, "logits hold " + std::to_string(logits.size()) + " values, expected " +
                                                  std::to_string(batch * k));

    LossValue out;
    out.gradient.assign(logits.size(), 0.0);
    double weight_total = 0.0;
    double loss_total = 0.0;
    for (std::size_t n = 0; n < batch; ++n) {
        if (targets[n] < 0 || static_cast<std::size_t>(targets[n]) >= k)
            throw Error(ErrorKind::LabelOutOfRange, "target " + std::to_string(targets[n]) + " outside [0, K)");
        const auto y = static_cast<std::size_t>(targets[n]);
        const auto row = logits.subspan(n * k, k);
        std::span<double> grad(out.gradient.data() + n * k, k);

        // log-sum-exp keeps -log p_y finite for extreme logits
        double mx = -INFINITY;
        for (double z : row) {
            if (!std::isfinite(z)) throw Error(ErrorKind::NonFiniteInput, "non-finite logit");
            mx = std::max(mx, z);
        }
        double sum = 0.0;
        for (double z : row) sum += std::exp(z - mx);
        const double log_norm = mx + std::log(sum);

        const double w = weights[y];
        loss_total += w * (log_norm - row[y]);
        weight_total += w;
        for (std::size_t j = 0; j < k; ++j) grad[j] = w * std::exp(row[j] - log_norm);
        grad[y] -= w;
    }

    if (reduction == Reduction::WeightedMean) {
        out.value = loss_total / weight_total;
        for (double& g : out.gradient) g /= weight_total;
    } else {
        out.value = loss_total;
    }
    return out;
}

LossValue multitask_loss(const LossValue& loss3, const LossValue& loss2, const MultiTaskConfig& cfg) {
    if (loss3.gradient.size() != loss2.gradient.size())
        throw Error(ErrorKind::ShapeMismatch, "task gradients live in different parameter spaces (" +
                                                  std::to_string(loss3.gradient.size()) + " vs " +
                                                  std::to_string(loss2.gradient.size()) + ")");
    if (!(cfg.lambda >= 0.0) || !std::isfinite(cfg.lambda))
        throw Error(ErrorKind::Config, "lambda must be finite and non-negative");
    if (cfg.lambda == 0.0) return loss3;

    LossValue out;
    out.value = loss3.value + cfg.lambda * loss2.value;
    out.gradient.resize(loss3.gradient.size());
    for (std::size_t i = 0; i < out.gradient.size(); ++i)
        out.gradient[i] = loss3.gradient[i] + cfg.lambda * loss2.gradient[i];
    return out;
}

}  // namespace drfuse
