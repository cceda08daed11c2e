#pragma once

// Plain SGD machinery shared by the fusion trainer and the toy multi-task model.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace drfuse {

inline double exponential_decay_lr(double initial_lr, double decay, int epoch_index) {
    return initial_lr * std::pow(decay, epoch_index);
}

/// Consecutive slices of `order`; the last one may be shorter.
inline std::vector<std::span<const std::size_t>> minibatches(std::span<const std::size_t> order, std::size_t batch_size) {
    std::vector<std::span<const std::size_t>> out;
    for (std::size_t start = 0; start < order.size(); start += batch_size)
        out.push_back(order.subspan(start, std::min(batch_size, order.size() - start)));
    return out;
}

inline void sgd_step(std::span<double> params, std::span<const double> grad, double lr) {
    for (std::size_t i = 0; i < params.size(); ++i) params[i] -= lr * grad[i];
}

}  // namespace drfuse
