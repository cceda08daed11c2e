#pragma once

#include "drfuse/panel.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace drfuse {

/// K x K counts, rows = true class, columns = predicted class.
class ConfusionMatrix {
public:
    explicit ConfusionMatrix(std::size_t classes) : classes_(classes), counts_(classes * classes, 0) {}

    std::size_t classes() const noexcept { return classes_; }
    std::int64_t total() const noexcept { return total_; }

    std::int64_t operator()(std::size_t truth, std::size_t predicted) const {
        return counts_[truth * classes_ + predicted];
    }
    void add(std::size_t truth, std::size_t predicted, std::int64_t count = 1);

    std::int64_t row_sum(std::size_t truth) const;
    std::int64_t col_sum(std::size_t predicted) const;

    ConfusionMatrix transposed() const;

private:
    std::size_t classes_;
    std::int64_t total_ = 0;
    std::vector<std::int64_t> counts_;
};

ConfusionMatrix confusion_matrix(std::span<const Label> truth, std::span<const Label> predicted, std::size_t classes);

/// Cohen's quadratic weighted kappa, 1 - sum(w*O) / sum(w*E) with
/// w_ij = (i-j)^2 / (K-1)^2 and E_ij = row_i * col_j / N.
/// Throws DegenerateDistribution when sum(w*E) is zero.
double qwk(const ConfusionMatrix& cm);

/// P(score of a random positive > score of a random negative), ties count 1/2.
double pair_auc(std::span<const double> positive_scores, std::span<const double> negative_scores);

struct OvoAuc {
    double value = 0.0;
    std::size_t pairs_used = 0;
    std::size_t pairs_skipped = 0;  ///< class pairs with an absent class
    bool warning() const noexcept { return pairs_skipped > 0; }
};

/// Hand-Till one-vs-one macro AUC over all unordered class pairs.
OvoAuc ovo_macro_auc(std::span<const ProbVector> probs, std::span<const Label> truth, std::size_t classes);

struct ModelScore {
    std::string model_id;
    double qwk = 0.0;
    double auc = 0.0;
    bool degenerate = false;  ///< QWK undefined; ranks below every scored model
};

/// Scores one predictor's probabilities against the truth: QWK on argmax
/// predictions and ovo macro AUC. A degenerate QWK is recorded, not thrown.
ModelScore score_predictor(std::string model_id, std::span<const ProbVector> probs, std::span<const Label> truth,
                           std::size_t classes);

/// Scores every model of a labeled panel.
std::vector<ModelScore> score_panel(const PredictionPanel& panel);

/// Strict "ranks before" relation: higher QWK, then higher AUC, then smaller id.
bool ranks_before(const ModelScore& a, const ModelScore& b);

std::vector<ModelScore> rank_models(std::vector<ModelScore> scores);

}  // namespace drfuse
