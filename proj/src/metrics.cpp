#include "drfuse/metrics.hpp"

#include "drfuse/error.hpp"

#include <algorithm>
#include <numeric>

namespace drfuse {

void ConfusionMatrix::add(std::size_t truth, std::size_t predicted, std::int64_t count) {
    if (truth >= classes_ || predicted >= classes_) throw Error(ErrorKind::LabelOutOfRange, "class index outside [0, K)");
    counts_[truth * classes_ + predicted] += count;
    total_ += count;
}

std::int64_t ConfusionMatrix::row_sum(std::size_t truth) const {
    std::int64_t s = 0;
    for (std::size_t j = 0; j < classes_; ++j) s += (*this)(truth, j);
    return s;
}

std::int64_t ConfusionMatrix::col_sum(std::size_t predicted) const {
    std::int64_t s = 0;
    for (std::size_t i = 0; i < classes_; ++i) s += (*this)(i, predicted);
    return s;
}

ConfusionMatrix ConfusionMatrix::transposed() const {
    ConfusionMatrix t(classes_);
    for (std::size_t i = 0; i < classes_; ++i)
        for (std::size_t j = 0; j < classes_; ++j)
            if ((*this)(i, j) != 0) t.add(j, i, (*this)(i, j));
    return t;
}

ConfusionMatrix confusion_matrix(std::span<const Label> truth, std::span<const Label> predicted, std::size_t classes) {
    if (truth.size() != predicted.size())
        throw Error(ErrorKind::LengthMismatch, std::to_string(truth.size()) + " truth labels vs " +
                                                   std::to_string(predicted.size()) + " predictions");
    ConfusionMatrix cm(classes);
    for (std::size_t n = 0; n < truth.size(); ++n) {
        if (truth[n] < 0 || predicted[n] < 0) throw Error(ErrorKind::LabelOutOfRange, "negative class index");
        cm.add(static_cast<std::size_t>(truth[n]), static_cast<std::size_t>(predicted[n]));
    }
    return cm;
}

double qwk(const ConfusionMatrix& cm) {
    const std::size_t k = cm.classes();
    if (k < 2) throw Error(ErrorKind::ShapeMismatch, "QWK needs K >= 2");
    if (cm.total() < 1) throw Error(ErrorKind::EmptySubset, "QWK of an empty confusion matrix");

    const double n = static_cast<double>(cm.total());
    const double scale = static_cast<double>((k - 1) * (k - 1));
    std::vector<double> rows(k), cols(k);
    for (std::size_t i = 0; i < k; ++i) {
        rows[i] = static_cast<double>(cm.row_sum(i));
        cols[i] = static_cast<double>(cm.col_sum(i));
    }

    double observed = 0.0;
    double expected = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = 0; j < k; ++j) {
            const double d = static_cast<double>(i) - static_cast<double>(j);
            const double w = d * d / scale;
            observed += w * static_cast<double>(cm(i, j));
            expected += w * rows[i] * cols[j] / n;
        }
    }
    if (expected == 0.0)
        throw Error(ErrorKind::DegenerateDistribution, "truth and predictions concentrated in a single class");
    return 1.0 - observed / expected;
}

double pair_auc(std::span<const double> positive_scores, std::span<const double> negative_scores) {
    if (positive_scores.empty() || negative_scores.empty())
        throw Error(ErrorKind::EmptyClass, "pairwise AUC needs samples of both classes");

    // Mann-Whitney U with mid-ranks for ties.
    struct Entry {
        double score;
        bool positive;
    };
    std::vector<Entry> all;
    all.reserve(positive_scores.size() + negative_scores.size());
    for (double s : positive_scores) all.push_back({s, true});
    for (double s : negative_scores) all.push_back({s, false});
    std::sort(all.begin(), all.end(), [](const Entry& a, const Entry& b) { return a.score < b.score; });

    // Twice the positive rank sum keeps every quantity an exact integer.
    std::int64_t twice_rank_sum = 0;
    std::size_t i = 0;
    while (i < all.size()) {
        std::size_t j = i;
        while (j < all.size() && all[j].score == all[i].score) ++j;
        // ranks i+1 .. j share the mid-rank (i+1+j)/2
        const auto twice_mid = static_cast<std::int64_t>(i + 1 + j);
        for (std::size_t t = i; t < j; ++t)
            if (all[t].positive) twice_rank_sum += twice_mid;
        i = j;
    }
    const auto np = static_cast<std::int64_t>(positive_scores.size());
    const auto nn = static_cast<std::int64_t>(negative_scores.size());
    // 2U = 2R - np(np+1); AUC = U / (np*nn)
    const std::int64_t twice_u = twice_rank_sum - np * (np + 1);
    return static_cast<double>(twice_u) / 2.0 / static_cast<double>(np * nn);
}

OvoAuc ovo_macro_auc(std::span<const ProbVector> probs, std::span<const Label> truth, std::size_t classes) {
    if (probs.size() != truth.size())
        throw Error(ErrorKind::LengthMismatch, "probabilities and truth differ in length");
    std::vector<std::size_t> present(classes, 0);
    for (Label t : truth) {
        if (t < 0 || static_cast<std::size_t>(t) >= classes) throw Error(ErrorKind::LabelOutOfRange, "truth label outside [0, K)");
        ++present[static_cast<std::size_t>(t)];
    }
    if (std::count_if(present.begin(), present.end(), [](std::size_t c) { return c > 0; }) < 2)
        throw Error(ErrorKind::SingleClassTruth, "ovo AUC needs at least two classes in the truth");

    OvoAuc result;
    double sum = 0.0;
    std::vector<double> scores_i, scores_j;
    for (std::size_t a = 0; a < classes; ++a) {
        for (std::size_t b = a + 1; b < classes; ++b) {
            if (present[a] == 0 || present[b] == 0) {
                ++result.pairs_skipped;
                continue;
            }
            // A(a|b): class-a scores, positives = class a
            scores_i.clear();
            scores_j.clear();
            for (std::size_t n = 0; n < truth.size(); ++n) {
                const auto t = static_cast<std::size_t>(truth[n]);
                if (t == a) scores_i.push_back(probs[n][a]);
                else if (t == b) scores_j.push_back(probs[n][a]);
            }
            const double a_given_b = pair_auc(scores_i, scores_j);
            // A(b|a): class-b scores, positives = class b
            scores_i.clear();
            scores_j.clear();
            for (std::size_t n = 0; n < truth.size(); ++n) {
                const auto t = static_cast<std::size_t>(truth[n]);
                if (t == b) scores_i.push_back(probs[n][b]);
                else if (t == a) scores_j.push_back(probs[n][b]);
            }
            const double b_given_a = pair_auc(scores_i, scores_j);
            sum += 0.5 * (a_given_b + b_given_a);
            ++result.pairs_used;
        }
    }
    result.value = sum / static_cast<double>(result.pairs_used);
    return result;
}

ModelScore score_predictor(std::string model_id, std::span<const ProbVector> probs, std::span<const Label> truth,
                           std::size_t classes) {
    std::vector<Label> predicted;
    predicted.reserve(probs.size());
    for (const auto& p : probs) predicted.push_back(p.argmax());

    ModelScore score;
    score.model_id = std::move(model_id);
    try {
        score.qwk = qwk(confusion_matrix(truth, predicted, classes));
    } catch (const Error& e) {
        if (e.kind() != ErrorKind::DegenerateDistribution) throw;
        score.qwk = -1.0;
        score.degenerate = true;
    }
    score.auc = ovo_macro_auc(probs, truth, classes).value;
    return score;
}

std::vector<ModelScore> score_panel(const PredictionPanel& panel) {
    const auto& truth = panel.labels();
    std::vector<ModelScore> scores;
    scores.reserve(panel.num_models());
    for (std::size_t m = 0; m < panel.num_models(); ++m)
        scores.push_back(score_predictor(panel.models()[m], panel.row(m), truth, panel.num_classes()));
    return scores;
}

bool ranks_before(const ModelScore& a, const ModelScore& b) {
    if (a.degenerate != b.degenerate) return !a.degenerate;
    if (!a.degenerate && a.qwk != b.qwk) return a.qwk > b.qwk;
    if (a.auc != b.auc) return a.auc > b.auc;
    return a.model_id < b.model_id;
}

std::vector<ModelScore> rank_models(std::vector<ModelScore> scores) {
    std::sort(scores.begin(), scores.end(), ranks_before);
    return scores;
}

}  // namespace drfuse
