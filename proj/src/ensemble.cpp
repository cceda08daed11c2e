#include "drfuse/ensemble.hpp"

#include "drfuse/error.hpp"

namespace drfuse {

std::string_view strategy_name(StrategyKind kind) noexcept {
    switch (kind) {
        case StrategyKind::PluralityVote: return "vote";
        case StrategyKind::Averaging: return "avg";
        case StrategyKind::LabelFusion: return "fusion";
    }
    return "?";
}

StrategyKind parse_strategy(std::string_view name) {
    if (name == "vote") return StrategyKind::PluralityVote;
    if (name == "avg") return StrategyKind::Averaging;
    if (name == "fusion") return StrategyKind::LabelFusion;
    throw Error(ErrorKind::Usage, "unknown strategy '" + std::string(name) + "' (expected vote, avg or fusion)");
}

namespace {
void require_column(std::span<const ProbVector> column) {
    if (column.empty()) throw Error(ErrorKind::EmptySubset, "ensemble over zero models");
    for (const auto& p : column)
        if (p.size() != column.front().size()) throw Error(ErrorKind::ShapeMismatch, "models disagree on K");
}
}  // namespace

Label plurality_vote(std::span<const ProbVector> column) {
    require_column(column);
    const std::size_t k = column.front().size();
    std::vector<int> votes(k, 0);
    std::vector<double> prob_sum(k, 0.0);
    for (const auto& p : column) {
        ++votes[static_cast<std::size_t>(p.argmax())];
        for (std::size_t c = 0; c < k; ++c) prob_sum[c] += p[c];
    }
    std::size_t best = 0;
    for (std::size_t c = 1; c < k; ++c) {
        // equal model count, so comparing sums is comparing means
        if (votes[c] > votes[best] || (votes[c] == votes[best] && prob_sum[c] > prob_sum[best])) best = c;
    }
    return static_cast<Label>(best);
}

ProbVector average_probabilities(std::span<const ProbVector> column) {
    require_column(column);
    const std::size_t k = column.front().size();
    std::vector<double> mean(k, 0.0);
    for (const auto& p : column)
        for (std::size_t c = 0; c < k; ++c) mean[c] += p[c];
    for (double& v : mean) v /= static_cast<double>(column.size());
    return ProbVector::from_trusted(std::move(mean));
}

ProbVector fusion_predict(std::span<const ProbVector> column, const FusionNet& net) {
    require_column(column);
    std::vector<double> input;
    input.reserve(column.size() * column.front().size());
    for (const auto& p : column) input.insert(input.end(), p.values().begin(), p.values().end());
    if (input.size() != net.dims().input)
        throw Error(ErrorKind::WidthMismatch, "fusion model expects width " + std::to_string(net.dims().input) +
                                                  ", panel provides " + std::to_string(input.size()) + " (M*K)");
    return forward(net, input).output;
}

EnsembleOutput ensemble_predict(const PredictionPanel& panel, const EnsembleStrategy& strategy) {
    if (strategy.kind == StrategyKind::LabelFusion) {
        if (!strategy.fusion_model) throw Error(ErrorKind::Usage, "label fusion requires a fusion model");
        if (strategy.fusion_model->dims().input != panel.num_models() * panel.num_classes())
            throw Error(ErrorKind::WidthMismatch, "fusion model expects width " +
                                                      std::to_string(strategy.fusion_model->dims().input) +
                                                      ", panel provides " +
                                                      std::to_string(panel.num_models() * panel.num_classes()));
        if (strategy.fusion_model->dims().output != panel.num_classes())
            throw Error(ErrorKind::DimensionMismatch, "fusion model output width differs from K");
    }
    EnsembleOutput out;
    out.probs.reserve(panel.num_samples());
    out.labels.reserve(panel.num_samples());
    for (std::size_t n = 0; n < panel.num_samples(); ++n) {
        const auto column = panel.column(n);
        switch (strategy.kind) {
            case StrategyKind::PluralityVote: {
                const Label winner = plurality_vote(column);
                out.probs.push_back(ProbVector::one_hot(panel.num_classes(), winner));
                out.labels.push_back(winner);
                break;
            }
            case StrategyKind::Averaging:
                out.probs.push_back(average_probabilities(column));
                out.labels.push_back(out.probs.back().argmax());
                break;
            case StrategyKind::LabelFusion:
                out.probs.push_back(fusion_predict(column, *strategy.fusion_model));
                out.labels.push_back(out.probs.back().argmax());
                break;
        }
    }
    return out;
}

PredictionPanel ensemble_panel(const PredictionPanel& panel, const EnsembleOutput& output, const std::string& model_id) {
    std::optional<std::vector<Label>> labels;
    if (panel.has_labels()) labels = panel.labels();
    return PredictionPanel({model_id}, panel.samples(), panel.num_classes(), output.probs, std::move(labels));
}

}  // namespace drfuse
