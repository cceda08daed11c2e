#pragma once

#include "drfuse/fusion_net.hpp"
#include "drfuse/panel.hpp"

#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace drfuse {

enum class StrategyKind { PluralityVote, Averaging, LabelFusion };

std::string_view strategy_name(StrategyKind kind) noexcept;  ///< "vote" / "avg" / "fusion"
StrategyKind parse_strategy(std::string_view name);

struct EnsembleStrategy {
    StrategyKind kind = StrategyKind::Averaging;
    std::optional<FusionNet> fusion_model;  ///< required for LabelFusion
};

/// Hard plurality vote over model argmaxes. Vote ties go to the tied class
/// with the highest mean probability, then to the lowest index.
Label plurality_vote(std::span<const ProbVector> column);

ProbVector average_probabilities(std::span<const ProbVector> column);

/// Fusion network applied to the concatenated column (model order as given).
ProbVector fusion_predict(std::span<const ProbVector> column, const FusionNet& net);

struct EnsembleOutput {
    std::vector<ProbVector> probs;
    std::vector<Label> labels;
};

/// Per-sample application of the strategy. Plurality vote emits one-hot vectors.
EnsembleOutput ensemble_predict(const PredictionPanel& panel, const EnsembleStrategy& strategy);

/// Ensemble output as a single-model panel with model id `model_id`.
PredictionPanel ensemble_panel(const PredictionPanel& panel, const EnsembleOutput& output,
                               const std::string& model_id = "ensemble");

}  // namespace drfuse
