#pragma once

// Text report over metrics files: per-model scores, per-strategy ensemble
// scores, and a training regime x strategy grid. Values print with 4 decimals.

#include "drfuse/ensemble.hpp"
#include "drfuse/io.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace drfuse {

enum class TrainingRegime { SingleTask, MultiTask };

std::string_view training_regime_name(TrainingRegime r) noexcept;  ///< "single" / "multi"

struct ReportSource {
    /// Unset for a per-model metrics file.
    std::optional<StrategyKind> strategy;
    TrainingRegime training = TrainingRegime::MultiTask;
    std::vector<MetricsRow> rows;
};

/// Parses a source tag: "PATH" (per-model), "STRATEGY=PATH" or
/// "TRAINING:STRATEGY=PATH". Returns the source without rows and the path.
std::pair<ReportSource, std::string> parse_report_tag(std::string_view tag);

/// Throws EmptySubset when no source carries any rows.
std::string render_report(const std::vector<ReportSource>& sources);

}  // namespace drfuse
