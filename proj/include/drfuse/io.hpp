#pragma once

// File contracts at the tool boundary. All files are UTF-8 CSV; lines starting
// with '#' carry provenance (seed, config hash) and are ignored by readers.
//
//   predictions: sample_id,model_id,true_label,p_0,...,p_{K-1}
//   labels:      sample_id,true_label
//   splits:      sample_id,resplit,subset        (subset in train|val|test)
//   metrics:     model_id,n,qwk,auc

#include "drfuse/metrics.hpp"
#include "drfuse/panel.hpp"
#include "drfuse/splitting.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace drfuse {

std::string read_file(const std::string& path);
/// Writes through a temporary file and renames it into place.
void write_file_atomic(const std::string& path, std::string_view content);

std::string comment_block(const std::vector<std::string>& lines);

struct PredictionFile {
    std::vector<PredictionRecord> records;
    std::vector<std::string> comments;
    std::size_t renormalized = 0;  ///< rows rescaled into the simplex on load
};

PredictionFile parse_predictions(std::string_view text, const TolerancePolicy& policy = {});
PredictionFile read_predictions(const std::string& path, const TolerancePolicy& policy = {});

/// Rows sorted by sample_id, then model_id; probabilities in shortest
/// round-trip form.
std::string format_predictions(const PredictionPanel& panel, const std::vector<std::string>& comments = {});

struct LabelRow {
    std::string sample_id;
    Label label = 0;
};

std::vector<LabelRow> parse_labels(std::string_view text);
std::vector<LabelRow> read_labels(const std::string& path);
std::string format_labels(const PredictionPanel& panel, const std::vector<std::string>& comments = {});
std::string format_labels(const std::vector<LabelRow>& rows, const std::vector<std::string>& comments = {});

/// Splits keyed to an ordered sample id list.
struct SplitTable {
    std::vector<std::string> sample_ids;
    std::vector<SplitAssignment> assignments;

    const SplitAssignment& resplit(const std::string& name) const;
    /// Assignment re-indexed to `samples` (every id must be present).
    SplitAssignment aligned(const std::string& name, const std::vector<std::string>& samples) const;
};

/// Load-time checks: each resplit tags every sample exactly once and all
/// resplits share one test set.
SplitTable parse_splits(std::string_view text);
SplitTable read_splits(const std::string& path);
std::string format_splits(const SplitTable& table, const std::vector<std::string>& comments = {});

struct MetricsRow {
    std::string model_id;
    std::size_t n = 0;
    ModelScore score;
};

std::vector<MetricsRow> parse_metrics(std::string_view text);
std::vector<MetricsRow> read_metrics(const std::string& path);
std::string format_metrics(const std::vector<MetricsRow>& rows, const std::vector<std::string>& comments = {});

}  // namespace drfuse
