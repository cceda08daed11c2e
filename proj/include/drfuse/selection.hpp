#pragma once

#include "drfuse/metrics.hpp"

#include <cstddef>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace drfuse {

struct Candidate {
    std::string model_id;
    std::string architecture;
    std::string resplit;
    ModelScore val;  ///< validation score; val.model_id mirrors model_id
};

class CandidatePool {
public:
    CandidatePool() = default;
    explicit CandidatePool(std::vector<Candidate> entries);  ///< throws on duplicate (model_id, resplit)

    void add(Candidate c);
    std::size_t size() const noexcept { return entries_.size(); }
    const std::vector<Candidate>& entries() const noexcept { return entries_; }

private:
    std::vector<Candidate> entries_;
};

struct SelectionResult {
    std::vector<Candidate> selected;  ///< best first
    /// (resplit, architecture) -> number of selected models
    std::map<std::pair<std::string, std::string>, std::size_t> counts;
    std::vector<std::string> architectures;  ///< every architecture in the pool, sorted
    std::vector<std::string> resplits;       ///< every resplit in the pool, sorted
};

/// Top-n candidates under rank_models ordering of their validation scores.
SelectionResult select_top(const CandidatePool& pool, std::size_t n);

/// Resplit x architecture count table (CSV, "None" for zero).
std::string selection_table_csv(const SelectionResult& result);
/// rank,model_id,architecture,resplit,qwk,auc
std::string selection_ranking_csv(const SelectionResult& result);

}  // namespace drfuse
