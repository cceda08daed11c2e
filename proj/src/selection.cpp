#include "drfuse/selection.hpp"

#include "drfuse/error.hpp"
#include "drfuse/format.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace drfuse {

CandidatePool::CandidatePool(std::vector<Candidate> entries) {
    for (auto& e : entries) add(std::move(e));
}

void CandidatePool::add(Candidate c) {
    for (const auto& e : entries_)
        if (e.model_id == c.model_id && e.resplit == c.resplit)
            throw Error(ErrorKind::DuplicateRecord, "candidate '" + c.model_id + "' listed twice for resplit '" +
                                                        c.resplit + "'");
    c.val.model_id = c.model_id;
    entries_.push_back(std::move(c));
}

SelectionResult select_top(const CandidatePool& pool, std::size_t n) {
    if (n > pool.size())
        throw Error(ErrorKind::PoolTooSmall, "cannot select " + std::to_string(n) + " of " +
                                                 std::to_string(pool.size()) + " candidates");
    std::vector<Candidate> ranked = pool.entries();
    // same model id may appear under several resplits; resplit breaks that last tie
    std::sort(ranked.begin(), ranked.end(), [](const Candidate& a, const Candidate& b) {
        if (ranks_before(a.val, b.val)) return true;
        if (ranks_before(b.val, a.val)) return false;
        return a.resplit < b.resplit;
    });
    ranked.resize(n);

    SelectionResult result;
    std::set<std::string> archs, splits;
    for (const auto& c : pool.entries()) {
        archs.insert(c.architecture);
        splits.insert(c.resplit);
    }
    result.architectures.assign(archs.begin(), archs.end());
    result.resplits.assign(splits.begin(), splits.end());
    for (const auto& c : ranked) ++result.counts[{c.resplit, c.architecture}];
    result.selected = std::move(ranked);
    return result;
}

std::string selection_table_csv(const SelectionResult& result) {
    std::ostringstream out;
    out << "split";
    for (const auto& a : result.architectures) out << ',' << a;
    out << '\n';
    for (const auto& r : result.resplits) {
        out << r;
        for (const auto& a : result.architectures) {
            const auto it = result.counts.find({r, a});
            out << ',';
            if (it == result.counts.end() || it->second == 0) out << "None";
            else out << it->second;
        }
        out << '\n';
    }
    return out.str();
}

std::string selection_ranking_csv(const SelectionResult& result) {
    std::ostringstream out;
    out << "rank,model_id,architecture,resplit,qwk,auc\n";
    for (std::size_t i = 0; i < result.selected.size(); ++i) {
        const auto& c = result.selected[i];
        out << i + 1 << ',' << c.model_id << ',' << c.architecture << ',' << c.resplit << ','
            << format_double(c.val.qwk) << ',' << format_double(c.val.auc) << '\n';
    }
    return out.str();
}

}  // namespace drfuse
