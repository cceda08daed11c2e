#include "drfuse/splitting.hpp"

#include "drfuse/error.hpp"
#include "drfuse/rng.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>
#include <optional>
#include <set>

namespace drfuse {

std::string_view subset_name(Subset s) noexcept {
    switch (s) {
        case Subset::Train: return "train";
        case Subset::Val: return "val";
        case Subset::Test: return "test";
    }
    return "?";
}

Subset parse_subset(std::string_view name) {
    if (name == "train") return Subset::Train;
    if (name == "val") return Subset::Val;
    if (name == "test") return Subset::Test;
    throw Error(ErrorKind::Config, "unknown subset '" + std::string(name) + "' (expected train, val or test)");
}

void SplitSpec::validate() const {
    double sum = 0.0;
    for (double f : fractions) {
        if (!(f > 0.0) || !std::isfinite(f)) throw Error(ErrorKind::InfeasibleFractions, "split fractions must be positive");
        sum += f;
    }
    if (std::abs(sum - 1.0) > 1e-9)
        throw Error(ErrorKind::InfeasibleFractions, "split fractions sum to " + std::to_string(sum) + ", not 1");
    if (resplits.empty()) throw Error(ErrorKind::Config, "at least one resplit is required");
    std::set<std::string> names;
    for (const auto& r : resplits)
        if (r.name.empty() || !names.insert(r.name).second)
            throw Error(ErrorKind::Config, "resplit names must be non-empty and unique");
}

std::vector<std::size_t> SplitAssignment::indices(Subset s) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < tags.size(); ++i)
        if (tags[i] == s) out.push_back(i);
    return out;
}

namespace {

// Exact quota with float noise around integers snapped away.
double quota(std::int64_t total, double fraction) {
    const double q = static_cast<double>(total) * fraction;
    const double r = std::round(q);
    return std::abs(q - r) < 1e-9 ? r : q;
}

}  // namespace

std::vector<std::int64_t> largest_remainder(std::int64_t total, std::span<const double> weights) {
    const double weight_sum = std::accumulate(weights.begin(), weights.end(), 0.0);
    if (weights.empty() || !(weight_sum > 0.0)) throw Error(ErrorKind::InfeasibleFractions, "weights must have positive sum");
    std::vector<std::int64_t> out(weights.size());
    std::vector<double> remainder(weights.size());
    std::int64_t assigned = 0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        const double q = quota(total, weights[i] / weight_sum);
        out[i] = static_cast<std::int64_t>(std::floor(q));
        remainder[i] = q - std::floor(q);
        assigned += out[i];
    }
    std::vector<std::size_t> order(weights.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
    for (std::int64_t left = total - assigned, k = 0; left > 0; --left, ++k)
        ++out[order[static_cast<std::size_t>(k) % order.size()]];
    return out;
}

std::vector<std::array<std::int64_t, kNumSubsets>> stratum_counts(std::span<const std::int64_t> class_counts,
                                                                  const std::array<double, kNumSubsets>& fractions) {
    const std::size_t k = class_counts.size();
    const std::int64_t n = std::accumulate(class_counts.begin(), class_counts.end(), std::int64_t{0});
    const auto totals = largest_remainder(n, fractions);

    // Start from floors; the leftover units form a bipartite b-matching
    // between classes and subsets over the cells with a fractional quota.
    std::vector<std::array<std::int64_t, kNumSubsets>> counts(k);
    std::vector<std::array<double, kNumSubsets>> frac(k);
    std::vector<std::int64_t> row_need(k);
    std::array<std::int64_t, kNumSubsets> col_room{};
    for (std::size_t s = 0; s < kNumSubsets; ++s) col_room[s] = totals[s];
    for (std::size_t c = 0; c < k; ++c) {
        std::int64_t floor_sum = 0;
        for (std::size_t s = 0; s < kNumSubsets; ++s) {
            const double q = quota(class_counts[c], fractions[s]);
            counts[c][s] = static_cast<std::int64_t>(std::floor(q));
            frac[c][s] = q - std::floor(q);
            floor_sum += counts[c][s];
            col_room[s] -= counts[c][s];
        }
        row_need[c] = class_counts[c] - floor_sum;
    }
    for (std::int64_t room : col_room)
        if (room < 0) throw Error(ErrorKind::Internal, "subset floors exceed apportioned totals");

    // bumped[c][s]: the cell was rounded up
    std::vector<std::array<bool, kNumSubsets>> bumped(k, {false, false, false});

    struct Cell {
        std::size_t c, s;
        double f;
    };
    std::vector<Cell> cells;
    for (std::size_t c = 0; c < k; ++c)
        for (std::size_t s = 0; s < kNumSubsets; ++s)
            if (frac[c][s] > 0.0) cells.push_back({c, s, frac[c][s]});
    std::stable_sort(cells.begin(), cells.end(), [](const Cell& a, const Cell& b) { return a.f > b.f; });
    for (const Cell& cell : cells) {
        if (row_need[cell.c] > 0 && col_room[cell.s] > 0) {
            bumped[cell.c][cell.s] = true;
            --row_need[cell.c];
            --col_room[cell.s];
        }
    }

    // Augmenting paths: class -> subset over a free fractional cell, subset ->
    // class over a bumped cell (that class moves its unit elsewhere).
    for (std::size_t start = 0; start < k; ++start) {
        while (row_need[start] > 0) {
            std::vector<std::optional<std::size_t>> col_from(kNumSubsets);  // class reaching the subset
            std::vector<std::optional<std::size_t>> row_from(k);            // subset reaching the class
            std::vector<bool> row_seen(k, false);
            std::deque<std::size_t> queue{start};
            row_seen[start] = true;
            std::optional<std::size_t> sink;
            while (!queue.empty() && !sink) {
                const std::size_t c = queue.front();
                queue.pop_front();
                for (std::size_t s = 0; s < kNumSubsets && !sink; ++s) {
                    if (col_from[s] || !(frac[c][s] > 0.0) || bumped[c][s]) continue;
                    col_from[s] = c;
                    if (col_room[s] > 0) {
                        sink = s;
                        break;
                    }
                    for (std::size_t c2 = 0; c2 < k; ++c2) {
                        if (!row_seen[c2] && bumped[c2][s]) {
                            row_seen[c2] = true;
                            row_from[c2] = s;
                            queue.push_back(c2);
                        }
                    }
                }
            }
            if (!sink) throw Error(ErrorKind::Internal, "no stratified rounding matches the subset totals");
            std::size_t s = *sink;
            --col_room[s];
            for (;;) {
                const std::size_t c = *col_from[s];
                bumped[c][s] = true;
                if (c == start) break;
                const std::size_t prev = *row_from[c];
                bumped[c][prev] = false;
                s = prev;
            }
            --row_need[start];
        }
    }

    for (std::size_t c = 0; c < k; ++c)
        for (std::size_t s = 0; s < kNumSubsets; ++s)
            if (bumped[c][s]) ++counts[c][s];
    return counts;
}

std::vector<SplitAssignment> stratified_split(std::span<const Label> labels, std::size_t classes,
                                              const SplitSpec& spec) {
    spec.validate();
    std::vector<std::vector<std::size_t>> members(classes);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] < 0 || static_cast<std::size_t>(labels[i]) >= classes)
            throw Error(ErrorKind::LabelOutOfRange, "label " + std::to_string(labels[i]) + " outside [0, K)");
        members[static_cast<std::size_t>(labels[i])].push_back(i);
    }
    std::vector<std::int64_t> class_counts(classes);
    for (std::size_t c = 0; c < classes; ++c) {
        if (members[c].empty()) throw Error(ErrorKind::EmptyClass, "class " + std::to_string(c) + " has no samples");
        class_counts[c] = static_cast<std::int64_t>(members[c].size());
    }
    const double n = static_cast<double>(labels.size());
    for (double f : spec.fractions)
        if (n * f < 1.0)
            throw Error(ErrorKind::InfeasibleFractions, "a subset would receive no samples at N=" + std::to_string(labels.size()));

    const auto counts = stratum_counts(class_counts, spec.fractions);

    std::vector<Subset> base(labels.size(), Subset::Train);
    std::vector<std::vector<std::size_t>> remaining(classes);
    for (std::size_t c = 0; c < classes; ++c) {
        std::vector<std::size_t> pool = members[c];
        Rng rng(derive_seed(spec.master_seed, c));
        rng.shuffle(std::span<std::size_t>(pool));
        const auto n_test = static_cast<std::size_t>(counts[c][static_cast<std::size_t>(Subset::Test)]);
        for (std::size_t i = 0; i < pool.size(); ++i) {
            if (i < n_test) base[pool[i]] = Subset::Test;
            else remaining[c].push_back(pool[i]);
        }
        // canonical order so the resplit draw does not depend on the test draw's order
        std::sort(remaining[c].begin(), remaining[c].end());
    }

    std::vector<SplitAssignment> out;
    for (const auto& resplit : spec.resplits) {
        SplitAssignment a{resplit.name, base};
        for (std::size_t c = 0; c < classes; ++c) {
            std::vector<std::size_t> pool = remaining[c];
            Rng rng(derive_seed(resplit.seed, c));
            rng.shuffle(std::span<std::size_t>(pool));
            const auto n_val = static_cast<std::size_t>(counts[c][static_cast<std::size_t>(Subset::Val)]);
            for (std::size_t i = 0; i < n_val; ++i) a.tags[pool[i]] = Subset::Val;
        }
        out.push_back(std::move(a));
    }
    return out;
}

StratificationReport verify_stratification(std::span<const Label> labels, std::size_t classes,
                                           const SplitAssignment& assignment, const SplitSpec& spec) {
    if (assignment.tags.size() != labels.size())
        throw Error(ErrorKind::IncompleteAssignment, "assignment covers " + std::to_string(assignment.tags.size()) +
                                                         " of " + std::to_string(labels.size()) + " samples");
    std::vector<std::int64_t> class_counts(classes, 0);
    std::vector<std::array<std::int64_t, kNumSubsets>> actual(classes, {0, 0, 0});
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] < 0 || static_cast<std::size_t>(labels[i]) >= classes)
            throw Error(ErrorKind::LabelOutOfRange, "label outside [0, K)");
        const auto c = static_cast<std::size_t>(labels[i]);
        ++class_counts[c];
        ++actual[c][static_cast<std::size_t>(assignment.tags[i])];
    }
    StratificationReport report;
    for (std::size_t c = 0; c < classes; ++c) {
        for (std::size_t s = 0; s < kNumSubsets; ++s) {
            StratificationCell cell;
            cell.label = static_cast<Label>(c);
            cell.subset = static_cast<Subset>(s);
            cell.actual = actual[c][s];
            cell.expected = static_cast<double>(class_counts[c]) * spec.fractions[s];
            cell.deviation = std::abs(static_cast<double>(cell.actual) - cell.expected);
            report.max_deviation = std::max(report.max_deviation, cell.deviation);
            report.cells.push_back(cell);
        }
    }
    report.passes = report.max_deviation < 1.0;
    return report;
}

}  // namespace drfuse
