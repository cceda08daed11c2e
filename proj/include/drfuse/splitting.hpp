#pragma once

#include "drfuse/panel.hpp"

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace drfuse {

enum class Subset { Train = 0, Val = 1, Test = 2 };

inline constexpr std::size_t kNumSubsets = 3;

std::string_view subset_name(Subset s) noexcept;  ///< "train" / "val" / "test"
Subset parse_subset(std::string_view name);

struct Resplit {
    std::string name;
    std::uint64_t seed = 0;
};

struct SplitSpec {
    std::array<double, kNumSubsets> fractions{0.84, 0.08, 0.08};  ///< train, val, test
    std::uint64_t master_seed = 2022;
    std::vector<Resplit> resplits{{"A", 1}, {"B", 2}, {"C", 3}};

    /// Throws InfeasibleFractions / Config on malformed specs.
    void validate() const;
};

struct SplitAssignment {
    std::string resplit;
    std::vector<Subset> tags;  ///< one per sample, input order

    std::vector<std::size_t> indices(Subset s) const;
};

/// Hamilton apportionment of `total` proportionally to `weights`: floors of
/// the exact quotas, the remaining units going to the largest fractional parts
/// (ties to the lower index).
std::vector<std::int64_t> largest_remainder(std::int64_t total, std::span<const double> weights);

/// Per-class subset counts (row c = class, column s = subset).
///
/// Subset totals are the largest-remainder apportionment of N; each cell is
/// the floor or ceiling of count_c * fraction_s, so every cell deviates from
/// its exact proportional share by less than one sample.
std::vector<std::array<std::int64_t, kNumSubsets>> stratum_counts(std::span<const std::int64_t> class_counts,
                                                                  const std::array<double, kNumSubsets>& fractions);

/// Test subset drawn first with the master seed and shared by all resplits;
/// train/val redrawn per resplit seed.
std::vector<SplitAssignment> stratified_split(std::span<const Label> labels, std::size_t classes,
                                              const SplitSpec& spec);

struct StratificationCell {
    Label label = 0;
    Subset subset = Subset::Train;
    std::int64_t actual = 0;
    double expected = 0.0;
    double deviation = 0.0;
};

struct StratificationReport {
    std::vector<StratificationCell> cells;
    double max_deviation = 0.0;
    bool passes = false;
};

StratificationReport verify_stratification(std::span<const Label> labels, std::size_t classes,
                                           const SplitAssignment& assignment, const SplitSpec& spec);

}  // namespace drfuse
