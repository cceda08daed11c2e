#include "drfuse/rng.hpp"
#include "drfuse/splitting.hpp"

#include "test_util.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <set>

using namespace drfuse;

namespace {

std::vector<Label> fixture_611() {
    std::vector<Label> labels;
    labels.insert(labels.end(), 329, 0);
    labels.insert(labels.end(), 212, 1);
    labels.insert(labels.end(), 70, 2);
    Rng rng(42);
    rng.shuffle(std::span<Label>(labels));
    return labels;
}

std::set<std::size_t> as_set(const std::vector<std::size_t>& v) { return {v.begin(), v.end()}; }

}  // namespace

TEST(LargestRemainder, Basics) {
    const std::vector<double> f{0.84, 0.08, 0.08};
    EXPECT_EQ(largest_remainder(611, f), (std::vector<std::int64_t>{513, 49, 49}));
    const std::vector<double> third{1.0 / 3, 1.0 / 3, 1.0 / 3};
    EXPECT_EQ(largest_remainder(3, third), (std::vector<std::int64_t>{1, 1, 1}));
    // equal remainders go to the lower index
    EXPECT_EQ(largest_remainder(4, third), (std::vector<std::int64_t>{2, 1, 1}));
    const std::vector<double> half{0.5, 0.5};
    EXPECT_EQ(largest_remainder(5, half), (std::vector<std::int64_t>{3, 2}));
}

TEST(StratifiedSplit, Fixture611) {
    const auto labels = fixture_611();
    const SplitSpec spec;
    const auto splits = stratified_split(labels, 3, spec);
    ASSERT_EQ(splits.size(), 3u);
    for (const auto& a : splits) {
        EXPECT_EQ(a.indices(Subset::Train).size(), 513u);
        EXPECT_EQ(a.indices(Subset::Val).size(), 49u);
        EXPECT_EQ(a.indices(Subset::Test).size(), 49u);
        const auto report = verify_stratification(labels, 3, a, spec);
        EXPECT_TRUE(report.passes);
        EXPECT_LT(report.max_deviation, 1.0);
        EXPECT_EQ(report.cells.size(), 9u);
    }
    EXPECT_EQ(splits[0].resplit, "A");
    EXPECT_EQ(splits[2].resplit, "C");
}

TEST(StratifiedSplit, HandApportionment611) {
    // exact shares: class 0: 276.36 / 26.32 / 26.32, class 1: 178.08 / 16.96 / 16.96,
    // class 2: 58.8 / 5.6 / 5.6
    const std::vector<std::int64_t> counts{329, 212, 70};
    const auto cells = stratum_counts(counts, {0.84, 0.08, 0.08});
    std::int64_t train = 0, val = 0, test = 0;
    const double exact[3][3] = {{276.36, 26.32, 26.32}, {178.08, 16.96, 16.96}, {58.8, 5.6, 5.6}};
    for (std::size_t c = 0; c < 3; ++c) {
        EXPECT_EQ(cells[c][0] + cells[c][1] + cells[c][2], counts[c]);
        for (std::size_t s = 0; s < 3; ++s) EXPECT_LT(std::abs(static_cast<double>(cells[c][s]) - exact[c][s]), 1.0);
        train += cells[c][0];
        val += cells[c][1];
        test += cells[c][2];
    }
    EXPECT_EQ(train, 513);
    EXPECT_EQ(val, 49);
    EXPECT_EQ(test, 49);
}

TEST(StratifiedSplit, OnePerClassOnePerSubset) {
    const std::vector<Label> labels{0, 1, 2};
    SplitSpec spec;
    spec.fractions = {1.0 / 3, 1.0 / 3, 1.0 / 3};
    for (const auto& a : stratified_split(labels, 3, spec)) {
        EXPECT_EQ(a.indices(Subset::Train).size(), 1u);
        EXPECT_EQ(a.indices(Subset::Val).size(), 1u);
        EXPECT_EQ(a.indices(Subset::Test).size(), 1u);
    }
}

TEST(StratifiedSplit, FixedTestSetDifferentTrainVal) {
    const auto labels = fixture_611();
    const auto splits = stratified_split(labels, 3, SplitSpec{});
    const auto test = as_set(splits[0].indices(Subset::Test));
    for (const auto& a : splits) EXPECT_EQ(as_set(a.indices(Subset::Test)), test);
    EXPECT_NE(as_set(splits[0].indices(Subset::Val)), as_set(splits[1].indices(Subset::Val)));
    EXPECT_NE(as_set(splits[1].indices(Subset::Val)), as_set(splits[2].indices(Subset::Val)));
}

TEST(StratifiedSplit, Deterministic) {
    const auto labels = fixture_611();
    const auto a = stratified_split(labels, 3, SplitSpec{});
    const auto b = stratified_split(labels, 3, SplitSpec{});
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].tags, b[i].tags);
    SplitSpec other;
    other.master_seed = 7;
    EXPECT_NE(stratified_split(labels, 3, other)[0].tags, a[0].tags);
}

TEST(StratifiedSplit, Errors) {
    const std::vector<Label> missing{0, 0, 2, 2};
    EXPECT_EQ(kind_of([&] { stratified_split(missing, 3, SplitSpec{}); }), ErrorKind::EmptyClass);
    const std::vector<Label> tiny{0, 1, 0, 1, 0};
    EXPECT_EQ(kind_of([&] { stratified_split(tiny, 2, SplitSpec{}); }), ErrorKind::InfeasibleFractions);
    SplitSpec bad;
    bad.fractions = {0.8, 0.1, 0.2};
    EXPECT_EQ(kind_of([&] { stratified_split(fixture_611(), 3, bad); }), ErrorKind::InfeasibleFractions);
    const std::vector<Label> out{0, 5};
    EXPECT_EQ(kind_of([&] { stratified_split(out, 3, SplitSpec{}); }), ErrorKind::LabelOutOfRange);
}

TEST(VerifyStratification, DetectsSkew) {
    const auto labels = fixture_611();
    auto a = stratified_split(labels, 3, SplitSpec{})[0];
    for (std::size_t i = 0; i < labels.size(); ++i)
        if (labels[i] == 2) a.tags[i] = Subset::Train;
    const auto report = verify_stratification(labels, 3, a, SplitSpec{});
    EXPECT_FALSE(report.passes);
    EXPECT_GE(report.max_deviation, 1.0);
}

TEST(VerifyStratification, SingleClassPasses) {
    const std::vector<Label> labels(100, 0);
    const auto a = stratified_split(labels, 1, SplitSpec{})[0];
    EXPECT_TRUE(verify_stratification(labels, 1, a, SplitSpec{}).passes);
}

TEST(VerifyStratification, IncompleteAssignment) {
    const auto labels = fixture_611();
    auto a = stratified_split(labels, 3, SplitSpec{})[0];
    a.tags.pop_back();
    EXPECT_EQ(kind_of([&] { verify_stratification(labels, 3, a, SplitSpec{}); }), ErrorKind::IncompleteAssignment);
}

TEST(StratifiedSplit, RandomizedProperty) {
    Rng rng(2024);
    int runs = 0;
    while (runs < 1000) {
        const std::size_t k = 1 + rng.below(5);
        const std::size_t n = 13 + rng.below(1988);
        std::vector<double> weights(k);
        for (auto& w : weights) w = rng.uniform() + 0.05;
        std::vector<Label> labels(n);
        for (std::size_t i = 0; i < n; ++i) labels[i] = i < k ? static_cast<Label>(i) : static_cast<Label>(rng.categorical(weights));
        SplitSpec spec;
        double a = rng.uniform(0.5, 0.9), b = rng.uniform(0.02, 0.25);
        if (a + b >= 0.99) b = 0.99 - a;
        spec.fractions = {a, b, 1.0 - a - b};
        spec.master_seed = rng.next_u64();
        spec.resplits = {{"A", rng.next_u64()}, {"B", rng.next_u64()}};
        if (static_cast<double>(n) * *std::min_element(spec.fractions.begin(), spec.fractions.end()) < 1.0) continue;
        const auto splits = stratified_split(labels, k, spec);
        const auto test = as_set(splits[0].indices(Subset::Test));
        for (const auto& s : splits) {
            ASSERT_EQ(s.tags.size(), n);
            EXPECT_EQ(as_set(s.indices(Subset::Test)), test);
            const auto report = verify_stratification(labels, k, s, spec);
            ASSERT_TRUE(report.passes) << "n=" << n << " k=" << k << " max dev " << report.max_deviation;
        }
        ++runs;
    }
}
