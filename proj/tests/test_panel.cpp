#include "drfuse/error.hpp"
#include "drfuse/panel.hpp"
#include "drfuse/rng.hpp"

#include "test_util.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>

using namespace drfuse;

namespace {

PredictionRecord rec(std::string s, std::string m, std::vector<double> p, std::optional<Label> y = std::nullopt) {
    return {std::move(s), std::move(m), ProbVector::validate(p), y};
}

std::vector<PredictionRecord> grid_2x3() {
    return {rec("s1", "mB", {0.1, 0.2, 0.7}, 2), rec("s0", "mA", {0.8, 0.1, 0.1}, 0), rec("s2", "mA", {0.2, 0.6, 0.2}, 1),
            rec("s1", "mA", {0.3, 0.3, 0.4}, 2), rec("s0", "mB", {0.5, 0.5, 0.0}, 0), rec("s2", "mB", {0.0, 1.0, 0.0}, 1)};
}

}  // namespace

TEST(ProbVector, ExactSimplexPointAcceptedUnchanged) {
    bool renorm = true;
    const auto p = ProbVector::validate(std::vector<double>{0.5, 0.25, 0.25}, {}, &renorm);
    EXPECT_FALSE(renorm);
    EXPECT_EQ(p.values()[0], 0.5);
    EXPECT_EQ(p.values()[1], 0.25);
    EXPECT_EQ(p.values()[2], 0.25);
}

TEST(ProbVector, SmallDriftRenormalized) {
    bool renorm = false;
    const auto p = ProbVector::validate(std::vector<double>{0.5005, 0.25, 0.25}, {}, &renorm);
    EXPECT_TRUE(renorm);
    EXPECT_DOUBLE_EQ(p[0], 0.5005 / 1.0005);
    EXPECT_DOUBLE_EQ(p[1], 0.25 / 1.0005);
    double s = 0;
    for (double v : p.values()) s += v;
    EXPECT_NEAR(s, 1.0, 1e-15);
}

TEST(ProbVector, NegativeEntryRejected) {
    EXPECT_EQ(kind_of([] { ProbVector::validate(std::vector<double>{0.6, -0.1, 0.5}); }), ErrorKind::NegativeEntry);
}

TEST(ProbVector, NonFiniteAndLargeDriftRejected) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    EXPECT_EQ(kind_of([&] { ProbVector::validate(std::vector<double>{nan, 0.5, 0.5}); }), ErrorKind::NonFiniteEntry);
    EXPECT_EQ(kind_of([] { ProbVector::validate(std::vector<double>{0.6, 0.3, 0.2}); }), ErrorKind::SumOutOfRange);
    EXPECT_EQ(kind_of([] { ProbVector::validate(std::vector<double>{1.0}); }), ErrorKind::ShapeMismatch);
}

TEST(ProbVector, ToleranceBoundaries) {
    bool renorm = true;
    ProbVector::validate(std::vector<double>{0.5 + 1e-7, 0.25, 0.25}, {}, &renorm);
    EXPECT_FALSE(renorm);
    ProbVector::validate(std::vector<double>{0.5 + 9e-4, 0.25, 0.25}, {}, &renorm);
    EXPECT_TRUE(renorm);
}

TEST(ProbVector, RevalidationIsFixedPoint) {
    Rng rng(5);
    for (int t = 0; t < 200; ++t) {
        std::vector<double> raw(3);
        for (auto& v : raw) v = rng.uniform();
        double s = raw[0] + raw[1] + raw[2];
        for (auto& v : raw) v = v / s * (1.0 + rng.uniform(-9e-4, 9e-4));
        const auto once = ProbVector::validate(raw);
        std::vector<double> copy(once.values().begin(), once.values().end());
        bool renorm = true;
        const auto twice = ProbVector::validate(copy, {}, &renorm);
        EXPECT_FALSE(renorm);
        EXPECT_EQ(once, twice);
    }
}

TEST(ProbVector, ArgmaxTiesGoLow) {
    EXPECT_EQ(ProbVector::validate(std::vector<double>{0.4, 0.4, 0.2}).argmax(), 0);
    EXPECT_EQ(ProbVector::uniform(3).argmax(), 0);
    EXPECT_EQ(ProbVector::one_hot(4, 2).argmax(), 2);
}

TEST(Panel, CompleteGridAssembles) {
    const auto recs = grid_2x3();
    const auto panel = assemble_panel(recs);
    EXPECT_EQ(panel.num_models(), 2u);
    EXPECT_EQ(panel.num_samples(), 3u);
    EXPECT_EQ(panel.models(), (std::vector<std::string>{"mA", "mB"}));
    EXPECT_EQ(panel.samples(), (std::vector<std::string>{"s0", "s1", "s2"}));
    ASSERT_TRUE(panel.has_labels());
    EXPECT_EQ(panel.labels(), (std::vector<Label>{0, 2, 1}));
    EXPECT_EQ(panel.at(1, 2)[1], 1.0);
    EXPECT_EQ(panel.flat_column(0), (std::vector<double>{0.8, 0.1, 0.1, 0.5, 0.5, 0.0}));
}

TEST(Panel, MissingCell) {
    auto recs = grid_2x3();
    recs.pop_back();
    EXPECT_EQ(kind_of([&] { assemble_panel(recs); }), ErrorKind::MissingCell);
}

TEST(Panel, DuplicateRecord) {
    auto recs = grid_2x3();
    recs.push_back(rec("s0", "mA", {0.6, 0.2, 0.2}, 0));
    EXPECT_EQ(kind_of([&] { assemble_panel(recs); }), ErrorKind::DuplicateRecord);
}

TEST(Panel, ConflictingLabel) {
    auto recs = grid_2x3();
    recs[0].true_label = 1;
    EXPECT_EQ(kind_of([&] { assemble_panel(recs); }), ErrorKind::ConflictingLabel);
}

TEST(Panel, UnlabeledPanelIsValid) {
    auto recs = grid_2x3();
    for (auto& r : recs) r.true_label.reset();
    const auto panel = assemble_panel(recs);
    EXPECT_FALSE(panel.has_labels());
    EXPECT_EQ(kind_of([&] { panel.labels(); }), ErrorKind::EmptySubset);
}

TEST(Panel, OrderInsensitive) {
    const auto recs = grid_2x3();
    const auto reference = assemble_panel(recs);
    Rng rng(17);
    for (int t = 0; t < 50; ++t) {
        auto shuffled = recs;
        rng.shuffle(std::span<PredictionRecord>(shuffled));
        EXPECT_EQ(assemble_panel(shuffled), reference);
    }
}

TEST(Panel, RecordsRoundTrip) {
    const auto panel = assemble_panel(grid_2x3());
    const auto records = panel.to_records();
    EXPECT_EQ(records.size(), 6u);
    EXPECT_EQ(assemble_panel(records), panel);
}

TEST(Panel, SelectSamplesAndModels) {
    const auto panel = assemble_panel(grid_2x3());
    const std::vector<std::size_t> keep{2, 0};
    const auto sub = panel.select_samples(keep);
    EXPECT_EQ(sub.samples(), (std::vector<std::string>{"s2", "s0"}));
    EXPECT_EQ(sub.labels(), (std::vector<Label>{1, 0}));
    const std::vector<std::size_t> one{1};
    const auto m = panel.select_models(one);
    EXPECT_EQ(m.models(), (std::vector<std::string>{"mB"}));
    EXPECT_EQ(m.at(0, 0), panel.at(1, 0));
}
