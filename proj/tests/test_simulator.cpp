#include "drfuse/metrics.hpp"
#include "drfuse/simulator.hpp"

#include "oracles.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <numeric>

using namespace drfuse;

namespace {

std::vector<std::int64_t> counts_of(const std::vector<Label>& labels, std::size_t k) {
    std::vector<std::int64_t> c(k, 0);
    for (Label l : labels) ++c[static_cast<std::size_t>(l)];
    return c;
}

// Mean Pearson correlation of per-sample error indicators over model pairs.
double mean_error_correlation(const PredictionPanel& panel) {
    const std::size_t m = panel.num_models(), n = panel.num_samples();
    std::vector<std::vector<double>> err(m, std::vector<double>(n));
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t s = 0; s < n; ++s) err[i][s] = panel.at(i, s).argmax() != panel.labels()[s] ? 1.0 : 0.0;
    double total = 0;
    int pairs = 0;
    for (std::size_t a = 0; a < m; ++a)
        for (std::size_t b = a + 1; b < m; ++b) {
            double ma = 0, mb = 0;
            for (std::size_t s = 0; s < n; ++s) ma += err[a][s], mb += err[b][s];
            ma /= n, mb /= n;
            double cov = 0, va = 0, vb = 0;
            for (std::size_t s = 0; s < n; ++s) {
                cov += (err[a][s] - ma) * (err[b][s] - mb);
                va += (err[a][s] - ma) * (err[a][s] - ma);
                vb += (err[b][s] - mb) * (err[b][s] - mb);
            }
            total += cov / std::sqrt(va * vb);
            ++pairs;
        }
    return total / pairs;
}

ToyMultiTaskSpec small_toy() {
    ToyMultiTaskSpec spec;
    spec.n_samples = 200;
    spec.train.epochs = 4;
    spec.train.batch_size = 16;
    spec.train.initial_lr = 0.01;
    return spec;
}

}  // namespace

TEST(GenLabels, ExactCountsAndDeterminism) {
    PanelSpec spec;
    const auto labels = gen_labels(spec);
    EXPECT_EQ(counts_of(labels, 3), (std::vector<std::int64_t>{329, 212, 70}));
    EXPECT_EQ(gen_labels(spec), labels);
    PanelSpec other = spec;
    other.seed = 2;
    const auto shuffled = gen_labels(other);
    EXPECT_EQ(counts_of(shuffled, 3), counts_of(labels, 3));
    EXPECT_NE(shuffled, labels);

    PanelSpec tiny;
    tiny.n_samples = 3;
    tiny.class_distribution = {1.0 / 3, 1.0 / 3, 1.0 / 3};
    EXPECT_EQ(counts_of(gen_labels(tiny), 3), (std::vector<std::int64_t>{1, 1, 1}));
}

TEST(GenPanel, ShapeIdsAndDeterminism) {
    PanelSpec spec;
    spec.n_models = 3;
    spec.n_samples = 50;
    const auto a = simulate_panel(spec);
    EXPECT_EQ(a.num_models(), 3u);
    EXPECT_EQ(a.num_samples(), 50u);
    EXPECT_EQ(a.models().front(), "m00");
    EXPECT_EQ(a.samples().front(), "s0000");
    EXPECT_EQ(a, simulate_panel(spec));
    spec.seed = 5;
    EXPECT_FALSE(a == simulate_panel(spec));
}

TEST(GenPanel, SharpLimitIsOneHot) {
    PanelSpec spec;
    spec.n_models = 4;
    spec.n_samples = 100;
    spec.sharpness = 1e6;
    spec.noise = 0.0;
    const auto panel = simulate_panel(spec);
    for (std::size_t m = 0; m < 4; ++m)
        for (std::size_t n = 0; n < 100; ++n) {
            const auto& p = panel.at(m, n);
            const auto hot = ProbVector::one_hot(3, p.argmax());
            for (std::size_t k = 0; k < 3; ++k) EXPECT_NEAR(p[k], hot[k], 1e-4);
        }
}

TEST(GenPanel, PerfectAccuracyScoresOne) {
    PanelSpec spec;
    spec.n_models = 3;
    spec.per_model_accuracy = {1.0};
    const auto panel = simulate_panel(spec);
    for (std::size_t m = 0; m < 3; ++m)
        for (std::size_t n = 0; n < panel.num_samples(); ++n) EXPECT_EQ(panel.at(m, n).argmax(), panel.labels()[n]);
    for (const auto& s : score_panel(panel)) EXPECT_DOUBLE_EQ(s.qwk, 1.0);
}

TEST(GenPanel, MarginalAccuracyMatchesTarget) {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        PanelSpec spec;
        spec.n_models = 4;
        spec.per_model_accuracy = {0.6, 0.7, 0.8, 0.9};
        spec.correlation = 0.3;
        spec.seed = seed;
        const auto panel = simulate_panel(spec);
        for (std::size_t m = 0; m < 4; ++m) {
            std::size_t hit = 0;
            for (std::size_t n = 0; n < panel.num_samples(); ++n) hit += panel.at(m, n).argmax() == panel.labels()[n];
            const double acc = static_cast<double>(hit) / static_cast<double>(panel.num_samples());
            EXPECT_NEAR(acc, spec.accuracy_of(m), 0.05) << "seed " << seed << " model " << m;
        }
    }
}

TEST(GenPanel, CorrelationRaisesSharedErrors) {
    std::vector<double> measured;
    for (double rho : {0.0, 0.5, 0.9}) {
        PanelSpec spec;
        spec.n_models = 6;
        spec.n_samples = 2000;
        spec.correlation = rho;
        measured.push_back(mean_error_correlation(simulate_panel(spec)));
    }
    EXPECT_NEAR(measured[0], 0.0, 0.05);
    EXPECT_GT(measured[1], measured[0] + 0.2);
    EXPECT_GT(measured[2], measured[1] + 0.2);
}

TEST(GenPanel, AdjacentProfileFavoursNeighbours) {
    PanelSpec spec;
    spec.n_models = 8;
    spec.n_samples = 2000;
    spec.per_model_accuracy = {0.5};
    spec.class_distribution = {1.0, 0.0, 0.0};
    const auto panel = simulate_panel(spec);
    std::size_t near = 0, far = 0;
    for (std::size_t m = 0; m < 8; ++m)
        for (std::size_t n = 0; n < 2000; ++n) {
            const Label p = panel.at(m, n).argmax();
            near += p == 1;
            far += p == 2;
        }
    // wrong-class weights 1 and 1/4
    EXPECT_NEAR(static_cast<double>(near) / static_cast<double>(near + far), 0.8, 0.03);
}

TEST(GenPanel, Errors) {
    PanelSpec spec;
    spec.per_model_accuracy = {0.3};
    EXPECT_EQ(kind_of([&] { spec.validate(); }), ErrorKind::InfeasibleAccuracy);
    spec.per_model_accuracy = {1.2};
    EXPECT_EQ(kind_of([&] { spec.validate(); }), ErrorKind::InfeasibleAccuracy);
    spec.per_model_accuracy = {0.7, 0.8};
    EXPECT_EQ(kind_of([&] { spec.validate(); }), ErrorKind::Config);
    PanelSpec dist;
    dist.class_distribution = {0.5, 0.6, -0.1};
    EXPECT_EQ(kind_of([&] { dist.validate(); }), ErrorKind::Config);
    EXPECT_EQ(kind_of([] { parse_confusion_profile("diagonal"); }), ErrorKind::Config);
    const std::vector<Label> bad{0, 3};
    EXPECT_EQ(kind_of([&] { gen_panel(bad, PanelSpec{}); }), ErrorKind::LabelOutOfRange);
}

TEST(ToyModel, TaskGradientsMatchFiniteDifferences) {
    auto spec = small_toy();
    const ToyData data = gen_toy_data(spec);
    const std::vector<std::size_t> batch{0, 3, 7, 11, 19};
    const auto w3 = ClassWeights({0.7, 1.1, 2.0});
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const ToyModel model = ToyModel::init(spec, seed);
        for (auto task : {ToyTask::Grade, ToyTask::Quality}) {
            const auto& w = task == ToyTask::Grade ? w3 : spec.task2_weights;
            const auto analytic = toy_task_loss(model, data, batch, task, w, Reduction::WeightedMean).gradient;
            const auto numeric = oracle::numeric_gradient(
                [&](const std::vector<double>& p) {
                    ToyModel moved = model;
                    moved.params = p;
                    return toy_task_loss(moved, data, batch, task, w, Reduction::WeightedMean).value;
                },
                model.params, 1e-6);
            EXPECT_LT(oracle::relative_error(analytic, numeric), 1e-5);
        }
    }
}

TEST(ToyModel, HeadsTouchOnlyTheirParameters) {
    auto spec = small_toy();
    const ToyData data = gen_toy_data(spec);
    const ToyModel model = ToyModel::init(spec, 3);
    const std::vector<std::size_t> batch{1, 2, 3};
    const auto g3 = toy_task_loss(model, data, batch, ToyTask::Grade, ClassWeights::uniform(3), Reduction::Sum).gradient;
    const auto g2 =
        toy_task_loss(model, data, batch, ToyTask::Quality, spec.task2_weights, Reduction::Sum).gradient;
    for (std::size_t i = model.a2_offset(); i < g3.size(); ++i) EXPECT_EQ(g3[i], 0.0);
    for (std::size_t i = model.a3_offset(); i < model.a2_offset(); ++i) EXPECT_EQ(g2[i], 0.0);
}

TEST(ToyMultiTask, LambdaZeroBitIdenticalToSingleTask) {
    const auto spec = small_toy();
    const auto single = toy_single_task_run(spec);
    const auto zero = toy_train(spec, 0.0);
    ASSERT_EQ(single.final_model.params.size(), zero.final_model.params.size());
    EXPECT_EQ(std::memcmp(single.final_model.params.data(), zero.final_model.params.data(),
                          single.final_model.params.size() * sizeof(double)),
              0);
    ASSERT_EQ(single.history.size(), zero.history.size());
    for (std::size_t e = 0; e < single.history.size(); ++e) {
        EXPECT_EQ(std::memcmp(&single.history[e].loss3, &zero.history[e].loss3, sizeof(double)), 0);
        EXPECT_EQ(std::memcmp(&single.history[e].val_qwk, &zero.history[e].val_qwk, sizeof(double)), 0);
    }
    EXPECT_EQ(single.best_epoch, zero.best_epoch);
    EXPECT_TRUE(single.single_task);
    EXPECT_FALSE(zero.single_task);
}

TEST(ToyMultiTask, OneRunPerLambdaAndDeterministic) {
    const auto spec = small_toy();
    const auto runs = toy_multitask_run(spec);
    ASSERT_EQ(runs.size(), 4u);
    for (std::size_t i = 0; i < 4; ++i) {
        EXPECT_EQ(runs[i].lambda, spec.lambdas[i]);
        EXPECT_EQ(runs[i].history.size(), 4u);
    }
    EXPECT_NE(runs[0].final_model.params, runs[3].final_model.params);
    EXPECT_EQ(toy_train(spec, 0.1).final_model.params, runs[2].final_model.params);
}

TEST(ToyData, LabelsAndShape) {
    const auto spec = small_toy();
    const auto data = gen_toy_data(spec);
    EXPECT_EQ(data.size(), 200u);
    EXPECT_EQ(data.x.size(), 200u * spec.features);
    const auto c = counts_of(data.grade, 3);
    EXPECT_EQ(c, largest_remainder(200, spec.class_distribution));
    for (Label q : data.quality) EXPECT_LT(q, 3);
}
