#include "drfuse/metrics.hpp"
#include "drfuse/rng.hpp"

#include "oracles.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

#include <algorithm>

using namespace drfuse;

namespace {

ConfusionMatrix from_grid(const std::vector<std::vector<std::int64_t>>& g) {
    ConfusionMatrix cm(g.size());
    for (std::size_t i = 0; i < g.size(); ++i)
        for (std::size_t j = 0; j < g.size(); ++j) cm.add(i, j, g[i][j]);
    return cm;
}

ConfusionMatrix reversed(const ConfusionMatrix& cm) {
    const std::size_t k = cm.classes();
    ConfusionMatrix out(k);
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < k; ++j) out.add(k - 1 - i, k - 1 - j, cm(i, j));
    return out;
}

ConfusionMatrix random_cm(Rng& rng, std::size_t k) {
    ConfusionMatrix cm(k);
    const auto n = 1 + rng.below(40);
    for (std::uint64_t t = 0; t < n; ++t) cm.add(rng.below(k), rng.below(k));
    return cm;
}

std::vector<ProbVector> random_probs(Rng& rng, std::size_t n, std::size_t k, bool coarse) {
    std::vector<ProbVector> out;
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> v(k);
        double s = 0;
        for (auto& x : v) s += x = coarse ? static_cast<double>(1 + rng.below(4)) : rng.uniform() + 1e-3;
        for (auto& x : v) x /= s;
        out.push_back(ProbVector::from_trusted(v));
    }
    return out;
}

}  // namespace

TEST(ConfusionMatrix, Examples) {
    const std::vector<Label> t1{0, 1, 2}, p1{0, 1, 2};
    const auto a = confusion_matrix(t1, p1, 3);
    EXPECT_EQ(a.total(), 3);
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j) EXPECT_EQ(a(i, j), i == j ? 1 : 0);

    const std::vector<Label> t2{0, 0}, p2{1, 1};
    const auto b = confusion_matrix(t2, p2, 3);
    EXPECT_EQ(b(0, 1), 2);
    EXPECT_EQ(b.total(), 2);

    const std::vector<Label> t3{0, 1, 1}, p3{1, 1, 0};
    const auto c = confusion_matrix(t3, p3, 3);
    EXPECT_EQ(c(0, 1), 1);
    EXPECT_EQ(c(1, 1), 1);
    EXPECT_EQ(c(1, 0), 1);
    EXPECT_EQ(c(0, 0) + c(2, 2) + c(0, 2) + c(2, 0) + c(1, 2) + c(2, 1), 0);
}

TEST(ConfusionMatrix, Errors) {
    const std::vector<Label> t{0, 1}, p{0}, bad{0, 3};
    EXPECT_EQ(kind_of([&] { confusion_matrix(t, p, 3); }), ErrorKind::LengthMismatch);
    EXPECT_EQ(kind_of([&] { confusion_matrix(t, bad, 3); }), ErrorKind::LabelOutOfRange);
}

TEST(Qwk, WorkedMatrix) {
    // sum w*O = (1/4)(1 + 1) = 0.5; rows 3,3,3, cols 2,3,4, N = 9, sum w*E = 3.0
    EXPECT_NEAR(qwk(from_grid({{2, 1, 0}, {0, 2, 1}, {0, 0, 3}})), 1.0 - 0.5 / 3.0, 1e-12);
    EXPECT_NEAR(qwk(from_grid({{2, 1, 0}, {0, 2, 1}, {0, 0, 3}})), 0.8333333333, 1e-9);
}

TEST(Qwk, PerfectAndConstant) {
    EXPECT_DOUBLE_EQ(qwk(from_grid({{5, 0, 0}, {0, 2, 0}, {0, 0, 1}})), 1.0);
    EXPECT_NEAR(qwk(from_grid({{0, 4, 0}, {0, 3, 0}, {0, 2, 0}})), 0.0, 1e-15);
}

TEST(Qwk, Degenerate) {
    EXPECT_EQ(kind_of([] { qwk(from_grid({{0, 0, 0}, {0, 7, 0}, {0, 0, 0}})); }), ErrorKind::DegenerateDistribution);
    EXPECT_EQ(kind_of([] { qwk(ConfusionMatrix(3)); }), ErrorKind::EmptySubset);
}

TEST(Qwk, MatchesMomentOracle) {
    Rng rng(99);
    for (int t = 0; t < 500; ++t) {
        const std::size_t k = 2 + rng.below(4);
        const std::size_t n = 1 + rng.below(50);
        std::vector<Label> truth(n), pred(n);
        for (std::size_t i = 0; i < n; ++i) {
            truth[i] = static_cast<Label>(rng.below(k));
            pred[i] = static_cast<Label>(rng.below(k));
        }
        const auto cm = confusion_matrix(truth, pred, k);
        double lib;
        try {
            lib = qwk(cm);
        } catch (const Error&) {
            continue;
        }
        EXPECT_NEAR(lib, oracle::qwk(truth, pred), 1e-12);
    }
}

TEST(Qwk, ReversalAndTransposeInvariant) {
    Rng rng(3);
    for (int t = 0; t < 300; ++t) {
        const auto cm = random_cm(rng, 2 + rng.below(4));
        try {
            const double q = qwk(cm);
            EXPECT_NEAR(qwk(reversed(cm)), q, 1e-12);
            EXPECT_NEAR(qwk(cm.transposed()), q, 1e-12);
        } catch (const Error& e) {
            EXPECT_EQ(e.kind(), ErrorKind::DegenerateDistribution);
        }
    }
}

TEST(Qwk, OneIffDiagonal) {
    Rng rng(4);
    for (int t = 0; t < 300; ++t) {
        const auto cm = random_cm(rng, 3);
        bool diagonal = true;
        for (std::size_t i = 0; i < 3; ++i)
            for (std::size_t j = 0; j < 3; ++j)
                if (i != j && cm(i, j)) diagonal = false;
        try {
            EXPECT_EQ(qwk(cm) == 1.0, diagonal);
        } catch (const Error&) {
        }
    }
}

TEST(PairAuc, Examples) {
    const std::vector<double> a{0.9, 0.8}, b{0.7, 0.3};
    EXPECT_DOUBLE_EQ(pair_auc(a, b), 1.0);
    const std::vector<double> same{0.4, 0.4, 0.4};
    EXPECT_DOUBLE_EQ(pair_auc(same, same), 0.5);
    const std::vector<double> c{0.9, 0.5}, d{0.5, 0.3};
    EXPECT_DOUBLE_EQ(pair_auc(c, d), 0.875);
    EXPECT_EQ(kind_of([&] { pair_auc({}, d); }), ErrorKind::EmptyClass);
}

TEST(PairAuc, ComplementForTieFreeScores) {
    Rng rng(8);
    for (int t = 0; t < 200; ++t) {
        std::vector<double> pos(1 + rng.below(20)), neg(1 + rng.below(20));
        for (auto& v : pos) v = rng.uniform();
        for (auto& v : neg) v = rng.uniform();
        EXPECT_NEAR(pair_auc(pos, neg) + pair_auc(neg, pos), 1.0, 1e-12);
        EXPECT_NEAR(pair_auc(pos, neg), oracle::pair_auc(pos, neg), 1e-12);
    }
}

TEST(OvoAuc, PerfectAndUniform) {
    const std::vector<Label> truth{0, 1, 2, 2, 1, 0};
    std::vector<ProbVector> hot, flat;
    for (Label y : truth) {
        hot.push_back(ProbVector::one_hot(3, y));
        flat.push_back(ProbVector::uniform(3));
    }
    EXPECT_DOUBLE_EQ(ovo_macro_auc(hot, truth, 3).value, 1.0);
    EXPECT_DOUBLE_EQ(ovo_macro_auc(flat, truth, 3).value, 0.5);
}

TEST(OvoAuc, SixSampleMixedInstance) {
    const std::vector<Label> truth{0, 0, 1, 1, 2, 2};
    const std::vector<std::vector<double>> raw{{0.7, 0.2, 0.1}, {0.4, 0.4, 0.2}, {0.3, 0.5, 0.2},
                                               {0.5, 0.3, 0.2}, {0.1, 0.3, 0.6}, {0.2, 0.5, 0.3}};
    std::vector<ProbVector> probs;
    for (const auto& r : raw) probs.push_back(ProbVector::validate(r));
    EXPECT_NEAR(ovo_macro_auc(probs, truth, 3).value, oracle::ovo_auc(probs, truth, 3), 1e-12);
}

TEST(OvoAuc, AbsentClassSkippedWithWarning) {
    const std::vector<Label> truth{0, 0, 2, 2};
    std::vector<ProbVector> probs;
    for (Label y : truth) probs.push_back(ProbVector::one_hot(3, y));
    const auto r = ovo_macro_auc(probs, truth, 3);
    EXPECT_TRUE(r.warning());
    EXPECT_EQ(r.pairs_used, 1u);
    EXPECT_EQ(r.pairs_skipped, 2u);
    EXPECT_DOUBLE_EQ(r.value, 1.0);
    const std::vector<Label> single{1, 1};
    EXPECT_EQ(kind_of([&] { ovo_macro_auc(std::span(probs).first(2), single, 3); }), ErrorKind::SingleClassTruth);
}

TEST(OvoAuc, MatchesPairCountingWithTies) {
    Rng rng(21);
    for (int t = 0; t < 300; ++t) {
        const std::size_t k = 2 + rng.below(3);
        const std::size_t n = 2 + rng.below(60);
        std::vector<Label> truth(n);
        for (auto& y : truth) y = static_cast<Label>(rng.below(k));
        if (std::all_of(truth.begin(), truth.end(), [&](Label y) { return y == truth[0]; })) continue;
        const auto probs = random_probs(rng, n, k, t % 2 == 0);
        EXPECT_NEAR(ovo_macro_auc(probs, truth, k).value, oracle::ovo_auc(probs, truth, k), 1e-12);
    }
}

TEST(Ranking, QwkThenAucThenId) {
    auto names = [](const std::vector<ModelScore>& v) {
        std::vector<std::string> out;
        for (const auto& s : v) out.push_back(s.model_id);
        return out;
    };
    EXPECT_EQ(names(rank_models({{"B", 0.8, 0.9}, {"A", 0.9, 0.8}})), (std::vector<std::string>{"A", "B"}));
    EXPECT_EQ(names(rank_models({{"A", 0.9, 0.8}, {"B", 0.9, 0.9}})), (std::vector<std::string>{"B", "A"}));
    EXPECT_EQ(names(rank_models({{"B", 0.9, 0.8}, {"A", 0.9, 0.8}})), (std::vector<std::string>{"A", "B"}));
}

TEST(Ranking, DegenerateRanksLast) {
    ModelScore bad{"A", -1.0, 1.0, true};
    ModelScore weak{"Z", -0.5, 0.1};
    EXPECT_TRUE(ranks_before(weak, bad));
    EXPECT_FALSE(ranks_before(bad, weak));
}

TEST(Ranking, TotalOrder) {
    Rng rng(6);
    std::vector<ModelScore> s;
    for (int i = 0; i < 40; ++i)
        s.push_back({"m" + std::to_string(rng.below(10)), 0.1 * static_cast<double>(rng.below(4)),
                     0.1 * static_cast<double>(rng.below(3)), rng.below(8) == 0});
    for (const auto& a : s) {
        EXPECT_FALSE(ranks_before(a, a));
        for (const auto& b : s) {
            if (ranks_before(a, b)) {
                EXPECT_FALSE(ranks_before(b, a));
            }
            for (const auto& c : s)
                if (ranks_before(a, b) && ranks_before(b, c)) {
                    EXPECT_TRUE(ranks_before(a, c));
                }
        }
    }
}

TEST(Scoring, DegenerateRecordedNotThrown) {
    const std::vector<Label> truth{1, 1, 1};
    std::vector<ProbVector> probs(3, ProbVector::one_hot(3, 1));
    EXPECT_EQ(kind_of([&] { score_predictor("m", probs, truth, 3); }), ErrorKind::SingleClassTruth);
    const std::vector<Label> mixed{0, 1, 2};
    std::vector<ProbVector> constant(3, ProbVector::one_hot(3, 1));
    const auto s = score_predictor("m", constant, mixed, 3);
    EXPECT_FALSE(s.degenerate);
    EXPECT_NEAR(s.qwk, 0.0, 1e-15);
    EXPECT_DOUBLE_EQ(s.auc, 0.5);
}
