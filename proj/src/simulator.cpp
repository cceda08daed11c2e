#include "drfuse/simulator.hpp"

#include "drfuse/error.hpp"
#include "drfuse/metrics.hpp"
#include "drfuse/rng.hpp"
#include "drfuse/sgd.hpp"
#include "drfuse/splitting.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>

namespace drfuse {

std::string_view confusion_profile_name(ConfusionProfile p) noexcept {
    return p == ConfusionProfile::Uniform ? "uniform" : "adjacent";
}

ConfusionProfile parse_confusion_profile(std::string_view name) {
    if (name == "adjacent") return ConfusionProfile::AdjacentBiased;
    if (name == "uniform") return ConfusionProfile::Uniform;
    throw Error(ErrorKind::Config, "unknown confusion profile '" + std::string(name) + "' (expected adjacent or uniform)");
}

namespace {

void check_distribution(std::span<const double> dist, std::size_t classes, const char* what) {
    if (dist.size() != classes)
        throw Error(ErrorKind::Config, std::string(what) + " needs " + std::to_string(classes) + " entries");
    double sum = 0.0;
    for (double p : dist) {
        if (!(p >= 0.0) || !std::isfinite(p)) throw Error(ErrorKind::Config, std::string(what) + " has a negative entry");
        sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw Error(ErrorKind::Config, std::string(what) + " must sum to 1");
}

// Zero-padded ids so lexicographic order equals numeric order.
std::string padded(char prefix, std::size_t i, std::size_t count, std::size_t min_width) {
    const std::size_t width = std::max(min_width, std::to_string(count > 0 ? count - 1 : 0).size());
    const std::string n = std::to_string(i);
    return prefix + std::string(width - n.size(), '0') + n;
}

}  // namespace

void PanelSpec::validate() const {
    if (n_models == 0) throw Error(ErrorKind::Config, "simulate.n_models must be positive");
    if (n_samples == 0) throw Error(ErrorKind::Config, "simulate.n_samples must be positive");
    if (classes < 2) throw Error(ErrorKind::Config, "simulate.classes must be at least 2");
    check_distribution(class_distribution, classes, "simulate.class_distribution");
    if (per_model_accuracy.size() != 1 && per_model_accuracy.size() != n_models)
        throw Error(ErrorKind::Config, "simulate.accuracy needs one value or one per model");
    const double chance = 1.0 / static_cast<double>(classes);
    for (double a : per_model_accuracy)
        if (!(a > chance) || a > 1.0)
            throw Error(ErrorKind::InfeasibleAccuracy, "per-model accuracy " + std::to_string(a) + " outside (1/K, 1]");
    if (!(sharpness > 0.0)) throw Error(ErrorKind::Config, "simulate.sharpness must be positive");
    if (!(noise >= 0.0) || !std::isfinite(noise)) throw Error(ErrorKind::Config, "simulate.noise must be non-negative");
    if (!(correlation >= 0.0) || !(correlation < 1.0)) throw Error(ErrorKind::Config, "simulate.correlation must lie in [0, 1)");
}

double PanelSpec::accuracy_of(std::size_t model) const {
    return per_model_accuracy.size() == 1 ? per_model_accuracy.front() : per_model_accuracy.at(model);
}

std::vector<Label> gen_labels(const PanelSpec& spec) {
    spec.validate();
    const auto counts = largest_remainder(static_cast<std::int64_t>(spec.n_samples), spec.class_distribution);
    std::vector<Label> labels;
    labels.reserve(spec.n_samples);
    for (std::size_t c = 0; c < counts.size(); ++c) labels.insert(labels.end(), static_cast<std::size_t>(counts[c]), static_cast<Label>(c));
    Rng rng(derive_seed(spec.seed, 0));
    rng.shuffle(std::span<Label>(labels));
    return labels;
}

namespace {

Label draw_wrong(Rng& rng, Label truth, std::size_t classes, ConfusionProfile profile) {
    std::vector<double> w(classes, 0.0);
    for (std::size_t j = 0; j < classes; ++j) {
        if (static_cast<Label>(j) == truth) continue;
        const double d = static_cast<double>(static_cast<Label>(j) - truth);
        w[j] = profile == ConfusionProfile::Uniform ? 1.0 : 1.0 / (d * d);
    }
    return static_cast<Label>(rng.categorical(w));
}

ProbVector emit(Rng& rng, Label predicted, const PanelSpec& spec) {
    const std::size_t k = spec.classes;
    const auto km1 = static_cast<double>(k - 1);
    // peak mass jittered in log-odds so large sharpness stays near one-hot
    const double log_odds = std::log(spec.sharpness / km1) + spec.noise * rng.normal();
    const double peak = 1.0 / (1.0 + std::exp(-log_odds));
    std::vector<double> share(k - 1);
    double share_sum = 0.0;
    for (double& s : share) {
        s = std::exp(spec.noise * rng.normal());
        share_sum += s;
    }
    std::vector<double> p(k, 0.0);
    std::size_t next = 0;
    for (std::size_t j = 0; j < k; ++j) {
        if (static_cast<Label>(j) == predicted) p[j] = peak;
        else p[j] = (1.0 - peak) * share[next++] / share_sum;
    }
    // predicted class stays on top so the requested accuracy holds
    const auto top = static_cast<std::size_t>(argmax(p));
    if (top != static_cast<std::size_t>(predicted)) std::swap(p[top], p[static_cast<std::size_t>(predicted)]);
    return ProbVector::from_trusted(std::move(p));
}

}  // namespace

PredictionPanel gen_panel(std::span<const Label> labels, const PanelSpec& spec) {
    spec.validate();
    const std::size_t m_count = spec.n_models;
    const std::size_t n_count = labels.size();
    for (Label l : labels)
        if (l < 0 || static_cast<std::size_t>(l) >= spec.classes) throw Error(ErrorKind::LabelOutOfRange, "label outside [0, K)");

    std::vector<std::string> models, samples;
    for (std::size_t m = 0; m < m_count; ++m) models.push_back(padded('m', m, m_count, 2));
    for (std::size_t n = 0; n < n_count; ++n) samples.push_back(padded('s', n, n_count, 4));

    Rng rng(derive_seed(spec.seed, 1));
    std::vector<ProbVector> grid(m_count * n_count);
    for (std::size_t n = 0; n < n_count; ++n) {
        const Label truth = labels[n];
        const bool shared = rng.bernoulli(spec.correlation);
        const double shared_u = rng.uniform();
        const Label shared_wrong = draw_wrong(rng, truth, spec.classes, spec.confusion_profile);
        for (std::size_t m = 0; m < m_count; ++m) {
            const double u = shared ? shared_u : rng.uniform();
            Label predicted = truth;
            if (u >= spec.accuracy_of(m))
                predicted = shared ? shared_wrong : draw_wrong(rng, truth, spec.classes, spec.confusion_profile);
            grid[m * n_count + n] = emit(rng, predicted, spec);
        }
    }
    return PredictionPanel(std::move(models), std::move(samples), spec.classes, std::move(grid),
                           std::vector<Label>(labels.begin(), labels.end()));
}

PredictionPanel simulate_panel(const PanelSpec& spec) { return gen_panel(gen_labels(spec), spec); }

// ---------------------------------------------------------------------------
// toy multi-task model

void ToyMultiTaskSpec::validate() const {
    if (features == 0 || trunk == 0) throw Error(ErrorKind::Config, "multitask.features and multitask.trunk must be positive");
    if (classes < 2 || quality_classes < 2) throw Error(ErrorKind::Config, "multitask heads need at least 2 classes");
    if (task2_weights.size() != quality_classes)
        throw Error(ErrorKind::Config, "multitask.task2_weights needs one weight per quality class");
    check_distribution(class_distribution, classes, "multitask.class_distribution");
    if (!(val_fraction > 0.0) || !(val_fraction < 1.0)) throw Error(ErrorKind::Config, "multitask.val_fraction must lie in (0, 1)");
    if (lambdas.empty()) throw Error(ErrorKind::Config, "multitask.lambdas is empty");
    for (double l : lambdas)
        if (!(l >= 0.0) || !std::isfinite(l)) throw Error(ErrorKind::Config, "multitask.lambdas must be non-negative");
    train.validate();
    const auto n_val = static_cast<std::size_t>(std::round(val_fraction * static_cast<double>(n_samples)));
    if (n_val == 0 || n_val >= n_samples) throw Error(ErrorKind::EmptySubset, "toy split leaves an empty subset");
}

namespace {

// Ranks `score` and hands out ordinal classes with exact largest-remainder counts.
std::vector<Label> ordinal_labels(std::span<const double> score, std::span<const double> dist) {
    const auto counts = largest_remainder(static_cast<std::int64_t>(score.size()), dist);
    std::vector<std::size_t> order(score.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return score[a] < score[b]; });
    std::vector<Label> out(score.size());
    std::size_t pos = 0;
    for (std::size_t c = 0; c < counts.size(); ++c)
        for (std::int64_t i = 0; i < counts[c]; ++i) out[order[pos++]] = static_cast<Label>(c);
    return out;
}

}  // namespace

ToyData gen_toy_data(const ToyMultiTaskSpec& spec) {
    spec.validate();
    Rng rng(derive_seed(spec.seed, 2));
    constexpr std::size_t kLatent = 2;
    std::vector<double> mixing(spec.features * kLatent);
    for (double& g : mixing) g = rng.normal();

    ToyData data;
    data.features = spec.features;
    data.x.resize(spec.n_samples * spec.features);
    std::vector<double> grade_score(spec.n_samples), quality_score(spec.n_samples);
    for (std::size_t n = 0; n < spec.n_samples; ++n) {
        const double u0 = rng.normal();
        const double u1 = rng.normal();
        for (std::size_t f = 0; f < spec.features; ++f)
            data.x[n * spec.features + f] = mixing[f * kLatent] * u0 + mixing[f * kLatent + 1] * u1 + spec.noise * rng.normal();
        grade_score[n] = u0 + 0.3 * u1;
        quality_score[n] = u1 + 0.3 * u0;
    }
    // quality classes distributed inversely to their loss weights
    std::vector<double> quality_dist;
    for (double w : spec.task2_weights.values()) quality_dist.push_back(1.0 / w);
    const double qsum = std::accumulate(quality_dist.begin(), quality_dist.end(), 0.0);
    for (double& q : quality_dist) q /= qsum;

    data.grade = ordinal_labels(grade_score, spec.class_distribution);
    data.quality = ordinal_labels(quality_score, quality_dist);
    return data;
}

ToyModel ToyModel::init(const ToyMultiTaskSpec& spec, std::uint64_t seed) {
    ToyModel m;
    m.features = spec.features;
    m.trunk = spec.trunk;
    m.classes = spec.classes;
    m.quality = spec.quality_classes;
    m.params.assign(m.a2_offset() + m.quality * m.trunk + m.quality, 0.0);
    Rng rng(seed);
    auto fill = [&](std::size_t offset, std::size_t rows, std::size_t cols) {
        const double a = std::sqrt(6.0 / static_cast<double>(rows + cols));
        for (std::size_t i = 0; i < rows * cols; ++i) m.params[offset + i] = rng.uniform(-a, a);
    };
    fill(0, m.trunk, m.features);
    fill(m.a3_offset(), m.classes, m.trunk);
    fill(m.a2_offset(), m.quality, m.trunk);
    return m;
}

namespace {

std::vector<double> trunk_forward(const ToyModel& m, std::span<const double> x) {
    std::vector<double> h(m.trunk);
    for (std::size_t t = 0; t < m.trunk; ++t) {
        double z = m.params[m.trunk * m.features + t];
        for (std::size_t f = 0; f < m.features; ++f) z += m.params[t * m.features + f] * x[f];
        h[t] = z;
    }
    return h;
}

std::vector<double> head_forward(const ToyModel& m, std::span<const double> h, std::size_t offset, std::size_t width) {
    std::vector<double> out(width);
    for (std::size_t k = 0; k < width; ++k) {
        double z = m.params[offset + width * m.trunk + k];
        for (std::size_t t = 0; t < m.trunk; ++t) z += m.params[offset + k * m.trunk + t] * h[t];
        out[k] = z;
    }
    return out;
}

}  // namespace

std::vector<double> toy_grade_logits(const ToyModel& model, std::span<const double> x) {
    const auto h = trunk_forward(model, x);
    return head_forward(model, h, model.a3_offset(), model.classes);
}

LossValue toy_task_loss(const ToyModel& model, const ToyData& data, std::span<const std::size_t> batch, ToyTask task,
                        const ClassWeights& weights, Reduction reduction) {
    const bool grade = task == ToyTask::Grade;
    const std::size_t offset = grade ? model.a3_offset() : model.a2_offset();
    const std::size_t width = grade ? model.classes : model.quality;
    const auto& targets_all = grade ? data.grade : data.quality;

    std::vector<std::vector<double>> hidden;
    std::vector<double> logits;
    std::vector<Label> targets;
    for (std::size_t i : batch) {
        const std::span<const double> x(data.x.data() + i * data.features, data.features);
        hidden.push_back(trunk_forward(model, x));
        const auto l = head_forward(model, hidden.back(), offset, width);
        logits.insert(logits.end(), l.begin(), l.end());
        targets.push_back(targets_all[i]);
    }
    const LossValue head = weighted_ce(logits, targets, weights, reduction);

    LossValue out;
    out.value = head.value;
    out.gradient.assign(model.params.size(), 0.0);
    double* g_w = out.gradient.data();
    double* g_b = out.gradient.data() + model.trunk * model.features;
    double* g_a = out.gradient.data() + offset;
    double* g_c = out.gradient.data() + offset + width * model.trunk;
    std::vector<double> g_h(model.trunk);
    for (std::size_t n = 0; n < batch.size(); ++n) {
        const double* dl = head.gradient.data() + n * width;
        const auto& h = hidden[n];
        std::fill(g_h.begin(), g_h.end(), 0.0);
        for (std::size_t k = 0; k < width; ++k) {
            g_c[k] += dl[k];
            for (std::size_t t = 0; t < model.trunk; ++t) {
                g_a[k * model.trunk + t] += dl[k] * h[t];
                g_h[t] += dl[k] * model.params[offset + k * model.trunk + t];
            }
        }
        const double* x = data.x.data() + batch[n] * data.features;
        for (std::size_t t = 0; t < model.trunk; ++t) {
            g_b[t] += g_h[t];
            for (std::size_t f = 0; f < model.features; ++f) g_w[t * model.features + f] += g_h[t] * x[f];
        }
    }
    return out;
}

namespace {

ToyRunResult run_toy(const ToyMultiTaskSpec& spec, std::optional<double> lambda) {
    spec.validate();
    const ToyData data = gen_toy_data(spec);
    const auto n_val = static_cast<std::size_t>(std::round(spec.val_fraction * static_cast<double>(spec.n_samples)));
    const std::size_t n_train = spec.n_samples - n_val;

    std::vector<std::size_t> order(n_train);
    std::iota(order.begin(), order.end(), 0);
    std::vector<std::int64_t> counts(spec.classes, 0);
    for (std::size_t i = 0; i < n_train; ++i) ++counts[static_cast<std::size_t>(data.grade[i])];
    const ClassWeights grade_weights =
        spec.train.class_weights ? *spec.train.class_weights : inverse_frequency_weights(counts);

    ToyRunResult result;
    result.lambda = lambda.value_or(0.0);
    result.single_task = !lambda.has_value();
    ToyModel model = ToyModel::init(spec, derive_seed(spec.train.seed, 0));
    Rng shuffle_rng(derive_seed(spec.train.seed, 1));
    MultiTaskConfig mt;
    mt.lambda = result.lambda;

    std::vector<Label> val_truth(data.grade.begin() + static_cast<std::ptrdiff_t>(n_train), data.grade.end());
    std::optional<double> best;
    for (int e = 0; e < spec.train.epochs; ++e) {
        const double lr = exponential_decay_lr(spec.train.initial_lr, spec.train.decay, e);
        shuffle_rng.shuffle(std::span<std::size_t>(order));
        ToyEpoch rec;
        rec.epoch = e + 1;
        rec.lr = lr;
        for (const auto& batch : minibatches(order, spec.train.batch_size)) {
            const LossValue l3 = toy_task_loss(model, data, batch, ToyTask::Grade, grade_weights, spec.train.reduction);
            rec.loss3 += l3.value;
            if (!lambda) {
                rec.total += l3.value;
                sgd_step(model.params, l3.gradient, lr);
                continue;
            }
            const LossValue l2 =
                toy_task_loss(model, data, batch, ToyTask::Quality, spec.task2_weights, spec.train.reduction);
            rec.loss2 += l2.value;
            const LossValue total = multitask_loss(l3, l2, mt);
            rec.total += total.value;
            sgd_step(model.params, total.gradient, lr);
        }

        std::vector<ProbVector> val_probs;
        for (std::size_t i = n_train; i < spec.n_samples; ++i)
            val_probs.push_back(softmax(toy_grade_logits(model, {data.x.data() + i * data.features, data.features})));
        const ModelScore s = score_predictor("toy", val_probs, val_truth, spec.classes);
        rec.val_qwk = s.qwk;
        rec.val_auc = s.auc;
        rec.val_degenerate = s.degenerate;
        result.history.push_back(rec);
        if (!s.degenerate && (!best || s.qwk > *best)) {
            best = s.qwk;
            result.best_epoch = rec.epoch;
            result.best_val_qwk = s.qwk;
        }
    }
    result.final_model = std::move(model);
    return result;
}

}  // namespace

ToyRunResult toy_train(const ToyMultiTaskSpec& spec, double lambda) { return run_toy(spec, lambda); }

ToyRunResult toy_single_task_run(const ToyMultiTaskSpec& spec) { return run_toy(spec, std::nullopt); }

std::vector<ToyRunResult> toy_multitask_run(const ToyMultiTaskSpec& spec) {
    std::vector<ToyRunResult> out;
    for (double lambda : spec.lambdas) out.push_back(run_toy(spec, lambda));
    return out;
}

}  // namespace drfuse
