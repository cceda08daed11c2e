#include "drfuse/fusion_net.hpp"

#include "drfuse/error.hpp"
#include "drfuse/metrics.hpp"
#include "drfuse/rng.hpp"
#include "drfuse/sgd.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

namespace drfuse {

FusionNet::FusionNet(const FusionDims& dims) : dims_(dims), params_(dims.parameter_count(), 0.0) {
    if (dims.input == 0 || dims.hidden == 0 || dims.output < 2)
        throw Error(ErrorKind::DimensionMismatch, "fusion dims must be positive with at least 2 outputs");
}

FusionNet FusionNet::init(const FusionDims& dims, std::uint64_t seed) {
    FusionNet net(dims);
    Rng rng(seed);
    const double a1 = std::sqrt(6.0 / static_cast<double>(dims.input + dims.hidden));
    for (double& w : net.w1()) w = rng.uniform(-a1, a1);
    const double a2 = std::sqrt(6.0 / static_cast<double>(dims.hidden + dims.output));
    for (double& w : net.w2()) w = rng.uniform(-a2, a2);
    return net;
}

ForwardTrace forward(const FusionNet& net, std::span<const double> input) {
    const auto& d = net.dims();
    if (input.size() != d.input)
        throw Error(ErrorKind::WidthMismatch, "fusion input has width " + std::to_string(input.size()) +
                                                  ", network expects " + std::to_string(d.input));
    ForwardTrace t;
    t.input.assign(input.begin(), input.end());
    t.hidden_pre.resize(d.hidden);
    t.hidden.resize(d.hidden);
    const auto w1 = net.w1();
    const auto b1 = net.b1();
    for (std::size_t h = 0; h < d.hidden; ++h) {
        double z = b1[h];
        const double* row = w1.data() + h * d.input;
        for (std::size_t i = 0; i < d.input; ++i) z += row[i] * input[i];
        t.hidden_pre[h] = z;
        t.hidden[h] = z > 0.0 ? z : 0.0;
    }
    t.logits.resize(d.output);
    const auto w2 = net.w2();
    const auto b2 = net.b2();
    for (std::size_t k = 0; k < d.output; ++k) {
        double z = b2[k];
        const double* row = w2.data() + k * d.hidden;
        for (std::size_t h = 0; h < d.hidden; ++h) z += row[h] * t.hidden[h];
        t.logits[k] = z;
    }
    t.output = softmax(t.logits);
    return t;
}

std::vector<double> backward(const FusionNet& net, std::span<const ForwardTrace> traces,
                             std::span<const Label> targets, const ClassWeights& weights, Reduction reduction) {
    const auto& d = net.dims();
    if (traces.size() != targets.size() || traces.empty())
        throw Error(ErrorKind::ShapeMismatch, "backward needs one trace per target");
    if (weights.size() != d.output) throw Error(ErrorKind::ShapeMismatch, "class weights do not match output width");

    std::vector<double> logits;
    logits.reserve(traces.size() * d.output);
    for (const auto& t : traces) {
        if (t.logits.size() != d.output || t.hidden.size() != d.hidden || t.input.size() != d.input)
            throw Error(ErrorKind::ShapeMismatch, "trace does not come from this network");
        logits.insert(logits.end(), t.logits.begin(), t.logits.end());
    }
    const LossValue loss = weighted_ce(logits, targets, weights, reduction);

    std::vector<double> grad(net.parameter_count(), 0.0);
    double* g_w1 = grad.data();
    double* g_b1 = grad.data() + net.b1_offset();
    double* g_w2 = grad.data() + net.w2_offset();
    double* g_b2 = grad.data() + net.b2_offset();
    const auto w2 = net.w2();
    std::vector<double> g_hidden(d.hidden);

    for (std::size_t n = 0; n < traces.size(); ++n) {
        const auto& t = traces[n];
        const double* g_logit = loss.gradient.data() + n * d.output;
        std::fill(g_hidden.begin(), g_hidden.end(), 0.0);
        for (std::size_t k = 0; k < d.output; ++k) {
            g_b2[k] += g_logit[k];
            for (std::size_t h = 0; h < d.hidden; ++h) {
                g_w2[k * d.hidden + h] += g_logit[k] * t.hidden[h];
                g_hidden[h] += g_logit[k] * w2[k * d.hidden + h];
            }
        }
        for (std::size_t h = 0; h < d.hidden; ++h) {
            if (!(t.hidden_pre[h] > 0.0)) continue;
            g_b1[h] += g_hidden[h];
            for (std::size_t i = 0; i < d.input; ++i) g_w1[h * d.input + i] += g_hidden[h] * t.input[i];
        }
    }
    return grad;
}

void TrainConfig::validate() const {
    if (!(initial_lr > 0.0) || !std::isfinite(initial_lr)) throw Error(ErrorKind::Config, "train.initial_lr must be positive");
    if (!(decay > 0.0) || decay > 1.0) throw Error(ErrorKind::Config, "train.decay must lie in (0, 1]");
    if (epochs <= 0) throw Error(ErrorKind::Config, "train.epochs must be positive");
    if (batch_size == 0) throw Error(ErrorKind::Config, "train.batch_size must be positive");
    if (hidden == 0) throw Error(ErrorKind::Config, "train.hidden must be positive");
}

double TrainConfig::learning_rate(int epoch_index) const {
    return exponential_decay_lr(initial_lr, decay, epoch_index);
}

FusionDataset make_fusion_dataset(const PredictionPanel& panel, std::span<const std::size_t> sample_indices) {
    FusionDataset ds;
    ds.width = panel.num_models() * panel.num_classes();
    ds.inputs.reserve(sample_indices.size() * ds.width);
    const auto& labels = panel.labels();
    for (std::size_t i : sample_indices) {
        const auto col = panel.flat_column(i);
        ds.inputs.insert(ds.inputs.end(), col.begin(), col.end());
        ds.labels.push_back(labels.at(i));
    }
    return ds;
}

namespace {

struct ValScore {
    double qwk = 0.0;
    double auc = 0.0;
    bool degenerate = false;
};

ValScore evaluate(const FusionNet& net, const FusionDataset& val, std::size_t classes) {
    std::vector<ProbVector> probs;
    probs.reserve(val.size());
    for (std::size_t i = 0; i < val.size(); ++i) probs.push_back(forward(net, val.row(i)).output);
    const ModelScore s = score_predictor("fusion", probs, val.labels, classes);
    return {s.qwk, s.auc, s.degenerate};
}

bool better(const ValScore& candidate, const ValScore& incumbent) {
    if (candidate.degenerate) return false;
    if (incumbent.degenerate) return true;
    return candidate.qwk > incumbent.qwk;
}

}  // namespace

TrainResult train_fusion(const FusionDataset& train, const FusionDataset& val, std::size_t classes,
                         const TrainConfig& cfg) {
    cfg.validate();
    if (train.size() == 0) throw Error(ErrorKind::EmptySubset, "training subset is empty");
    if (val.size() == 0) throw Error(ErrorKind::EmptySubset, "validation subset is empty");
    if (train.width != val.width) throw Error(ErrorKind::WidthMismatch, "train and validation widths differ");

    ClassWeights weights;
    if (cfg.class_weights) {
        weights = *cfg.class_weights;
        if (weights.size() != classes) throw Error(ErrorKind::ShapeMismatch, "class weight count differs from K");
    } else {
        std::vector<std::int64_t> counts(classes, 0);
        for (Label l : train.labels) ++counts.at(static_cast<std::size_t>(l));
        weights = inverse_frequency_weights(counts);
    }

    FusionNet net = FusionNet::init({train.width, cfg.hidden, classes}, derive_seed(cfg.seed, 0));
    Rng shuffle_rng(derive_seed(cfg.seed, 1));

    TrainResult result;
    result.class_weights = weights;
    std::optional<ValScore> best_score;

    std::vector<std::size_t> order(train.size());
    std::iota(order.begin(), order.end(), 0);
    std::vector<ForwardTrace> traces;
    std::vector<Label> targets;

    for (int e = 0; e < cfg.epochs; ++e) {
        const double lr = cfg.learning_rate(e);
        shuffle_rng.shuffle(std::span<std::size_t>(order));
        double loss_sum = 0.0;
        double weight_sum = 0.0;
        for (const auto& batch : minibatches(order, cfg.batch_size)) {
            traces.clear();
            targets.clear();
            for (std::size_t i : batch) {
                traces.push_back(forward(net, train.row(i)));
                targets.push_back(train.labels[i]);
            }
            std::vector<double> logits;
            double batch_weight = 0.0;
            for (std::size_t n = 0; n < traces.size(); ++n) {
                logits.insert(logits.end(), traces[n].logits.begin(), traces[n].logits.end());
                batch_weight += weights[static_cast<std::size_t>(targets[n])];
            }
            const double batch_loss = weighted_ce(logits, targets, weights, Reduction::Sum).value;
            if (!std::isfinite(batch_loss)) throw Error(ErrorKind::Internal, "training loss became non-finite");
            loss_sum += batch_loss;
            weight_sum += batch_weight;

            const auto grad = backward(net, traces, targets, weights, cfg.reduction);
            sgd_step(net.parameters(), grad, lr);
        }

        const ValScore score = evaluate(net, val, classes);
        result.history.push_back({e + 1, lr, loss_sum / weight_sum, score.qwk, score.auc, score.degenerate});
        if (!best_score || better(score, *best_score)) {
            best_score = score;
            result.best = {e + 1, net, score.qwk, score.auc};
        }
    }
    return result;
}

TrainResult train_fusion(const PredictionPanel& panel, const SplitAssignment& assignment, const TrainConfig& cfg) {
    if (assignment.tags.size() != panel.num_samples())
        throw Error(ErrorKind::IncompleteAssignment, "split covers " + std::to_string(assignment.tags.size()) +
                                                         " samples, panel has " + std::to_string(panel.num_samples()));
    const auto train_idx = assignment.indices(Subset::Train);
    const auto val_idx = assignment.indices(Subset::Val);
    if (train_idx.empty()) throw Error(ErrorKind::EmptySubset, "resplit '" + assignment.resplit + "' has no train samples");
    if (val_idx.empty()) throw Error(ErrorKind::EmptySubset, "resplit '" + assignment.resplit + "' has no val samples");
    return train_fusion(make_fusion_dataset(panel, train_idx), make_fusion_dataset(panel, val_idx),
                        panel.num_classes(), cfg);
}

// ---------------------------------------------------------------------------
// model file

namespace {

using nlohmann::json;

const char* reduction_name(Reduction r) { return r == Reduction::Sum ? "sum" : "weighted_mean"; }

json config_to_json(const TrainConfig& c) {
    json j{{"initial_lr", c.initial_lr}, {"decay", c.decay},   {"epochs", c.epochs},
           {"batch_size", c.batch_size}, {"seed", c.seed},     {"hidden", c.hidden},
           {"reduction", reduction_name(c.reduction)}};
    if (c.class_weights) j["class_weights"] = std::vector<double>(c.class_weights->values().begin(), c.class_weights->values().end());
    return j;
}

TrainConfig config_from_json(const json& j) {
    TrainConfig c;
    c.initial_lr = j.at("initial_lr").get<double>();
    c.decay = j.at("decay").get<double>();
    c.epochs = j.at("epochs").get<int>();
    c.batch_size = j.at("batch_size").get<std::size_t>();
    c.seed = j.at("seed").get<std::uint64_t>();
    c.hidden = j.at("hidden").get<std::size_t>();
    const auto red = j.at("reduction").get<std::string>();
    if (red == "sum") c.reduction = Reduction::Sum;
    else if (red == "weighted_mean") c.reduction = Reduction::WeightedMean;
    else throw Error(ErrorKind::CorruptModelFile, "unknown reduction '" + red + "'");
    if (j.contains("class_weights")) c.class_weights = ClassWeights(j["class_weights"].get<std::vector<double>>());
    return c;
}

std::vector<double> read_array(const json& j, std::size_t expected, const char* what) {
    auto v = j.get<std::vector<double>>();
    if (v.size() != expected)
        throw Error(ErrorKind::DimensionMismatch, std::string(what) + " holds " + std::to_string(v.size()) +
                                                      " values, dims require " + std::to_string(expected));
    for (double x : v)
        if (!std::isfinite(x)) throw Error(ErrorKind::CorruptModelFile, std::string(what) + " has a non-finite value");
    return v;
}

}  // namespace

std::string serialize(const FusionNet& net, const std::optional<TrainingMetadata>& meta) {
    const auto& d = net.dims();
    auto vec = [](std::span<const double> s) { return std::vector<double>(s.begin(), s.end()); };
    json j;
    j["schema_version"] = 1;
    j["dims"] = {d.input, d.hidden, d.output};
    j["activations"] = {"relu", "softmax"};
    j["weights"] = {vec(net.w1()), vec(net.w2())};
    j["biases"] = {vec(net.b1()), vec(net.b2())};
    if (meta) {
        j["training"] = {{"seed", meta->seed},
                         {"config", config_to_json(meta->config)},
                         {"best_epoch", meta->best_epoch},
                         {"val_qwk", meta->val_qwk},
                         {"val_auc", meta->val_auc}};
    }
    return j.dump(2) + "\n";
}

FusionNet deserialize(std::string_view text, std::optional<TrainingMetadata>* meta) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw Error(ErrorKind::CorruptModelFile, std::string("model file is not valid JSON: ") + e.what());
    }
    try {
        if (j.at("schema_version").get<int>() != 1) throw Error(ErrorKind::CorruptModelFile, "unsupported schema_version");
        const auto dims = j.at("dims").get<std::vector<std::size_t>>();
        if (dims.size() != 3) throw Error(ErrorKind::DimensionMismatch, "dims must list input, hidden and output widths");
        const auto act = j.at("activations").get<std::vector<std::string>>();
        if (act != std::vector<std::string>{"relu", "softmax"})
            throw Error(ErrorKind::CorruptModelFile, "unsupported activations");
        const auto& weights = j.at("weights");
        const auto& biases = j.at("biases");
        if (!weights.is_array() || weights.size() != 2 || !biases.is_array() || biases.size() != 2)
            throw Error(ErrorKind::DimensionMismatch, "expected two weight and two bias arrays");

        FusionNet net({dims[0], dims[1], dims[2]});
        const auto w1 = read_array(weights[0], dims[1] * dims[0], "weights[0]");
        const auto w2 = read_array(weights[1], dims[2] * dims[1], "weights[1]");
        const auto b1 = read_array(biases[0], dims[1], "biases[0]");
        const auto b2 = read_array(biases[1], dims[2], "biases[1]");
        std::copy(w1.begin(), w1.end(), net.w1().begin());
        std::copy(b1.begin(), b1.end(), net.b1().begin());
        std::copy(w2.begin(), w2.end(), net.w2().begin());
        std::copy(b2.begin(), b2.end(), net.b2().begin());

        if (meta) {
            meta->reset();
            if (j.contains("training")) {
                const auto& t = j["training"];
                TrainingMetadata m;
                m.seed = t.at("seed").get<std::uint64_t>();
                m.config = config_from_json(t.at("config"));
                m.best_epoch = t.at("best_epoch").get<int>();
                m.val_qwk = t.at("val_qwk").get<double>();
                m.val_auc = t.at("val_auc").get<double>();
                *meta = m;
            }
        }
        return net;
    } catch (const json::exception& e) {
        throw Error(ErrorKind::CorruptModelFile, std::string("malformed model file: ") + e.what());
    }
}

void save_model(const std::string& path, const FusionNet& net, const std::optional<TrainingMetadata>& meta) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorKind::Io, "cannot write model file '" + path + "'");
    out << serialize(net, meta);
    if (!out) throw Error(ErrorKind::Io, "failed writing model file '" + path + "'");
}

FusionNet load_model(const std::string& path, std::optional<TrainingMetadata>* meta) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::Io, "cannot read model file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return deserialize(buf.str(), meta);
}

}  // namespace drfuse
