#include "drfuse/config.hpp"

#include "drfuse/error.hpp"
#include "drfuse/format.hpp"
#include "drfuse/io.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>

namespace drfuse {

namespace {

std::vector<double> parse_list(std::string_view text, const std::string& key) {
    std::vector<double> out;
    if (trim(text).empty()) return out;
    for (const auto& part : split(text, ',')) out.push_back(parse_double(part, key));
    return out;
}

std::string format_list(std::span<const double> values) {
    std::string out;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) out += ',';
        out += format_double(values[i]);
    }
    return out;
}

std::size_t parse_size(std::string_view text, const std::string& key) {
    return static_cast<std::size_t>(parse_u64(text, key));
}

ClassWeights parse_weights(std::string_view text, const std::string& key) {
    try {
        return ClassWeights(parse_list(text, key));
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::Config) throw;
        throw Error(ErrorKind::Config, key + ": weights must be positive and finite");
    }
}

struct Field {
    std::function<void(RunConfig&, std::string_view, const std::string&)> set;
    std::function<std::string(const RunConfig&)> get;
};

// `ref` is a generic lambda returning a reference to the member, usable on
// const and non-const configs alike.
template <class Ref>
Field size_field(Ref ref) {
    return {[ref](RunConfig& c, std::string_view v, const std::string& k) { ref(c) = parse_size(v, k); },
            [ref](const RunConfig& c) { return std::to_string(ref(c)); }};
}

template <class Ref>
Field u64_field(Ref ref) {
    return {[ref](RunConfig& c, std::string_view v, const std::string& k) { ref(c) = parse_u64(v, k); },
            [ref](const RunConfig& c) { return std::to_string(ref(c)); }};
}

template <class Ref>
Field double_field(Ref ref) {
    return {[ref](RunConfig& c, std::string_view v, const std::string& k) { ref(c) = parse_double(v, k); },
            [ref](const RunConfig& c) { return format_double(ref(c)); }};
}

template <class Ref>
Field list_field(Ref ref) {
    return {[ref](RunConfig& c, std::string_view v, const std::string& k) { ref(c) = parse_list(v, k); },
            [ref](const RunConfig& c) { return format_list(ref(c)); }};
}

template <class Ref>
Field path_field(Ref ref) {
    return {[ref](RunConfig& c, std::string_view v, const std::string& k) {
                if (trim(v).empty()) throw Error(ErrorKind::Config, k + ": path must not be empty");
                ref(c) = std::string(trim(v));
            },
            [ref](const RunConfig& c) { return ref(c); }};
}

const std::vector<std::pair<std::string, Field>>& fields() {
    static const std::vector<std::pair<std::string, Field>> table = {
        {"split.fractions",
         {[](RunConfig& c, std::string_view v, const std::string& k) {
              const auto f = parse_list(v, k);
              if (f.size() != kNumSubsets) throw Error(ErrorKind::Config, k + ": expected train,val,test fractions");
              for (std::size_t i = 0; i < kNumSubsets; ++i) c.split.fractions[i] = f[i];
          },
          [](const RunConfig& c) { return format_list(c.split.fractions); }}},
        {"split.master_seed", u64_field([](auto& c) -> auto& { return c.split.master_seed; })},
        {"split.resplits",
         {[](RunConfig& c, std::string_view v, const std::string& k) {
              std::vector<Resplit> out;
              for (const auto& part : split(v, ',')) {
                  const auto colon = part.find(':');
                  if (colon == std::string::npos)
                      throw Error(ErrorKind::Config, k + ": entries must look like NAME:SEED");
                  out.push_back({std::string(trim(std::string_view(part).substr(0, colon))),
                                 parse_u64(std::string_view(part).substr(colon + 1), k)});
              }
              c.split.resplits = std::move(out);
          },
          [](const RunConfig& c) {
              std::string out;
              for (const auto& r : c.split.resplits) out += (out.empty() ? "" : ",") + r.name + ":" + std::to_string(r.seed);
              return out;
          }}},

        {"train.initial_lr", double_field([](auto& c) -> auto& { return c.train.initial_lr; })},
        {"train.decay", double_field([](auto& c) -> auto& { return c.train.decay; })},
        {"train.epochs",
         {[](RunConfig& c, std::string_view v, const std::string& k) {
              c.train.epochs = static_cast<int>(parse_int(v, k));
          },
          [](const RunConfig& c) { return std::to_string(c.train.epochs); }}},
        {"train.batch_size", size_field([](auto& c) -> auto& { return c.train.batch_size; })},
        {"train.seed", u64_field([](auto& c) -> auto& { return c.train.seed; })},
        {"train.hidden", size_field([](auto& c) -> auto& { return c.train.hidden; })},
        {"train.reduction",
         {[](RunConfig& c, std::string_view v, const std::string& k) {
              const auto t = trim(v);
              if (t == "sum") c.train.reduction = Reduction::Sum;
              else if (t == "mean") c.train.reduction = Reduction::WeightedMean;
              else throw Error(ErrorKind::Config, k + ": expected sum or mean, got '" + std::string(t) + "'");
          },
          [](const RunConfig& c) { return std::string(c.train.reduction == Reduction::Sum ? "sum" : "mean"); }}},
        {"train.class_weights",
         {[](RunConfig& c, std::string_view v, const std::string& k) {
              if (trim(v).empty()) c.train.class_weights.reset();
              else c.train.class_weights = parse_weights(v, k);
          },
          [](const RunConfig& c) { return c.train.class_weights ? format_list(c.train.class_weights->values()) : ""; }}},

        {"multitask.lambda", double_field([](auto& c) -> auto& { return c.multitask.loss.lambda; })},
        {"multitask.lambdas", list_field([](auto& c) -> auto& { return c.multitask.lambdas; })},
        {"multitask.task2_weights",
         {[](RunConfig& c, std::string_view v, const std::string& k) { c.multitask.loss.task2_weights = parse_weights(v, k); },
          [](const RunConfig& c) { return format_list(c.multitask.loss.task2_weights.values()); }}},
        {"multitask.n_samples", size_field([](auto& c) -> auto& { return c.multitask.n_samples; })},
        {"multitask.seed", u64_field([](auto& c) -> auto& { return c.multitask.seed; })},

        {"simulate.n_models", size_field([](auto& c) -> auto& { return c.simulate.n_models; })},
        {"simulate.n_samples", size_field([](auto& c) -> auto& { return c.simulate.n_samples; })},
        {"simulate.classes", size_field([](auto& c) -> auto& { return c.simulate.classes; })},
        {"simulate.class_distribution", list_field([](auto& c) -> auto& { return c.simulate.class_distribution; })},
        {"simulate.per_model_accuracy", list_field([](auto& c) -> auto& { return c.simulate.per_model_accuracy; })},
        {"simulate.confusion_profile",
         {[](RunConfig& c, std::string_view v, const std::string& k) {
              try {
                  c.simulate.confusion_profile = parse_confusion_profile(trim(v));
              } catch (const Error&) {
                  throw Error(ErrorKind::Config, k + ": expected adjacent or uniform");
              }
          },
          [](const RunConfig& c) { return std::string(confusion_profile_name(c.simulate.confusion_profile)); }}},
        {"simulate.sharpness", double_field([](auto& c) -> auto& { return c.simulate.sharpness; })},
        {"simulate.noise", double_field([](auto& c) -> auto& { return c.simulate.noise; })},
        {"simulate.correlation", double_field([](auto& c) -> auto& { return c.simulate.correlation; })},
        {"simulate.seed", u64_field([](auto& c) -> auto& { return c.simulate.seed; })},

        {"ensemble.strategy",
         {[](RunConfig& c, std::string_view v, const std::string& k) {
              try {
                  c.strategy = parse_strategy(trim(v));
              } catch (const Error&) {
                  throw Error(ErrorKind::Config, k + ": expected vote, avg or fusion");
              }
          },
          [](const RunConfig& c) { return std::string(strategy_name(c.strategy)); }}},

        {"output.predictions", path_field([](auto& c) -> auto& { return c.output.predictions; })},
        {"output.labels", path_field([](auto& c) -> auto& { return c.output.labels; })},
        {"output.splits", path_field([](auto& c) -> auto& { return c.output.splits; })},
        {"output.metrics", path_field([](auto& c) -> auto& { return c.output.metrics; })},
        {"output.ensemble", path_field([](auto& c) -> auto& { return c.output.ensemble; })},
        {"output.model", path_field([](auto& c) -> auto& { return c.output.model; })},
        {"output.history", path_field([](auto& c) -> auto& { return c.output.history; })},
        {"output.report", path_field([](auto& c) -> auto& { return c.output.report; })},
    };
    return table;
}


const Field& field(std::string_view key) {
    for (const auto& [name, f] : fields())
        if (name == key) return f;
    throw Error(ErrorKind::Config, "unknown config key '" + std::string(key) + "'");
}

// Module validation errors re-raised as config errors naming the key.
template <class F>
void check(const std::string& key, F&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::Config) throw;
        throw Error(ErrorKind::Config, key + ": " + e.what());
    }
}

}  // namespace

const std::vector<std::string>& RunConfig::keys() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> out;
        for (const auto& [name, f] : fields()) out.push_back(name);
        return out;
    }();
    return names;
}

void RunConfig::set(std::string_view key, std::string_view value) {
    const std::string k(key);
    try {
        field(key).set(*this, value, k);
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::Config) throw;
        throw Error(ErrorKind::Config, k + ": " + e.what());
    }
}

std::string RunConfig::get(std::string_view key) const { return field(key).get(*this); }

void RunConfig::validate() const {
    check("split.fractions", [&] { split.validate(); });
    check("train", [&] { train.validate(); });
    if (train.class_weights && train.class_weights->size() != simulate.classes)
        throw Error(ErrorKind::Config, "train.class_weights: expected " + std::to_string(simulate.classes) + " weights");
    check("simulate", [&] { simulate.validate(); });
    if (!(multitask.loss.lambda >= 0.0) || !std::isfinite(multitask.loss.lambda))
        throw Error(ErrorKind::Config, "multitask.lambda: must be finite and >= 0");
    if (multitask.lambdas.empty()) throw Error(ErrorKind::Config, "multitask.lambdas: at least one value is required");
    for (double l : multitask.lambdas)
        if (!(l >= 0.0) || !std::isfinite(l))
            throw Error(ErrorKind::Config, "multitask.lambdas: values must be finite and >= 0");
    check("multitask", [&] { toy_spec(*this).validate(); });
}

std::string RunConfig::canonical() const {
    std::string out;
    for (const auto& [name, f] : fields()) out += name + " = " + f.get(*this) + "\n";
    return out;
}

std::string RunConfig::hash() const { return hex64(fnv1a64(canonical())); }

RunConfig parse_run_config(std::string_view text) {
    namespace pt = boost::property_tree;
    pt::ptree tree;
    std::istringstream in{std::string(text)};
    try {
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw Error(ErrorKind::Config, "line " + std::to_string(e.line()) + ": " + e.message());
    }
    static const std::vector<std::string> sections{"split", "train", "multitask", "simulate", "ensemble", "output"};
    RunConfig cfg;
    for (const auto& [section, body] : tree) {
        if (body.empty())
            throw Error(ErrorKind::Config, "key '" + section + "' is outside any section");
        if (std::find(sections.begin(), sections.end(), section) == sections.end())
            throw Error(ErrorKind::Config, "unknown config section '" + section + "'");
        for (const auto& [key, value] : body) cfg.set(section + "." + key, value.data());
    }
    return cfg;
}

RunConfig load_run_config(const std::string& path) {
    try {
        return parse_run_config(read_file(path));
    } catch (const Error& e) {
        if (e.kind() != ErrorKind::Config) throw;
        throw Error(ErrorKind::Config, path + ": " + e.detail());
    }
}

ToyMultiTaskSpec toy_spec(const RunConfig& cfg) {
    ToyMultiTaskSpec spec;
    spec.n_samples = cfg.multitask.n_samples;
    spec.seed = cfg.multitask.seed;
    spec.lambdas = cfg.multitask.lambdas;
    spec.task2_weights = cfg.multitask.loss.task2_weights;
    spec.quality_classes = spec.task2_weights.size();
    spec.train = cfg.train;
    return spec;
}

}  // namespace drfuse
