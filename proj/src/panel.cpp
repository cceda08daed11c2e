#include "drfuse/panel.hpp"

#include "drfuse/error.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

namespace drfuse {

ProbVector ProbVector::validate(std::span<const double> raw, const TolerancePolicy& policy, bool* renormalized) {
    if (renormalized) *renormalized = false;
    if (raw.size() < 2) throw Error(ErrorKind::ShapeMismatch, "probability vector needs at least 2 classes");
    double sum = 0.0;
    for (std::size_t i = 0; i < raw.size(); ++i) {
        if (!std::isfinite(raw[i]))
            throw Error(ErrorKind::NonFiniteEntry, "entry " + std::to_string(i) + " is not finite");
        if (raw[i] < 0.0)
            throw Error(ErrorKind::NegativeEntry, "entry " + std::to_string(i) + " is negative");
        sum += raw[i];
    }
    const double deviation = std::abs(sum - 1.0);
    std::vector<double> probs(raw.begin(), raw.end());
    if (deviation <= policy.accept) return ProbVector(std::move(probs));
    if (deviation <= policy.renormalize) {
        for (double& p : probs) p /= sum;
        if (renormalized) *renormalized = true;
        return ProbVector(std::move(probs));
    }
    throw Error(ErrorKind::SumOutOfRange, "probabilities sum to " + std::to_string(sum));
}

ProbVector ProbVector::from_trusted(std::vector<double> values) {
    for (double v : values)
        if (!std::isfinite(v)) throw Error(ErrorKind::NonFiniteEntry, "non-finite probability");
    return ProbVector(std::move(values));
}

ProbVector ProbVector::uniform(std::size_t k) {
    return ProbVector(std::vector<double>(k, 1.0 / static_cast<double>(k)));
}

ProbVector ProbVector::one_hot(std::size_t k, Label label) {
    std::vector<double> v(k, 0.0);
    v.at(static_cast<std::size_t>(label)) = 1.0;
    return ProbVector(std::move(v));
}

Label ProbVector::argmax() const { return drfuse::argmax(probs_); }

Label argmax(std::span<const double> values) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < values.size(); ++i)
        if (values[i] > values[best]) best = i;
    return static_cast<Label>(best);
}

PredictionPanel::PredictionPanel(std::vector<std::string> models, std::vector<std::string> samples,
                                 std::size_t classes, std::vector<ProbVector> grid,
                                 std::optional<std::vector<Label>> labels)
    : models_(std::move(models)),
      samples_(std::move(samples)),
      classes_(classes),
      grid_(std::move(grid)),
      labels_(std::move(labels)) {
    if (grid_.size() != models_.size() * samples_.size())
        throw Error(ErrorKind::MissingCell, "panel grid does not cover every model/sample pair");
    for (const auto& p : grid_)
        if (p.size() != classes_) throw Error(ErrorKind::ShapeMismatch, "probability vector width differs from K");
    if (labels_) {
        if (labels_->size() != samples_.size())
            throw Error(ErrorKind::LengthMismatch, "label count differs from sample count");
        for (Label l : *labels_)
            if (l < 0 || static_cast<std::size_t>(l) >= classes_)
                throw Error(ErrorKind::LabelOutOfRange, "label " + std::to_string(l) + " outside [0, K)");
    }
}

std::vector<ProbVector> PredictionPanel::column(std::size_t sample) const {
    std::vector<ProbVector> out;
    out.reserve(models_.size());
    for (std::size_t m = 0; m < models_.size(); ++m) out.push_back(at(m, sample));
    return out;
}

std::vector<double> PredictionPanel::flat_column(std::size_t sample) const {
    std::vector<double> out;
    out.reserve(models_.size() * classes_);
    for (std::size_t m = 0; m < models_.size(); ++m) {
        const auto v = at(m, sample).values();
        out.insert(out.end(), v.begin(), v.end());
    }
    return out;
}

const std::vector<Label>& PredictionPanel::labels() const {
    if (!labels_) throw Error(ErrorKind::EmptySubset, "panel carries no true labels");
    return *labels_;
}

PredictionPanel PredictionPanel::select_samples(std::span<const std::size_t> indices) const {
    std::vector<std::string> samples;
    samples.reserve(indices.size());
    for (std::size_t i : indices) samples.push_back(samples_.at(i));
    std::vector<ProbVector> grid;
    grid.reserve(models_.size() * indices.size());
    for (std::size_t m = 0; m < models_.size(); ++m)
        for (std::size_t i : indices) grid.push_back(at(m, i));
    std::optional<std::vector<Label>> labels;
    if (labels_) {
        labels.emplace();
        for (std::size_t i : indices) labels->push_back((*labels_)[i]);
    }
    return PredictionPanel(models_, std::move(samples), classes_, std::move(grid), std::move(labels));
}

PredictionPanel PredictionPanel::select_models(std::span<const std::size_t> indices) const {
    std::vector<std::string> models;
    std::vector<ProbVector> grid;
    for (std::size_t m : indices) {
        models.push_back(models_.at(m));
        const auto r = row(m);
        grid.insert(grid.end(), r.begin(), r.end());
    }
    return PredictionPanel(std::move(models), samples_, classes_, std::move(grid), labels_);
}

namespace {
std::size_t index_of(const std::vector<std::string>& sorted, const std::string& id, const char* what) {
    const auto it = std::lower_bound(sorted.begin(), sorted.end(), id);
    if (it == sorted.end() || *it != id) throw Error(ErrorKind::MissingCell, std::string("unknown ") + what + " '" + id + "'");
    return static_cast<std::size_t>(it - sorted.begin());
}
}  // namespace

std::size_t PredictionPanel::model_index(const std::string& id) const {
    // models may be reordered by select_models; fall back to linear search
    if (std::is_sorted(models_.begin(), models_.end())) return index_of(models_, id, "model");
    const auto it = std::find(models_.begin(), models_.end(), id);
    if (it == models_.end()) throw Error(ErrorKind::MissingCell, "unknown model '" + id + "'");
    return static_cast<std::size_t>(it - models_.begin());
}

std::size_t PredictionPanel::sample_index(const std::string& id) const {
    if (std::is_sorted(samples_.begin(), samples_.end())) return index_of(samples_, id, "sample");
    const auto it = std::find(samples_.begin(), samples_.end(), id);
    if (it == samples_.end()) throw Error(ErrorKind::MissingCell, "unknown sample '" + id + "'");
    return static_cast<std::size_t>(it - samples_.begin());
}

std::vector<PredictionRecord> PredictionPanel::to_records() const {
    std::vector<PredictionRecord> out;
    out.reserve(grid_.size());
    for (std::size_t n = 0; n < samples_.size(); ++n) {
        for (std::size_t m = 0; m < models_.size(); ++m) {
            PredictionRecord r{samples_[n], models_[m], at(m, n), std::nullopt};
            if (labels_) r.true_label = (*labels_)[n];
            out.push_back(std::move(r));
        }
    }
    return out;
}

PredictionPanel assemble_panel(std::span<const PredictionRecord> records) {
    if (records.empty()) throw Error(ErrorKind::EmptySubset, "no prediction records");
    const std::size_t classes = records.front().probs.size();

    std::set<std::string> model_set;
    std::set<std::string> sample_set;
    std::map<std::pair<std::string, std::string>, const PredictionRecord*> cells;
    for (const auto& r : records) {
        if (r.probs.size() != classes)
            throw Error(ErrorKind::ShapeMismatch, "record (" + r.sample_id + ", " + r.model_id + ") has " +
                                                      std::to_string(r.probs.size()) + " classes, expected " +
                                                      std::to_string(classes));
        auto [it, inserted] = cells.try_emplace({r.model_id, r.sample_id}, &r);
        if (!inserted)
            throw Error(ErrorKind::DuplicateRecord, "duplicate record for sample '" + r.sample_id + "', model '" +
                                                        r.model_id + "'");
        model_set.insert(r.model_id);
        sample_set.insert(r.sample_id);
    }

    std::vector<std::string> models(model_set.begin(), model_set.end());
    std::vector<std::string> samples(sample_set.begin(), sample_set.end());

    std::vector<ProbVector> grid;
    grid.reserve(models.size() * samples.size());
    std::vector<std::optional<Label>> sample_labels(samples.size());
    for (const auto& model : models) {
        for (std::size_t n = 0; n < samples.size(); ++n) {
            const auto it = cells.find({model, samples[n]});
            if (it == cells.end())
                throw Error(ErrorKind::MissingCell, "model '" + model + "' has no prediction for sample '" +
                                                        samples[n] + "'");
            const PredictionRecord& r = *it->second;
            if (r.true_label) {
                if (*r.true_label < 0 || static_cast<std::size_t>(*r.true_label) >= classes)
                    throw Error(ErrorKind::LabelOutOfRange, "label for sample '" + r.sample_id + "' outside [0, K)");
                if (sample_labels[n] && *sample_labels[n] != *r.true_label)
                    throw Error(ErrorKind::ConflictingLabel, "records disagree on the label of sample '" +
                                                                 samples[n] + "'");
                sample_labels[n] = r.true_label;
            }
            grid.push_back(r.probs);
        }
    }

    std::optional<std::vector<Label>> labels;
    const bool all_labeled =
        std::all_of(sample_labels.begin(), sample_labels.end(), [](const auto& l) { return l.has_value(); });
    if (all_labeled) {
        labels.emplace();
        for (const auto& l : sample_labels) labels->push_back(*l);
    }
    return PredictionPanel(std::move(models), std::move(samples), classes, std::move(grid), std::move(labels));
}

}  // namespace drfuse
