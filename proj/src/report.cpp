#include "drfuse/report.hpp"

#include "drfuse/error.hpp"
#include "drfuse/format.hpp"

#include <algorithm>
#include <array>

namespace drfuse {

std::string_view training_regime_name(TrainingRegime r) noexcept {
    return r == TrainingRegime::SingleTask ? "single" : "multi";
}

std::pair<ReportSource, std::string> parse_report_tag(std::string_view tag) {
    ReportSource src;
    const auto eq = tag.find('=');
    if (eq == std::string_view::npos) return {src, std::string(tag)};
    std::string_view head = tag.substr(0, eq);
    const std::string path(tag.substr(eq + 1));
    if (path.empty()) throw Error(ErrorKind::Usage, "report source '" + std::string(tag) + "' has no path");
    if (const auto colon = head.find(':'); colon != std::string_view::npos) {
        const auto regime = head.substr(0, colon);
        if (regime == "single") src.training = TrainingRegime::SingleTask;
        else if (regime == "multi") src.training = TrainingRegime::MultiTask;
        else throw Error(ErrorKind::Usage, "training regime must be single or multi, got '" + std::string(regime) + "'");
        head = head.substr(colon + 1);
    }
    src.strategy = parse_strategy(head);
    return {src, path};
}

namespace {

std::string_view strategy_title(StrategyKind k) {
    switch (k) {
        case StrategyKind::PluralityVote: return "Plurality vote";
        case StrategyKind::Averaging: return "Averaging";
        case StrategyKind::LabelFusion: return "Label fusion";
    }
    return "";
}

std::string qwk_text(const ModelScore& s) { return s.degenerate ? "undef" : format_fixed(s.qwk, 4); }

std::string pad(std::string s, std::size_t width, bool right) {
    if (s.size() >= width) return s;
    const std::string fill(width - s.size(), ' ');
    return right ? fill + s : s + fill;
}

// First column left-aligned, the rest right-aligned, two spaces apart.
std::string render_table(const std::string& title, const std::vector<std::vector<std::string>>& rows) {
    std::vector<std::size_t> width(rows.front().size(), 0);
    for (const auto& r : rows)
        for (std::size_t c = 0; c < r.size(); ++c) width[c] = std::max(width[c], r[c].size());
    std::string out = title + "\n";
    for (std::size_t i = 0; i < rows.size(); ++i) {
        std::string line;
        for (std::size_t c = 0; c < rows[i].size(); ++c) {
            if (c) line += "  ";
            line += pad(rows[i][c], width[c], c != 0);
        }
        while (!line.empty() && line.back() == ' ') line.pop_back();
        out += line + "\n";
        if (i == 0) {
            std::size_t total = 0;
            for (auto w : width) total += w;
            out += std::string(total + 2 * (width.size() - 1), '-') + "\n";
        }
    }
    return out;
}

const MetricsRow& ensemble_row(const ReportSource& src) {
    if (src.rows.size() == 1) return src.rows.front();
    for (const auto& r : src.rows)
        if (r.model_id == "ensemble") return r;
    throw Error(ErrorKind::MalformedFile, "strategy metrics for '" + std::string(strategy_name(*src.strategy)) +
                                              "' must hold one row or a row named 'ensemble'");
}

}  // namespace

std::string render_report(const std::vector<ReportSource>& sources) {
    std::vector<const MetricsRow*> per_model;
    // [regime][strategy]; later sources override earlier ones
    std::array<std::array<const MetricsRow*, 3>, 2> grid{};
    bool any_strategy = false;
    for (const auto& src : sources) {
        if (!src.strategy) {
            for (const auto& r : src.rows) per_model.push_back(&r);
        } else if (!src.rows.empty()) {
            grid[static_cast<std::size_t>(src.training)][static_cast<std::size_t>(*src.strategy)] = &ensemble_row(src);
            any_strategy = true;
        }
    }
    if (per_model.empty() && !any_strategy) throw Error(ErrorKind::EmptySubset, "report needs at least one metrics row");

    std::string out;
    if (!per_model.empty()) {
        std::vector<std::vector<std::string>> rows{{"Model", "N", "QWK", "AUC"}};
        for (const auto* r : per_model)
            rows.push_back({r->model_id, std::to_string(r->n), qwk_text(r->score), format_fixed(r->score.auc, 4)});
        out += render_table("Per-model results", rows);
    }

    const std::array<StrategyKind, 3> kinds{StrategyKind::PluralityVote, StrategyKind::Averaging, StrategyKind::LabelFusion};
    {
        std::vector<std::vector<std::string>> rows{{"Strategy", "QWK", "AUC"}};
        if (!per_model.empty()) {
            std::vector<ModelScore> scores;
            for (const auto* r : per_model) scores.push_back(r->score);
            const auto best = *std::min_element(scores.begin(), scores.end(), ranks_before);
            rows.push_back({"Best single (" + best.model_id + ")", qwk_text(best), format_fixed(best.auc, 4)});
        }
        const auto& multi = grid[static_cast<std::size_t>(TrainingRegime::MultiTask)];
        for (auto k : kinds)
            if (const auto* r = multi[static_cast<std::size_t>(k)])
                rows.push_back({std::string(strategy_title(k)), qwk_text(r->score), format_fixed(r->score.auc, 4)});
        if (!out.empty()) out += "\n";
        out += render_table("Ensemble strategies", rows);
    }

    {
        std::vector<std::vector<std::string>> rows{{"Training", "", "", ""}};
        for (std::size_t i = 0; i < kinds.size(); ++i) rows[0][i + 1] = std::string(strategy_title(kinds[i])) + " QWK/AUC";
        for (auto regime : {TrainingRegime::SingleTask, TrainingRegime::MultiTask}) {
            std::vector<std::string> row{regime == TrainingRegime::SingleTask ? "Single-task" : "Multi-task"};
            for (auto k : kinds) {
                const auto* r = grid[static_cast<std::size_t>(regime)][static_cast<std::size_t>(k)];
                row.push_back(r ? qwk_text(r->score) + "/" + format_fixed(r->score.auc, 4) : "-");
            }
            rows.push_back(std::move(row));
        }
        out += "\n";
        out += render_table("Training regime by strategy", rows);
    }
    return out;
}

}  // namespace drfuse
