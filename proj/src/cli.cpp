#include "drfuse/cli.hpp"

#include "drfuse/config.hpp"
#include "drfuse/ensemble.hpp"
#include "drfuse/error.hpp"
#include "drfuse/format.hpp"
#include "drfuse/fusion_net.hpp"
#include "drfuse/io.hpp"
#include "drfuse/metrics.hpp"
#include "drfuse/report.hpp"
#include "drfuse/selection.hpp"
#include "drfuse/simulator.hpp"
#include "drfuse/splitting.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <map>
#include <memory>
#include <ostream>

namespace drfuse {

namespace {

struct ConfigOptions {
    std::string path;
    std::map<std::string, std::string> overrides;
    std::map<std::string, CLI::Option*> options;

    void attach(CLI::App* cmd) {
        cmd->add_option("--config", path, "run configuration file (INI sections)");
        for (const auto& key : RunConfig::keys()) {
            options[key] = cmd->add_option("--" + key, overrides[key], "override " + key);
        }
    }

    RunConfig resolve() const {
        RunConfig cfg = path.empty() ? RunConfig{} : load_run_config(path);
        for (const auto& [key, opt] : options)
            if (opt->count()) cfg.set(key, overrides.at(key));
        cfg.validate();
        return cfg;
    }
};

struct SubsetFilter {
    std::string splits;
    std::string resplit;
    std::string subset;

    void attach(CLI::App* cmd, bool required_splits) {
        auto* opt = cmd->add_option("--splits", splits, "splits CSV");
        if (required_splits) opt->required();
        cmd->add_option("--resplit", resplit, "resplit name (default: first in the splits file)");
        cmd->add_option("--subset", subset, "train|val|test (requires --splits)");
    }
};

PredictionPanel load_panel(const std::string& predictions, const std::string& labels_path, std::ostream& err) {
    auto file = read_predictions(predictions);
    if (file.renormalized)
        err << "warning: " << file.renormalized << " probability rows in '" << predictions
            << "' were renormalized into the simplex\n";
    if (!labels_path.empty()) {
        std::map<std::string, Label> labels;
        for (const auto& row : read_labels(labels_path)) labels[row.sample_id] = row.label;
        for (auto& r : file.records) {
            const auto it = labels.find(r.sample_id);
            if (it == labels.end()) continue;
            if (r.true_label && *r.true_label != it->second)
                throw Error(ErrorKind::ConflictingLabel,
                            "sample '" + r.sample_id + "' has label " + std::to_string(*r.true_label) + " in '" +
                                predictions + "' but " + std::to_string(it->second) + " in '" + labels_path + "'");
            r.true_label = it->second;
        }
    }
    return assemble_panel(file.records);
}

SplitAssignment resolve_assignment(const SplitTable& table, const std::string& resplit,
                                   const std::vector<std::string>& samples) {
    const std::string name = resplit.empty() ? table.assignments.front().resplit : resplit;
    return table.aligned(name, samples);
}

PredictionPanel apply_filter(const PredictionPanel& panel, const SubsetFilter& f) {
    if (f.splits.empty()) {
        if (!f.subset.empty() || !f.resplit.empty()) throw Error(ErrorKind::Usage, "--subset/--resplit need --splits");
        return panel;
    }
    const auto table = read_splits(f.splits);
    const auto assignment = resolve_assignment(table, f.resplit, panel.samples());
    const Subset subset = parse_subset(f.subset.empty() ? "test" : f.subset);
    const auto idx = assignment.indices(subset);
    if (idx.empty()) throw Error(ErrorKind::EmptySubset, std::string(subset_name(subset)) + " subset is empty");
    return panel.select_samples(idx);
}

std::vector<std::string> provenance(const std::string& command, const RunConfig& cfg,
                                    std::vector<std::string> extra = {}) {
    std::vector<std::string> lines{"generator: drfuse " + command};
    for (auto& e : extra) lines.push_back(std::move(e));
    lines.push_back("config_hash: " + cfg.hash());
    return lines;
}

std::string history_csv(const TrainResult& result) {
    std::string out = "epoch,lr,train_loss,val_qwk,val_auc\n";
    for (const auto& e : result.history) {
        out += std::to_string(e.epoch) + "," + format_double(e.lr) + "," + format_double(e.train_loss) + ",";
        out += e.val_degenerate ? std::string("nan") : format_double(e.val_qwk);
        out += "," + format_double(e.val_auc) + "\n";
    }
    return out;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Ensembling toolkit for ordinal grading panels", "drfuse"};
    app.require_subcommand(1);

    // simulate
    ConfigOptions sim_cfg;
    std::string sim_out;
    auto* sim = app.add_subcommand("simulate", "generate a synthetic prediction panel and its labels");
    sim_cfg.attach(sim);
    sim->add_option("--out", sim_out, "predictions output (overrides output.predictions)");

    // split
    ConfigOptions split_cfg;
    std::string split_labels, split_out;
    auto* split_cmd = app.add_subcommand("split", "stratified train/val/test split for every resplit");
    split_cfg.attach(split_cmd);
    split_cmd->add_option("--labels", split_labels, "labels CSV")->required();
    split_cmd->add_option("--out", split_out, "splits output (overrides output.splits)");

    // eval
    ConfigOptions eval_cfg;
    SubsetFilter eval_filter;
    std::string eval_pred, eval_labels, eval_out;
    auto* eval = app.add_subcommand("eval", "per-model QWK and ovo macro AUC");
    eval_cfg.attach(eval);
    eval->add_option("--predictions", eval_pred, "predictions CSV")->required();
    eval->add_option("--labels", eval_labels, "labels CSV joined on sample_id");
    eval_filter.attach(eval, false);
    eval->add_option("--out", eval_out, "metrics output (overrides output.metrics)");

    // ensemble
    ConfigOptions ens_cfg;
    SubsetFilter ens_filter;
    std::string ens_pred, ens_labels, ens_strategy, ens_model, ens_out;
    auto* ens = app.add_subcommand("ensemble", "combine the panel into a single `ensemble` model");
    ens_cfg.attach(ens);
    ens->add_option("--predictions", ens_pred, "predictions CSV")->required();
    ens->add_option("--labels", ens_labels, "labels CSV joined on sample_id");
    ens->add_option("--strategy", ens_strategy, "vote|avg|fusion (overrides ensemble.strategy)");
    ens->add_option("--model", ens_model, "fusion model JSON (required for fusion)");
    ens_filter.attach(ens, false);
    ens->add_option("--out", ens_out, "ensembled predictions output (overrides output.ensemble)");

    // train-fusion
    ConfigOptions tf_cfg;
    SubsetFilter tf_split;
    std::string tf_pred, tf_labels, tf_out, tf_history;
    auto* tf = app.add_subcommand("train-fusion", "train the label-fusion network on train, checkpoint on val");
    tf_cfg.attach(tf);
    tf->add_option("--predictions", tf_pred, "predictions CSV")->required();
    tf->add_option("--labels", tf_labels, "labels CSV joined on sample_id");
    tf->add_option("--splits", tf_split.splits, "splits CSV")->required();
    tf->add_option("--resplit", tf_split.resplit, "resplit name (default: first in the splits file)");
    tf->add_option("--out", tf_out, "model output (overrides output.model)");
    tf->add_option("--history", tf_history, "history output (overrides output.history)");

    // report
    ConfigOptions rep_cfg;
    std::vector<std::string> rep_sources;
    std::string rep_out;
    auto* rep = app.add_subcommand("report", "text tables over metrics files");
    rep_cfg.attach(rep);
    rep->add_option("sources", rep_sources,
                    "PATH (per-model), STRATEGY=PATH or TRAINING:STRATEGY=PATH with TRAINING single|multi");
    rep->add_option("--out", rep_out, "report output (overrides output.report)");

    // select
    std::vector<std::string> sel_sources;
    std::size_t sel_n = 16;
    std::string sel_sep = "_", sel_table = "selection_table.csv", sel_ranking = "selection_ranking.csv";
    auto* sel = app.add_subcommand("select", "keep the top-n candidates by validation score");
    sel->add_option("candidates", sel_sources, "RESPLIT=PATH validation metrics per resplit")->required();
    sel->add_option("--n", sel_n, "number of models to keep")->capture_default_str();
    sel->add_option("--arch-sep", sel_sep, "architecture is the model_id prefix before this separator")
        ->capture_default_str();
    sel->add_option("--out-table", sel_table, "resplit x architecture count table")->capture_default_str();
    sel->add_option("--out-ranking", sel_ranking, "ranked selection list")->capture_default_str();

    // multitask
    ConfigOptions mt_cfg;
    std::string mt_out = "multitask.csv";
    auto* mt = app.add_subcommand("multitask", "toy shared-trunk sweep over multitask.lambdas plus a single-task run");
    mt_cfg.attach(mt);
    mt->add_option("--out", mt_out, "results CSV")->capture_default_str();

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "UsageError: " << e.what() << "\n";
        return exit_code_for(ErrorKind::Usage);
    }

    try {
        if (sim->parsed()) {
            auto cfg = sim_cfg.resolve();
            if (!sim_out.empty()) cfg.output.predictions = sim_out;
            const auto panel = simulate_panel(cfg.simulate);
            const auto meta = provenance("simulate", cfg, {"seed: " + std::to_string(cfg.simulate.seed)});
            write_file_atomic(cfg.output.predictions, format_predictions(panel, meta));
            write_file_atomic(cfg.output.labels, format_labels(panel, meta));
            out << "wrote " << panel.num_models() << "x" << panel.num_samples() << " panel to "
                << cfg.output.predictions << " and labels to " << cfg.output.labels << "\n";
        } else if (split_cmd->parsed()) {
            auto cfg = split_cfg.resolve();
            if (!split_out.empty()) cfg.output.splits = split_out;
            const auto rows = read_labels(split_labels);
            std::vector<Label> labels;
            Label max_label = 0;
            SplitTable table;
            for (const auto& r : rows) {
                table.sample_ids.push_back(r.sample_id);
                labels.push_back(r.label);
                max_label = std::max(max_label, r.label);
            }
            table.assignments = stratified_split(labels, static_cast<std::size_t>(max_label) + 1, cfg.split);
            const auto meta = provenance("split", cfg, {"master_seed: " + std::to_string(cfg.split.master_seed)});
            write_file_atomic(cfg.output.splits, format_splits(table, meta));
            const auto& a = table.assignments.front();
            out << "wrote " << table.assignments.size() << " resplits (" << a.indices(Subset::Train).size() << "/"
                << a.indices(Subset::Val).size() << "/" << a.indices(Subset::Test).size() << ") to "
                << cfg.output.splits << "\n";
        } else if (eval->parsed()) {
            auto cfg = eval_cfg.resolve();
            if (!eval_out.empty()) cfg.output.metrics = eval_out;
            const auto panel = apply_filter(load_panel(eval_pred, eval_labels, err), eval_filter);
            std::vector<MetricsRow> rows;
            for (auto& s : score_panel(panel)) rows.push_back({s.model_id, panel.num_samples(), s});
            std::vector<std::string> extra;
            if (!eval_filter.splits.empty())
                extra.push_back("subset: " + (eval_filter.subset.empty() ? std::string("test") : eval_filter.subset));
            write_file_atomic(cfg.output.metrics, format_metrics(rows, provenance("eval", cfg, extra)));
            out << "scored " << rows.size() << " models on " << panel.num_samples() << " samples into "
                << cfg.output.metrics << "\n";
        } else if (ens->parsed()) {
            auto cfg = ens_cfg.resolve();
            if (!ens_strategy.empty()) cfg.set("ensemble.strategy", ens_strategy);
            if (!ens_out.empty()) cfg.output.ensemble = ens_out;
            EnsembleStrategy strategy{cfg.strategy, std::nullopt};
            if (strategy.kind == StrategyKind::LabelFusion) {
                if (ens_model.empty()) throw Error(ErrorKind::Usage, "strategy fusion requires --model");
                strategy.fusion_model = load_model(ens_model);
            }
            const auto panel = apply_filter(load_panel(ens_pred, ens_labels, err), ens_filter);
            const auto result = ensemble_panel(panel, ensemble_predict(panel, strategy));
            const auto meta =
                provenance("ensemble", cfg, {"strategy: " + std::string(strategy_name(strategy.kind))});
            write_file_atomic(cfg.output.ensemble, format_predictions(result, meta));
            out << "wrote " << strategy_name(strategy.kind) << " ensemble of " << panel.num_models() << " models to "
                << cfg.output.ensemble << "\n";
        } else if (tf->parsed()) {
            auto cfg = tf_cfg.resolve();
            if (!tf_out.empty()) cfg.output.model = tf_out;
            if (!tf_history.empty()) cfg.output.history = tf_history;
            const auto panel = load_panel(tf_pred, tf_labels, err);
            const auto table = read_splits(tf_split.splits);
            const auto assignment = resolve_assignment(table, tf_split.resplit, panel.samples());
            const auto result = train_fusion(panel, assignment, cfg.train);
            TrainConfig recorded = cfg.train;
            recorded.class_weights = result.class_weights;
            const TrainingMetadata meta{cfg.train.seed, recorded, result.best.epoch, result.best.val_qwk,
                                        result.best.val_auc};
            save_model(cfg.output.model, result.best.net, meta);
            write_file_atomic(cfg.output.history,
                              comment_block(provenance("train-fusion", cfg, {"resplit: " + assignment.resplit})) +
                                  history_csv(result));
            out << "best epoch " << result.best.epoch << " val QWK " << format_fixed(result.best.val_qwk, 4)
                << "; wrote " << cfg.output.model << " and " << cfg.output.history << "\n";
        } else if (rep->parsed()) {
            auto cfg = rep_cfg.resolve();
            if (!rep_out.empty()) cfg.output.report = rep_out;
            std::vector<ReportSource> sources;
            for (const auto& tag : rep_sources) {
                auto [src, path] = parse_report_tag(tag);
                src.rows = read_metrics(path);
                sources.push_back(std::move(src));
            }
            const auto text = render_report(sources);
            write_file_atomic(cfg.output.report, text);
            out << text;
        } else if (sel->parsed()) {
            CandidatePool pool;
            for (const auto& tag : sel_sources) {
                const auto eq = tag.find('=');
                if (eq == std::string::npos || eq == 0)
                    throw Error(ErrorKind::Usage, "candidate source '" + tag + "' must look like RESPLIT=PATH");
                const std::string resplit = tag.substr(0, eq);
                for (auto& row : read_metrics(tag.substr(eq + 1))) {
                    const auto cut = sel_sep.empty() ? std::string::npos : row.model_id.find(sel_sep);
                    const std::string arch = cut == std::string::npos ? row.model_id : row.model_id.substr(0, cut);
                    pool.add({row.model_id, arch, resplit, row.score});
                }
            }
            const auto result = select_top(pool, sel_n);
            write_file_atomic(sel_table, selection_table_csv(result));
            write_file_atomic(sel_ranking, selection_ranking_csv(result));
            out << "selected " << result.selected.size() << " of " << pool.size() << " candidates; wrote "
                << sel_table << " and " << sel_ranking << "\n";
        } else if (mt->parsed()) {
            const auto cfg = mt_cfg.resolve();
            const auto spec = toy_spec(cfg);
            std::vector<ToyRunResult> runs{toy_single_task_run(spec)};
            for (auto& r : toy_multitask_run(spec)) runs.push_back(std::move(r));
            std::string csv = comment_block(provenance("multitask", cfg, {"seed: " + std::to_string(spec.seed)}));
            csv += "regime,lambda,best_epoch,best_val_qwk,final_loss3\n";
            for (const auto& r : runs) {
                csv += std::string(r.single_task ? "single" : "multi") + "," + format_double(r.lambda) + "," +
                       std::to_string(r.best_epoch) + "," + format_double(r.best_val_qwk) + "," +
                       format_double(r.history.empty() ? 0.0 : r.history.back().loss3) + "\n";
            }
            write_file_atomic(mt_out, csv);
            out << "wrote " << runs.size() << " runs to " << mt_out << "\n";
        }
    } catch (const Error& e) {
        err << e.what() << "\n";
        return exit_code_for(e.kind());
    } catch (const std::exception& e) {
        err << "InternalError: " << e.what() << "\n";
        return exit_code_for(ErrorKind::Internal);
    }
    return 0;
}

}  // namespace drfuse
