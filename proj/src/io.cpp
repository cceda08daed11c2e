#include "drfuse/io.hpp"

#include "drfuse/error.hpp"
#include "drfuse/format.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace drfuse {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::Io, "cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file_atomic(const std::string& path, std::string_view content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error(ErrorKind::Io, "cannot write '" + path + "'");
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) throw Error(ErrorKind::Io, "failed writing '" + path + "'");
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw Error(ErrorKind::Io, "cannot move output into '" + path + "': " + ec.message());
}

std::string comment_block(const std::vector<std::string>& lines) {
    std::string out;
    for (const auto& l : lines) out += "# " + l + "\n";
    return out;
}

namespace {

struct CsvLine {
    std::size_t number = 0;
    std::vector<std::string> fields;
};

// Data lines (comments and blank lines dropped), plus the comment bodies.
std::vector<CsvLine> csv_lines(std::string_view text, std::vector<std::string>* comments = nullptr) {
    std::vector<CsvLine> out;
    std::size_t number = 0;
    std::size_t start = 0;
    while (start <= text.size()) {
        auto end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        ++number;
        std::string_view line = text.substr(start, end - start);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        start = end + 1;
        if (trim(line).empty()) {
            if (end == text.size()) break;
            continue;
        }
        if (line.front() == '#') {
            if (comments) comments->emplace_back(trim(line.substr(1)));
        } else {
            auto fields = split(line, ',');
            for (auto& f : fields) f = std::string(trim(f));
            out.push_back({number, std::move(fields)});
        }
        if (end == text.size()) break;
    }
    return out;
}

[[noreturn]] void malformed(std::size_t line, const std::string& message) {
    throw Error(ErrorKind::MalformedFile, "line " + std::to_string(line) + ": " + message);
}

void expect_header(const std::vector<CsvLine>& lines, const std::vector<std::string>& header, const char* what) {
    if (lines.empty()) throw Error(ErrorKind::MalformedFile, std::string(what) + " file has no header");
    if (lines.front().fields != header) {
        std::string expected;
        for (const auto& h : header) expected += (expected.empty() ? "" : ",") + h;
        malformed(lines.front().number, std::string(what) + " header must be '" + expected + "'");
    }
}

std::string csv_field(const std::string& id, const char* what) {
    if (id.empty() || id.find_first_of(",\"\n\r#") != std::string::npos)
        throw Error(ErrorKind::MalformedFile, std::string(what) + " '" + id + "' is empty or contains reserved characters");
    return id;
}

}  // namespace

PredictionFile parse_predictions(std::string_view text, const TolerancePolicy& policy) {
    PredictionFile file;
    const auto lines = csv_lines(text, &file.comments);
    if (lines.empty()) throw Error(ErrorKind::MalformedFile, "prediction file has no header");
    const auto& header = lines.front().fields;
    if (header.size() < 5 || header[0] != "sample_id" || header[1] != "model_id" || header[2] != "true_label")
        malformed(lines.front().number, "prediction header must be 'sample_id,model_id,true_label,p_0,...,p_{K-1}'");
    const std::size_t k = header.size() - 3;
    for (std::size_t c = 0; c < k; ++c)
        if (header[3 + c] != "p_" + std::to_string(c)) malformed(lines.front().number, "expected column p_" + std::to_string(c));

    std::vector<double> raw(k);
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const auto& f = lines[i].fields;
        if (f.size() != header.size())
            malformed(lines[i].number, "expected " + std::to_string(header.size()) + " fields, got " + std::to_string(f.size()));
        PredictionRecord r;
        r.sample_id = csv_field(f[0], "sample_id");
        r.model_id = csv_field(f[1], "model_id");
        if (!f[2].empty()) {
            const auto label = parse_int(f[2], "true_label", ErrorKind::MalformedFile);
            if (label < 0 || static_cast<std::size_t>(label) >= k)
                throw Error(ErrorKind::LabelOutOfRange, "line " + std::to_string(lines[i].number) + ": label " +
                                                            f[2] + " outside [0, " + std::to_string(k) + ")");
            r.true_label = static_cast<Label>(label);
        }
        for (std::size_t c = 0; c < k; ++c) raw[c] = parse_double(f[3 + c], "p_" + std::to_string(c), ErrorKind::MalformedFile);
        bool renormalized = false;
        try {
            r.probs = ProbVector::validate(raw, policy, &renormalized);
        } catch (const Error& e) {
            throw Error(e.kind(), "line " + std::to_string(lines[i].number) + ": " + e.detail());
        }
        if (renormalized) ++file.renormalized;
        file.records.push_back(std::move(r));
    }
    return file;
}

PredictionFile read_predictions(const std::string& path, const TolerancePolicy& policy) {
    try {
        return parse_predictions(read_file(path), policy);
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::Io) throw;
        throw Error(e.kind(), path + ": " + e.detail());
    }
}

std::string format_predictions(const PredictionPanel& panel, const std::vector<std::string>& comments) {
    std::vector<std::size_t> sample_order(panel.num_samples()), model_order(panel.num_models());
    for (std::size_t i = 0; i < sample_order.size(); ++i) sample_order[i] = i;
    for (std::size_t i = 0; i < model_order.size(); ++i) model_order[i] = i;
    std::sort(sample_order.begin(), sample_order.end(),
              [&](std::size_t a, std::size_t b) { return panel.samples()[a] < panel.samples()[b]; });
    std::sort(model_order.begin(), model_order.end(),
              [&](std::size_t a, std::size_t b) { return panel.models()[a] < panel.models()[b]; });

    std::string out = comment_block(comments);
    out += "sample_id,model_id,true_label";
    for (std::size_t c = 0; c < panel.num_classes(); ++c) out += ",p_" + std::to_string(c);
    out += '\n';
    for (std::size_t n : sample_order) {
        for (std::size_t m : model_order) {
            out += panel.samples()[n];
            out += ',';
            out += panel.models()[m];
            out += ',';
            if (panel.has_labels()) out += std::to_string(panel.labels()[n]);
            for (double p : panel.at(m, n).values()) {
                out += ',';
                out += format_double(p);
            }
            out += '\n';
        }
    }
    return out;
}

std::vector<LabelRow> parse_labels(std::string_view text) {
    const auto lines = csv_lines(text);
    expect_header(lines, {"sample_id", "true_label"}, "labels");
    std::vector<LabelRow> rows;
    std::set<std::string> seen;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const auto& f = lines[i].fields;
        if (f.size() != 2) malformed(lines[i].number, "expected 2 fields");
        LabelRow r{csv_field(f[0], "sample_id"), static_cast<Label>(parse_int(f[1], "true_label", ErrorKind::MalformedFile))};
        if (r.label < 0) throw Error(ErrorKind::LabelOutOfRange, "line " + std::to_string(lines[i].number) + ": negative label");
        if (!seen.insert(r.sample_id).second)
            throw Error(ErrorKind::DuplicateRecord, "line " + std::to_string(lines[i].number) + ": sample '" + r.sample_id + "' repeated");
        rows.push_back(std::move(r));
    }
    if (rows.empty()) throw Error(ErrorKind::EmptySubset, "labels file lists no samples");
    return rows;
}

std::vector<LabelRow> read_labels(const std::string& path) {
    try {
        return parse_labels(read_file(path));
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::Io) throw;
        throw Error(e.kind(), path + ": " + e.detail());
    }
}

std::string format_labels(const std::vector<LabelRow>& rows, const std::vector<std::string>& comments) {
    std::string out = comment_block(comments) + "sample_id,true_label\n";
    for (const auto& r : rows) out += r.sample_id + "," + std::to_string(r.label) + "\n";
    return out;
}

std::string format_labels(const PredictionPanel& panel, const std::vector<std::string>& comments) {
    std::vector<LabelRow> rows;
    for (std::size_t n = 0; n < panel.num_samples(); ++n) rows.push_back({panel.samples()[n], panel.labels()[n]});
    std::sort(rows.begin(), rows.end(), [](const LabelRow& a, const LabelRow& b) { return a.sample_id < b.sample_id; });
    return format_labels(rows, comments);
}

const SplitAssignment& SplitTable::resplit(const std::string& name) const {
    for (const auto& a : assignments)
        if (a.resplit == name) return a;
    throw Error(ErrorKind::Usage, "splits file has no resplit '" + name + "'");
}

SplitAssignment SplitTable::aligned(const std::string& name, const std::vector<std::string>& samples) const {
    const SplitAssignment& src = resplit(name);
    std::map<std::string, Subset> by_id;
    for (std::size_t i = 0; i < sample_ids.size(); ++i) by_id[sample_ids[i]] = src.tags[i];
    SplitAssignment out{name, {}};
    out.tags.reserve(samples.size());
    for (const auto& id : samples) {
        const auto it = by_id.find(id);
        if (it == by_id.end())
            throw Error(ErrorKind::IncompleteAssignment, "sample '" + id + "' is missing from resplit '" + name + "'");
        out.tags.push_back(it->second);
    }
    return out;
}

SplitTable parse_splits(std::string_view text) {
    const auto lines = csv_lines(text);
    expect_header(lines, {"sample_id", "resplit", "subset"}, "splits");

    std::vector<std::string> resplit_order;
    std::map<std::string, std::map<std::string, Subset>> tags;  // resplit -> sample -> subset
    std::set<std::string> samples;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const auto& f = lines[i].fields;
        if (f.size() != 3) malformed(lines[i].number, "expected 3 fields");
        const std::string id = csv_field(f[0], "sample_id");
        const std::string resplit = csv_field(f[1], "resplit");
        Subset subset;
        try {
            subset = parse_subset(f[2]);
        } catch (const Error&) {
            malformed(lines[i].number, "subset must be train, val or test");
        }
        if (!tags.count(resplit)) resplit_order.push_back(resplit);
        if (!tags[resplit].emplace(id, subset).second)
            throw Error(ErrorKind::DuplicateRecord, "line " + std::to_string(lines[i].number) + ": sample '" + id +
                                                        "' tagged twice in resplit '" + resplit + "'");
        samples.insert(id);
    }
    if (resplit_order.empty()) throw Error(ErrorKind::EmptySubset, "splits file lists no samples");

    SplitTable table;
    table.sample_ids.assign(samples.begin(), samples.end());
    std::optional<std::set<std::string>> test_set;
    for (const auto& name : resplit_order) {
        const auto& m = tags[name];
        SplitAssignment a{name, {}};
        std::set<std::string> test;
        for (const auto& id : table.sample_ids) {
            const auto it = m.find(id);
            if (it == m.end())
                throw Error(ErrorKind::IncompleteAssignment, "resplit '" + name + "' does not tag sample '" + id + "'");
            a.tags.push_back(it->second);
            if (it->second == Subset::Test) test.insert(id);
        }
        if (test_set && *test_set != test)
            throw Error(ErrorKind::IncompleteAssignment, "resplit '" + name + "' does not share the fixed test set");
        test_set = std::move(test);
        table.assignments.push_back(std::move(a));
    }
    return table;
}

SplitTable read_splits(const std::string& path) {
    try {
        return parse_splits(read_file(path));
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::Io) throw;
        throw Error(e.kind(), path + ": " + e.detail());
    }
}

std::string format_splits(const SplitTable& table, const std::vector<std::string>& comments) {
    std::vector<std::size_t> order(table.sample_ids.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return table.sample_ids[a] < table.sample_ids[b]; });
    std::string out = comment_block(comments) + "sample_id,resplit,subset\n";
    for (const auto& a : table.assignments)
        for (std::size_t i : order)
            out += table.sample_ids[i] + "," + a.resplit + "," + std::string(subset_name(a.tags[i])) + "\n";
    return out;
}

std::vector<MetricsRow> parse_metrics(std::string_view text) {
    const auto lines = csv_lines(text);
    expect_header(lines, {"model_id", "n", "qwk", "auc"}, "metrics");
    std::vector<MetricsRow> rows;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const auto& f = lines[i].fields;
        if (f.size() != 4) malformed(lines[i].number, "expected 4 fields");
        MetricsRow r;
        r.model_id = csv_field(f[0], "model_id");
        r.n = static_cast<std::size_t>(parse_u64(f[1], "n", ErrorKind::MalformedFile));
        r.score.model_id = r.model_id;
        if (f[2] == "nan") {
            r.score.degenerate = true;
            r.score.qwk = -1.0;
        } else {
            r.score.qwk = parse_double(f[2], "qwk", ErrorKind::MalformedFile);
        }
        r.score.auc = parse_double(f[3], "auc", ErrorKind::MalformedFile);
        rows.push_back(std::move(r));
    }
    return rows;
}

std::vector<MetricsRow> read_metrics(const std::string& path) {
    try {
        return parse_metrics(read_file(path));
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::Io) throw;
        throw Error(e.kind(), path + ": " + e.detail());
    }
}

std::string format_metrics(const std::vector<MetricsRow>& rows, const std::vector<std::string>& comments) {
    std::string out = comment_block(comments) + "model_id,n,qwk,auc\n";
    for (const auto& r : rows) {
        out += r.model_id + "," + std::to_string(r.n) + ",";
        out += r.score.degenerate ? std::string("nan") : format_double(r.score.qwk);
        out += "," + format_double(r.score.auc) + "\n";
    }
    return out;
}

}  // namespace drfuse
