#include "autocbt/report.hpp"

#include "autocbt/error.hpp"
#include "autocbt/parallel.hpp"
#include "autocbt/record_io.hpp"
#include "strings.hpp"

#include "json.hpp"

#include <algorithm>
#include <sstream>

namespace autocbt {

using nlohmann::ordered_json;

const char* item_status_name(ItemStatus s) {
    switch (s) {
        case ItemStatus::scored: return "scored";
        case ItemStatus::refused: return "refused";
        case ItemStatus::failed: return "failed";
    }
    return "?";
}

namespace {

ItemStatus parse_status(const std::string& s) {
    for (auto v : {ItemStatus::scored, ItemStatus::refused, ItemStatus::failed}) {
        if (s == item_status_name(v)) return v;
    }
    throw Error(Errc::ParseError, "unknown item status '" + s + "'");
}

std::string escape_cell(std::string_view s) {
    std::string out;
    for (char c : s) {
        if (c == '|') out += "\\|";
        else if (c == '\n') out += ' ';
        else out += c;
    }
    return out;
}

std::string table_row(const std::vector<std::string>& cells) {
    std::string out = "|";
    for (const auto& c : cells) out += " " + escape_cell(c) + " |";
    return out + "\n";
}

std::string separator(std::size_t columns) {
    std::string out = "|";
    for (std::size_t i = 0; i < columns; ++i) out += " --- |";
    return out + "\n";
}

}  // namespace

std::map<std::string, ItemScores> EvaluationReport::per_item() const {
    std::map<std::string, ItemScores> out;
    for (const auto& [id, item] : items) {
        if (item.status == ItemStatus::scored) out[id] = item.scores;
    }
    return out;
}

std::set<std::string> EvaluationReport::refused() const {
    std::set<std::string> out;
    for (const auto& [id, item] : items) {
        if (item.status == ItemStatus::refused) out.insert(id);
    }
    return out;
}

std::set<std::string> EvaluationReport::failed() const {
    std::set<std::string> out;
    for (const auto& [id, item] : items) {
        if (item.status == ItemStatus::failed) out.insert(id);
    }
    return out;
}

std::set<std::string> EvaluationReport::excluded() const {
    auto out = refused();
    auto f = failed();
    out.insert(f.begin(), f.end());
    return out;
}

std::vector<Language> EvaluationReport::languages() const {
    std::set<Language> seen;
    for (const auto& [id, item] : items) seen.insert(item.language);
    return {seen.begin(), seen.end()};
}

AggregateRow EvaluationReport::aggregate(std::optional<Language> lang, const std::set<std::string>& also_exclude) const {
    std::map<std::string, ItemScores> scored;
    std::set<std::string> excluded_ids = also_exclude;
    for (const auto& [id, item] : items) {
        if (lang && item.language != *lang) continue;
        if (item.status == ItemStatus::scored) {
            scored[id] = item.scores;
        } else {
            excluded_ids.insert(id);
        }
    }
    // Only ids of this slice count as excluded.
    std::set<std::string> slice_excluded;
    for (const auto& id : excluded_ids) {
        auto it = items.find(id);
        if (it != items.end() && (!lang || it->second.language == *lang)) slice_excluded.insert(id);
    }
    return aggregate_method(method, scored, slice_excluded, metrics);
}

EvaluationReport evaluate_records(const std::vector<ConsultationRecord>& records, const MetricSet& metrics,
                                  const JudgeProvider& judge_for, const EvaluateOptions& options) {
    EvaluationReport report;
    report.metric_set = metrics.name;
    report.metrics = metrics.names();
    if (records.empty()) throw Error(Errc::InvalidConfig, "no records to evaluate");
    report.method = records.front().method_label();
    for (const auto& r : records) {
        if (r.method_label() != report.method) {
            throw Error(Errc::InvalidConfig, "records mix methods '" + report.method + "' and '" + r.method_label() +
                                                 "'; evaluate each method separately");
        }
        if (report.items.count(r.item_id)) throw Error(Errc::DuplicateId, "duplicate record for item '" + r.item_id + "'");
        report.items[r.item_id] = {r.item_id, r.language, ItemStatus::scored, {}, 0.0};
    }

    JudgeOptions judge_opts = options.judge;
    judge_opts.judge_template = metrics.judge_template;

    std::vector<ItemEvaluation> results(records.size());
    parallel_for(records.size(), options.parallel, [&](std::size_t i) {
        const auto& r = records[i];
        ItemEvaluation ev{r.item_id, r.language, ItemStatus::scored, {}, 0.0};
        if (r.failed() || detail::trim(r.final_response).empty()) {
            ev.status = ItemStatus::failed;
        } else {
            ChatBackend& judge = judge_for(r.item_id);
            if (refusal_detect(r.final_response, options.refusal, options.refusal_judge ? &judge : nullptr)) {
                ev.status = ItemStatus::refused;
            } else {
                for (const auto& m : metrics.metrics) {
                    ev.scores[m.name] = score_metric(r.question, r.final_response, m, judge, judge_opts);
                }
                ev.total = total_score(ev.scores, metrics);
            }
        }
        results[i] = std::move(ev);
    });
    for (auto& ev : results) report.items[ev.item_id] = std::move(ev);
    return report;
}

std::string serialize_report(const EvaluationReport& report) {
    std::string out;
    ordered_json header{{"type", "header"},
                        {"method", report.method},
                        {"metric_set", report.metric_set},
                        {"metrics", report.metrics}};
    out += header.dump() + "\n";
    for (const auto& [id, item] : report.items) {
        ordered_json j{{"type", "item"},
                       {"item_id", id},
                       {"language", language_name(item.language)},
                       {"status", item_status_name(item.status)}};
        if (item.status == ItemStatus::scored) {
            ordered_json scores = ordered_json::object();
            for (const auto& name : report.metrics) {
                const auto& s = item.scores.at(name);
                scores[name] = {{"ratings", s.ratings}, {"mean", s.mean}};
            }
            j["scores"] = std::move(scores);
            j["total"] = item.total;
        }
        out += j.dump() + "\n";
    }
    for (auto lang : report.languages()) {
        try {
            auto row = report.aggregate(lang);
            ordered_json means = ordered_json::object();
            for (const auto& [name, v] : row.means) means[name] = v;
            ordered_json j{{"type", "aggregate"},   {"language", language_name(lang)}, {"means", means},
                           {"total", row.total},    {"included", row.included},       {"excluded", row.excluded}};
            out += j.dump() + "\n";
        } catch (const Error& e) {
            if (e.code() != Errc::EmptyAfterExclusion) throw;
        }
    }
    return out;
}

EvaluationReport parse_report(std::string_view jsonl) {
    EvaluationReport report;
    bool have_header = false;
    std::istringstream in{std::string(jsonl)};
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (detail::trim(line).empty()) continue;
        try {
            auto j = ordered_json::parse(line);
            auto type = j.at("type").get<std::string>();
            if (type == "header") {
                report.method = j.at("method").get<std::string>();
                report.metric_set = j.value("metric_set", std::string{});
                report.metrics = j.at("metrics").get<std::vector<std::string>>();
                have_header = true;
            } else if (type == "item") {
                ItemEvaluation ev;
                ev.item_id = j.at("item_id").get<std::string>();
                ev.language = parse_language(j.at("language").get<std::string>());
                ev.status = parse_status(j.at("status").get<std::string>());
                if (ev.status == ItemStatus::scored) {
                    for (const auto& [name, s] : j.at("scores").items()) {
                        MetricScore score;
                        score.metric = name;
                        score.ratings = s.at("ratings").get<std::vector<double>>();
                        score.mean = s.at("mean").get<double>();
                        ev.scores[name] = std::move(score);
                    }
                    ev.total = j.value("total", 0.0);
                }
                report.items[ev.item_id] = std::move(ev);
            }
            // Aggregate lines are derived data and recomputed on demand.
        } catch (const nlohmann::json::exception& e) {
            throw Error(Errc::ParseError, "report line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    if (!have_header) throw Error(Errc::ParseError, "report has no header line");
    return report;
}

EvaluationReport load_report(const std::filesystem::path& path) { return parse_report(read_text(path)); }

std::string render_method_table(const std::string& title, const std::vector<std::string>& metrics,
                                const std::vector<TableRow>& rows) {
    std::string out;
    if (!title.empty()) out += "**" + title + "**\n\n";
    std::vector<std::string> head{"Group", "Method"};
    head.insert(head.end(), metrics.begin(), metrics.end());
    head.push_back("Total Score");
    out += table_row(head);
    out += separator(head.size());
    for (const auto& r : rows) {
        std::vector<std::string> cells{r.group, r.row.method};
        for (const auto& name : metrics) {
            std::string cell = "-";
            for (const auto& [n, v] : r.row.means) {
                if (n == name) cell = detail::fixed3(v);
            }
            cells.push_back(cell);
        }
        cells.push_back(detail::fixed3(r.row.total));
        out += table_row(cells);
    }
    return out;
}

std::string render_diff_table(const std::string& title, const std::vector<std::string>& metrics,
                              const std::vector<std::pair<std::string, DiffReport>>& columns) {
    std::string out;
    if (!title.empty()) out += "**" + title + "**\n\n";
    std::vector<std::string> head{"Metric"};
    for (const auto& [label, d] : columns) head.push_back(label);
    out += table_row(head);
    out += separator(head.size());
    for (const auto& name : metrics) {
        std::vector<std::string> cells{name};
        for (const auto& [label, d] : columns) {
            std::string cell = "-";
            for (const auto& [n, v] : d.diffs) {
                if (n == name) cell = detail::signed3(v);
            }
            cells.push_back(cell);
        }
        out += table_row(cells);
    }
    std::vector<std::string> total{"Total"};
    for (const auto& [label, d] : columns) total.push_back(detail::signed3(d.total));
    out += table_row(total);
    return out;
}

std::string render_refusal_table(const std::vector<RefusalRow>& rows) {
    std::vector<std::string> methods;
    for (const auto& r : rows) {
        for (const auto& [m, n] : r.stats.counts) {
            if (std::find(methods.begin(), methods.end(), m) == methods.end()) methods.push_back(m);
        }
    }
    std::vector<std::string> head{"Group"};
    for (const auto& m : methods) head.push_back(m);
    head.push_back("Distinct-Refused-Questions");
    std::string out = table_row(head);
    out += separator(head.size());
    for (const auto& r : rows) {
        std::vector<std::string> cells{r.group};
        for (const auto& m : methods) {
            std::string cell = "0";
            for (const auto& [name, n] : r.stats.counts) {
                if (name == m) cell = std::to_string(n);
            }
            cells.push_back(cell);
        }
        cells.push_back(render_union(r.stats));
        out += table_row(cells);
    }
    return out;
}

std::set<std::string> refused_ids(const std::vector<ConsultationRecord>& records, const RefusalOptions& options,
                                  ChatBackend* judge) {
    std::set<std::string> out;
    for (const auto& r : records) {
        if (r.failed()) continue;
        if (refusal_detect(r.final_response, options, judge)) out.insert(r.item_id);
    }
    return out;
}

}  // namespace autocbt
