#pragma once

#include "autocbt/evaluation.hpp"
#include "autocbt/orchestrator.hpp"

#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace autocbt {

enum class ItemStatus { scored, refused, failed };

const char* item_status_name(ItemStatus s);

struct ItemEvaluation {
    std::string item_id;
    Language language = Language::EN;
    ItemStatus status = ItemStatus::scored;
    ItemScores scores;  // empty unless scored
    double total = 0.0;
};

// Scores of one method's records. Refused and failed items are listed but
// never scored, so they cannot reach any mean.
struct EvaluationReport {
    std::string method;  // record method label, e.g. "auto_cbt:draft"
    std::string metric_set;
    std::vector<std::string> metrics;
    std::map<std::string, ItemEvaluation> items;

    std::map<std::string, ItemScores> per_item() const;
    std::set<std::string> refused() const;
    std::set<std::string> failed() const;
    std::set<std::string> excluded() const;  // refused + failed
    std::vector<Language> languages() const;

    // Aggregate over included items, optionally restricted to one language
    // and with extra ids excluded. Throws Error{EmptyAfterExclusion}.
    AggregateRow aggregate(std::optional<Language> lang = std::nullopt,
                           const std::set<std::string>& also_exclude = {}) const;
};

using JudgeProvider = std::function<ChatBackend&(const std::string& item_id)>;

struct EvaluateOptions {
    JudgeOptions judge;
    RefusalOptions refusal;
    bool refusal_judge = false;  // second, judge-based refusal stage
    std::size_t parallel = 1;    // items scored concurrently
};

// All records must share one method label. Throws Error{InvalidConfig} on a
// mixed file and propagates judge failures.
EvaluationReport evaluate_records(const std::vector<ConsultationRecord>& records, const MetricSet& metrics,
                                  const JudgeProvider& judge_for, const EvaluateOptions& options);

// JSONL: a header line, one line per item, and an aggregate line per language.
std::string serialize_report(const EvaluationReport& report);
EvaluationReport parse_report(std::string_view jsonl);
EvaluationReport load_report(const std::filesystem::path& path);

struct TableRow {
    std::string group;  // e.g. language
    AggregateRow row;
};

// Markdown table: Group | Method | one column per metric | Total Score.
std::string render_method_table(const std::string& title, const std::vector<std::string>& metrics,
                                const std::vector<TableRow>& rows);

// Markdown table with one row per metric plus a Total row and one signed
// column per comparison.
std::string render_diff_table(const std::string& title, const std::vector<std::string>& metrics,
                              const std::vector<std::pair<std::string, DiffReport>>& columns);

struct RefusalRow {
    std::string group;
    RefusalStats stats;
};

// Markdown table: Group | per-method refused counts | Distinct-Refused-Questions.
std::string render_refusal_table(const std::vector<RefusalRow>& rows);

// The record ids whose final response trips refusal_detect.
std::set<std::string> refused_ids(const std::vector<ConsultationRecord>& records, const RefusalOptions& options,
                                  ChatBackend* judge = nullptr);

}  // namespace autocbt
