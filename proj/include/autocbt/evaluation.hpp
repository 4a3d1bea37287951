#pragma once

#include "autocbt/agent.hpp"
#include "autocbt/llm_backend.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace autocbt {

struct Metric {
    std::string name;
    std::string description;
    std::vector<std::string> criteria;
    double max_score = 7.0;
};

// Shared judge prompt. Placeholders: {metric}, {description}, {criteria},
// {max_score}, {question}, {response}. Only the metric slots differ between
// the prompts of one metric set.
extern const char* const kDefaultJudgeTemplate;

struct MetricSet {
    std::string name;
    std::vector<Metric> metrics;
    std::string judge_template = kDefaultJudgeTemplate;

    std::vector<std::string> names() const;
    const Metric* find(std::string_view name) const;
};

// Empathy, Identification, Reflection, Strategy, Encouragement, Relevance.
MetricSet default_metric_set();
// Detailed-sampling rubric: the four shared metrics plus Identify-CD,
// Challenge-CD and Presentation.
MetricSet appendix_a_metric_set();
// "default", "appendix_a", or a YAML file {name, judge_template?, metrics: [...]}.
MetricSet resolve_metric_set(const std::string& spec);
MetricSet load_metric_set(const std::filesystem::path& path);

struct MetricScore {
    std::string metric;
    std::vector<double> ratings;  // exactly 3
    double mean = 0.0;
};

using ItemScores = std::map<std::string, MetricScore>;

// First "Score: X/7", else first "X/7", else the first bare number that is
// not part of a fraction. Throws Error{NoRatingFound, OutOfRange}.
double extract_rating(std::string_view judge_text, double max_score = 7.0);

std::string build_judge_prompt(const Metric& metric, std::string_view question, std::string_view response,
                               const std::string& judge_template = kDefaultJudgeTemplate);

struct JudgeOptions {
    std::string model;
    double temperature = 0.0;
    int ratings = 3;
    int retries_per_rating = 2;
    RetryPolicy retry;
    std::string judge_template = kDefaultJudgeTemplate;
};

// Issues the judge prompt (purpose "judge.<metric>") once per rating,
// sequentially; an unreadable rating is re-asked up to retries_per_rating
// times. Throws Error{JudgeUnparseable} and backend errors.
MetricScore score_metric(std::string_view question, std::string_view response, const Metric& metric,
                         ChatBackend& judge, const JudgeOptions& options = {});

// Sum of the per-metric means. Throws Error{MissingMetric}.
double total_score(const ItemScores& scores, const MetricSet& metrics);
double total_score(const ItemScores& scores, const std::vector<std::string>& metric_names);

struct AggregateRow {
    std::string method;
    std::vector<std::pair<std::string, double>> means;  // metric order
    double total = 0.0;
    std::size_t included = 0;
    std::size_t excluded = 0;

    std::vector<std::string> metric_names() const;
};

// Per-metric arithmetic mean over the items not in `excluded`; total is the
// sum of those means. Throws Error{EmptyAfterExclusion, MissingMetric}.
AggregateRow aggregate_method(const std::string& method, const std::map<std::string, ItemScores>& per_item,
                              const std::set<std::string>& excluded, const std::vector<std::string>& metric_names);

struct DiffReport {
    std::vector<std::pair<std::string, double>> diffs;  // a - b per metric
    double total = 0.0;
};

// Throws Error{MetricSetMismatch}.
DiffReport diff_report(const AggregateRow& a, const AggregateRow& b);

struct RefusalOptions {
    std::vector<std::string> phrases;  // matched case-insensitively
    std::string judge_model;
    double judge_temperature = 0.0;
    RetryPolicy retry;
};

std::vector<std::string> default_refusal_phrases(Language lang);

// Pattern stage, then (when a judge is given and no phrase matched) a yes/no
// judge call with purpose "refusal_judge".
bool refusal_detect(std::string_view response, const RefusalOptions& options, ChatBackend* judge = nullptr);

struct RefusalStats {
    std::vector<std::pair<std::string, std::size_t>> counts;  // per method, input order
    std::size_t distinct = 0;
};

RefusalStats refusal_stats(const std::vector<std::pair<std::string, std::set<std::string>>>& refused_by_method);

// "Union(3, 3, 8) = 9".
std::string render_union(const RefusalStats& stats);

}  // namespace autocbt
