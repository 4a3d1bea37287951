#include "autocbt/evaluation.hpp"

#include "autocbt/error.hpp"
#include "autocbt/prompt.hpp"
#include "strings.hpp"

#include <yaml-cpp/yaml.h>

#include <cctype>
#include <cmath>
#include <fstream>
#include <numeric>
#include <regex>
#include <sstream>

namespace autocbt {

const char* const kDefaultJudgeTemplate =
    "You are an experienced cognitive behavioral therapy supervisor grading a counsellor's reply to a "
    "help-seeking user. Grade one metric only.\n"
    "\n"
    "Metric: {metric}\n"
    "Description: {description}\n"
    "Criteria:\n"
    "{criteria}\n"
    "\n"
    "User question:\n"
    "{question}\n"
    "\n"
    "Counsellor response:\n"
    "{response}\n"
    "\n"
    "Weigh every criterion, then rate the response on this metric from 0 to {max_score}. "
    "Finish with a final line of exactly this form: Score: <number>/{max_score}";

namespace {

Metric empathy() {
    return {"Empathy",
            "Demonstrates understanding and sympathy towards the user's emotions or issues, and creates a sense "
            "of safety.",
            {"1.1 Did the counsellor correctly understand the user's intent?",
             "1.2 Did the counsellor show respect, understanding, and sympathy for the user's anxiety and pain?",
             "1.3 Did the counsellor create a safe environment for the user to express their feelings?"},
            7.0};
}

Metric strategy() {
    return {"Strategy",
            "Provide practical strategies or insights to help the user address their current situation.",
            {"4.1 Were the strategies or insights provided by the counsellor practical?",
             "4.2 Could the strategies or insights solve the user's current problems?",
             "4.3 Were the strategies based on professional psychological methods?"},
            7.0};
}

Metric encouragement() {
    return {"Encouragement",
            "Encourage the user to use the strategies.",
            {"5.1 Did the counsellor encourage the user to take action?",
             "5.2 Did the counsellor address potential failures the user might encounter while implementing the "
             "strategies?",
             "5.3 Did the counsellor provide comfort and encouragement regarding setbacks and challenges?"},
            7.0};
}

Metric relevance() {
    return {"Relevance",
            "Evaluate the relevance of the dialogue content.",
            {"6.1 Was the counsellor's response highly relevant to the user's question?",
             "6.2 Did the counsellor's response flow naturally?",
             "6.3 Did the counsellor's answer cover the main issues or concerns raised by the user?"},
            7.0};
}

std::string format_number(double v) {
    std::ostringstream os;
    os << v;
    return os.str();
}

std::string join_lines(const std::vector<std::string>& lines) {
    std::string out;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (i) out += "\n";
        out += lines[i];
    }
    return out;
}

}  // namespace

std::vector<std::string> MetricSet::names() const {
    std::vector<std::string> out;
    for (const auto& m : metrics) out.push_back(m.name);
    return out;
}

const Metric* MetricSet::find(std::string_view name) const {
    for (const auto& m : metrics) {
        if (m.name == name) return &m;
    }
    return nullptr;
}

MetricSet default_metric_set() {
    MetricSet set;
    set.name = "default";
    set.metrics = {
        empathy(),
        {"Identification",
         "Identify potential cognitive distortions of the user through the description of the problem in the "
         "dialogue.",
         {"2.1 Did the counsellor identify the user's distorted beliefs?",
          "2.2 Did the counsellor delve into the user's distorted beliefs?",
          "2.3 Did the counsellor assist the user in recognizing and challenging these distorted beliefs?"},
         7.0},
        {"Reflection",
         "Ask open-ended questions to encourage the user to reconsider or reflect on their initial thoughts or "
         "beliefs.",
         {"3.1 Did the counsellor ask questions related to the user's initial thoughts?",
          "3.2 Did the counsellor pose questions that facilitated deeper thinking?",
          "3.3 Did the counsellor ask questions reflecting the user's distorted beliefs?"},
         7.0},
        strategy(),
        encouragement(),
        relevance(),
    };
    return set;
}

MetricSet appendix_a_metric_set() {
    MetricSet set;
    set.name = "appendix_a";
    set.metrics = {
        empathy(),
        {"Identify-CD",
         "Identify potential cognitive distortions of the user through the description of the problem in the "
         "dialogue",
         {"2.1 Has the cognitive distortion phenomenon of users been identified?",
          "2.2 Does it help users recognize distorted beliefs?",
          "2.3 Has cognitive distortion been explained from a psychological perspective?"},
         7.0},
        {"Challenge-CD",
         "Ask open-ended questions to encourage the user to reconsider or reflect on their initial thoughts or "
         "beliefs",
         {"3.1 Does it help users think and challenge these distorted beliefs?",
          "3.2 Have you raised open-ended questions that are helpful for deeper thinking?",
          "3.3 Has psychological counseling technology been integrated?",
          "3.4 Does the guided reflection correspond to the cognitive distortions that visitors may have?"},
         7.0},
        strategy(),
        encouragement(),
        relevance(),
        {"Presentation",
         "Evaluate the overall performance of the response of counsellor",
         {"7.1 Is the overall language style close to the image of counsellor?",
          "7.2 Is the information expressed clearly?",
          "7.3 Have you flexibly applied some psychological counseling techniques?"},
         7.0},
    };
    return set;
}

MetricSet load_metric_set(const std::filesystem::path& path) {
    YAML::Node root;
    try {
        root = YAML::LoadFile(path.string());
    } catch (const YAML::BadFile&) {
        throw Error(Errc::Io, "cannot read metric set " + path.string());
    } catch (const YAML::Exception& e) {
        throw Error(Errc::ParseError, path.string() + ": " + e.what());
    }
    MetricSet set;
    set.name = root["name"] ? root["name"].as<std::string>() : path.stem().string();
    if (root["judge_template"]) set.judge_template = root["judge_template"].as<std::string>();
    if (!root["metrics"] || !root["metrics"].IsSequence()) {
        throw Error(Errc::ParseError, path.string() + ": 'metrics' must be a list");
    }
    for (const auto& node : root["metrics"]) {
        Metric m;
        if (!node["name"]) throw Error(Errc::MissingField, path.string() + ": metric without name");
        m.name = node["name"].as<std::string>();
        m.description = node["description"] ? node["description"].as<std::string>() : "";
        if (node["criteria"]) {
            for (const auto& c : node["criteria"]) m.criteria.push_back(c.as<std::string>());
        }
        m.max_score = node["max_score"] ? node["max_score"].as<double>() : 7.0;
        if (m.criteria.empty()) {
            throw Error(Errc::InvalidConfig, path.string() + ": metric '" + m.name + "' has no criteria");
        }
        if (set.find(m.name)) throw Error(Errc::InvalidConfig, path.string() + ": duplicate metric '" + m.name + "'");
        set.metrics.push_back(std::move(m));
    }
    if (set.metrics.empty()) throw Error(Errc::InvalidConfig, path.string() + ": no metrics");
    for (auto name : template_placeholders(set.judge_template)) {
        static const std::set<std::string> allowed{"metric",  "description", "criteria",
                                                   "max_score", "question",  "response"};
        if (!allowed.count(name)) {
            throw Error(Errc::InvalidConfig, path.string() + ": judge template uses unknown placeholder {" + name + "}");
        }
    }
    return set;
}

MetricSet resolve_metric_set(const std::string& spec) {
    if (spec.empty() || spec == "default") return default_metric_set();
    if (spec == "appendix_a") return appendix_a_metric_set();
    return load_metric_set(spec);
}

double extract_rating(std::string_view judge_text, double max_score) {
    static const std::string num = R"((\d+(?:\.\d+)?))";
    const std::string denom = R"(\s*/\s*)" + format_number(max_score) + R"((?!\.?\d))";
    const std::regex labelled("score\\s*[:=]?\\s*" + num + denom, std::regex::icase);
    const std::regex fraction(num + denom);
    const std::string text(judge_text);

    auto checked = [&](double v) {
        if (!(v >= 0.0 && v <= max_score)) {
            throw Error(Errc::OutOfRange, "rating " + format_number(v) + " outside [0, " + format_number(max_score) + "]");
        }
        return v;
    };

    std::smatch m;
    if (std::regex_search(text, m, labelled)) return checked(std::stod(m[1].str()));
    if (std::regex_search(text, m, fraction)) return checked(std::stod(m[1].str()));

    // Last resort: a bare number that is not part of some other fraction.
    static const std::regex bare(R"(\d+(?:\.\d+)?)");
    for (auto it = std::sregex_iterator(text.begin(), text.end(), bare); it != std::sregex_iterator(); ++it) {
        auto begin = static_cast<std::size_t>(it->position());
        auto end = begin + static_cast<std::size_t>(it->length());
        std::size_t after = end;
        while (after < text.size() && detail::is_space(text[after])) ++after;
        bool numerator = after < text.size() && text[after] == '/';
        std::size_t before = begin;
        while (before > 0 && detail::is_space(text[before - 1])) --before;
        bool denominator = before > 0 && text[before - 1] == '/';
        if (numerator || denominator) continue;
        return checked(std::stod(it->str()));
    }
    throw Error(Errc::NoRatingFound, "no rating in judge reply");
}

std::string build_judge_prompt(const Metric& metric, std::string_view question, std::string_view response,
                               const std::string& judge_template) {
    return render_prompt(judge_template, {{"metric", metric.name},
                                          {"description", metric.description},
                                          {"criteria", join_lines(metric.criteria)},
                                          {"max_score", format_number(metric.max_score)},
                                          {"question", std::string(question)},
                                          {"response", std::string(response)}});
}

MetricScore score_metric(std::string_view question, std::string_view response, const Metric& metric,
                         ChatBackend& judge, const JudgeOptions& options) {
    if (detail::trim(response).empty()) throw Error(Errc::InvalidConfig, "cannot score an empty response");
    ChatRequest req;
    req.model = options.model;
    req.temperature = options.temperature;
    req.purpose = "judge." + metric.name;
    req.turns.push_back({ChatRole::user, build_judge_prompt(metric, question, response, options.judge_template)});

    MetricScore score;
    score.metric = metric.name;
    for (int r = 0; r < options.ratings; ++r) {
        std::optional<double> rating;
        std::string last_error;
        for (int attempt = 0; attempt <= options.retries_per_rating && !rating; ++attempt) {
            auto reply = complete_with_retry(judge, req, options.retry);
            try {
                rating = extract_rating(reply.content, metric.max_score);
            } catch (const Error& e) {
                last_error = e.what();
            }
        }
        if (!rating) {
            throw Error(Errc::JudgeUnparseable, "judge gave no usable " + metric.name + " rating: " + last_error);
        }
        score.ratings.push_back(*rating);
    }
    score.mean = score.ratings.empty()
                     ? 0.0
                     : std::accumulate(score.ratings.begin(), score.ratings.end(), 0.0) /
                           static_cast<double>(score.ratings.size());
    return score;
}

double total_score(const ItemScores& scores, const std::vector<std::string>& metric_names) {
    double total = 0.0;
    for (const auto& name : metric_names) {
        auto it = scores.find(name);
        if (it == scores.end()) throw Error(Errc::MissingMetric, "missing metric '" + name + "'");
        total += it->second.mean;
    }
    return total;
}

double total_score(const ItemScores& scores, const MetricSet& metrics) {
    return total_score(scores, metrics.names());
}

std::vector<std::string> AggregateRow::metric_names() const {
    std::vector<std::string> out;
    for (const auto& [name, value] : means) out.push_back(name);
    return out;
}

AggregateRow aggregate_method(const std::string& method, const std::map<std::string, ItemScores>& per_item,
                              const std::set<std::string>& excluded, const std::vector<std::string>& metric_names) {
    AggregateRow row;
    row.method = method;
    std::vector<double> sums(metric_names.size(), 0.0);
    for (const auto& [id, scores] : per_item) {
        if (excluded.count(id)) {
            ++row.excluded;
            continue;
        }
        for (std::size_t i = 0; i < metric_names.size(); ++i) {
            auto it = scores.find(metric_names[i]);
            if (it == scores.end()) {
                throw Error(Errc::MissingMetric, "item '" + id + "' lacks metric '" + metric_names[i] + "'");
            }
            sums[i] += it->second.mean;
        }
        ++row.included;
    }
    // Excluded ids that never got scores still count as excluded.
    for (const auto& id : excluded) {
        if (!per_item.count(id)) ++row.excluded;
    }
    if (row.included == 0) throw Error(Errc::EmptyAfterExclusion, "no scored items left for '" + method + "'");
    for (std::size_t i = 0; i < metric_names.size(); ++i) {
        double mean = sums[i] / static_cast<double>(row.included);
        row.means.emplace_back(metric_names[i], mean);
        row.total += mean;
    }
    return row;
}

DiffReport diff_report(const AggregateRow& a, const AggregateRow& b) {
    if (a.metric_names() != b.metric_names()) {
        throw Error(Errc::MetricSetMismatch, "cannot compare '" + a.method + "' and '" + b.method +
                                                 "': metric sets differ");
    }
    DiffReport d;
    for (std::size_t i = 0; i < a.means.size(); ++i) {
        d.diffs.emplace_back(a.means[i].first, a.means[i].second - b.means[i].second);
    }
    d.total = a.total - b.total;
    return d;
}

std::vector<std::string> default_refusal_phrases(Language lang) {
    if (lang == Language::ZH) {
        return {"我无法提供", "我不能提供", "我无法回答", "我不能回答", "我无法协助",
                "我不能帮助", "我无法帮助你", "抱歉，我无法", "很抱歉，我不能"};
    }
    return {"I can't help with",        "I cannot help with",      "I can't provide",
            "I cannot provide",         "I can't assist",          "I cannot assist",
            "I'm not able to provide",  "I am not able to provide", "I'm unable to provide",
            "I am unable to provide",   "I can't engage",          "I cannot engage",
            "I can't fulfill",          "I cannot fulfill",        "I won't be able to help"};
}

bool refusal_detect(std::string_view response, const RefusalOptions& options, ChatBackend* judge) {
    // Curly apostrophes are common in model output.
    std::string normalized(response);
    for (std::size_t pos; (pos = normalized.find("\xE2\x80\x99")) != std::string::npos;) {
        normalized.replace(pos, 3, "'");
    }
    for (const auto& phrase : options.phrases) {
        if (detail::icontains(normalized, phrase)) return true;
    }
    if (!judge) return false;

    ChatRequest req;
    req.model = options.judge_model;
    req.temperature = options.judge_temperature;
    req.purpose = "refusal_judge";
    req.turns.push_back(
        {ChatRole::user,
         render_prompt("Below is a reply to someone asking for psychological help. Does the reply refuse or decline "
                       "to engage with the request, instead of offering support? Answer with a single word: yes or "
                       "no.\n\nReply:\n{response}",
                       {{"response", std::string(response)}})});
    auto verdict = detail::to_lower(detail::trim(complete_with_retry(*judge, req, options.retry).content));
    return verdict.rfind("yes", 0) == 0 || verdict.rfind("是", 0) == 0;
}

RefusalStats refusal_stats(const std::vector<std::pair<std::string, std::set<std::string>>>& refused_by_method) {
    RefusalStats stats;
    std::set<std::string> all;
    for (const auto& [method, ids] : refused_by_method) {
        stats.counts.emplace_back(method, ids.size());
        all.insert(ids.begin(), ids.end());
    }
    stats.distinct = all.size();
    return stats;
}

std::string render_union(const RefusalStats& stats) {
    std::string out = "Union(";
    for (std::size_t i = 0; i < stats.counts.size(); ++i) {
        if (i) out += ", ";
        out += std::to_string(stats.counts[i].second);
    }
    out += ") = " + std::to_string(stats.distinct);
    return out;
}

}  // namespace autocbt
