#include "autocbt/config.hpp"

#include "autocbt/error.hpp"
#include "autocbt/evaluation.hpp"
#include "autocbt/prompt.hpp"

#include <yaml-cpp/yaml.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

namespace autocbt {

namespace {

[[noreturn]] void invalid(const std::string& message) { throw Error(Errc::InvalidConfig, message); }

LocalizedText localized(const YAML::Node& node, const std::string& where) {
    LocalizedText text;
    if (!node || node.IsNull()) return text;
    if (node.IsScalar()) {
        text.variants[Language::EN] = node.as<std::string>();
        return text;
    }
    if (!node.IsMap()) invalid(where + ": expected text or a {EN, ZH} map");
    for (const auto& kv : node) {
        Language lang;
        try {
            lang = parse_language(kv.first.as<std::string>());
        } catch (const Error&) {
            invalid(where + ": unknown language key '" + kv.first.as<std::string>() + "'");
        }
        text.variants[lang] = kv.second.as<std::string>();
    }
    return text;
}

ModelConfig model_config(const YAML::Node& node, const std::string& role) {
    ModelConfig m;
    if (role == "judge" || role == "classifier") m.temperature = 0.0;
    if (node["base_url"]) m.base_url = node["base_url"].as<std::string>();
    if (node["model"]) m.model = node["model"].as<std::string>();
    if (node["temperature"]) m.temperature = node["temperature"].as<double>();
    if (node["credential_env"]) m.credential_env = node["credential_env"].as<std::string>();
    if (node["timeout_s"]) m.timeout = std::chrono::seconds(node["timeout_s"].as<long>());
    if (node["max_tokens"]) m.max_tokens = node["max_tokens"].as<int>();
    return m;
}

void check_template(const LocalizedText& text, const std::set<std::string>& allowed, const std::string& where) {
    for (const auto& [lang, tmpl] : text.variants) {
        for (const auto& name : template_placeholders(tmpl)) {
            if (!allowed.count(name)) {
                invalid(where + " (" + language_name(lang) + ") uses undeclared placeholder {" + name + "}");
            }
        }
    }
}

}  // namespace

const AgentConfig& EngineConfig::agent(const std::string& id) const {
    for (const auto& a : agents) {
        if (a.id.id == id) return a;
    }
    throw Error(Errc::UnknownAgent, "unknown agent '" + id + "'");
}

const AgentConfig& EngineConfig::counsellor() const {
    for (const auto& a : agents) {
        if (a.id.role == RoleKind::counsellor) return a;
    }
    throw Error(Errc::MissingCounsellor, "no agent has role counsellor");
}

std::vector<const AgentConfig*> EngineConfig::supervisors() const {
    std::vector<const AgentConfig*> out;
    for (const auto& a : agents) {
        if (a.id.role == RoleKind::supervisor) out.push_back(&a);
    }
    return out;
}

Topology EngineConfig::topology() const {
    std::vector<AgentId> ids;
    for (const auto& a : agents) ids.push_back(a.id);
    return Topology::build(ids, edges);
}

ModelConfig EngineConfig::model_for(const std::string& role) const {
    if (auto it = models.find(role); it != models.end()) return it->second;
    if (role == "supervisor" || role == "classifier") {
        if (auto it = models.find("counsellor"); it != models.end()) {
            auto m = it->second;
            if (role == "classifier") m.temperature = 0.0;
            return m;
        }
    }
    ModelConfig m;
    if (role == "judge" || role == "classifier") m.temperature = 0.0;
    return m;
}

std::vector<std::string> EngineConfig::all_refusal_phrases() const {
    std::vector<std::string> out;
    for (const auto& [lang, phrases] : refusal_phrases) out.insert(out.end(), phrases.begin(), phrases.end());
    return out;
}

EngineConfig parse_engine_config(const std::string& yaml_text, const std::filesystem::path& base_dir) {
    YAML::Node root;
    try {
        root = YAML::Load(yaml_text);
    } catch (const YAML::Exception& e) {
        throw Error(Errc::ParseError, std::string("config: ") + e.what());
    }
    if (!root.IsMap()) invalid("config root must be a map");

    EngineConfig cfg;
    try {
        if (auto mem = root["memory"]) {
            if (mem["short_term_capacity"]) cfg.memory.capacity = mem["short_term_capacity"].as<std::size_t>();
            if (mem["window_size"]) cfg.memory.window = mem["window_size"].as<std::size_t>();
            if (mem["context_budget"]) cfg.context_budget = mem["context_budget"].as<std::size_t>();
        }
        if (auto routing = root["routing"]) {
            if (routing["max_reprompts"]) cfg.max_reprompts = routing["max_reprompts"].as<int>();
        }
        if (auto retry = root["retry"]) {
            if (retry["max_attempts"]) cfg.retry.max_attempts = retry["max_attempts"].as<int>();
            if (retry["backoff_base_ms"]) {
                cfg.retry.backoff_base = std::chrono::milliseconds(retry["backoff_base_ms"].as<long>());
            }
        }
        if (auto models = root["models"]) {
            for (const auto& kv : models) {
                auto role = kv.first.as<std::string>();
                cfg.models[role] = model_config(kv.second, role);
            }
        }
        if (root["taxonomy"]) cfg.taxonomy_path = base_dir / root["taxonomy"].as<std::string>();
        if (root["metrics"]) {
            auto m = root["metrics"].as<std::string>();
            cfg.metrics = (m == "default" || m == "appendix_a") ? m : (base_dir / m).string();
        }
        if (auto phrases = root["refusal_phrases"]) {
            for (const auto& kv : phrases) {
                auto lang = parse_language(kv.first.as<std::string>());
                for (const auto& p : kv.second) cfg.refusal_phrases[lang].push_back(p.as<std::string>());
            }
        }
        if (auto standards = root["standards"]) {
            for (const auto& s : standards) {
                cfg.standards.push_back({localized(s["name"], "standard name"),
                                         localized(s["description"], "standard description")});
            }
        }
        if (auto prompts = root["prompts"]) {
            cfg.generation_system_prompt = localized(prompts["generation_system"], "prompts.generation_system");
            cfg.prompt_cbt_template = localized(prompts["prompt_cbt"], "prompts.prompt_cbt");
            cfg.summary_prompt = localized(prompts["summary"], "prompts.summary");
        }
        if (!root["agents"] || !root["agents"].IsSequence()) invalid("'agents' must be a list");
        for (const auto& node : root["agents"]) {
            AgentConfig a;
            if (!node["id"]) invalid("agent entry without id");
            a.id.id = node["id"].as<std::string>();
            if (!node["role"]) invalid("agent '" + a.id.id + "' has no role");
            a.id.role = parse_role_kind(node["role"].as<std::string>());
            std::string where = "agent '" + a.id.id + "'";
            a.role_description = localized(node["role_description"], where + " role_description");
            a.routing_prompt_template = localized(node["routing_prompt"], where + " routing_prompt");
            a.message_prompt_template = localized(node["message_prompt"], where + " message_prompt");
            a.salutation_prefix = localized(node["salutation"], where + " salutation");
            a.standard = localized(node["standard"], where + " standard");
            if (auto criteria = node["criteria"]) {
                for (const auto& c : criteria) a.criteria.push_back(localized(c, where + " criteria"));
            }
            if (auto strategies = node["allowed_strategies"]) {
                for (const auto& s : strategies) {
                    auto parsed = strategy_from_name(s.as<std::string>());
                    if (!parsed) invalid(where + " lists unknown routing strategy '" + s.as<std::string>() + "'");
                    a.allowed_strategies.insert(*parsed);
                }
            }
            cfg.agents.push_back(std::move(a));
        }
        if (auto edges = root["edges"]) {
            for (const auto& e : edges) {
                if (!e.IsSequence() || e.size() != 2) invalid("each edge must be a [from, to] pair");
                cfg.edges.emplace_back(e[0].as<std::string>(), e[1].as<std::string>());
            }
        }
    } catch (const YAML::Exception& e) {
        invalid(std::string("config: ") + e.what());
    }
    if (cfg.refusal_phrases.empty()) {
        for (auto lang : {Language::EN, Language::ZH}) cfg.refusal_phrases[lang] = default_refusal_phrases(lang);
    }
    return cfg;
}

void validate_engine_config(const EngineConfig& cfg) {
    // Agents and edges: UnknownAgent, SelfEdge, Duplicate*/Missing* roles.
    auto topo = cfg.topology();

    check_memory_params(cfg.memory);
    if (cfg.context_budget < 1) invalid("memory.context_budget must be >= 1");
    if (cfg.max_reprompts < 0) invalid("routing.max_reprompts must be >= 0");
    if (cfg.retry.max_attempts < 1) invalid("retry.max_attempts must be >= 1");

    for (const auto& [role, m] : cfg.models) {
        if (!(m.temperature >= 0.0 && m.temperature <= 2.0)) {
            invalid("models." + role + ".temperature must lie in [0, 2]");
        }
    }

    if (cfg.standards.empty()) invalid("no CBT standards configured");
    if (cfg.prompt_cbt_template.empty()) invalid("prompts.prompt_cbt is empty");
    if (cfg.generation_system_prompt.empty()) invalid("prompts.generation_system is empty");
    check_template(cfg.prompt_cbt_template, placeholders::kPromptCbt, "prompts.prompt_cbt");
    check_template(cfg.generation_system_prompt, placeholders::kGeneration, "prompts.generation_system");
    check_template(cfg.summary_prompt, placeholders::kSummary, "prompts.summary");

    for (const auto& a : cfg.agents) {
        std::string where = "agent '" + a.id.id + "'";
        if (a.id.role == RoleKind::counsellor) {
            if (a.routing_prompt_template.empty()) invalid(where + " has no routing_prompt");
            if (a.message_prompt_template.empty()) invalid(where + " has no message_prompt");
            check_template(a.routing_prompt_template, placeholders::kRouting, where + " routing_prompt");
            check_template(a.message_prompt_template, placeholders::kCounsellorMessage, where + " message_prompt");
        } else if (a.id.role == RoleKind::supervisor) {
            if (a.salutation_prefix.empty()) invalid(where + " is a supervisor without a salutation");
            if (a.message_prompt_template.empty()) invalid(where + " has no message_prompt");
            check_template(a.message_prompt_template, placeholders::kSupervisorMessage, where + " message_prompt");
        }
    }

    if (!cfg.taxonomy_path.empty() && !std::filesystem::exists(cfg.taxonomy_path)) {
        invalid("taxonomy file not found: " + cfg.taxonomy_path.string());
    }
    if (cfg.metrics != "default" && cfg.metrics != "appendix_a" && !std::filesystem::exists(cfg.metrics)) {
        invalid("metric set file not found: " + cfg.metrics);
    }
}

EngineConfig load_engine_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(Errc::Io, "cannot read config " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    auto cfg = parse_engine_config(ss.str(), path.parent_path());
    cfg.source = path;
    validate_engine_config(cfg);
    return cfg;
}

HttpBackendOptions http_options(const ModelConfig& model) {
    HttpBackendOptions opts;
    opts.base_url = model.base_url;
    opts.timeout = model.timeout;
    if (!model.credential_env.empty()) {
        if (const char* key = std::getenv(model.credential_env.c_str())) opts.api_key = key;
    }
    return opts;
}

}  // namespace autocbt
