#pragma once

#include "autocbt/agent.hpp"
#include "autocbt/llm_backend.hpp"
#include "autocbt/memory.hpp"
#include "autocbt/topology.hpp"

#include <chrono>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace autocbt {

struct ModelConfig {
    std::string base_url;
    std::string model;
    double temperature = 0.98;
    std::string credential_env;  // name of the env var holding the API key
    std::chrono::seconds timeout{120};
    std::optional<int> max_tokens;
};

struct CbtStandard {
    LocalizedText name;
    LocalizedText description;
};

// Placeholders each template may use.
namespace placeholders {
inline const std::set<std::string> kRouting{"role_description", "question", "draft",    "history",
                                            "targets",          "strategies", "feedback", "counsellor",
                                            "user"};
inline const std::set<std::string> kCounsellorMessage{"role_description", "question", "draft",
                                                      "advice",           "history",  "standards"};
inline const std::set<std::string> kSupervisorMessage{"role_description", "standard", "criteria",
                                                      "question",         "draft",    "history",
                                                      "salutation",       "counsellor"};
inline const std::set<std::string> kPromptCbt{"role_description", "standards", "question"};
inline const std::set<std::string> kGeneration{};
inline const std::set<std::string> kSummary{"owner", "messages"};
}  // namespace placeholders

// The whole engine setup, loaded from one YAML file. Relative paths inside
// the file resolve against the file's directory.
struct EngineConfig {
    std::vector<AgentConfig> agents;
    std::vector<Edge> edges;
    std::map<std::string, ModelConfig> models;  // counsellor, supervisor, judge, classifier
    std::vector<CbtStandard> standards;

    LocalizedText generation_system_prompt;
    LocalizedText prompt_cbt_template;
    LocalizedText summary_prompt;

    MemoryParams memory;
    std::size_t context_budget = 12;  // messages recalled into {history}
    int max_reprompts = 2;
    RetryPolicy retry;

    std::filesystem::path taxonomy_path;
    std::string metrics = "default";  // "default", "appendix_a" or a path
    std::map<Language, std::vector<std::string>> refusal_phrases;

    std::filesystem::path source;

    const AgentConfig& agent(const std::string& id) const;
    const AgentConfig& counsellor() const;
    std::vector<const AgentConfig*> supervisors() const;
    Topology topology() const;
    // "supervisor" and "classifier" fall back to "counsellor" when absent.
    ModelConfig model_for(const std::string& role) const;
    std::vector<std::string> all_refusal_phrases() const;
};

// Throws Error{InvalidConfig, Io, ParseError} and every Topology::build error.
EngineConfig load_engine_config(const std::filesystem::path& path);
EngineConfig parse_engine_config(const std::string& yaml_text, const std::filesystem::path& base_dir);

// Each violated invariant raises its own error and message.
void validate_engine_config(const EngineConfig& cfg);

// Resolves the API key from the configured environment variable.
HttpBackendOptions http_options(const ModelConfig& model);

}  // namespace autocbt
