#pragma once

#include "autocbt/config.hpp"
#include "autocbt/dataset.hpp"
#include "autocbt/llm_backend.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace test {

inline std::filesystem::path source_path(const std::string& rel) {
    return std::filesystem::path(AUTOCBT_SOURCE_DIR) / rel;
}

inline autocbt::EngineConfig shipped_config() { return autocbt::load_engine_config(source_path("config/autocbt.yaml")); }

inline autocbt::DatasetItem make_item(std::string id, std::string question,
                                      autocbt::Language lang = autocbt::Language::EN) {
    autocbt::DatasetItem item;
    item.id = std::move(id);
    item.question = std::move(question);
    item.language = lang;
    return item;
}

// Counsellor "c", user "u" and supervisors "s0".."s{n-1}", fully connected
// through the counsellor. Templates are tiny but exercise every slot.
inline autocbt::EngineConfig small_config(std::size_t supervisors) {
    using namespace autocbt;
    EngineConfig cfg;
    AgentConfig user;
    user.id = {"u", RoleKind::user};
    AgentConfig c;
    c.id = {"c", RoleKind::counsellor};
    c.role_description = std::string("counsellor role");
    c.routing_prompt_template = std::string(
        "ROUTE q={question} d={draft} t={targets} s={strategies} f={feedback} h={history} {counsellor} {user}");
    c.message_prompt_template = std::string("REDRAFT q={question} d={draft} a={advice} h={history} {standards}");
    c.allowed_strategies = {kAllStrategies.begin(), kAllStrategies.end()};
    cfg.agents = {user, c};
    cfg.edges = {{"u", "c"}, {"c", "u"}};
    for (std::size_t i = 0; i < supervisors; ++i) {
        AgentConfig s;
        s.id = {"s" + std::to_string(i), RoleKind::supervisor};
        s.role_description = std::string("supervisor ") + std::to_string(i);
        s.standard = std::string("standard ") + std::to_string(i);
        s.criteria = {std::string("criterion a"), std::string("criterion b")};
        s.salutation_prefix = std::string("Hello counsellor,");
        s.message_prompt_template = std::string("ADVISE {standard} {criteria} q={question} d={draft} {salutation}");
        cfg.agents.push_back(s);
        cfg.edges.emplace_back("c", s.id.id);
        cfg.edges.emplace_back(s.id.id, "c");
    }
    for (const char* name : {"Validation and Empathy", "Identify Key Thought or Belief", "Pose Challenge or Reflection",
                             "Provide Strategy or Insight", "Encouragement and Foresight"}) {
        cfg.standards.push_back({std::string(name), "guideline " + std::to_string(cfg.standards.size() + 1)});
    }
    cfg.generation_system_prompt = std::string("You are a counsellor.");
    cfg.prompt_cbt_template = std::string("{role_description}\n{standards}\nQ: {question}");
    cfg.retry = {1, std::chrono::milliseconds{0}};
    return cfg;
}

inline autocbt::Script script(std::vector<std::pair<std::string, std::string>> replies) {
    autocbt::Script s;
    for (auto& [k, v] : replies) s.emplace_back(k, autocbt::ScriptReply{v, std::nullopt, "stop"});
    return s;
}

inline std::vector<std::string> purposes(const autocbt::ScriptedBackend& b) {
    std::vector<std::string> out;
    for (const auto& r : b.request_log()) out.push_back(r.purpose);
    return out;
}

}  // namespace test
