#include "autocbt/config.hpp"
#include "autocbt/error.hpp"

#include "support.hpp"

#include "doctest.h"

#include <cstdlib>
#include <functional>

using namespace autocbt;

namespace {

struct Violation {
    const char* name;
    std::function<void(EngineConfig&)> mutate;
    Errc code;
    const char* message;
};

AgentConfig& agent(EngineConfig& cfg, const std::string& id) {
    for (auto& a : cfg.agents) {
        if (a.id.id == id) return a;
    }
    FAIL("no agent " << id);
    return cfg.agents.front();
}

}  // namespace

TEST_CASE("shipped config is valid") {
    auto cfg = test::shipped_config();
    CHECK_NOTHROW(validate_engine_config(cfg));
    CHECK(cfg.supervisors().size() == 5);
    CHECK(cfg.counsellor().id.id == "counsellor");
    CHECK(cfg.topology().routing_budget() == 6);
    CHECK(cfg.models.at("counsellor").temperature == 0.98);
    CHECK(cfg.models.at("judge").temperature == 0.0);
    CHECK(cfg.memory.capacity == 10);
    CHECK(cfg.memory.window == 5);
    CHECK(cfg.max_reprompts == 2);
    CHECK(cfg.standards.size() == 5);
    for (const auto* s : cfg.supervisors()) {
        CHECK(s->salutation_prefix.get(Language::EN) == "Hello counsellor,");
        CHECK_FALSE(s->criteria.empty());
    }
    const auto& empathy = cfg.agent("validation_and_empathy");
    CHECK(empathy.criteria[0].get(Language::EN) == "Did the counsellor correctly understand the user's intent?");
    CHECK(cfg.counsellor().allowed_strategies.size() == 5);
    CHECK_FALSE(cfg.all_refusal_phrases().empty());
}

TEST_CASE("each invariant has its own error") {
    const std::vector<Violation> violations{
        {"unknown edge endpoint", [](EngineConfig& c) { c.edges.emplace_back("counsellor", "ghost"); },
         Errc::UnknownAgent, "ghost"},
        {"self edge", [](EngineConfig& c) { c.edges.emplace_back("counsellor", "counsellor"); }, Errc::SelfEdge,
         "counsellor"},
        {"second counsellor",
         [](EngineConfig& c) {
             auto extra = c.counsellor();
             extra.id.id = "counsellor2";
             c.agents.push_back(extra);
         },
         Errc::DuplicateCounsellor, "counsellor"},
        {"no user",
         [](EngineConfig& c) {
             c.agents.erase(c.agents.begin());
             std::erase_if(c.edges, [](const Edge& e) { return e.first == "user" || e.second == "user"; });
         },
         Errc::MissingUser, "user"},
        {"window larger than capacity", [](EngineConfig& c) { c.memory = {4, 5}; }, Errc::InvalidConfig, "window"},
        {"zero context budget", [](EngineConfig& c) { c.context_budget = 0; }, Errc::InvalidConfig,
         "context_budget"},
        {"negative reprompts", [](EngineConfig& c) { c.max_reprompts = -1; }, Errc::InvalidConfig, "max_reprompts"},
        {"no attempts", [](EngineConfig& c) { c.retry.max_attempts = 0; }, Errc::InvalidConfig, "max_attempts"},
        {"temperature out of range", [](EngineConfig& c) { c.models["counsellor"].temperature = 3.0; },
         Errc::InvalidConfig, "temperature"},
        {"no standards", [](EngineConfig& c) { c.standards.clear(); }, Errc::InvalidConfig, "standards"},
        {"no prompt_cbt", [](EngineConfig& c) { c.prompt_cbt_template = {}; }, Errc::InvalidConfig, "prompt_cbt"},
        {"unknown placeholder",
         [](EngineConfig& c) { c.prompt_cbt_template = std::string("{standards} {question} {mood}"); },
         Errc::InvalidConfig, "{mood}"},
        {"supervisor without salutation",
         [](EngineConfig& c) { agent(c, "pose_challenge_or_reflection").salutation_prefix = {}; },
         Errc::InvalidConfig, "pose_challenge_or_reflection"},
        {"counsellor without routing prompt", [](EngineConfig& c) { agent(c, "counsellor").routing_prompt_template = {}; },
         Errc::InvalidConfig, "routing_prompt"},
        {"missing taxonomy", [](EngineConfig& c) { c.taxonomy_path = "/nonexistent/taxonomy.yaml"; },
         Errc::InvalidConfig, "taxonomy"},
        {"missing metric file", [](EngineConfig& c) { c.metrics = "/nonexistent/metrics.yaml"; }, Errc::InvalidConfig,
         "metric set"},
    };
    const auto base = test::shipped_config();
    for (const auto& v : violations) {
        CAPTURE(v.name);
        auto cfg = base;
        v.mutate(cfg);
        try {
            validate_engine_config(cfg);
            FAIL("accepted: " << v.name);
        } catch (const Error& e) {
            CHECK(e.code() == v.code);
            CHECK(std::string(e.what()).find(v.message) != std::string::npos);
        }
    }
}

TEST_CASE("yaml level errors") {
    CHECK_THROWS_AS(parse_engine_config("[1, 2]", "."), Error);
    CHECK_THROWS_AS(parse_engine_config("agents: {}", "."), Error);
    try {
        parse_engine_config("agents:\n  - id: c\n    role: counsellor\n    allowed_strategies: [ANYCAST]\n", ".");
        FAIL("parsed");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::InvalidConfig);
        CHECK(std::string(e.what()).find("ANYCAST") != std::string::npos);
    }
    CHECK_THROWS_AS(parse_engine_config("agents: []\nedges: [[a]]\n", "."), Error);
    CHECK_THROWS_AS(load_engine_config("/nonexistent/autocbt.yaml"), Error);
}

TEST_CASE("localized text and model defaults") {
    auto cfg = parse_engine_config(
        "agents:\n"
        "  - id: u\n    role: user\n"
        "  - id: c\n    role: counsellor\n    role_description: {EN: helper, ZH: 助手}\n"
        "models:\n  counsellor: {base_url: 'http://x', model: m}\n",
        ".");
    CHECK(cfg.counsellor().role_description.get(Language::ZH) == "助手");
    CHECK(cfg.model_for("supervisor").model == "m");
    CHECK(cfg.model_for("classifier").temperature == 0.0);
    CHECK(cfg.model_for("counsellor").temperature == 0.98);
    CHECK(cfg.refusal_phrases.count(Language::EN));
}

TEST_CASE("api key comes from the named environment variable") {
    ModelConfig m;
    m.base_url = "http://localhost:1/v1";
    m.credential_env = "AUTOCBT_TEST_KEY";
    ::setenv("AUTOCBT_TEST_KEY", "sk-123", 1);
    CHECK(http_options(m).api_key == "sk-123");
    ::unsetenv("AUTOCBT_TEST_KEY");
    CHECK(http_options(m).api_key.empty());
}
