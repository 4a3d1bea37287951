#pragma once

#include "autocbt/routing.hpp"
#include "autocbt/topology.hpp"

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace autocbt {

enum class Language { EN, ZH };

const char* language_name(Language lang);
// Accepts "EN"/"ZH" in any case. Throws Error{ParseError}.
Language parse_language(std::string_view text);

// A text with one variant per language. Lookups fall back to EN.
struct LocalizedText {
    std::map<Language, std::string> variants;

    LocalizedText() = default;
    LocalizedText(std::string en) { variants[Language::EN] = std::move(en); }  // NOLINT(google-explicit-constructor)

    bool empty() const;
    const std::string& get(Language lang) const;
};

struct AgentConfig {
    AgentId id;
    LocalizedText role_description;
    LocalizedText routing_prompt_template;
    LocalizedText message_prompt_template;
    std::set<RoutingStrategy> allowed_strategies;
    LocalizedText salutation_prefix;  // required for supervisors

    // Supervisor only: the CBT standard it enforces and its review criteria.
    LocalizedText standard;
    std::vector<LocalizedText> criteria;
};

enum class MessageKind { question, draft, advice, final, summary, system };

const char* message_kind_name(MessageKind kind);

struct Message {
    std::uint64_t seq = 0;
    std::string sender;
    std::vector<std::string> receivers;
    MessageKind kind = MessageKind::system;
    std::string content;

    friend bool operator==(const Message&, const Message&) = default;
};

// Prepends `prefix` unless the text (ignoring leading whitespace, any case)
// already starts with it. Idempotent.
std::string enforce_salutation(std::string_view text, std::string_view prefix);
std::string enforce_salutation(std::string_view text, const AgentConfig& cfg, Language lang);

}  // namespace autocbt
