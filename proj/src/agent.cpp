#include "autocbt/agent.hpp"

#include "autocbt/error.hpp"
#include "strings.hpp"

namespace autocbt {

const char* language_name(Language lang) { return lang == Language::ZH ? "ZH" : "EN"; }

Language parse_language(std::string_view text) {
    auto upper = detail::to_upper(detail::trim(text));
    if (upper == "EN") return Language::EN;
    if (upper == "ZH") return Language::ZH;
    throw Error(Errc::ParseError, "unknown language '" + std::string(text) + "'");
}

bool LocalizedText::empty() const {
    for (const auto& [lang, text] : variants) {
        if (!text.empty()) return false;
    }
    return true;
}

const std::string& LocalizedText::get(Language lang) const {
    static const std::string kEmpty;
    if (auto it = variants.find(lang); it != variants.end()) return it->second;
    if (auto it = variants.find(Language::EN); it != variants.end()) return it->second;
    return kEmpty;
}

const char* message_kind_name(MessageKind kind) {
    switch (kind) {
        case MessageKind::question: return "question";
        case MessageKind::draft: return "draft";
        case MessageKind::advice: return "advice";
        case MessageKind::final: return "final";
        case MessageKind::summary: return "summary";
        case MessageKind::system: return "system";
    }
    return "system";
}

std::string enforce_salutation(std::string_view text, std::string_view prefix) {
    if (prefix.empty()) return std::string(text);
    auto body = detail::trim_left(text);
    if (detail::istarts_with(body, prefix)) return std::string(text);
    std::string out(prefix);
    // Chinese salutations end in full-width punctuation and take no space.
    if (!detail::is_space(out.back()) && static_cast<unsigned char>(out.back()) < 0x80) out.push_back(' ');
    out.append(body);
    return out;
}

std::string enforce_salutation(std::string_view text, const AgentConfig& cfg, Language lang) {
    return enforce_salutation(text, cfg.salutation_prefix.get(lang));
}

}  // namespace autocbt
