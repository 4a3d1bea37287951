#include "autocbt/prompt.hpp"

#include "autocbt/error.hpp"

#include <cctype>

namespace autocbt {

namespace {

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

// Length of the placeholder name starting after '{' at `pos`, or 0 when the
// brace does not open a placeholder.
std::size_t placeholder_len(std::string_view s, std::size_t pos) {
    if (pos >= s.size() || !ident_start(s[pos])) return 0;
    std::size_t end = pos + 1;
    while (end < s.size() && ident_char(s[end])) ++end;
    if (end >= s.size() || s[end] != '}') return 0;
    return end - pos;
}

template <typename OnLiteral, typename OnPlaceholder>
void scan(std::string_view tmpl, OnLiteral&& literal, OnPlaceholder&& placeholder) {
    std::size_t i = 0;
    while (i < tmpl.size()) {
        char c = tmpl[i];
        if (c == '{' && i + 1 < tmpl.size() && tmpl[i + 1] == '{') {
            literal('{');
            i += 2;
        } else if (c == '}' && i + 1 < tmpl.size() && tmpl[i + 1] == '}') {
            literal('}');
            i += 2;
        } else if (c == '{') {
            auto len = placeholder_len(tmpl, i + 1);
            if (len == 0) {
                literal(c);
                ++i;
            } else {
                placeholder(tmpl.substr(i + 1, len));
                i += len + 2;
            }
        } else {
            literal(c);
            ++i;
        }
    }
}

}  // namespace

std::string render_prompt(std::string_view tmpl, const Bindings& bindings) {
    std::string out;
    out.reserve(tmpl.size());
    scan(
        tmpl, [&](char c) { out.push_back(c); },
        [&](std::string_view name) {
            auto it = bindings.find(name);
            if (it == bindings.end()) {
                throw Error(Errc::MissingBinding, std::string(name));
            }
            out += it->second;
        });
    return out;
}

std::set<std::string> template_placeholders(std::string_view tmpl) {
    std::set<std::string> names;
    scan(
        tmpl, [](char) {}, [&](std::string_view name) { names.emplace(name); });
    return names;
}

}  // namespace autocbt
