#pragma once

#include <map>
#include <set>
#include <string>
#include <string_view>

namespace autocbt {

using Bindings = std::map<std::string, std::string, std::less<>>;

// Substitutes `{name}` placeholders (name = [A-Za-z_][A-Za-z0-9_]*) in a
// single pass; bound values are never re-scanned. `{{` and `}}` render as
// literal braces and any other brace sequence is copied through.
// Throws Error{MissingBinding} naming the first unbound placeholder.
std::string render_prompt(std::string_view tmpl, const Bindings& bindings);

// Placeholder names referenced by `tmpl`.
std::set<std::string> template_placeholders(std::string_view tmpl);

}  // namespace autocbt
