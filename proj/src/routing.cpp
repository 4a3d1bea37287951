#include "autocbt/routing.hpp"

#include "autocbt/error.hpp"
#include "strings.hpp"

#include <algorithm>

namespace autocbt {

namespace {

bool is_delimiter_token(std::string_view tok) {
    return tok == "-" || tok == "--" || tok == ":" || tok == "|";
}

bool starts_with_dash(std::string_view s, std::size_t pos) {
    // U+2013 en dash, U+2014 em dash.
    return s.size() >= pos + 3 && static_cast<unsigned char>(s[pos]) == 0xE2 &&
           static_cast<unsigned char>(s[pos + 1]) == 0x80 &&
           (static_cast<unsigned char>(s[pos + 2]) == 0x93 || static_cast<unsigned char>(s[pos + 2]) == 0x94);
}

std::string_view strip_punct(std::string_view tok) {
    auto punct = [](char c) {
        return c == '.' || c == ',' || c == ';' || c == '!' || c == '?' || c == '"' || c == '\'' || c == '(' ||
               c == ')' || c == '`' || c == '*';
    };
    while (!tok.empty() && punct(tok.front())) tok.remove_prefix(1);
    while (!tok.empty() && punct(tok.back())) tok.remove_suffix(1);
    return tok;
}

struct Tag {
    std::size_t begin;
    std::size_t end;  // one past ']'
    std::optional<RoutingStrategy> strategy;
};

std::optional<Tag> next_tag(std::string_view text, std::size_t from) {
    while (true) {
        auto open = text.find('[', from);
        if (open == std::string_view::npos) return std::nullopt;
        auto close = text.find(']', open + 1);
        if (close == std::string_view::npos) return std::nullopt;
        auto inner = text.substr(open + 1, close - open - 1);
        if (inner.find('[') != std::string_view::npos) {
            from = open + 1;
            continue;
        }
        return Tag{open, close + 1, strategy_from_name(detail::trim(inner))};
    }
}

}  // namespace

const char* strategy_name(RoutingStrategy s) {
    switch (s) {
        case RoutingStrategy::LOOPBACK: return "LOOPBACK";
        case RoutingStrategy::UNICAST: return "UNICAST";
        case RoutingStrategy::MULTICAST: return "MULTICAST";
        case RoutingStrategy::BROADCAST: return "BROADCAST";
        case RoutingStrategy::ENDCAST: return "ENDCAST";
    }
    return "ENDCAST";
}

std::optional<RoutingStrategy> strategy_from_name(std::string_view name) {
    name = detail::trim(name);
    if (name.size() >= 2 && name.front() == '[' && name.back() == ']') {
        name = detail::trim(name.substr(1, name.size() - 2));
    }
    auto upper = detail::to_upper(name);
    for (auto s : kAllStrategies) {
        if (upper == strategy_name(s)) return s;
    }
    return std::nullopt;
}

RoutingDecision parse_routing_decision(std::string_view text, const std::vector<std::string>& vocab) {
    if (vocab.empty()) throw Error(Errc::Unparseable, "empty agent vocabulary");

    auto match_name = [&](std::string_view tok) -> const std::string* {
        auto lowered = detail::to_lower(tok);
        for (const auto& id : vocab) {
            if (detail::to_lower(id) == lowered) return &id;
        }
        return nullptr;
    };

    RoutingDecision d;
    bool have_strategy = false;
    std::size_t rationale_from = std::string_view::npos;

    std::size_t pos = 0;
    while (auto tag = next_tag(text, pos)) {
        pos = tag->end;
        if (!tag->strategy) continue;
        if (!have_strategy) {
            d.strategy = *tag->strategy;
            have_strategy = true;
        }
        // Scan the target list following this tag.
        std::size_t i = tag->end;
        bool stop = false;
        bool matched_in_run = false;
        while (i < text.size() && !stop) {
            char c = text[i];
            if (c == '\n' || c == '[' || c == '|' || starts_with_dash(text, i)) break;
            if (detail::is_space(c) || c == ',') {
                ++i;
                continue;
            }
            std::size_t j = i;
            while (j < text.size() && !detail::is_space(text[j]) && text[j] != ',' && text[j] != '[' &&
                   text[j] != '|' && !starts_with_dash(text, j)) {
                ++j;
            }
            auto raw = text.substr(i, j - i);
            if (is_delimiter_token(raw)) break;
            bool ends_with_colon = !raw.empty() && raw.back() == ':';
            auto tok = strip_punct(ends_with_colon ? raw.substr(0, raw.size() - 1) : raw);
            const auto* id = tok.empty() ? nullptr : match_name(tok);
            if (id) {
                matched_in_run = true;
                if (std::find(d.targets.begin(), d.targets.end(), *id) == d.targets.end()) {
                    d.targets.push_back(*id);
                }
            } else if (!tok.empty() && matched_in_run) {
                // Prose after the names: the rationale starts here.
                break;
            }
            i = j;
            if (ends_with_colon) stop = true;
        }
        if (rationale_from == std::string_view::npos) rationale_from = i;
        pos = std::max(pos, i);
    }

    if (!have_strategy) throw Error(Errc::Unparseable, "no routing strategy tag found");
    bool targets_optional =
        d.strategy == RoutingStrategy::LOOPBACK || d.strategy == RoutingStrategy::BROADCAST;
    if (d.targets.empty() && !targets_optional) {
        throw Error(Errc::Unparseable, std::string("no known target after [") + strategy_name(d.strategy) + "]");
    }
    if (rationale_from != std::string_view::npos && rationale_from < text.size()) {
        auto rest = detail::trim(text.substr(rationale_from));
        // Drop a leading delimiter.
        while (!rest.empty()) {
            if (starts_with_dash(rest, 0)) {
                rest = detail::trim(rest.substr(3));
            } else if (rest.front() == '-' || rest.front() == ':' || rest.front() == '|') {
                rest = detail::trim(rest.substr(1));
            } else {
                break;
            }
        }
        d.rationale = std::string(rest);
    }
    return d;
}

ValidatedDecision validate_decision(const RoutingDecision& d, const Topology& t, const std::string& from,
                                    const std::set<RoutingStrategy>& allowed) {
    if (!allowed.count(d.strategy)) {
        throw Error(Errc::StrategyNotAllowed, std::string(strategy_name(d.strategy)) + " is not allowed for '" +
                                                  from + "'");
    }
    RoutingDecision resolved = d;
    auto reachable = t.communicable_targets(from);

    if (d.strategy == RoutingStrategy::LOOPBACK) {
        if (!(d.targets.empty() || (d.targets.size() == 1 && d.targets.front() == from))) {
            throw Error(Errc::CardinalityMismatch, "LOOPBACK may only target the sender '" + from + "'");
        }
        resolved.targets = {from};
        return ValidatedDecision(std::move(resolved));
    }

    for (const auto& target : d.targets) {
        if (!t.is_communicable(from, target)) {
            throw Error(Errc::TargetNotCommunicable, "'" + target + "' is not communicable from '" + from + "'");
        }
    }

    switch (d.strategy) {
        case RoutingStrategy::UNICAST:
        case RoutingStrategy::ENDCAST:
            if (d.targets.size() != 1) {
                throw Error(Errc::CardinalityMismatch, std::string(strategy_name(d.strategy)) +
                                                           " needs exactly one target, got " +
                                                           std::to_string(d.targets.size()));
            }
            break;
        case RoutingStrategy::MULTICAST:
            if (d.targets.size() < 2) {
                throw Error(Errc::CardinalityMismatch,
                            "MULTICAST needs at least two targets, got " + std::to_string(d.targets.size()));
            }
            break;
        case RoutingStrategy::BROADCAST: {
            if (reachable.empty()) {
                throw Error(Errc::CardinalityMismatch, "BROADCAST with no communicable agents");
            }
            if (!d.targets.empty()) {
                auto named = std::set<std::string>(d.targets.begin(), d.targets.end());
                auto all = std::set<std::string>(reachable.begin(), reachable.end());
                if (named != all) {
                    throw Error(Errc::CardinalityMismatch,
                                "BROADCAST targets must be every communicable agent");
                }
            }
            resolved.targets = reachable;
            break;
        }
        case RoutingStrategy::LOOPBACK:
            break;
    }
    return ValidatedDecision(std::move(resolved));
}

bool is_termination_signal(const RoutingDecision& d, const Topology& t) {
    bool has_user = false;
    bool has_supervisor = false;
    for (const auto& target : d.targets) {
        if (target == t.user()) has_user = true;
        if (t.is_supervisor(target)) has_supervisor = true;
    }
    return has_user && has_supervisor;
}

}  // namespace autocbt
