#pragma once

#include "autocbt/topology.hpp"

#include <array>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace autocbt {

enum class RoutingStrategy { LOOPBACK, UNICAST, MULTICAST, BROADCAST, ENDCAST };

inline constexpr std::array<RoutingStrategy, 5> kAllStrategies = {
    RoutingStrategy::LOOPBACK, RoutingStrategy::UNICAST, RoutingStrategy::MULTICAST,
    RoutingStrategy::BROADCAST, RoutingStrategy::ENDCAST};

const char* strategy_name(RoutingStrategy s);
// Case-insensitive; accepts the bare name or its bracketed form.
std::optional<RoutingStrategy> strategy_from_name(std::string_view name);

struct RoutingDecision {
    RoutingStrategy strategy = RoutingStrategy::ENDCAST;
    std::vector<std::string> targets;  // ordered, no duplicates
    std::string rationale;

    friend bool operator==(const RoutingDecision&, const RoutingDecision&) = default;
};

// A decision that passed validate_decision; LOOPBACK and BROADCAST targets are
// resolved to the concrete agents at validation time.
class ValidatedDecision {
public:
    const RoutingDecision& decision() const { return decision_; }
    RoutingStrategy strategy() const { return decision_.strategy; }
    const std::vector<std::string>& targets() const { return decision_.targets; }

private:
    explicit ValidatedDecision(RoutingDecision d) : decision_(std::move(d)) {}
    friend ValidatedDecision validate_decision(const RoutingDecision&, const Topology&, const std::string&,
                                               const std::set<RoutingStrategy>&);
    RoutingDecision decision_;
};

// Wire format:
//
//     [STRATEGY] name name ... <delimiter> rationale
//
// The first bracketed strategy tag fixes the strategy. Each strategy tag opens
// a target list that runs to the end of the line, a delimiter ("-", "--",
// ":", "|", en/em dash), the next bracket, or the first unknown word after a
// matched name. Names are comma or whitespace separated and matched
// case-insensitively against `vocab`; unknown leading words are dropped.
// Targets of later tags are collected too, which is what exposes a
// "[UNICAST] user [UNICAST] sup" reply as a simultaneous-target decision.
//
// LOOPBACK and BROADCAST may omit targets. Throws Error{Unparseable} when no
// strategy tag is present or every named target is unknown.
RoutingDecision parse_routing_decision(std::string_view text, const std::vector<std::string>& vocab);

// Throws Error{StrategyNotAllowed, TargetNotCommunicable, CardinalityMismatch}.
ValidatedDecision validate_decision(const RoutingDecision& d, const Topology& t, const std::string& from,
                                    const std::set<RoutingStrategy>& allowed);

// True when the targets hold the user agent together with any supervisor.
bool is_termination_signal(const RoutingDecision& d, const Topology& t);

}  // namespace autocbt
