#include "autocbt/error.hpp"
#include "autocbt/routing.hpp"

#include "doctest.h"

#include <random>

using namespace autocbt;

namespace {

const std::vector<std::string> kVocab{"counsellor", "user", "empathy_supervisor", "sup1", "sup2", "sup3", "sup4"};

Topology cbt() {
    std::vector<AgentId> agents{{"counsellor", RoleKind::counsellor}, {"user", RoleKind::user}};
    std::vector<Edge> edges{{"counsellor", "user"}, {"user", "counsellor"}};
    for (const char* s : {"empathy_supervisor", "sup1", "sup2", "sup3", "sup4"}) {
        agents.push_back({s, RoleKind::supervisor});
        edges.emplace_back("counsellor", s);
        edges.emplace_back(s, "counsellor");
    }
    return Topology::build(agents, edges);
}

const std::set<RoutingStrategy> kAll{kAllStrategies.begin(), kAllStrategies.end()};

Errc validation_error(const RoutingDecision& d, const Topology& t,
                      const std::set<RoutingStrategy>& allowed = kAll) {
    try {
        validate_decision(d, t, "counsellor", allowed);
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("decision accepted");
    return Errc::Io;
}

}  // namespace

TEST_CASE("strategy vocabulary is closed") {
    CHECK(kAllStrategies.size() == 5);
    for (auto s : kAllStrategies) {
        CHECK(strategy_from_name(strategy_name(s)) == s);
        CHECK(strategy_from_name(std::string("[") + strategy_name(s) + "]") == s);
    }
    CHECK(strategy_from_name("unicast") == RoutingStrategy::UNICAST);
    CHECK_FALSE(strategy_from_name("ANYCAST"));
}

TEST_CASE("parse: unicast with em-dash rationale") {
    auto d = parse_routing_decision("[UNICAST] empathy_supervisor \xE2\x80\x94 I need advice", kVocab);
    CHECK(d.strategy == RoutingStrategy::UNICAST);
    CHECK(d.targets == std::vector<std::string>{"empathy_supervisor"});
    CHECK(d.rationale == "I need advice");
}

TEST_CASE("parse: endcast to user") {
    auto d = parse_routing_decision("[ENDCAST] user", kVocab);
    CHECK(d.strategy == RoutingStrategy::ENDCAST);
    CHECK(d.targets == std::vector<std::string>{"user"});
}

TEST_CASE("parse: no tag is unparseable") {
    try {
        parse_routing_decision("I will simply answer.", kVocab);
        FAIL("parsed");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::Unparseable);
    }
}

TEST_CASE("parse: target list forms") {
    SUBCASE("comma separated, case-insensitive") {
        auto d = parse_routing_decision("[multicast] SUP1, sup2 - two views", kVocab);
        CHECK(d.strategy == RoutingStrategy::MULTICAST);
        CHECK(d.targets == std::vector<std::string>{"sup1", "sup2"});
        CHECK(d.rationale == "two views");
    }
    SUBCASE("unknown names are dropped") {
        auto d = parse_routing_decision("[MULTICAST] to sup1 sup3: both", kVocab);
        CHECK(d.targets == std::vector<std::string>{"sup1", "sup3"});
    }
    SUBCASE("prose after a name ends the list") {
        auto d = parse_routing_decision("[UNICAST] sup2 because the user needs a plan", kVocab);
        CHECK(d.targets == std::vector<std::string>{"sup2"});
        CHECK(d.rationale == "because the user needs a plan");
    }
    SUBCASE("all targets unknown") {
        CHECK_THROWS_AS(parse_routing_decision("[UNICAST] nobody", kVocab), Error);
    }
    SUBCASE("loopback and broadcast need no names") {
        CHECK(parse_routing_decision("[LOOPBACK] continue with the statement", kVocab).targets.empty());
        CHECK(parse_routing_decision("[BROADCAST]", kVocab).targets.empty());
    }
    SUBCASE("later tags contribute targets") {
        auto d = parse_routing_decision("[UNICAST] user [UNICAST] sup2", kVocab);
        CHECK(d.strategy == RoutingStrategy::UNICAST);
        CHECK(d.targets == std::vector<std::string>{"user", "sup2"});
    }
    SUBCASE("text before the tag is ignored") {
        auto d = parse_routing_decision("Decision:\n[ENDCAST] user\nThe draft is ready.", kVocab);
        CHECK(d.targets == std::vector<std::string>{"user"});
    }
}

TEST_CASE("validate: spec cases") {
    auto t = cbt();
    t.consume_edge("counsellor", "sup1");
    CHECK(validation_error({RoutingStrategy::UNICAST, {"sup1"}, ""}, t) == Errc::TargetNotCommunicable);
    CHECK(validation_error({RoutingStrategy::MULTICAST, {"sup2"}, ""}, t) == Errc::CardinalityMismatch);

    auto reachable = t.communicable_targets("counsellor");
    auto v = validate_decision({RoutingStrategy::BROADCAST, reachable, ""}, t, "counsellor", kAll);
    CHECK(v.targets() == reachable);
}

TEST_CASE("validate: remaining rules") {
    auto t = cbt();
    CHECK(validation_error({RoutingStrategy::UNICAST, {"sup1"}, ""}, t, {RoutingStrategy::ENDCAST}) ==
          Errc::StrategyNotAllowed);
    CHECK(validation_error({RoutingStrategy::UNICAST, {"sup1", "sup2"}, ""}, t) == Errc::CardinalityMismatch);
    CHECK(validation_error({RoutingStrategy::ENDCAST, {"sup1", "sup2"}, ""}, t) == Errc::CardinalityMismatch);
    CHECK(validation_error({RoutingStrategy::BROADCAST, {"sup1"}, ""}, t) == Errc::CardinalityMismatch);
    CHECK(validation_error({RoutingStrategy::LOOPBACK, {"sup1"}, ""}, t) == Errc::CardinalityMismatch);
    CHECK(validation_error({RoutingStrategy::UNICAST, {"counsellor"}, ""}, t) == Errc::TargetNotCommunicable);

    auto loop = validate_decision({RoutingStrategy::LOOPBACK, {}, ""}, t, "counsellor", kAll);
    CHECK(loop.targets() == std::vector<std::string>{"counsellor"});

    auto bcast = validate_decision({RoutingStrategy::BROADCAST, {}, ""}, t, "counsellor", kAll);
    CHECK(bcast.targets() == t.communicable_targets("counsellor"));
}

TEST_CASE("termination signal") {
    auto t = cbt();
    CHECK(is_termination_signal({RoutingStrategy::MULTICAST, {"user", "sup2"}, ""}, t));
    CHECK_FALSE(is_termination_signal({RoutingStrategy::UNICAST, {"user"}, ""}, t));
    CHECK_FALSE(is_termination_signal({RoutingStrategy::MULTICAST, {"sup1", "sup4"}, ""}, t));
}

TEST_CASE("property: validation never accepts a cardinality violation") {
    std::mt19937 rng(7);
    const std::vector<std::string> names{"counsellor", "user", "empathy_supervisor", "sup1", "sup2", "sup3", "sup4"};
    for (int round = 0; round < 5000; ++round) {
        auto t = cbt();
        for (const auto& s : t.supervisors()) {
            if (rng() % 3 == 0) t.consume_edge("counsellor", s);
        }
        RoutingDecision d;
        d.strategy = kAllStrategies[rng() % 5];
        std::size_t n = rng() % 4;
        for (std::size_t i = 0; i < n; ++i) {
            const auto& pick = names[rng() % names.size()];
            if (std::find(d.targets.begin(), d.targets.end(), pick) == d.targets.end()) d.targets.push_back(pick);
        }
        try {
            auto v = validate_decision(d, t, "counsellor", kAll);
            auto k = v.targets().size();
            auto reachable = t.communicable_targets("counsellor");
            switch (v.strategy()) {
                case RoutingStrategy::UNICAST:
                case RoutingStrategy::ENDCAST: REQUIRE(k == 1); break;
                case RoutingStrategy::MULTICAST: REQUIRE(k >= 2); break;
                case RoutingStrategy::BROADCAST: REQUIRE(v.targets() == reachable); break;
                case RoutingStrategy::LOOPBACK: REQUIRE(v.targets() == std::vector<std::string>{"counsellor"}); break;
            }
            if (v.strategy() != RoutingStrategy::LOOPBACK) {
                for (const auto& target : v.targets()) REQUIRE(t.is_communicable("counsellor", target));
            }
        } catch (const Error& e) {
            REQUIRE((e.code() == Errc::CardinalityMismatch || e.code() == Errc::TargetNotCommunicable));
        }
    }
}

TEST_CASE("property: parse, validate and signal are pure") {
    auto t = cbt();
    const std::vector<std::string> replies{"[UNICAST] sup2 - x", "[MULTICAST] user, sup1", "[BROADCAST]",
                                           "[LOOPBACK]", "[ENDCAST] user", "nothing here"};
    for (const auto& r : replies) {
        for (int k = 0; k < 2; ++k) {
            std::string first, second;
            for (auto* out : {&first, &second}) {
                try {
                    auto d = parse_routing_decision(r, kVocab);
                    *out = std::string(strategy_name(d.strategy)) + (is_termination_signal(d, t) ? "!" : "");
                    auto v = validate_decision(d, t, "counsellor", kAll);
                    for (const auto& x : v.targets()) *out += " " + x;
                } catch (const Error& e) {
                    *out += " E" + std::string(errc_name(e.code()));
                }
            }
            CHECK(first == second);
        }
    }
}
