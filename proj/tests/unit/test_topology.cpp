#include "autocbt/error.hpp"
#include "autocbt/topology.hpp"

#include "doctest.h"

#include <algorithm>
#include <random>

using namespace autocbt;

namespace {

std::vector<AgentId> cbt_agents(int n) {
    std::vector<AgentId> agents{{"counsellor", RoleKind::counsellor}, {"user", RoleKind::user}};
    for (int i = 1; i <= n; ++i) agents.push_back({"sup" + std::to_string(i), RoleKind::supervisor});
    return agents;
}

std::vector<Edge> cbt_edges(int n) {
    std::vector<Edge> edges{{"counsellor", "user"}, {"user", "counsellor"}};
    for (int i = 1; i <= n; ++i) {
        edges.emplace_back("counsellor", "sup" + std::to_string(i));
        edges.emplace_back("sup" + std::to_string(i), "counsellor");
    }
    return edges;
}

Errc build_error(const std::vector<AgentId>& agents, const std::vector<Edge>& edges) {
    try {
        Topology::build(agents, edges);
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("build succeeded");
    return Errc::Io;
}

}  // namespace

TEST_CASE("seven-agent CBT topology builds with nothing consumed") {
    auto t = Topology::build(cbt_agents(5), cbt_edges(5));
    CHECK(t.agent_ids().size() == 7);
    CHECK(t.supervisor_count() == 5);
    CHECK(t.consumed().empty());
    CHECK(t.counsellor() == "counsellor");
    CHECK(t.user() == "user");
}

TEST_CASE("minimal topology has no supervisors") {
    auto t = Topology::build(cbt_agents(0), cbt_edges(0));
    CHECK(t.supervisor_count() == 0);
    CHECK(t.communicable_targets("counsellor") == std::vector<std::string>{"user"});
}

TEST_CASE("build rejects malformed graphs") {
    auto agents = cbt_agents(2);
    auto edges = cbt_edges(2);

    auto self = edges;
    self.emplace_back("sup1", "sup1");
    CHECK(build_error(agents, self) == Errc::SelfEdge);

    auto unknown = edges;
    unknown.emplace_back("counsellor", "ghost");
    CHECK(build_error(agents, unknown) == Errc::UnknownAgent);

    auto two_counsellors = agents;
    two_counsellors.push_back({"counsellor2", RoleKind::counsellor});
    CHECK(build_error(two_counsellors, edges) == Errc::DuplicateCounsellor);

    auto two_users = agents;
    two_users.push_back({"user2", RoleKind::user});
    CHECK(build_error(two_users, edges) == Errc::DuplicateUser);

    auto dup = agents;
    dup.push_back({"sup1", RoleKind::supervisor});
    CHECK(build_error(dup, edges) == Errc::DuplicateAgent);

    CHECK(build_error({{"user", RoleKind::user}}, {}) == Errc::MissingCounsellor);
    CHECK(build_error({{"counsellor", RoleKind::counsellor}}, {}) == Errc::MissingUser);
}

TEST_CASE("communicable targets follow unconsumed edges") {
    auto t = Topology::build(cbt_agents(5), cbt_edges(5));
    auto all = t.communicable_targets("counsellor");
    CHECK(all == std::vector<std::string>{"user", "sup1", "sup2", "sup3", "sup4", "sup5"});

    t.consume_edge("counsellor", "sup1");
    CHECK(t.communicable_targets("counsellor") == std::vector<std::string>{"user", "sup2", "sup3", "sup4", "sup5"});
    CHECK(t.communicable_targets("user") == std::vector<std::string>{"counsellor"});
    CHECK_THROWS_AS(t.communicable_targets("ghost"), Error);
}

TEST_CASE("consume_edge guards") {
    auto t = Topology::build(cbt_agents(5), cbt_edges(5));
    t.consume_edge("counsellor", "sup3");
    auto targets = t.communicable_targets("counsellor");
    CHECK(std::find(targets.begin(), targets.end(), "sup3") == targets.end());

    try {
        t.consume_edge("counsellor", "sup3");
        FAIL("second consumption accepted");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::AlreadyConsumed);
    }
    try {
        t.consume_edge("sup1", "sup2");
        FAIL("missing edge accepted");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::EdgeNotFound);
    }

    t.consume_edge("counsellor", "user");
    t.consume_edge("counsellor", "user");
    CHECK(t.is_communicable("counsellor", "user"));

    t.reset();
    CHECK(t.consumed().empty());
}

TEST_CASE("user stays reachable after any consumption order") {
    // Exhaustive over every permutation of the supervisor edges, interleaved
    // with attempts on the user edge.
    std::vector<std::string> sups{"sup1", "sup2", "sup3", "sup4", "sup5"};
    std::sort(sups.begin(), sups.end());
    auto base = Topology::build(cbt_agents(5), cbt_edges(5));
    int permutations = 0;
    do {
        auto t = base;
        for (const auto& s : sups) {
            t.consume_edge("counsellor", s);
            t.consume_edge("counsellor", "user");
            auto targets = t.communicable_targets("counsellor");
            REQUIRE(std::find(targets.begin(), targets.end(), "user") != targets.end());
            REQUIRE(std::find(targets.begin(), targets.end(), s) == targets.end());
        }
        CHECK(t.communicable_targets("counsellor") == std::vector<std::string>{"user"});
        ++permutations;
    } while (std::next_permutation(sups.begin(), sups.end()));
    CHECK(permutations == 120);
}

TEST_CASE("routing budget is supervisors plus one") {
    CHECK(Topology::build(cbt_agents(5), cbt_edges(5)).routing_budget() == 6);
    CHECK(Topology::build(cbt_agents(0), cbt_edges(0)).routing_budget() == 1);
    CHECK(Topology::build(cbt_agents(3), cbt_edges(3)).routing_budget() == 4);
}

TEST_CASE("copies do not share consumption state") {
    auto a = Topology::build(cbt_agents(2), cbt_edges(2));
    auto b = a;
    a.consume_edge("counsellor", "sup1");
    CHECK(b.is_communicable("counsellor", "sup1"));
    CHECK_FALSE(a.is_communicable("counsellor", "sup1"));
}

TEST_CASE("role names parse") {
    CHECK(parse_role_kind("counsellor") == RoleKind::counsellor);
    CHECK(parse_role_kind("counselor") == RoleKind::counsellor);
    CHECK(parse_role_kind("supervisor") == RoleKind::supervisor);
    CHECK(parse_role_kind("user") == RoleKind::user);
    CHECK_THROWS_AS(parse_role_kind("boss"), Error);
}
