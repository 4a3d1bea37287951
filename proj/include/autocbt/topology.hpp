#pragma once

#include <cstddef>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace autocbt {

enum class RoleKind { counsellor, supervisor, user };

const char* role_kind_name(RoleKind kind);
RoleKind parse_role_kind(const std::string& text);

struct AgentId {
    std::string id;
    RoleKind role = RoleKind::supervisor;

    friend bool operator==(const AgentId&, const AgentId&) = default;
};

using Edge = std::pair<std::string, std::string>;

// Directed graph of communicable agents for one consultation session.
//
// Edges are consumed as the counsellor uses them so that every supervisor is
// reached at most once; edges into the user agent are never consumed. The
// value is copyable, so a shared template topology is copied per session.
class Topology {
public:
    // Throws Error{UnknownAgent, SelfEdge, DuplicateAgent, DuplicateCounsellor,
    // DuplicateUser, MissingCounsellor, MissingUser}.
    static Topology build(const std::vector<AgentId>& agents, const std::vector<Edge>& edges);

    const std::string& counsellor() const { return counsellor_; }
    const std::string& user() const { return user_; }

    bool contains(const std::string& id) const { return roles_.count(id) != 0; }
    RoleKind role_of(const std::string& id) const;
    bool is_supervisor(const std::string& id) const;

    std::vector<std::string> agent_ids() const;
    std::vector<std::string> supervisors() const;
    std::size_t supervisor_count() const;

    const std::set<Edge>& edges() const { return edges_; }
    const std::set<Edge>& consumed() const { return consumed_; }

    // Targets reachable from `from` over edges not yet consumed.
    std::vector<std::string> communicable_targets(const std::string& from) const;
    bool is_communicable(const std::string& from, const std::string& to) const;

    // Marks (from, to) as used. An edge into the user agent is left intact.
    void consume_edge(const std::string& from, const std::string& to);

    // Upper bound on counsellor routing operations: supervisors + 1.
    std::size_t routing_budget() const { return supervisor_count() + 1; }

    // Clears consumed edges; used between sessions that share an instance.
    void reset() { consumed_.clear(); }

private:
    std::map<std::string, RoleKind> roles_;
    std::vector<std::string> order_;
    std::set<Edge> edges_;
    std::set<Edge> consumed_;
    std::string counsellor_;
    std::string user_;
};

}  // namespace autocbt
