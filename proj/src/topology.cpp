#include "autocbt/topology.hpp"

#include "autocbt/error.hpp"

#include <algorithm>

namespace autocbt {

const char* role_kind_name(RoleKind kind) {
    switch (kind) {
        case RoleKind::counsellor: return "counsellor";
        case RoleKind::supervisor: return "supervisor";
        case RoleKind::user: return "user";
    }
    return "supervisor";
}

RoleKind parse_role_kind(const std::string& text) {
    if (text == "counsellor" || text == "counselor") return RoleKind::counsellor;
    if (text == "supervisor") return RoleKind::supervisor;
    if (text == "user") return RoleKind::user;
    throw Error(Errc::InvalidConfig, "unknown role kind '" + text + "'");
}

Topology Topology::build(const std::vector<AgentId>& agents, const std::vector<Edge>& edges) {
    Topology t;
    for (const auto& agent : agents) {
        if (agent.id.empty()) {
            throw Error(Errc::InvalidConfig, "agent id must not be empty");
        }
        if (!t.roles_.emplace(agent.id, agent.role).second) {
            throw Error(Errc::DuplicateAgent, "agent '" + agent.id + "' declared twice");
        }
        t.order_.push_back(agent.id);
        if (agent.role == RoleKind::counsellor) {
            if (!t.counsellor_.empty()) {
                throw Error(Errc::DuplicateCounsellor, "agents '" + t.counsellor_ + "' and '" + agent.id +
                                                           "' both have role counsellor");
            }
            t.counsellor_ = agent.id;
        } else if (agent.role == RoleKind::user) {
            if (!t.user_.empty()) {
                throw Error(Errc::DuplicateUser,
                            "agents '" + t.user_ + "' and '" + agent.id + "' both have role user");
            }
            t.user_ = agent.id;
        }
    }
    if (t.counsellor_.empty()) throw Error(Errc::MissingCounsellor, "no agent has role counsellor");
    if (t.user_.empty()) throw Error(Errc::MissingUser, "no agent has role user");

    for (const auto& [from, to] : edges) {
        if (!t.contains(from)) throw Error(Errc::UnknownAgent, "edge references unknown agent '" + from + "'");
        if (!t.contains(to)) throw Error(Errc::UnknownAgent, "edge references unknown agent '" + to + "'");
        if (from == to) throw Error(Errc::SelfEdge, "self edge on '" + from + "'");
        t.edges_.emplace(from, to);
    }
    return t;
}

RoleKind Topology::role_of(const std::string& id) const {
    auto it = roles_.find(id);
    if (it == roles_.end()) throw Error(Errc::UnknownAgent, "unknown agent '" + id + "'");
    return it->second;
}

bool Topology::is_supervisor(const std::string& id) const {
    auto it = roles_.find(id);
    return it != roles_.end() && it->second == RoleKind::supervisor;
}

std::vector<std::string> Topology::agent_ids() const { return order_; }

std::vector<std::string> Topology::supervisors() const {
    std::vector<std::string> out;
    for (const auto& id : order_) {
        if (roles_.at(id) == RoleKind::supervisor) out.push_back(id);
    }
    return out;
}

std::size_t Topology::supervisor_count() const {
    return static_cast<std::size_t>(std::count_if(
        roles_.begin(), roles_.end(), [](const auto& kv) { return kv.second == RoleKind::supervisor; }));
}

std::vector<std::string> Topology::communicable_targets(const std::string& from) const {
    if (!contains(from)) throw Error(Errc::UnknownAgent, "unknown agent '" + from + "'");
    // Declaration order, so prompts and broadcasts are stable.
    std::vector<std::string> out;
    for (const auto& to : order_) {
        Edge e{from, to};
        if (edges_.count(e) && !consumed_.count(e)) out.push_back(to);
    }
    return out;
}

bool Topology::is_communicable(const std::string& from, const std::string& to) const {
    Edge e{from, to};
    return edges_.count(e) != 0 && consumed_.count(e) == 0;
}

void Topology::consume_edge(const std::string& from, const std::string& to) {
    Edge e{from, to};
    if (!edges_.count(e)) throw Error(Errc::EdgeNotFound, "no edge " + from + " -> " + to);
    if (to == user_) return;
    if (!consumed_.insert(e).second) {
        throw Error(Errc::AlreadyConsumed, "edge " + from + " -> " + to + " already consumed");
    }
}

}  // namespace autocbt
