#pragma once

#include "autocbt/config.hpp"
#include "autocbt/dataset.hpp"
#include "autocbt/llm_backend.hpp"
#include "autocbt/memory.hpp"
#include "autocbt/routing.hpp"
#include "autocbt/topology.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace autocbt {

enum class Method { generation, prompt_cbt, auto_cbt };

const char* method_name(Method m);
// Accepts "generation", "prompt_cbt"/"promptcbt", "auto_cbt"/"autocbt".
Method parse_method(std::string_view text);

enum class Termination { direct_reply, simultaneous_target, budget_exhausted, fallback };

const char* termination_name(Termination t);
Termination parse_termination(std::string_view text);

// One routing operation that made it into the trace.
struct RouteStep {
    RoutingStrategy strategy = RoutingStrategy::ENDCAST;
    std::vector<std::string> targets;
    std::string raw;      // the counsellor's routing reply, verbatim
    std::string outcome;  // consult | reply | loopback | endcast | termination | fallback
};

struct AdviceEntry {
    std::string supervisor;
    std::string text;
};

// Audit log of a session: question, draft, route, reprompt, advice, final.
struct SessionEvent {
    std::string kind;
    std::string agent;
    std::vector<std::string> targets;
    std::string strategy;
    std::string content;
};

struct RecordError {
    std::string error_class;
    std::string cause;  // underlying class for RetriesExhausted
    std::string message;
};

struct ConsultationRecord {
    std::string item_id;
    Language language = Language::EN;
    Method method = Method::generation;
    std::string stage = "final";  // "draft" for the first-draft companion records
    std::string question;
    std::vector<std::string> draft_responses;
    std::vector<AdviceEntry> advice;
    std::vector<RouteStep> routing_trace;
    std::string final_response;
    std::size_t hop_count = 0;
    Termination terminated_by = Termination::direct_reply;
    std::optional<RecordError> error;
    std::vector<SessionEvent> events;

    bool failed() const { return error.has_value(); }
    // "auto_cbt", or "auto_cbt:draft" for the draft companion.
    std::string method_label() const;
};

// Backends per model role; counsellor and supervisors may share one.
struct Backends {
    ChatBackend& counsellor;
    ChatBackend& supervisor;
};

// Throws Error{MissingField} on an empty question. Backend failures produce a
// failed record instead of an exception.
ConsultationRecord run_generation(const DatasetItem& item, ChatBackend& backend, const EngineConfig& cfg);

std::string build_prompt_cbt_prompt(const DatasetItem& item, const EngineConfig& cfg);
ConsultationRecord run_prompt_cbt(const DatasetItem& item, ChatBackend& backend, const EngineConfig& cfg);

// The counsellor's first draft is produced by exactly the PromptCBT prompt.
std::string build_autocbt_draft_prompt(const DatasetItem& item, const EngineConfig& cfg);

// Draft, then route until the counsellor replies to the user, names the user
// together with a supervisor, runs out of routing operations, or fails to
// produce a usable decision after the configured re-prompts.
//
// A routing operation is one routing call to the counsellor; at most
// topology.routing_budget() are made. Every consulted supervisor's edge is
// consumed, so each supervisor advises at most once.
ConsultationRecord run_autocbt(const DatasetItem& item, const Backends& backends, const EngineConfig& cfg,
                               Topology topology);

// Reviews `draft` as supervisor `sup` and returns its advice, salutation
// enforced. Both the incoming draft and the advice go into `memory`.
Message supervisor_consult(const std::string& draft, const DatasetItem& item, const AgentConfig& sup,
                           ChatBackend& backend, MemoryStore& memory, const EngineConfig& cfg,
                           std::uint64_t& next_seq);

// Runs one method for one item.
ConsultationRecord run_method(Method method, const DatasetItem& item, const Backends& backends,
                              const EngineConfig& cfg);

// The "draft" companion of an AutoCBT record: its first draft as the final.
ConsultationRecord first_draft_record(const ConsultationRecord& autocbt_record);

}  // namespace autocbt
