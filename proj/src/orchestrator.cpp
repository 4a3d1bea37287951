#include "autocbt/orchestrator.hpp"

#include "autocbt/error.hpp"
#include "autocbt/prompt.hpp"
#include "strings.hpp"

#include <algorithm>
#include <map>

namespace autocbt {

const char* method_name(Method m) {
    switch (m) {
        case Method::generation: return "generation";
        case Method::prompt_cbt: return "prompt_cbt";
        case Method::auto_cbt: return "auto_cbt";
    }
    return "?";
}

Method parse_method(std::string_view text) {
    auto t = detail::to_lower(detail::trim(text));
    if (t == "generation") return Method::generation;
    if (t == "prompt_cbt" || t == "promptcbt") return Method::prompt_cbt;
    if (t == "auto_cbt" || t == "autocbt") return Method::auto_cbt;
    throw Error(Errc::ParseError, "unknown method '" + std::string(text) + "'");
}

const char* termination_name(Termination t) {
    switch (t) {
        case Termination::direct_reply: return "direct_reply";
        case Termination::simultaneous_target: return "simultaneous_target";
        case Termination::budget_exhausted: return "budget_exhausted";
        case Termination::fallback: return "fallback";
    }
    return "?";
}

Termination parse_termination(std::string_view text) {
    for (auto t : {Termination::direct_reply, Termination::simultaneous_target, Termination::budget_exhausted,
                   Termination::fallback}) {
        if (text == termination_name(t)) return t;
    }
    throw Error(Errc::ParseError, "unknown termination '" + std::string(text) + "'");
}

std::string ConsultationRecord::method_label() const {
    std::string label = method_name(method);
    if (stage == "draft") label += ":draft";
    return label;
}

namespace {

void require_question(const DatasetItem& item) {
    if (detail::trim(item.question).empty()) {
        throw Error(Errc::MissingField, "item '" + item.id + "' has an empty question");
    }
}

ConsultationRecord blank_record(const DatasetItem& item, Method method) {
    ConsultationRecord rec;
    rec.item_id = item.id;
    rec.language = item.language;
    rec.method = method;
    rec.question = item.question;
    rec.events.push_back({"question", "user", {}, "", item.question});
    return rec;
}

void mark_failed(ConsultationRecord& rec, const BackendError& e) {
    RecordError err;
    err.error_class = std::string(errc_name(e.code()));
    if (e.cause()) err.cause = std::string(errc_name(*e.cause()));
    err.message = e.what();
    rec.error = std::move(err);
    rec.final_response.clear();
}

ChatRequest request_for(const ModelConfig& model, std::string purpose, std::string prompt) {
    ChatRequest req;
    req.model = model.model;
    req.temperature = model.temperature;
    req.max_tokens = model.max_tokens;
    req.purpose = std::move(purpose);
    req.turns.push_back({ChatRole::user, std::move(prompt)});
    return req;
}

std::string numbered_standards(const EngineConfig& cfg, Language lang) {
    std::string out;
    for (std::size_t i = 0; i < cfg.standards.size(); ++i) {
        if (i) out += "\n";
        out += std::to_string(i + 1) + ". " + cfg.standards[i].name.get(lang);
        const auto& desc = cfg.standards[i].description.get(lang);
        if (!desc.empty()) out += ": " + desc;
    }
    return out;
}

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i) out += sep;
        out += parts[i];
    }
    return out;
}

SummarizerOptions summarizer_for(const EngineConfig& cfg, const ModelConfig& model, Language lang) {
    SummarizerOptions opts;
    if (!cfg.summary_prompt.empty()) opts.prompt_template = cfg.summary_prompt.get(lang);
    opts.model = model.model;
    opts.retry = cfg.retry;
    return opts;
}

// A live session: one topology copy, one memory per agent, one seq counter.
class Session {
public:
    Session(const DatasetItem& item, const Backends& backends, const EngineConfig& cfg, Topology topology)
        : item_(item),
          backends_(backends),
          cfg_(cfg),
          topo_(std::move(topology)),
          counsellor_cfg_(cfg.counsellor()),
          counsellor_model_(cfg.model_for("counsellor")),
          memory_(topo_.counsellor(), cfg.memory),
          rec_(blank_record(item, Method::auto_cbt)) {
        allowed_ = counsellor_cfg_.allowed_strategies;
        if (allowed_.empty()) allowed_.insert(kAllStrategies.begin(), kAllStrategies.end());
        vocab_ = topo_.agent_ids();
    }

    ConsultationRecord run() {
        memory_.remember({next_seq_++, topo_.user(), {topo_.counsellor()}, MessageKind::question, item_.question});
        try {
            draft(complete(backends_.counsellor, request_for(counsellor_model_, "counsellor.draft",
                                                             build_autocbt_draft_prompt(item_, cfg_))));
            route_loop();
        } catch (const BackendError& e) {
            mark_failed(rec_, e);
            return std::move(rec_);
        }
        rec_.hop_count = rec_.routing_trace.size();
        rec_.events.push_back({"final", topo_.counsellor(), {topo_.user()}, "", rec_.final_response});
        return std::move(rec_);
    }

private:
    ChatResponse complete(ChatBackend& backend, const ChatRequest& req) {
        return complete_with_retry(backend, req, cfg_.retry);
    }

    const std::string& latest() const { return rec_.draft_responses.back(); }

    void draft(const ChatResponse& reply) {
        rec_.draft_responses.push_back(reply.content);
        rec_.events.push_back({"draft", topo_.counsellor(), {}, "", reply.content});
        memory_.remember({next_seq_++, topo_.counsellor(), {}, MessageKind::draft, reply.content});
    }

    std::string history(MemoryStore& memory, ChatBackend& backend, const ModelConfig& model) {
        if (memory.has_pending()) memory.summarize_overflow(backend, summarizer_for(cfg_, model, item_.language));
        return format_history(memory.recall_context(cfg_.context_budget));
    }

    std::string describe_targets() const {
        std::vector<std::string> lines;
        for (const auto& id : topo_.communicable_targets(topo_.counsellor())) {
            std::string line = "- " + id + " (" + role_kind_name(topo_.role_of(id)) + ")";
            if (topo_.is_supervisor(id)) {
                const auto& standard = cfg_.agent(id).standard.get(item_.language);
                if (!standard.empty()) line += ": " + standard;
            }
            lines.push_back(std::move(line));
        }
        return join(lines, "\n");
    }

    std::string describe_strategies() const {
        std::vector<std::string> names;
        for (auto s : kAllStrategies) {
            if (allowed_.count(s)) names.push_back(std::string("[") + strategy_name(s) + "]");
        }
        return join(names, ", ");
    }

    std::string routing_prompt(const std::string& feedback) {
        const auto lang = item_.language;
        return render_prompt(counsellor_cfg_.routing_prompt_template.get(lang),
                             {{"role_description", counsellor_cfg_.role_description.get(lang)},
                              {"question", item_.question},
                              {"draft", latest()},
                              {"history", history(memory_, backends_.counsellor, counsellor_model_)},
                              {"targets", describe_targets()},
                              {"strategies", describe_strategies()},
                              {"feedback", feedback},
                              {"counsellor", topo_.counsellor()},
                              {"user", topo_.user()}});
    }

    void trace(RoutingStrategy s, std::vector<std::string> targets, const std::string& raw, const char* outcome) {
        rec_.routing_trace.push_back({s, targets, raw, outcome});
        rec_.events.push_back({"route", topo_.counsellor(), std::move(targets), strategy_name(s), raw});
    }

    void finish(Termination why) {
        rec_.terminated_by = why;
        rec_.final_response = latest();
    }

    // Each iteration spends one routing call; validated, terminating and
    // fallback decisions enter the trace, so |trace| <= calls <= budget.
    void route_loop() {
        const std::size_t budget = topo_.routing_budget();
        std::size_t calls = 0;
        int failures = 0;
        std::string feedback;
        while (true) {
            if (calls == budget) return finish(Termination::budget_exhausted);
            ++calls;
            auto raw = complete(backends_.counsellor,
                                request_for(counsellor_model_, "counsellor.route", routing_prompt(feedback)))
                           .content;

            std::optional<ValidatedDecision> decision;
            try {
                auto parsed = parse_routing_decision(raw, vocab_);
                if (is_termination_signal(parsed, topo_)) {
                    trace(parsed.strategy, parsed.targets, raw, "termination");
                    return finish(Termination::simultaneous_target);
                }
                decision = validate_decision(parsed, topo_, topo_.counsellor(), allowed_);
            } catch (const BackendError&) {
                throw;
            } catch (const Error& e) {
                switch (e.code()) {
                    case Errc::Unparseable:
                    case Errc::StrategyNotAllowed:
                    case Errc::TargetNotCommunicable:
                    case Errc::CardinalityMismatch:
                        break;
                    default:
                        throw;
                }
                ++failures;
                rec_.events.push_back({"reprompt", topo_.counsellor(), {}, "", e.what()});
                if (failures > cfg_.max_reprompts) {
                    trace(RoutingStrategy::ENDCAST, {topo_.user()}, raw, "fallback");
                    return finish(Termination::fallback);
                }
                feedback = std::string(errc_name(e.code())) + ": " + e.what();
                continue;
            }
            failures = 0;
            feedback.clear();

            const auto& d = decision->decision();
            if (is_termination_signal(d, topo_)) {
                trace(d.strategy, d.targets, raw, "termination");
                return finish(Termination::simultaneous_target);
            }
            if (d.targets.size() == 1 && d.targets.front() == topo_.user()) {
                trace(d.strategy, d.targets, raw, "reply");
                return finish(Termination::direct_reply);
            }
            if (d.strategy == RoutingStrategy::LOOPBACK) {
                trace(d.strategy, d.targets, raw, "loopback");
                redraft();
                continue;
            }
            if (d.strategy == RoutingStrategy::ENDCAST) {
                topo_.consume_edge(topo_.counsellor(), d.targets.front());
                trace(d.strategy, d.targets, raw, "endcast");
                continue;
            }
            trace(d.strategy, d.targets, raw, "consult");
            for (const auto& sup : d.targets) {
                topo_.consume_edge(topo_.counsellor(), sup);
                auto& mem = supervisor_memory(sup);
                auto advice = supervisor_consult(latest(), item_, cfg_.agent(sup), backends_.supervisor, mem, cfg_,
                                                 next_seq_);
                rec_.advice.push_back({sup, advice.content});
                rec_.events.push_back({"advice", sup, {topo_.counsellor()}, "", advice.content});
                memory_.remember(advice);
            }
            redraft();
        }
    }

    void redraft() {
        const auto lang = item_.language;
        std::vector<std::string> advice;
        for (const auto& a : rec_.advice) advice.push_back(a.supervisor + ": " + a.text);
        auto prompt = render_prompt(counsellor_cfg_.message_prompt_template.get(lang),
                                    {{"role_description", counsellor_cfg_.role_description.get(lang)},
                                     {"question", item_.question},
                                     {"draft", latest()},
                                     {"advice", join(advice, "\n\n")},
                                     {"history", history(memory_, backends_.counsellor, counsellor_model_)},
                                     {"standards", numbered_standards(cfg_, lang)}});
        draft(complete(backends_.counsellor, request_for(counsellor_model_, "counsellor.draft", std::move(prompt))));
    }

    MemoryStore& supervisor_memory(const std::string& id) {
        auto it = supervisor_memories_.find(id);
        if (it == supervisor_memories_.end()) it = supervisor_memories_.emplace(id, MemoryStore(id, cfg_.memory)).first;
        return it->second;
    }

    const DatasetItem& item_;
    const Backends& backends_;
    const EngineConfig& cfg_;
    Topology topo_;
    const AgentConfig& counsellor_cfg_;
    ModelConfig counsellor_model_;
    MemoryStore memory_;
    std::map<std::string, MemoryStore> supervisor_memories_;
    std::set<RoutingStrategy> allowed_;
    std::vector<std::string> vocab_;
    std::uint64_t next_seq_ = 1;
    ConsultationRecord rec_;
};

}  // namespace

ConsultationRecord run_generation(const DatasetItem& item, ChatBackend& backend, const EngineConfig& cfg) {
    require_question(item);
    auto rec = blank_record(item, Method::generation);
    auto model = cfg.model_for("counsellor");
    ChatRequest req;
    req.model = model.model;
    req.temperature = model.temperature;
    req.max_tokens = model.max_tokens;
    req.purpose = "generation";
    req.turns.push_back({ChatRole::system, cfg.generation_system_prompt.get(item.language)});
    req.turns.push_back({ChatRole::user, item.question});
    try {
        rec.final_response = complete_with_retry(backend, req, cfg.retry).content;
        rec.events.push_back({"final", "counsellor", {"user"}, "", rec.final_response});
    } catch (const BackendError& e) {
        mark_failed(rec, e);
    }
    return rec;
}

std::string build_prompt_cbt_prompt(const DatasetItem& item, const EngineConfig& cfg) {
    const auto lang = item.language;
    return render_prompt(cfg.prompt_cbt_template.get(lang),
                         {{"role_description", cfg.counsellor().role_description.get(lang)},
                          {"standards", numbered_standards(cfg, lang)},
                          {"question", item.question}});
}

ConsultationRecord run_prompt_cbt(const DatasetItem& item, ChatBackend& backend, const EngineConfig& cfg) {
    require_question(item);
    auto rec = blank_record(item, Method::prompt_cbt);
    auto req = request_for(cfg.model_for("counsellor"), "prompt_cbt", build_prompt_cbt_prompt(item, cfg));
    try {
        rec.final_response = complete_with_retry(backend, req, cfg.retry).content;
        rec.events.push_back({"final", "counsellor", {"user"}, "", rec.final_response});
    } catch (const BackendError& e) {
        mark_failed(rec, e);
    }
    return rec;
}

std::string build_autocbt_draft_prompt(const DatasetItem& item, const EngineConfig& cfg) {
    return build_prompt_cbt_prompt(item, cfg);
}

ConsultationRecord run_autocbt(const DatasetItem& item, const Backends& backends, const EngineConfig& cfg,
                               Topology topology) {
    require_question(item);
    return Session(item, backends, cfg, std::move(topology)).run();
}

Message supervisor_consult(const std::string& draft, const DatasetItem& item, const AgentConfig& sup,
                           ChatBackend& backend, MemoryStore& memory, const EngineConfig& cfg,
                           std::uint64_t& next_seq) {
    if (sup.id.role != RoleKind::supervisor) {
        throw Error(Errc::InvalidConfig, "agent '" + sup.id.id + "' is not a supervisor");
    }
    const auto lang = item.language;
    const auto& counsellor = cfg.counsellor().id.id;
    const auto model = cfg.model_for("supervisor");

    memory.remember({next_seq++, counsellor, {sup.id.id}, MessageKind::draft, draft});
    if (memory.has_pending()) memory.summarize_overflow(backend, summarizer_for(cfg, model, lang));

    std::vector<std::string> criteria;
    for (const auto& c : sup.criteria) criteria.push_back(c.get(lang));
    auto prompt = render_prompt(sup.message_prompt_template.get(lang),
                                {{"role_description", sup.role_description.get(lang)},
                                 {"standard", sup.standard.get(lang)},
                                 {"criteria", join(criteria, "\n")},
                                 {"question", item.question},
                                 {"draft", draft},
                                 {"history", format_history(memory.recall_context(cfg.context_budget))},
                                 {"salutation", sup.salutation_prefix.get(lang)},
                                 {"counsellor", counsellor}});
    auto reply = complete_with_retry(backend, request_for(model, sup.id.id + ".advice", std::move(prompt)), cfg.retry);

    Message advice{next_seq++, sup.id.id, {counsellor}, MessageKind::advice, enforce_salutation(reply.content, sup, lang)};
    memory.remember(advice);
    return advice;
}

ConsultationRecord run_method(Method method, const DatasetItem& item, const Backends& backends,
                              const EngineConfig& cfg) {
    switch (method) {
        case Method::generation: return run_generation(item, backends.counsellor, cfg);
        case Method::prompt_cbt: return run_prompt_cbt(item, backends.counsellor, cfg);
        case Method::auto_cbt: return run_autocbt(item, backends, cfg, cfg.topology());
    }
    throw Error(Errc::InvalidConfig, "unknown method");
}

ConsultationRecord first_draft_record(const ConsultationRecord& autocbt_record) {
    ConsultationRecord rec;
    rec.item_id = autocbt_record.item_id;
    rec.language = autocbt_record.language;
    rec.method = autocbt_record.method;
    rec.stage = "draft";
    rec.question = autocbt_record.question;
    rec.error = autocbt_record.error;
    if (!autocbt_record.draft_responses.empty()) {
        rec.draft_responses = {autocbt_record.draft_responses.front()};
        rec.final_response = autocbt_record.draft_responses.front();
        rec.error.reset();
    }
    rec.terminated_by = Termination::direct_reply;
    return rec;
}

}  // namespace autocbt
