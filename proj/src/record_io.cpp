#include "autocbt/record_io.hpp"

#include "autocbt/error.hpp"

#include "json.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace autocbt {

using nlohmann::ordered_json;

namespace {

template <typename T>
T field(const ordered_json& j, const char* key, std::size_t line) {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) {
        throw Error(Errc::MissingField, "line " + std::to_string(line) + ": missing field '" + key + "'");
    }
    try {
        return it->get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::ParseError, "line " + std::to_string(line) + ": field '" + key + "': " + e.what());
    }
}

ConsultationRecord from_json(const ordered_json& j, std::size_t line) {
    ConsultationRecord rec;
    rec.item_id = field<std::string>(j, "item_id", line);
    rec.language = parse_language(field<std::string>(j, "language", line));
    rec.method = parse_method(field<std::string>(j, "method", line));
    rec.stage = j.value("stage", std::string("final"));
    rec.question = field<std::string>(j, "question", line);
    rec.draft_responses = j.value("draft_responses", std::vector<std::string>{});
    for (const auto& a : j.value("advice", ordered_json::array())) {
        rec.advice.push_back({a.at("supervisor").get<std::string>(), a.at("text").get<std::string>()});
    }
    for (const auto& s : j.value("routing_trace", ordered_json::array())) {
        RouteStep step;
        auto name = s.at("strategy").get<std::string>();
        auto strategy = strategy_from_name(name);
        if (!strategy) throw Error(Errc::ParseError, "line " + std::to_string(line) + ": unknown strategy " + name);
        step.strategy = *strategy;
        step.targets = s.value("targets", std::vector<std::string>{});
        step.raw = s.value("raw", std::string{});
        step.outcome = s.value("outcome", std::string{});
        rec.routing_trace.push_back(std::move(step));
    }
    rec.final_response = j.value("final_response", std::string{});
    rec.hop_count = j.value("hop_count", std::size_t{0});
    rec.terminated_by = parse_termination(j.value("terminated_by", std::string("direct_reply")));
    if (auto it = j.find("error"); it != j.end() && !it->is_null()) {
        RecordError err;
        err.error_class = it->value("class", std::string{});
        err.cause = it->value("cause", std::string{});
        err.message = it->value("message", std::string{});
        rec.error = std::move(err);
    }
    for (const auto& e : j.value("events", ordered_json::array())) {
        SessionEvent ev;
        ev.kind = e.value("kind", std::string{});
        ev.agent = e.value("agent", std::string{});
        ev.targets = e.value("targets", std::vector<std::string>{});
        ev.strategy = e.value("strategy", std::string{});
        ev.content = e.value("content", std::string{});
        rec.events.push_back(std::move(ev));
    }
    return rec;
}

std::string one_line(std::string_view text, std::size_t max = 120) {
    std::string out;
    for (char c : text) out += (c == '\n' || c == '\r') ? ' ' : c;
    if (out.size() > max) {
        // Do not cut a UTF-8 sequence in half.
        std::size_t cut = max;
        while (cut > 0 && (static_cast<unsigned char>(out[cut]) & 0xC0) == 0x80) --cut;
        out = out.substr(0, cut) + "...";
    }
    return out;
}

}  // namespace

std::string record_to_json(const ConsultationRecord& rec) {
    ordered_json j;
    j["item_id"] = rec.item_id;
    j["language"] = language_name(rec.language);
    j["method"] = method_name(rec.method);
    j["stage"] = rec.stage;
    j["question"] = rec.question;
    j["draft_responses"] = rec.draft_responses;
    j["advice"] = ordered_json::array();
    for (const auto& a : rec.advice) j["advice"].push_back({{"supervisor", a.supervisor}, {"text", a.text}});
    j["routing_trace"] = ordered_json::array();
    for (const auto& s : rec.routing_trace) {
        j["routing_trace"].push_back(
            {{"strategy", strategy_name(s.strategy)}, {"targets", s.targets}, {"raw", s.raw}, {"outcome", s.outcome}});
    }
    j["final_response"] = rec.final_response;
    j["hop_count"] = rec.hop_count;
    j["terminated_by"] = termination_name(rec.terminated_by);
    if (rec.error) {
        j["error"] = {{"class", rec.error->error_class}, {"cause", rec.error->cause}, {"message", rec.error->message}};
    } else {
        j["error"] = nullptr;
    }
    j["events"] = ordered_json::array();
    for (const auto& e : rec.events) {
        ordered_json ev{{"kind", e.kind}, {"agent", e.agent}};
        if (!e.targets.empty()) ev["targets"] = e.targets;
        if (!e.strategy.empty()) ev["strategy"] = e.strategy;
        ev["content"] = e.content;
        j["events"].push_back(std::move(ev));
    }
    return j.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
}

ConsultationRecord record_from_json(std::string_view line) {
    ordered_json j;
    try {
        j = ordered_json::parse(line);
    } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::ParseError, std::string("record: ") + e.what());
    }
    return from_json(j, 1);
}

std::string serialize_records(const std::vector<ConsultationRecord>& records) {
    std::string out;
    for (const auto& r : records) out += record_to_json(r) + "\n";
    return out;
}

std::vector<ConsultationRecord> parse_records(std::string_view jsonl) {
    std::vector<ConsultationRecord> out;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= jsonl.size()) {
        auto end = jsonl.find('\n', pos);
        if (end == std::string_view::npos) end = jsonl.size();
        auto line = jsonl.substr(pos, end - pos);
        ++line_no;
        pos = end + 1;
        if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
        ordered_json j;
        try {
            j = ordered_json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw Error(Errc::ParseError, "line " + std::to_string(line_no) + ": " + e.what());
        }
        try {
            out.push_back(from_json(j, line_no));
        } catch (const nlohmann::json::exception& e) {
            throw Error(Errc::ParseError, "line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return out;
}

std::vector<ConsultationRecord> load_records(const std::filesystem::path& path) {
    return parse_records(read_text(path));
}

void write_records(const std::filesystem::path& path, const std::vector<ConsultationRecord>& records) {
    write_text(path, serialize_records(records));
}

std::string format_trace(const ConsultationRecord& rec) {
    std::ostringstream os;
    os << "item " << rec.item_id << " (" << language_name(rec.language) << ", " << rec.method_label() << ")\n";
    std::size_t step = 0;
    for (const auto& e : rec.events) {
        char head[32];
        std::snprintf(head, sizeof head, "%2zu. %-9s ", ++step, e.kind.c_str());
        os << head << e.agent;
        if (e.kind == "route") {
            os << " [" << e.strategy << "]";
            for (std::size_t i = 0; i < e.targets.size(); ++i) os << (i ? ", " : " -> ") << e.targets[i];
        } else {
            if (!e.targets.empty()) {
                for (std::size_t i = 0; i < e.targets.size(); ++i) os << (i ? ", " : " -> ") << e.targets[i];
            }
            os << ": " << one_line(e.content);
        }
        os << "\n";
    }
    if (!rec.routing_trace.empty()) {
        os << "strategies:";
        for (std::size_t i = 0; i < rec.routing_trace.size(); ++i) {
            os << (i ? " -> " : " ") << strategy_name(rec.routing_trace[i].strategy);
        }
        os << "\n";
    }
    if (rec.error) {
        os << "failed: " << rec.error->error_class;
        if (!rec.error->cause.empty()) os << " (" << rec.error->cause << ")";
        os << "\n";
    } else {
        os << "terminated_by: " << termination_name(rec.terminated_by) << ", hop_count: " << rec.hop_count << "\n";
    }
    return os.str();
}

void write_text(const std::filesystem::path& path, std::string_view text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(Errc::Io, "cannot write " + path.string());
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    out.flush();
    if (!out) throw Error(Errc::Io, "write failed for " + path.string());
}

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(Errc::Io, "cannot read " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace autocbt
