#include "autocbt/llm_backend.hpp"

#include "json.hpp"

#include <fstream>
#include <sstream>

namespace autocbt {

using json = nlohmann::json;

namespace {

Errc backend_errc_from_name(const std::string& name) {
    for (auto c : {Errc::Transport, Errc::Auth, Errc::RateLimited, Errc::Malformed, Errc::ScriptExhausted}) {
        if (errc_name(c) == name) return c;
    }
    throw Error(Errc::ParseError, "unknown scripted error class '" + name + "'");
}

Script script_from_json(const json& j) {
    if (!j.is_object()) throw Error(Errc::ParseError, "mock script must be a JSON object");
    Script script;
    for (const auto& [key, value] : j.items()) {
        auto add = [&](const json& reply) {
            ScriptReply r;
            if (reply.is_string()) {
                r.content = reply.get<std::string>();
            } else if (reply.is_object()) {
                if (reply.contains("error")) r.error = backend_errc_from_name(reply.at("error").get<std::string>());
                r.content = reply.value("content", "");
                r.finish_reason = reply.value("finish_reason", "stop");
            } else {
                throw Error(Errc::ParseError, "mock reply for '" + key + "' must be a string or object");
            }
            script.emplace_back(key, std::move(r));
        };
        if (value.is_array()) {
            for (const auto& reply : value) add(reply);
        } else {
            add(value);
        }
    }
    return script;
}

}  // namespace

ScriptedBackend::ScriptedBackend(Script script) {
    for (auto& [key, reply] : script) replies_[key].push_back(std::move(reply));
}

ChatResponse ScriptedBackend::complete(const ChatRequest& req) {
    std::lock_guard lock(mu_);
    check_request(req);
    log_.push_back(req);

    std::vector<std::string> candidates{req.purpose};
    if (auto dot = req.purpose.rfind('.'); dot != std::string::npos) {
        candidates.push_back("*" + req.purpose.substr(dot));
    }
    if (auto dot = req.purpose.find('.'); dot != std::string::npos) {
        candidates.push_back(req.purpose.substr(0, dot));
    }
    candidates.emplace_back("*");

    for (const auto& key : candidates) {
        auto it = replies_.find(key);
        if (it == replies_.end()) continue;
        auto& idx = cursor_[key];
        if (idx >= it->second.size()) {
            throw BackendError(Errc::ScriptExhausted, "script exhausted for key '" + key + "' (purpose '" +
                                                          req.purpose + "')");
        }
        const auto& reply = it->second[idx++];
        if (reply.error) {
            throw BackendError(*reply.error, "scripted " + std::string(errc_name(*reply.error)) + " for '" +
                                                 req.purpose + "'");
        }
        return ChatResponse{reply.content, reply.finish_reason, std::nullopt};
    }
    throw BackendError(Errc::ScriptExhausted, "no scripted reply for purpose '" + req.purpose + "'");
}

std::vector<ChatRequest> ScriptedBackend::request_log() const {
    std::lock_guard lock(mu_);
    return log_;
}

std::size_t ScriptedBackend::calls() const {
    std::lock_guard lock(mu_);
    return log_.size();
}

void ScriptedBackend::reset() {
    std::lock_guard lock(mu_);
    cursor_.clear();
    log_.clear();
}

Script parse_script(std::string_view json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        throw Error(Errc::ParseError, std::string("mock script: ") + e.what());
    }
    return script_from_json(j);
}

const Script& MockScriptSet::for_item(const std::string& item_id) const {
    auto it = per_item.find(item_id);
    return it == per_item.end() ? fallback : it->second;
}

MockScriptSet load_mock_scripts(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(Errc::Io, "cannot read mock script " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    json j;
    try {
        j = json::parse(ss.str());
    } catch (const json::exception& e) {
        throw Error(Errc::ParseError, path.string() + ": " + e.what());
    }
    MockScriptSet set;
    if (j.is_object() && (j.contains("items") || j.contains("default"))) {
        if (j.contains("default")) set.fallback = script_from_json(j.at("default"));
        if (j.contains("items")) {
            for (const auto& [id, script] : j.at("items").items()) set.per_item[id] = script_from_json(script);
        }
    } else {
        set.fallback = script_from_json(j);
    }
    return set;
}

}  // namespace autocbt
