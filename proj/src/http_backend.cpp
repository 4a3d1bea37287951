#include "autocbt/llm_backend.hpp"

#include "httplib.h"
#include "json.hpp"

namespace autocbt {

using json = nlohmann::json;

std::string build_request_body(const ChatRequest& req) {
    json messages = json::array();
    for (const auto& turn : req.turns) {
        messages.push_back({{"role", chat_role_name(turn.role)}, {"content", turn.content}});
    }
    json body = {{"model", req.model}, {"messages", std::move(messages)}, {"temperature", req.temperature}};
    if (req.max_tokens) body["max_tokens"] = *req.max_tokens;
    return body.dump();
}

ChatResponse parse_response_body(std::string_view body) {
    json j;
    try {
        j = json::parse(body);
    } catch (const json::exception& e) {
        throw BackendError(Errc::Malformed, std::string("response is not JSON: ") + e.what());
    }
    try {
        const auto& choice = j.at("choices").at(0);
        const auto& content = choice.at("message").at("content");
        if (!content.is_string()) throw BackendError(Errc::Malformed, "choices[0].message.content is not a string");
        ChatResponse r;
        r.content = content.get<std::string>();
        if (choice.contains("finish_reason") && choice["finish_reason"].is_string()) {
            r.finish_reason = choice["finish_reason"].get<std::string>();
        }
        if (j.contains("usage") && j["usage"].is_object()) {
            const auto& u = j["usage"];
            r.usage = TokenUsage{u.value("prompt_tokens", 0), u.value("completion_tokens", 0),
                                 u.value("total_tokens", 0)};
        }
        return r;
    } catch (const json::exception& e) {
        throw BackendError(Errc::Malformed, std::string("unexpected response shape: ") + e.what());
    }
}

std::optional<Errc> classify_http_status(int status) {
    if (status >= 200 && status < 300) return std::nullopt;
    if (status == 401 || status == 403) return Errc::Auth;
    if (status == 429) return Errc::RateLimited;
    if (status >= 500) return Errc::Transport;
    // Remaining 1xx/3xx/4xx: the endpoint rejected what we sent.
    return Errc::Malformed;
}

HttpChatBackend::HttpChatBackend(HttpBackendOptions options) : options_(std::move(options)) {
    const auto& url = options_.base_url;
    auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) {
        throw Error(Errc::InvalidConfig, "base_url must start with http:// or https://: '" + url + "'");
    }
    auto scheme = url.substr(0, scheme_end);
    if (scheme != "http" && scheme != "https") {
        throw Error(Errc::InvalidConfig, "unsupported scheme in base_url '" + url + "'");
    }
#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
    if (scheme == "https") throw Error(Errc::InvalidConfig, "built without TLS support; cannot use " + url);
#endif
    auto path_begin = url.find('/', scheme_end + 3);
    origin_ = url.substr(0, path_begin);
    std::string prefix = path_begin == std::string::npos ? "" : url.substr(path_begin);
    while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
    path_ = prefix + "/chat/completions";
}

ChatResponse HttpChatBackend::complete(const ChatRequest& req) {
    check_request(req);

    httplib::Client client(origin_);
    client.set_connection_timeout(options_.timeout);
    client.set_read_timeout(options_.timeout);
    client.set_write_timeout(options_.timeout);

    httplib::Headers headers;
    if (!options_.api_key.empty()) headers.emplace("Authorization", "Bearer " + options_.api_key);

    auto res = client.Post(path_, headers, build_request_body(req), "application/json");
    if (!res) {
        throw BackendError(Errc::Transport, "HTTP request to " + origin_ + path_ + " failed: " +
                                                httplib::to_string(res.error()));
    }
    if (auto err = classify_http_status(res->status)) {
        throw BackendError(*err, "HTTP " + std::to_string(res->status) + " from " + origin_ + path_ + ": " +
                                     res->body.substr(0, 200));
    }
    return parse_response_body(res->body);
}

}  // namespace autocbt
