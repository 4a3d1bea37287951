#pragma once

#include "autocbt/error.hpp"

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace autocbt {

enum class ChatRole { system, user, assistant };

const char* chat_role_name(ChatRole role);

struct ChatTurn {
    ChatRole role = ChatRole::user;
    std::string content;

    friend bool operator==(const ChatTurn&, const ChatTurn&) = default;
};

struct ChatRequest {
    std::string model;
    std::vector<ChatTurn> turns;
    double temperature = 0.98;
    std::optional<int> max_tokens;
    // Who is asking and for what, e.g. "counsellor.route". Never sent over the
    // wire; the scripted backend keys its replies on it.
    std::string purpose;

    friend bool operator==(const ChatRequest&, const ChatRequest&) = default;
};

struct TokenUsage {
    int prompt_tokens = 0;
    int completion_tokens = 0;
    int total_tokens = 0;
};

struct ChatResponse {
    std::string content;
    std::string finish_reason = "stop";
    std::optional<TokenUsage> usage;
};

// Throws BackendError{Malformed} for an empty turn list, an assistant first
// turn or a temperature outside [0, 2].
void check_request(const ChatRequest& req);

class ChatBackend {
public:
    virtual ~ChatBackend() = default;
    // Throws BackendError with one of the backend Errc classes.
    virtual ChatResponse complete(const ChatRequest& req) = 0;
};

struct RetryPolicy {
    int max_attempts = 3;
    std::chrono::milliseconds backoff_base{500};
    std::function<bool(Errc)> retryable = [](Errc c) { return c == Errc::Transport || c == Errc::RateLimited; };
};

// Retries retryable failures with backoff_base * 2^(attempt-1) between tries.
// A non-retryable failure is rethrown as is; running out of attempts throws
// BackendError{RetriesExhausted} whose cause is the last error class.
ChatResponse complete_with_retry(ChatBackend& backend, const ChatRequest& req, const RetryPolicy& policy);

// ---------------------------------------------------------------------------
// Scripted backend

struct ScriptReply {
    std::string content;
    std::optional<Errc> error;  // inject a failure instead of replying
    std::string finish_reason = "stop";
};

// Ordered (key, reply) pairs. Replies sharing a key are served in order.
using Script = std::vector<std::pair<std::string, ScriptReply>>;

// Replays canned replies keyed by ChatRequest::purpose, recording every
// request. Lookup tries the exact purpose, then "*.<suffix>" (text after the
// last '.'), then "<prefix>" (text before the first '.'), then "*".
// Thread-safe; the request log is a total order.
class ScriptedBackend : public ChatBackend {
public:
    explicit ScriptedBackend(Script script);

    ChatResponse complete(const ChatRequest& req) override;

    std::vector<ChatRequest> request_log() const;
    std::size_t calls() const;
    void reset();

private:
    std::map<std::string, std::vector<ScriptReply>> replies_;
    std::map<std::string, std::size_t> cursor_;
    std::vector<ChatRequest> log_;
    mutable std::mutex mu_;
};

// JSON script: {"key": ["reply", {"error": "RateLimited"}, ...], ...}.
Script parse_script(std::string_view json_text);

// A mock-script file for the CLI: either a plain script, or
// {"default": <script>, "items": {"<item id>": <script>, ...}} so each item of
// a batch replays its own script regardless of scheduling.
struct MockScriptSet {
    Script fallback;
    std::map<std::string, Script> per_item;

    const Script& for_item(const std::string& item_id) const;
};

MockScriptSet load_mock_scripts(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// OpenAI-compatible HTTP backend

struct HttpBackendOptions {
    std::string base_url;  // e.g. https://api.openai.com/v1
    std::string api_key;   // sent as a bearer token when non-empty
    std::chrono::seconds timeout{120};
};

class HttpChatBackend : public ChatBackend {
public:
    explicit HttpChatBackend(HttpBackendOptions options);

    // POST <base_url>/chat/completions, one call per request.
    ChatResponse complete(const ChatRequest& req) override;

    const HttpBackendOptions& options() const { return options_; }

private:
    HttpBackendOptions options_;
    std::string origin_;  // scheme://host[:port]
    std::string path_;    // path prefix + /chat/completions
};

// Wire helpers, exposed for tests.
std::string build_request_body(const ChatRequest& req);
// Throws BackendError{Malformed}.
ChatResponse parse_response_body(std::string_view body);
// Maps an HTTP status to its error class; nullopt for 2xx.
std::optional<Errc> classify_http_status(int status);

}  // namespace autocbt
