#include "autocbt/llm_backend.hpp"

#include <algorithm>
#include <thread>

namespace autocbt {

const char* chat_role_name(ChatRole role) {
    switch (role) {
        case ChatRole::system: return "system";
        case ChatRole::user: return "user";
        case ChatRole::assistant: return "assistant";
    }
    return "user";
}

void check_request(const ChatRequest& req) {
    if (req.turns.empty()) throw BackendError(Errc::Malformed, "chat request has no turns");
    if (req.turns.front().role == ChatRole::assistant) {
        throw BackendError(Errc::Malformed, "first chat turn must be system or user");
    }
    if (!(req.temperature >= 0.0 && req.temperature <= 2.0)) {
        throw BackendError(Errc::Malformed, "temperature must lie in [0, 2]");
    }
    if (req.max_tokens && *req.max_tokens <= 0) {
        throw BackendError(Errc::Malformed, "max_tokens must be positive");
    }
}

ChatResponse complete_with_retry(ChatBackend& backend, const ChatRequest& req, const RetryPolicy& policy) {
    if (policy.max_attempts < 1) throw Error(Errc::InvalidConfig, "retry max_attempts must be >= 1");
    check_request(req);

    for (int attempt = 1;; ++attempt) {
        try {
            return backend.complete(req);
        } catch (const BackendError& e) {
            bool retryable = policy.retryable && policy.retryable(e.code());
            if (!retryable) throw;
            if (attempt >= policy.max_attempts) {
                throw BackendError(Errc::RetriesExhausted,
                                   "gave up after " + std::to_string(attempt) + " attempts: " + e.what(), e.code());
            }
            auto delay = policy.backoff_base * (1LL << std::min(attempt - 1, 20));
            if (delay.count() > 0) std::this_thread::sleep_for(delay);
        }
    }
}

}  // namespace autocbt
