#pragma once

#include "autocbt/agent.hpp"
#include "autocbt/llm_backend.hpp"

#include <cstddef>
#include <cstdint>
#include <deque>
#include <optional>
#include <string>
#include <vector>

namespace autocbt {

struct MemoryParams {
    std::size_t capacity = 10;  // K: short-term bound
    std::size_t window = 5;     // W: messages per long-term summary
};

// Throws Error{InvalidConfig} unless capacity >= window >= 1.
void check_memory_params(const MemoryParams& params);

struct SummaryEntry {
    Message summary;
    std::vector<std::uint64_t> covered;  // seqs of the W messages it replaces
};

struct SummarizerOptions {
    // Placeholders: {owner}, {messages}.
    std::string prompt_template =
        "Summarize the following conversation excerpt from the point of view of {owner}. "
        "Keep every concrete fact, concern and piece of advice; drop pleasantries.\n\n{messages}";
    std::string model;
    double temperature = 0.0;
    RetryPolicy retry{1, std::chrono::milliseconds{0}};
};

// Per-agent memory: a bounded short-term buffer of recent messages plus
// long-term summaries, each standing in for exactly W evicted messages.
//
// When a message would push the short-term buffer past K, its oldest W
// messages move to a pending queue; summarize_overflow() turns every full
// pending window into one summary.
class MemoryStore {
public:
    explicit MemoryStore(std::string owner, MemoryParams params = {});

    const std::string& owner() const { return owner_; }
    const MemoryParams& params() const { return params_; }

    // Throws Error{OutOfOrderMessage} unless msg.seq exceeds every seq seen.
    void remember(Message msg);

    // Atomic: on a backend failure the store is unchanged and the error
    // propagates. The request purpose is "<owner>.summary".
    void summarize_overflow(ChatBackend& backend, const SummarizerOptions& options = {});

    // Summaries (oldest first), then pending and short-term messages (oldest
    // first), front-truncated to `budget` entries. A question message in that
    // list always survives truncation.
    std::vector<Message> recall_context(std::size_t budget) const;

    const std::deque<Message>& short_term() const { return short_term_; }
    const std::deque<Message>& pending() const { return pending_; }
    const std::vector<SummaryEntry>& long_term() const { return long_term_; }
    bool has_pending() const { return !pending_.empty(); }

private:
    std::string owner_;
    MemoryParams params_;
    std::deque<Message> short_term_;
    std::deque<Message> pending_;
    std::vector<SummaryEntry> long_term_;
    std::optional<std::uint64_t> last_seq_;
};

// One "[kind] sender -> receivers: content" line per message.
std::string format_history(const std::vector<Message>& messages);

}  // namespace autocbt
