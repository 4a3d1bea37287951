#include "autocbt/memory.hpp"

#include "autocbt/error.hpp"
#include "autocbt/prompt.hpp"

#include <algorithm>

namespace autocbt {

void check_memory_params(const MemoryParams& params) {
    if (params.window < 1 || params.capacity < params.window) {
        throw Error(Errc::InvalidConfig, "memory parameters need capacity >= window >= 1 (got K=" +
                                             std::to_string(params.capacity) +
                                             ", W=" + std::to_string(params.window) + ")");
    }
}

MemoryStore::MemoryStore(std::string owner, MemoryParams params) : owner_(std::move(owner)), params_(params) {
    check_memory_params(params_);
}

void MemoryStore::remember(Message msg) {
    if (last_seq_ && msg.seq <= *last_seq_) {
        throw Error(Errc::OutOfOrderMessage, "message seq " + std::to_string(msg.seq) +
                                                 " is not after " + std::to_string(*last_seq_));
    }
    last_seq_ = msg.seq;
    short_term_.push_back(std::move(msg));
    if (short_term_.size() > params_.capacity) {
        for (std::size_t i = 0; i < params_.window; ++i) {
            pending_.push_back(std::move(short_term_.front()));
            short_term_.pop_front();
        }
    }
}

void MemoryStore::summarize_overflow(ChatBackend& backend, const SummarizerOptions& options) {
    std::vector<SummaryEntry> fresh;
    std::size_t windows = pending_.size() / params_.window;
    for (std::size_t w = 0; w < windows; ++w) {
        std::vector<Message> window(pending_.begin() + static_cast<std::ptrdiff_t>(w * params_.window),
                                    pending_.begin() + static_cast<std::ptrdiff_t>((w + 1) * params_.window));
        ChatRequest req;
        req.model = options.model;
        req.temperature = options.temperature;
        req.purpose = owner_ + ".summary";
        req.turns.push_back({ChatRole::user, render_prompt(options.prompt_template,
                                                           {{"owner", owner_}, {"messages", format_history(window)}})});
        auto reply = complete_with_retry(backend, req, options.retry);

        SummaryEntry entry;
        entry.summary.seq = window.back().seq;
        entry.summary.sender = owner_;
        entry.summary.receivers = {owner_};
        entry.summary.kind = MessageKind::summary;
        entry.summary.content = reply.content;
        for (const auto& m : window) entry.covered.push_back(m.seq);
        fresh.push_back(std::move(entry));
    }
    // Commit only after every window succeeded.
    for (auto& entry : fresh) long_term_.push_back(std::move(entry));
    pending_.erase(pending_.begin(), pending_.begin() + static_cast<std::ptrdiff_t>(windows * params_.window));
}

std::vector<Message> MemoryStore::recall_context(std::size_t budget) const {
    std::vector<Message> all;
    for (const auto& entry : long_term_) all.push_back(entry.summary);
    all.insert(all.end(), pending_.begin(), pending_.end());
    all.insert(all.end(), short_term_.begin(), short_term_.end());
    budget = std::max<std::size_t>(budget, 1);
    if (all.size() <= budget) return all;

    auto question = std::find_if(all.begin(), all.end(),
                                 [](const Message& m) { return m.kind == MessageKind::question; });
    auto keep_from = all.end() - static_cast<std::ptrdiff_t>(budget);
    if (question == all.end() || question >= keep_from) {
        return {keep_from, all.end()};
    }
    std::vector<Message> out{*question};
    out.insert(out.end(), all.end() - static_cast<std::ptrdiff_t>(budget - 1), all.end());
    return out;
}

std::string format_history(const std::vector<Message>& messages) {
    std::string out;
    for (const auto& m : messages) {
        if (!out.empty()) out += "\n";
        out += "[";
        out += message_kind_name(m.kind);
        out += "] ";
        out += m.sender;
        if (!m.receivers.empty()) {
            out += " -> ";
            for (std::size_t i = 0; i < m.receivers.size(); ++i) {
                if (i) out += ", ";
                out += m.receivers[i];
            }
        }
        out += ": ";
        out += m.content;
    }
    return out;
}

}  // namespace autocbt
