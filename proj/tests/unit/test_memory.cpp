#include "autocbt/error.hpp"
#include "autocbt/memory.hpp"

#include "doctest.h"

#include <random>

using namespace autocbt;

namespace {

Message msg(std::uint64_t seq, MessageKind kind = MessageKind::draft) {
    return {seq, "c", {}, kind, "m" + std::to_string(seq)};
}

Script summaries(int n) {
    Script s;
    for (int i = 0; i < n; ++i) s.emplace_back("c.summary", ScriptReply{"SUMMARY:" + std::to_string(i), {}, "stop"});
    return s;
}

}  // namespace

TEST_CASE("remember within capacity") {
    MemoryStore m("c");
    m.remember(msg(1));
    CHECK(m.short_term().size() == 1);
    CHECK(m.long_term().empty());
}

TEST_CASE("eleventh message evicts a window") {
    MemoryStore m("c", {10, 5});
    for (std::uint64_t s = 1; s <= 10; ++s) m.remember(msg(s));
    CHECK(m.short_term().size() == 10);
    m.remember(msg(11));
    CHECK(m.pending().size() == 5);
    CHECK(m.short_term().size() == 6);
    CHECK(m.pending().front().seq == 1);
    CHECK(m.short_term().front().seq == 6);
}

TEST_CASE("out of order messages are rejected") {
    MemoryStore m("c");
    m.remember(msg(5));
    try {
        m.remember(msg(5));
        FAIL("accepted");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::OutOfOrderMessage);
    }
    CHECK_THROWS_AS(m.remember(msg(3)), Error);
}

TEST_CASE("summarize_overflow turns a pending window into one summary") {
    MemoryStore m("c", {5, 5});
    for (std::uint64_t s = 1; s <= 6; ++s) m.remember(msg(s));
    REQUIRE(m.pending().size() == 5);
    ScriptedBackend backend(summaries(1));
    m.summarize_overflow(backend);
    CHECK(m.pending().empty());
    REQUIRE(m.long_term().size() == 1);
    CHECK(m.long_term().back().summary.content == "SUMMARY:0");
    CHECK(m.long_term().back().summary.kind == MessageKind::summary);
    CHECK(m.long_term().back().covered == std::vector<std::uint64_t>{1, 2, 3, 4, 5});
    CHECK(backend.request_log().front().purpose == "c.summary");
}

TEST_CASE("summarize_overflow is atomic on failure") {
    MemoryStore m("c", {5, 5});
    for (std::uint64_t s = 1; s <= 6; ++s) m.remember(msg(s));
    ScriptedBackend backend({{"c.summary", ScriptReply{"", Errc::Auth, "stop"}}});
    CHECK_THROWS_AS(m.summarize_overflow(backend), BackendError);
    CHECK(m.pending().size() == 5);
    CHECK(m.long_term().empty());
}

TEST_CASE("recall_context ordering and truncation") {
    MemoryStore empty("c");
    CHECK(empty.recall_context(5).empty());

    MemoryStore m("c", {5, 5});
    for (std::uint64_t s = 1; s <= 10; ++s) m.remember(msg(s, MessageKind::system));
    m.remember(msg(11, MessageKind::question));
    m.remember(msg(12));
    m.remember(msg(13));
    ScriptedBackend backend(summaries(2));
    m.summarize_overflow(backend);
    REQUIRE(m.long_term().size() == 2);
    REQUIRE(m.short_term().size() == 3);

    auto all = m.recall_context(10);
    REQUIRE(all.size() == 5);
    CHECK(all[0].content == "SUMMARY:0");
    CHECK(all[1].content == "SUMMARY:1");
    CHECK(all[2].seq == 11);
    CHECK(all[4].seq == 13);

    auto cut = m.recall_context(3);
    REQUIRE(cut.size() == 3);
    CHECK(cut[0].kind == MessageKind::question);
    CHECK(cut[1].seq == 12);
    CHECK(cut[2].seq == 13);
}

TEST_CASE("recall_context pins the question against truncation") {
    MemoryStore m("c", {10, 5});
    m.remember(msg(1, MessageKind::question));
    for (std::uint64_t s = 2; s <= 8; ++s) m.remember(msg(s));
    auto ctx = m.recall_context(3);
    REQUIRE(ctx.size() == 3);
    CHECK(ctx[0].seq == 1);
    CHECK(ctx[1].seq == 7);
    CHECK(ctx[2].seq == 8);
}

TEST_CASE("memory params are checked") {
    CHECK_THROWS_AS(check_memory_params({4, 5}), Error);
    CHECK_THROWS_AS(check_memory_params({4, 0}), Error);
    CHECK_NOTHROW(check_memory_params({5, 5}));
}

TEST_CASE("property: bounded short-term and gap-free reconstruction") {
    std::mt19937 rng(1234);
    for (int trial = 0; trial < 300; ++trial) {
        std::size_t w = 1 + rng() % 5;
        std::size_t k = w + rng() % 6;
        MemoryStore m("c", {k, w});
        Script many;
        for (int i = 0; i < 200; ++i) many.emplace_back("c.summary", ScriptReply{"S", {}, "stop"});
        ScriptedBackend summarizer(many);
        std::uint64_t seq = 0;
        std::size_t total = 5 + rng() % 60;
        for (std::size_t i = 0; i < total; ++i) {
            seq += 1 + rng() % 3;
            m.remember(msg(seq));
            REQUIRE(m.short_term().size() <= k);
            if (rng() % 2) m.summarize_overflow(summarizer);
        }
        m.summarize_overflow(summarizer);

        std::vector<std::uint64_t> seen;
        for (const auto& e : m.long_term()) {
            REQUIRE(e.covered.size() == w);
            seen.insert(seen.end(), e.covered.begin(), e.covered.end());
        }
        for (const auto& p : m.pending()) seen.push_back(p.seq);
        for (const auto& s : m.short_term()) seen.push_back(s.seq);
        REQUIRE(seen.size() == total);
        for (std::size_t i = 1; i < seen.size(); ++i) REQUIRE(seen[i] > seen[i - 1]);
    }
}

TEST_CASE("format_history renders one line per message") {
    std::vector<Message> msgs{{1, "user", {"c"}, MessageKind::question, "hi"},
                              {2, "s1", {"c"}, MessageKind::advice, "Hello counsellor, ok"}};
    auto text = format_history(msgs);
    CHECK(text == "[question] user -> c: hi\n[advice] s1 -> c: Hello counsellor, ok");
}
