#include "autocbt/dataset.hpp"
#include "autocbt/error.hpp"

#include "support.hpp"

#include "doctest.h"

#include <map>
#include <set>

using namespace autocbt;

namespace {

Errc parse_error(std::string_view jsonl) {
    try {
        parse_items(jsonl);
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("parsed");
    return Errc::Io;
}

DistortionTaxonomy taxonomy(std::size_t classes) {
    DistortionTaxonomy t;
    for (std::size_t c = 0; c < classes; ++c) {
        t.categories.push_back({"c" + std::to_string(c), "Class " + std::to_string(c), "desc"});
    }
    return t;
}

std::vector<DatasetItem> pool(std::size_t classes, std::size_t per_class) {
    std::vector<DatasetItem> items;
    for (std::size_t c = 0; c < classes; ++c) {
        for (std::size_t i = 0; i < per_class; ++i) {
            auto item = test::make_item("c" + std::to_string(c) + "-" + std::to_string(i), "q");
            item.distortion_label = "c" + std::to_string(c);
            items.push_back(item);
        }
    }
    return items;
}

std::vector<std::string> ids(const std::vector<DatasetItem>& items) {
    std::vector<std::string> out;
    for (const auto& i : items) out.push_back(i.id);
    return out;
}

}  // namespace

TEST_CASE("fixture dataset loads") {
    auto items = load_items(test::source_path("fixtures/dataset.jsonl"));
    REQUIRE(items.size() == 6);
    CHECK(items[0].id == "en-001");
    CHECK(items[0].language == Language::EN);
    CHECK(items[3].language == Language::ZH);
    for (const auto& i : items) CHECK(i.distortion_label.has_value());
}

TEST_CASE("parse errors carry codes and line numbers") {
    CHECK(parse_error("{\"id\":\"a\",\"language\":\"EN\"}") == Errc::MissingField);
    CHECK(parse_error("{\"id\":\"a\",\"language\":\"EN\",\"question\":\"  \"}") == Errc::MissingField);
    CHECK(parse_error("not json") == Errc::ParseError);
    CHECK(parse_error("{\"id\":\"a\",\"language\":\"FR\",\"question\":\"q\"}") == Errc::ParseError);
    CHECK(parse_error("{\"id\":\"a\",\"language\":\"EN\",\"question\":\"q\"}\n"
                      "{\"id\":\"a\",\"language\":\"EN\",\"question\":\"r\"}") == Errc::DuplicateId);
    try {
        parse_items("{\"id\":\"a\",\"language\":\"EN\",\"question\":\"q\"}\n\n{oops");
        FAIL("parsed");
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find("line 3") != std::string::npos);
    }
    CHECK_THROWS_AS(load_items("/nonexistent/items.jsonl"), Error);
}

TEST_CASE("items round-trip through JSONL") {
    auto items = load_items(test::source_path("fixtures/dataset.jsonl"));
    items[1].reference_answer = "a reference";
    CHECK(parse_items(serialize_items(items)) == items);
    CHECK(parse_items("").empty());
}

TEST_CASE("shipped taxonomy has ten distinct classes") {
    auto t = load_taxonomy(test::source_path("config/taxonomy.yaml"));
    CHECK(t.size() == 10);
    CHECK(t.find("catastrophizing") != nullptr);
    CHECK_THROWS_AS(parse_taxonomy("- {id: a, name: A}\n- {id: a, name: B}\n"), Error);
    CHECK_THROWS_AS(parse_taxonomy("just text"), Error);
}

TEST_CASE("balanced sampling: counts, determinism, seed sensitivity") {
    auto t = taxonomy(10);
    auto items = pool(10, 30);
    auto a = sample_balanced(items, t, 10, 42);
    REQUIRE(a.size() == 100);
    std::map<std::string, int> per;
    for (const auto& i : a) ++per[*i.distortion_label];
    CHECK(per.size() == 10);
    for (const auto& [label, n] : per) CHECK(n == 10);
    auto drawn = ids(a);
    CHECK(std::set<std::string>(drawn.begin(), drawn.end()).size() == 100);
    CHECK(ids(sample_balanced(items, t, 10, 42)) == ids(a));
    CHECK(ids(sample_balanced(items, t, 10, 43)) != ids(a));
}

TEST_CASE("balanced sampling groups output in taxonomy order") {
    auto a = sample_balanced(pool(2, 5), taxonomy(2), 3, 7);
    auto b = sample_balanced(pool(2, 5), taxonomy(2), 3, 7);
    CHECK(ids(a) == ids(b));
    REQUIRE(a.size() == 6);
    CHECK(*a[0].distortion_label == "c0");
    CHECK(*a[5].distortion_label == "c1");
}

TEST_CASE("balanced sampling errors") {
    auto t = taxonomy(2);
    auto items = pool(2, 3);
    try {
        sample_balanced(items, t, 4, 1);
        FAIL("sampled");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::InsufficientClass);
    }
    auto unlabeled = items;
    unlabeled[0].distortion_label.reset();
    CHECK_THROWS_AS(sample_balanced(unlabeled, t, 1, 1), Error);
    auto unknown = items;
    unknown[0].distortion_label = "zzz";
    try {
        sample_balanced(unknown, t, 1, 1);
        FAIL("sampled");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::UnknownLabel);
    }
}

TEST_CASE("category matching") {
    auto t = load_taxonomy(test::source_path("config/taxonomy.yaml"));
    const auto& cat = *t.find("catastrophizing");
    CHECK(match_category(cat.name, t) == "catastrophizing");
    CHECK(match_category("catastrophizing.", t) == "catastrophizing");
    CHECK(match_category("The post shows " + cat.name + " clearly", t) == "catastrophizing");
    CHECK_FALSE(match_category("no idea", t));
}

TEST_CASE("classification retries an unmatched answer") {
    auto t = taxonomy(3);
    auto item = test::make_item("x", "I always fail.");
    ScriptedBackend b(test::script({{"classifier", "hmm"}, {"classifier", "Class 2"}}));
    CHECK(classify_distortion(item, b, t, {"m", 0.0, 2, {1, std::chrono::milliseconds{0}}}) == "c2");
    CHECK(b.calls() == 2);
    CHECK(b.request_log()[0].turns[0].content.find("Class 1: desc") != std::string::npos);

    ScriptedBackend never(test::script({{"classifier", "?"}, {"classifier", "?"}}));
    try {
        classify_distortion(item, never, t, {"m", 0.0, 1, {1, std::chrono::milliseconds{0}}});
        FAIL("classified");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::UnclassifiableResponse);
    }
}
