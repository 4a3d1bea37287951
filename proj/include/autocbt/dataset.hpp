#pragma once

#include "autocbt/agent.hpp"
#include "autocbt/llm_backend.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace autocbt {

struct DatasetItem {
    std::string id;
    Language language = Language::EN;
    std::string question;  // question and description merged
    std::optional<std::string> reference_answer;
    std::optional<std::string> distortion_label;

    friend bool operator==(const DatasetItem&, const DatasetItem&) = default;
};

struct DistortionCategory {
    std::string id;
    std::string name;
    std::string description;
};

struct DistortionTaxonomy {
    std::vector<DistortionCategory> categories;

    std::size_t size() const { return categories.size(); }
    const DistortionCategory* find(std::string_view id) const;
};

// JSONL, one item per line: id, language, question, reference_answer?,
// distortion_label?. Blank lines are skipped. Errors carry 1-based line
// numbers. Throws Error{ParseError, MissingField, DuplicateId, Io}.
std::vector<DatasetItem> load_items(const std::filesystem::path& path);
std::vector<DatasetItem> parse_items(std::string_view jsonl);
std::string serialize_item(const DatasetItem& item);
std::string serialize_items(const std::vector<DatasetItem>& items);

// YAML or JSON list of {id, name, description}. Ids must be unique.
DistortionTaxonomy load_taxonomy(const std::filesystem::path& path);
DistortionTaxonomy parse_taxonomy(std::string_view text);

// Draws exactly `per_class` items per taxonomy class without replacement.
// Output is grouped in taxonomy order; within a class, in draw order. The
// generator is a 64-bit Mersenne twister with a hand-rolled unbiased bounded
// draw, so a seed reproduces the same split on every platform.
// Throws Error{UnlabeledItem, UnknownLabel, InsufficientClass}.
std::vector<DatasetItem> sample_balanced(const std::vector<DatasetItem>& items, const DistortionTaxonomy& taxonomy,
                                         std::size_t per_class, std::uint64_t seed);

struct ClassifierOptions {
    std::string model;
    double temperature = 0.0;
    int max_retries = 2;
    RetryPolicy retry;
};

std::string build_classification_prompt(const DatasetItem& item, const DistortionTaxonomy& taxonomy);

// Maps a free-text answer onto a category id: exact id or name first, then a
// single category whose name (or id) occurs in the text. nullopt when nothing
// or more than one category matches.
std::optional<std::string> match_category(std::string_view answer, const DistortionTaxonomy& taxonomy);

// Asks the backend (purpose "classifier") for one category; an unmatched
// answer is retried up to max_retries times.
// Throws Error{UnclassifiableResponse} and backend errors.
std::string classify_distortion(const DatasetItem& item, ChatBackend& backend, const DistortionTaxonomy& taxonomy,
                                const ClassifierOptions& options = {});

}  // namespace autocbt
