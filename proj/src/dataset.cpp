#include "autocbt/dataset.hpp"

#include "autocbt/error.hpp"
#include "autocbt/prompt.hpp"
#include "json.hpp"
#include "strings.hpp"

#include <yaml-cpp/yaml.h>

#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>

namespace autocbt {

using json = nlohmann::json;

namespace {

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(Errc::Io, "cannot read " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string at_line(std::size_t line) { return "line " + std::to_string(line) + ": "; }

std::optional<std::string> optional_string(const json& j, const char* key, std::size_t line) {
    if (!j.contains(key) || j[key].is_null()) return std::nullopt;
    if (!j[key].is_string()) throw Error(Errc::ParseError, at_line(line) + "field '" + key + "' must be a string");
    return j[key].get<std::string>();
}

std::uint64_t bounded(std::mt19937_64& rng, std::uint64_t n) {
    const std::uint64_t max = std::mt19937_64::max();
    const std::uint64_t limit = max - (max % n + 1) % n;
    std::uint64_t x;
    do {
        x = rng();
    } while (x > limit);
    return x % n;
}

}  // namespace

const DistortionCategory* DistortionTaxonomy::find(std::string_view id) const {
    for (const auto& c : categories) {
        if (c.id == id) return &c;
    }
    return nullptr;
}

std::vector<DatasetItem> parse_items(std::string_view jsonl) {
    std::vector<DatasetItem> items;
    std::map<std::string, std::size_t> seen;
    std::size_t line_no = 0;
    std::size_t start = 0;
    while (start <= jsonl.size()) {
        auto end = jsonl.find('\n', start);
        if (end == std::string_view::npos) end = jsonl.size();
        auto line = jsonl.substr(start, end - start);
        ++line_no;
        start = end + 1;
        if (detail::trim(line).empty()) {
            if (end == jsonl.size()) break;
            continue;
        }

        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            throw Error(Errc::ParseError, at_line(line_no) + e.what());
        }
        if (!j.is_object()) throw Error(Errc::ParseError, at_line(line_no) + "expected a JSON object");

        auto required = [&](const char* key) {
            auto value = optional_string(j, key, line_no);
            if (!value || detail::trim(*value).empty()) {
                throw Error(Errc::MissingField, at_line(line_no) + "missing field '" + key + "'");
            }
            return *value;
        };

        DatasetItem item;
        item.id = required("id");
        try {
            item.language = parse_language(required("language"));
        } catch (const Error& e) {
            if (e.code() == Errc::MissingField) throw;
            throw Error(Errc::ParseError, at_line(line_no) + e.what());
        }
        item.question = required("question");
        item.reference_answer = optional_string(j, "reference_answer", line_no);
        item.distortion_label = optional_string(j, "distortion_label", line_no);

        if (auto [it, fresh] = seen.emplace(item.id, line_no); !fresh) {
            throw Error(Errc::DuplicateId, "duplicate id '" + item.id + "' on lines " + std::to_string(it->second) +
                                               " and " + std::to_string(line_no));
        }
        items.push_back(std::move(item));
        if (end == jsonl.size()) break;
    }
    return items;
}

std::vector<DatasetItem> load_items(const std::filesystem::path& path) {
    try {
        return parse_items(read_file(path));
    } catch (const Error& e) {
        if (e.code() == Errc::Io) throw;
        throw Error(e.code(), path.string() + ": " + e.what());
    }
}

std::string serialize_item(const DatasetItem& item) {
    json j = {{"id", item.id}, {"language", language_name(item.language)}, {"question", item.question}};
    if (item.reference_answer) j["reference_answer"] = *item.reference_answer;
    if (item.distortion_label) j["distortion_label"] = *item.distortion_label;
    return j.dump();
}

std::string serialize_items(const std::vector<DatasetItem>& items) {
    std::string out;
    for (const auto& item : items) {
        out += serialize_item(item);
        out += '\n';
    }
    return out;
}

DistortionTaxonomy parse_taxonomy(std::string_view text) {
    YAML::Node root;
    try {
        root = YAML::Load(std::string(text));
    } catch (const YAML::Exception& e) {
        throw Error(Errc::ParseError, std::string("taxonomy: ") + e.what());
    }
    if (root.IsMap() && root["categories"]) root = root["categories"];
    if (!root.IsSequence()) throw Error(Errc::ParseError, "taxonomy must be a list of categories");

    DistortionTaxonomy tax;
    std::set<std::string> ids;
    for (const auto& node : root) {
        DistortionCategory c;
        if (!node["id"] || !node["name"]) throw Error(Errc::MissingField, "taxonomy entry needs id and name");
        c.id = node["id"].as<std::string>();
        c.name = node["name"].as<std::string>();
        c.description = node["description"] ? node["description"].as<std::string>() : "";
        if (!ids.insert(c.id).second) throw Error(Errc::DuplicateId, "duplicate taxonomy id '" + c.id + "'");
        tax.categories.push_back(std::move(c));
    }
    return tax;
}

DistortionTaxonomy load_taxonomy(const std::filesystem::path& path) { return parse_taxonomy(read_file(path)); }

std::vector<DatasetItem> sample_balanced(const std::vector<DatasetItem>& items, const DistortionTaxonomy& taxonomy,
                                         std::size_t per_class, std::uint64_t seed) {
    std::map<std::string, std::vector<const DatasetItem*>> by_class;
    for (const auto& c : taxonomy.categories) by_class[c.id];
    for (const auto& item : items) {
        if (!item.distortion_label) throw Error(Errc::UnlabeledItem, "item '" + item.id + "' has no distortion label");
        auto it = by_class.find(*item.distortion_label);
        if (it == by_class.end()) {
            throw Error(Errc::UnknownLabel,
                        "item '" + item.id + "' has label '" + *item.distortion_label + "' outside the taxonomy");
        }
        it->second.push_back(&item);
    }

    std::mt19937_64 rng(seed);
    std::vector<DatasetItem> out;
    out.reserve(per_class * taxonomy.size());
    for (const auto& c : taxonomy.categories) {
        auto pool = by_class[c.id];
        if (pool.size() < per_class) {
            throw Error(Errc::InsufficientClass, "class '" + c.id + "' has " + std::to_string(pool.size()) +
                                                     " items, " + std::to_string(per_class) + " needed");
        }
        for (std::size_t i = 0; i < per_class; ++i) {
            auto j = i + static_cast<std::size_t>(bounded(rng, pool.size() - i));
            std::swap(pool[i], pool[j]);
            out.push_back(*pool[i]);
        }
    }
    return out;
}

std::string build_classification_prompt(const DatasetItem& item, const DistortionTaxonomy& taxonomy) {
    std::string categories;
    for (const auto& c : taxonomy.categories) {
        categories += "- " + c.name + ": " + c.description + "\n";
    }
    return render_prompt(
        "Read the help-seeking post below and decide which cognitive distortion it shows most clearly.\n\n"
        "Categories:\n{categories}\n"
        "Post:\n{question}\n\n"
        "Answer with exactly one category name from the list and nothing else.",
        {{"categories", categories}, {"question", item.question}});
}

std::optional<std::string> match_category(std::string_view answer, const DistortionTaxonomy& taxonomy) {
    auto cleaned = detail::to_lower(detail::trim(answer));
    while (!cleaned.empty() && (cleaned.back() == '.' || cleaned.back() == '!')) cleaned.pop_back();
    for (const auto& c : taxonomy.categories) {
        if (cleaned == detail::to_lower(c.name) || cleaned == detail::to_lower(c.id)) return c.id;
    }
    std::optional<std::string> found;
    for (const auto& c : taxonomy.categories) {
        if (detail::icontains(answer, c.name) || detail::icontains(answer, c.id)) {
            if (found) return std::nullopt;
            found = c.id;
        }
    }
    return found;
}

std::string classify_distortion(const DatasetItem& item, ChatBackend& backend, const DistortionTaxonomy& taxonomy,
                                const ClassifierOptions& options) {
    if (taxonomy.categories.empty()) throw Error(Errc::InvalidConfig, "empty distortion taxonomy");
    ChatRequest req;
    req.model = options.model;
    req.temperature = options.temperature;
    req.purpose = "classifier";
    req.turns.push_back({ChatRole::user, build_classification_prompt(item, taxonomy)});

    std::string last;
    for (int attempt = 0; attempt <= options.max_retries; ++attempt) {
        last = complete_with_retry(backend, req, options.retry).content;
        if (auto id = match_category(last, taxonomy)) return *id;
    }
    throw Error(Errc::UnclassifiableResponse,
                "item '" + item.id + "': no category in answer '" + last.substr(0, 120) + "'");
}

}  // namespace autocbt
