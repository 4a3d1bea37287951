#include "autocbt/cli.hpp"

#include "autocbt/config.hpp"
#include "autocbt/dataset.hpp"
#include "autocbt/error.hpp"
#include "autocbt/evaluation.hpp"
#include "autocbt/orchestrator.hpp"
#include "autocbt/parallel.hpp"
#include "autocbt/record_io.hpp"
#include "autocbt/report.hpp"
#include "strings.hpp"

#include "CLI11.hpp"

#include <algorithm>
#include <map>
#include <memory>
#include <optional>

namespace autocbt::cli {

namespace {

int exit_code_for(const Error& e) {
    if (is_backend_error(e.code()) || e.code() == Errc::JudgeUnparseable) return kBackendError;
    return kConfigError;
}

// Supplies one backend per item: a private scripted backend per item when a
// mock script is given, else one shared HTTP backend per model role.
class BackendPool {
public:
    BackendPool(const std::string& mock_script, const EngineConfig* cfg, std::vector<std::string> roles) {
        if (!mock_script.empty()) {
            scripts_ = load_mock_scripts(mock_script);
            return;
        }
        if (!cfg) throw Error(Errc::InvalidConfig, "no model endpoint: pass --mock-script or a config with models");
        for (const auto& role : roles) {
            auto model = cfg->model_for(role);
            if (model.base_url.empty()) {
                throw Error(Errc::InvalidConfig, "models." + role +
                                                     ".base_url is not set; configure an endpoint or pass --mock-script");
            }
            http_[role] = std::make_unique<HttpChatBackend>(http_options(model));
        }
    }

    // Creates the scripted backends up front so lookups are read-only.
    void prepare(const std::vector<std::string>& item_ids) {
        if (!scripts_) return;
        for (const auto& id : item_ids) {
            if (!scripted_.count(id)) scripted_[id] = std::make_unique<ScriptedBackend>(scripts_->for_item(id));
        }
    }

    ChatBackend& get(const std::string& item_id, const std::string& role) {
        if (scripts_) return *scripted_.at(item_id);
        return *http_.at(role);
    }

private:
    std::optional<MockScriptSet> scripts_;
    std::map<std::string, std::unique_ptr<ScriptedBackend>> scripted_;
    std::map<std::string, std::unique_ptr<HttpChatBackend>> http_;
};

std::filesystem::path drafts_path_for(const std::filesystem::path& out) {
    auto p = out;
    auto ext = p.extension().string();
    p.replace_extension();
    return p.string() + ".drafts" + (ext.empty() ? std::string(".jsonl") : ext);
}

void sort_by_id(std::vector<ConsultationRecord>& records) {
    std::stable_sort(records.begin(), records.end(),
                     [](const ConsultationRecord& a, const ConsultationRecord& b) { return a.item_id < b.item_id; });
}

std::string trim_copy(std::string_view s) { return std::string(detail::trim(s)); }

JudgeOptions judge_options(const EngineConfig* cfg) {
    JudgeOptions opts;
    if (cfg) {
        auto model = cfg->model_for("judge");
        opts.model = model.model;
        opts.temperature = model.temperature;
        opts.retry = cfg->retry;
    }
    return opts;
}

RefusalOptions refusal_options(const EngineConfig* cfg) {
    RefusalOptions opts;
    if (cfg) {
        opts.phrases = cfg->all_refusal_phrases();
        auto model = cfg->model_for("judge");
        opts.judge_model = model.model;
        opts.retry = cfg->retry;
    } else {
        for (auto lang : {Language::EN, Language::ZH}) {
            auto p = default_refusal_phrases(lang);
            opts.phrases.insert(opts.phrases.end(), p.begin(), p.end());
        }
    }
    return opts;
}

std::string language_label(Language lang) { return language_name(lang); }

// ---------------------------------------------------------------------------

struct ConsultArgs {
    std::string question;
    std::string question_file;
    std::string language = "EN";
    std::string method = "autocbt";
    std::string config;
    std::string mock_script;
    std::string out;
    std::string id = "cli";
    bool trace = false;
};

int cmd_consult(const ConsultArgs& a, std::ostream& out, std::ostream& err) {
    DatasetItem item;
    item.id = a.id;
    item.language = parse_language(a.language);
    item.question = a.question;
    if (!a.question_file.empty()) item.question = trim_copy(read_text(a.question_file));
    if (detail::trim(item.question).empty()) {
        err << "error: empty question\n";
        return kConfigError;
    }
    auto cfg = load_engine_config(a.config);
    auto method = parse_method(a.method);

    BackendPool pool(a.mock_script, &cfg, {"counsellor", "supervisor"});
    pool.prepare({item.id});
    Backends backends{pool.get(item.id, "counsellor"), pool.get(item.id, "supervisor")};
    auto rec = run_method(method, item, backends, cfg);

    if (a.trace) out << format_trace(rec);
    if (!a.out.empty()) write_records(a.out, {rec});
    if (rec.failed()) {
        err << "error: " << rec.error->error_class;
        if (!rec.error->cause.empty()) err << " (" << rec.error->cause << ")";
        err << ": " << rec.error->message << "\n";
        return kBackendError;
    }
    out << rec.final_response << "\n";
    return kOk;
}

struct BatchArgs {
    std::string dataset;
    std::string method = "autocbt";
    std::string config;
    std::string out;
    std::string drafts_out;
    std::string mock_script;
    std::size_t parallel = 1;
};

int cmd_batch(const BatchArgs& a, std::ostream& out, std::ostream& err) {
    auto cfg = load_engine_config(a.config);
    auto method = parse_method(a.method);
    auto items = load_items(a.dataset);

    BackendPool pool(a.mock_script, &cfg, {"counsellor", "supervisor"});
    std::vector<std::string> ids;
    for (const auto& item : items) ids.push_back(item.id);
    pool.prepare(ids);

    std::vector<std::optional<ConsultationRecord>> done(items.size());
    auto flush = [&] {
        std::vector<ConsultationRecord> records;
        for (auto& r : done) {
            if (r) records.push_back(*r);
        }
        sort_by_id(records);
        write_records(a.out, records);
        if (method == Method::auto_cbt) {
            std::vector<ConsultationRecord> drafts;
            for (const auto& r : records) drafts.push_back(first_draft_record(r));
            write_records(a.drafts_out.empty() ? drafts_path_for(a.out) : std::filesystem::path(a.drafts_out),
                          drafts);
        }
        return records;
    };

    try {
        parallel_for(items.size(), a.parallel, [&](std::size_t i) {
            const auto& item = items[i];
            Backends backends{pool.get(item.id, "counsellor"), pool.get(item.id, "supervisor")};
            done[i] = run_method(method, item, backends, cfg);
        });
    } catch (...) {
        flush();
        throw;
    }
    auto records = flush();
    std::size_t failed = std::count_if(records.begin(), records.end(), [](const auto& r) { return r.failed(); });
    out << "wrote " << records.size() << " records to " << a.out;
    if (failed) out << " (" << failed << " failed)";
    out << "\n";
    if (failed) {
        err << "error: " << failed << " item(s) failed; see the error field of their records\n";
        return kBackendError;
    }
    return kOk;
}

struct EvaluateArgs {
    std::string records;
    std::string judge_config;
    std::string metrics;
    std::string out;
    std::string mock_script;
    std::string title;
    std::size_t parallel = 1;
    bool refusal_judge = false;
};

int cmd_evaluate(const EvaluateArgs& a, std::ostream& out, std::ostream&) {
    auto records = load_records(a.records);
    std::optional<EngineConfig> cfg;
    if (!a.judge_config.empty()) cfg = load_engine_config(a.judge_config);
    std::string metric_spec = !a.metrics.empty() ? a.metrics : (cfg ? cfg->metrics : "default");
    auto metrics = resolve_metric_set(metric_spec);

    BackendPool pool(a.mock_script, cfg ? &*cfg : nullptr, {"judge"});
    std::vector<std::string> ids;
    for (const auto& r : records) ids.push_back(r.item_id);
    pool.prepare(ids);

    EvaluateOptions opts;
    opts.judge = judge_options(cfg ? &*cfg : nullptr);
    opts.refusal = refusal_options(cfg ? &*cfg : nullptr);
    opts.refusal_judge = a.refusal_judge;
    opts.parallel = a.parallel;
    auto report = evaluate_records(
        records, metrics, [&](const std::string& id) -> ChatBackend& { return pool.get(id, "judge"); }, opts);

    if (!a.out.empty()) write_text(a.out, serialize_report(report));

    std::vector<TableRow> rows;
    for (auto lang : report.languages()) {
        try {
            rows.push_back({language_label(lang), report.aggregate(lang)});
        } catch (const Error& e) {
            if (e.code() != Errc::EmptyAfterExclusion) throw;
        }
    }
    if (rows.empty()) throw Error(Errc::EmptyAfterExclusion, "every record was refused or failed");
    out << render_method_table(a.title, report.metrics, rows);
    auto refused = report.refused();
    auto failed = report.failed();
    if (!refused.empty() || !failed.empty()) {
        out << "\nexcluded: " << refused.size() << " refused, " << failed.size() << " failed\n";
    }
    return kOk;
}

struct CompareArgs {
    std::vector<std::string> reports;
    std::vector<std::string> labels;
    std::string out;
    std::string title;
};

int cmd_compare(const CompareArgs& a, std::ostream& out, std::ostream& err) {
    if (a.reports.size() < 2 || a.reports.size() % 2 != 0) {
        err << "error: compare takes report pairs: A B [C D ...]\n";
        return kConfigError;
    }
    std::vector<std::pair<std::string, DiffReport>> columns;
    std::vector<std::string> metrics;
    for (std::size_t i = 0; i < a.reports.size(); i += 2) {
        auto ra = load_report(a.reports[i]);
        auto rb = load_report(a.reports[i + 1]);
        // Both sides are averaged over the same items.
        auto excluded = ra.excluded();
        auto eb = rb.excluded();
        excluded.insert(eb.begin(), eb.end());
        for (const auto& [id, item] : ra.items) {
            if (!rb.items.count(id)) excluded.insert(id);
        }
        for (const auto& [id, item] : rb.items) {
            if (!ra.items.count(id)) excluded.insert(id);
        }
        auto diff = diff_report(ra.aggregate(std::nullopt, excluded), rb.aggregate(std::nullopt, excluded));
        std::size_t column = i / 2;
        std::string label = column < a.labels.size() ? a.labels[column] : ra.method + " - " + rb.method;
        columns.emplace_back(label, diff);
        if (metrics.empty()) metrics = ra.metrics;
    }
    auto table = render_diff_table(a.title, metrics, columns);
    if (!a.out.empty()) write_text(a.out, table);
    out << table;
    return kOk;
}

struct RefusalArgs {
    std::vector<std::string> records;
    std::string config;
    std::string mock_script;
    std::string out;
    bool judge = false;
};

int cmd_refusals(const RefusalArgs& a, std::ostream& out, std::ostream&) {
    std::optional<EngineConfig> cfg;
    if (!a.config.empty()) cfg = load_engine_config(a.config);
    auto opts = refusal_options(cfg ? &*cfg : nullptr);

    std::vector<std::vector<ConsultationRecord>> sets;
    std::vector<std::string> all_ids;
    for (const auto& path : a.records) {
        sets.push_back(load_records(path));
        for (const auto& r : sets.back()) all_ids.push_back(r.item_id);
    }
    std::optional<BackendPool> pool;
    if (a.judge) {
        pool.emplace(a.mock_script, cfg ? &*cfg : nullptr, std::vector<std::string>{"judge"});
        pool->prepare(all_ids);
    }

    // refused[language][method] = ids
    std::map<Language, std::vector<std::pair<std::string, std::set<std::string>>>> by_lang;
    std::vector<std::pair<std::string, std::set<std::string>>> overall;
    for (const auto& records : sets) {
        std::string method = records.empty() ? "empty" : records.front().method_label();
        std::map<Language, std::set<std::string>> refused;
        std::set<std::string> all;
        for (const auto& r : records) {
            if (r.failed()) continue;
            ChatBackend* judge = pool ? &pool->get(r.item_id, "judge") : nullptr;
            if (refusal_detect(r.final_response, opts, judge)) {
                refused[r.language].insert(r.item_id);
                all.insert(r.item_id);
            }
        }
        for (auto lang : {Language::EN, Language::ZH}) by_lang[lang].emplace_back(method, refused[lang]);
        overall.emplace_back(method, all);
    }

    std::vector<RefusalRow> rows;
    for (const auto& [lang, groups] : by_lang) {
        bool any = false;
        for (const auto& records : sets) {
            for (const auto& r : records) any = any || r.language == lang;
        }
        if (any) rows.push_back({language_label(lang), refusal_stats(groups)});
    }
    if (rows.size() != 1) rows.push_back({"All", refusal_stats(overall)});
    auto table = render_refusal_table(rows);
    if (!a.out.empty()) write_text(a.out, table);
    out << table;
    return kOk;
}

int cmd_validate(const std::string& config, std::ostream& out) {
    auto cfg = load_engine_config(config);
    auto topo = cfg.topology();
    out << "ok: " << cfg.agents.size() << " agents, " << topo.supervisor_count() << " supervisors, "
        << cfg.edges.size() << " edges, routing budget " << topo.routing_budget() << "\n";
    return kOk;
}

struct SampleArgs {
    std::string dataset;
    std::string taxonomy;
    std::string config;
    std::string out;
    std::size_t per_class = 10;
    std::uint64_t seed = 0;
};

std::filesystem::path taxonomy_path(const std::string& explicit_path, const std::string& config) {
    if (!explicit_path.empty()) return explicit_path;
    if (!config.empty()) {
        auto cfg = load_engine_config(config);
        if (!cfg.taxonomy_path.empty()) return cfg.taxonomy_path;
    }
    throw Error(Errc::InvalidConfig, "no taxonomy: pass --taxonomy or a config with a taxonomy entry");
}

int cmd_sample(const SampleArgs& a, std::ostream& out) {
    auto items = load_items(a.dataset);
    auto taxonomy = load_taxonomy(taxonomy_path(a.taxonomy, a.config));
    auto picked = sample_balanced(items, taxonomy, a.per_class, a.seed);
    if (a.out.empty()) {
        out << serialize_items(picked);
    } else {
        write_text(a.out, serialize_items(picked));
        out << "wrote " << picked.size() << " items to " << a.out << "\n";
    }
    return kOk;
}

struct ClassifyArgs {
    std::string dataset;
    std::string taxonomy;
    std::string config;
    std::string mock_script;
    std::string out;
};

int cmd_classify(const ClassifyArgs& a, std::ostream& out) {
    auto items = load_items(a.dataset);
    std::optional<EngineConfig> cfg;
    if (!a.config.empty()) cfg = load_engine_config(a.config);
    auto taxonomy = load_taxonomy(taxonomy_path(a.taxonomy, a.config));

    BackendPool pool(a.mock_script, cfg ? &*cfg : nullptr, {"classifier"});
    std::vector<std::string> ids;
    for (const auto& item : items) ids.push_back(item.id);
    pool.prepare(ids);

    ClassifierOptions opts;
    if (cfg) {
        auto model = cfg->model_for("classifier");
        opts.model = model.model;
        opts.temperature = model.temperature;
        opts.retry = cfg->retry;
    }
    for (auto& item : items) item.distortion_label = classify_distortion(item, pool.get(item.id, "classifier"), taxonomy, opts);
    if (a.out.empty()) {
        out << serialize_items(items);
    } else {
        write_text(a.out, serialize_items(items));
        out << "labelled " << items.size() << " items into " << a.out << "\n";
    }
    return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Multi-agent CBT counselling engine"};
    app.name("autocbt");
    app.require_subcommand(1);

    ConsultArgs consult;
    auto* c = app.add_subcommand("consult", "Answer one question");
    c->add_option("question", consult.question, "Question text");
    c->add_option("--question-file", consult.question_file, "Read the question from a file");
    c->add_option("--language", consult.language, "EN or ZH")->capture_default_str();
    c->add_option("--method", consult.method, "generation | promptcbt | autocbt")->capture_default_str();
    c->add_option("--config", consult.config, "Engine config (YAML)")->required();
    c->add_option("--mock-script", consult.mock_script, "Replay canned replies instead of calling a model");
    c->add_option("--out", consult.out, "Write the record (JSONL) here");
    c->add_option("--id", consult.id, "Item id for the record")->capture_default_str();
    c->add_flag("--trace", consult.trace, "Print the session step by step");

    BatchArgs batch;
    auto* b = app.add_subcommand("batch", "Run one method over a dataset");
    b->add_option("dataset", batch.dataset, "Dataset (JSONL)")->required();
    b->add_option("--method", batch.method, "generation | promptcbt | autocbt")->capture_default_str();
    b->add_option("--config", batch.config, "Engine config (YAML)")->required();
    b->add_option("--out", batch.out, "Records file (JSONL)")->required();
    b->add_option("--drafts-out", batch.drafts_out, "First-draft records file (autocbt only)");
    b->add_option("--mock-script", batch.mock_script, "Replay canned replies instead of calling a model");
    b->add_option("--parallel", batch.parallel, "Sessions in flight")->capture_default_str()->check(CLI::PositiveNumber);

    EvaluateArgs eval;
    auto* e = app.add_subcommand("evaluate", "Score records with the judge");
    e->add_option("records", eval.records, "Records file (JSONL)")->required();
    e->add_option("--judge-config", eval.judge_config, "Config holding models.judge");
    e->add_option("--metrics", eval.metrics, "default | appendix_a | metric set YAML");
    e->add_option("--out", eval.out, "Report file (JSONL)");
    e->add_option("--mock-script", eval.mock_script, "Replay canned judge replies");
    e->add_option("--title", eval.title, "Table title");
    e->add_option("--parallel", eval.parallel, "Items scored concurrently")->capture_default_str()->check(CLI::PositiveNumber);
    e->add_flag("--refusal-judge", eval.refusal_judge, "Ask the judge when no refusal phrase matches");

    CompareArgs compare;
    auto* cmp = app.add_subcommand("compare", "Per-metric differences between report pairs");
    cmp->add_option("reports", compare.reports, "Report files: A B [C D ...]; each pair is A minus B")->required();
    cmp->add_option("--label", compare.labels, "Column label, one per pair");
    cmp->add_option("--out", compare.out, "Write the table here");
    cmp->add_option("--title", compare.title, "Table title");

    RefusalArgs refusals;
    auto* r = app.add_subcommand("refusals", "Count refused questions per method");
    r->add_option("records", refusals.records, "Records files, one per method")->required();
    r->add_option("--config", refusals.config, "Config holding refusal phrases and models.judge");
    r->add_option("--mock-script", refusals.mock_script, "Replay canned judge replies");
    r->add_option("--out", refusals.out, "Write the table here");
    r->add_flag("--judge", refusals.judge, "Ask the judge when no refusal phrase matches");

    std::string validate_config;
    auto* v = app.add_subcommand("validate-config", "Load and check a config");
    v->add_option("--config", validate_config, "Engine config (YAML)")->required();

    SampleArgs sample;
    auto* s = app.add_subcommand("sample", "Draw a class-balanced subset");
    s->add_option("dataset", sample.dataset, "Labelled dataset (JSONL)")->required();
    s->add_option("--taxonomy", sample.taxonomy, "Taxonomy file");
    s->add_option("--config", sample.config, "Config naming the taxonomy");
    s->add_option("--per-class", sample.per_class, "Items per class")->capture_default_str();
    s->add_option("--seed", sample.seed, "Random seed")->capture_default_str();
    s->add_option("--out", sample.out, "Output file (JSONL)");

    ClassifyArgs classify;
    auto* cl = app.add_subcommand("classify", "Label each item with a cognitive distortion");
    cl->add_option("dataset", classify.dataset, "Dataset (JSONL)")->required();
    cl->add_option("--taxonomy", classify.taxonomy, "Taxonomy file");
    cl->add_option("--config", classify.config, "Config naming the taxonomy and models.classifier");
    cl->add_option("--mock-script", classify.mock_script, "Replay canned classifier replies");
    cl->add_option("--out", classify.out, "Output file (JSONL)");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& pe) {
        int code = app.exit(pe, out, err);
        return code == 0 ? kOk : kConfigError;
    }

    try {
        if (c->parsed()) return cmd_consult(consult, out, err);
        if (b->parsed()) return cmd_batch(batch, out, err);
        if (e->parsed()) return cmd_evaluate(eval, out, err);
        if (cmp->parsed()) return cmd_compare(compare, out, err);
        if (r->parsed()) return cmd_refusals(refusals, out, err);
        if (v->parsed()) return cmd_validate(validate_config, out);
        if (s->parsed()) return cmd_sample(sample, out);
        if (cl->parsed()) return cmd_classify(classify, out);
    } catch (const Error& ex) {
        err << "error: " << errc_name(ex.code()) << ": " << ex.what() << "\n";
        return exit_code_for(ex);
    } catch (const std::exception& ex) {
        err << "error: " << ex.what() << "\n";
        return kConfigError;
    }
    return kConfigError;
}

int run(int argc, char** argv, std::ostream& out, std::ostream& err) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return run(args, out, err);
}

}  // namespace autocbt::cli
