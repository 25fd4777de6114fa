#include <clocale>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "scoreval/agreement.hpp"
#include "scoreval/association.hpp"
#include "scoreval/cohort.hpp"
#include "scoreval/confusion.hpp"
#include "scoreval/consistency.hpp"
#include "scoreval/csv.hpp"
#include "scoreval/dataset_io.hpp"
#include "scoreval/fairness.hpp"
#include "scoreval/harness.hpp"
#include "scoreval/rationale.hpp"
#include "scoreval/report.hpp"
#include "scoreval/synthetic.hpp"
#include "scoreval/types.hpp"
#include "scoreval/util.hpp"
#include "scoreval/version.hpp"

using namespace scoreval;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

// ---------------------------------------------------------------------------
// shared option plumbing

struct run_meta {
    json config = json::object();
    std::uint64_t seed = 0;

    std::string digest() const { return hex64(fnv1a64(config.dump())); }
    std::vector<std::string> comments() const {
        return {std::string("scoreval ") + k_version, "config = " + digest(),
                "seed = " + std::to_string(seed)};
    }
    json meta_json() const {
        return json{{"version", k_version},
                    {"config_digest", digest()},
                    {"seed", seed},
                    {"config", config}};
    }
};

struct dataset_flags {
    std::string input;
    int scale_min = 1;
    int scale_max = 6;
    bool zero_reserved = false;
    bool lenient = false;
    std::vector<std::string> continuous;
    std::vector<std::string> round_sources;

    void add_to(CLI::App* cmd, bool required = true) {
        auto* opt = cmd->add_option("--input", input, "dataset file (.csv or .jsonl)");
        if (required) opt->required();
        cmd->add_option("--scale-min", scale_min, "lowest score point");
        cmd->add_option("--scale-max", scale_max, "highest score point");
        cmd->add_flag("--zero-reserved", zero_reserved,
                      "scale reserves 0 for atypical responses (requires --scale-min 0)");
        cmd->add_flag("--lenient", lenient,
                      "collect invalid rows into a rejects report instead of failing");
        cmd->add_option("--continuous-source", continuous,
                        "source id with continuous scores (repeatable)");
        cmd->add_option("--round-source", round_sources,
                        "add a rounded '<id>_rounded' copy of this source after loading "
                        "(repeatable)");
    }

    ingest_options options() const {
        ingest_options opts;
        opts.scale = {scale_min, scale_max, zero_reserved};
        opts.strict = !lenient;
        opts.continuous_sources.insert(continuous.begin(), continuous.end());
        return opts;
    }

    json to_json() const {
        return json{{"input", input},
                    {"scale_min", scale_min},
                    {"scale_max", scale_max},
                    {"zero_reserved", zero_reserved},
                    {"lenient", lenient},
                    {"continuous_sources", continuous},
                    {"round_sources", round_sources}};
    }
};

dataset load_or_die(const dataset_flags& flags, const run_meta& meta, const fs::path& out_dir) {
    load_result loaded = load_dataset(flags.input, flags.options());
    if (!loaded.rejects.empty()) {
        fs::create_directories(out_dir);
        std::ofstream rej(out_dir / "rejects.csv", std::ios::binary);
        for (const auto& c : meta.comments()) rej << "# " << c << "\n";
        write_csv_row(rej, {"row", "response_id", "reason"});
        for (const auto& r : loaded.rejects)
            write_csv_row(rej, {std::to_string(r.row_number), r.response_id, r.reason});
        std::cerr << "note: " << loaded.rejects.size() << " row(s) rejected; see rejects.csv\n";
    }
    dataset ds = std::move(loaded.data);
    for (const auto& id : flags.round_sources) ds = round_scores(ds, id);
    return ds;
}

std::string sanitize(const std::string& s) {
    std::string out;
    for (char c : s)
        out += (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.')
                   ? c
                   : '-';
    return out;
}

std::ofstream open_out(const fs::path& path, const run_meta& meta, bool with_comments = true) {
    fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw error(errc::io_error, "cannot write " + path.string());
    if (with_comments)
        for (const auto& c : meta.comments()) out << "# " << c << "\n";
    return out;
}

void write_artifact(const evidence_artifact& art, const fs::path& out_dir, const run_meta& meta) {
    fs::create_directories(out_dir);
    save_artifact(art, out_dir / (sanitize(art.name) + ".artifact.json"), meta.meta_json());
}

std::string opt_num(const std::optional<double>& v) { return v ? num_to_string(*v) : ""; }

json summary_to_json(const std::string& pair, const agreement_summary& s) {
    return json{{"pair", pair},          {"n", s.n},
                {"n_excluded", s.n_excluded}, {"smd", s.smd},
                {"pct_exact", s.pct_exact},   {"pct_adjacent", s.pct_adjacent},
                {"qwk", s.qwk},               {"pearson", s.pearson},
                {"spearman", s.spearman}};
}

void write_summary_row(std::ostream& out, const std::string& pair, const agreement_summary& s) {
    write_csv_row(out, {pair, std::to_string(s.n), num_to_string(s.smd),
                        num_to_string(s.pct_exact), num_to_string(s.pct_adjacent),
                        num_to_string(s.qwk), num_to_string(s.pearson),
                        num_to_string(s.spearman)});
}

const std::vector<std::string> k_summary_header = {"pair",         "n",   "smd",     "pct_exact",
                                                   "pct_adjacent", "qwk", "pearson", "spearman"};

// rubric file: {"levels": {"1": "...", ...}} or a bare level -> text map
std::map<int, std::string> load_rubric_levels(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw error(errc::io_error, "cannot open " + path.string());
    json doc = json::parse(in, nullptr, false);
    if (doc.is_discarded() || !doc.is_object())
        throw error(errc::schema_error, path.string() + ": not a JSON object");
    const json& levels = doc.contains("levels") ? doc.at("levels") : doc;
    std::map<int, std::string> out;
    for (const auto& [key, text] : levels.items()) {
        if (key == "meta") continue;
        auto level = parse_int(key);
        if (!level)
            throw error(errc::schema_error, path.string() + ": level key '" + key + "'");
        out[static_cast<int>(*level)] = text.get<std::string>();
    }
    if (out.empty()) throw error(errc::schema_error, path.string() + ": no rubric levels");
    return out;
}

std::string rubric_text_from_levels(const std::map<int, std::string>& levels) {
    std::string text;
    for (const auto& [level, body] : levels) {
        if (!text.empty()) text += "\n\n";
        text += "Score " + std::to_string(level) + ": " + body;
    }
    return text;
}

std::map<std::string, std::string> load_questions(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw error(errc::io_error, "cannot open " + path.string());
    json doc = json::parse(in, nullptr, false);
    if (doc.is_discarded() || !doc.is_object())
        throw error(errc::schema_error, path.string() + ": not a JSON object");
    const json& qs = doc.contains("questions") ? doc.at("questions") : doc;
    std::map<std::string, std::string> out;
    for (const auto& [key, text] : qs.items()) {
        if (key == "meta") continue;
        out[key] = text.get<std::string>();
    }
    return out;
}

// ---------------------------------------------------------------------------
// simulate

struct simulate_args {
    std::string config_file;
    std::string out_dir;
    std::uint64_t seed = 0;
    std::size_t n_override = 0;
    std::string model_id; // also emit a scoring fixture for this source
    double temperature = 0.0;
};

int cmd_simulate(const simulate_args& args) {
    sim_config cfg = args.config_file.empty() ? default_sim_config()
                                              : sim_config_from_json_file(args.config_file);
    if (args.n_override > 0) cfg.n = args.n_override;
    cfg.validate();

    run_meta meta;
    meta.seed = args.seed;
    meta.config = json{{"command", "simulate"},
                       {"config_file", args.config_file},
                       {"n", cfg.n},
                       {"model_id", args.model_id},
                       {"temperature", args.temperature}};

    sim_result sim = generate_synthetic(cfg, args.seed);
    const fs::path out_dir = args.out_dir;
    fs::create_directories(out_dir);
    fs::create_directories(out_dir);

    save_true_scores(sim, out_dir / "truth.csv", meta.comments());

    std::map<int, std::string> rubric = cfg.rationale_templates;
    for (int level = cfg.scale.min; level <= cfg.scale.max; ++level)
        if (!rubric.count(level))
            rubric[level] = "Responses at score level " + std::to_string(level) + ".";
    {
        json doc;
        doc["meta"] = meta.meta_json();
        json levels = json::object();
        for (const auto& [level, text] : rubric) levels[std::to_string(level)] = text;
        doc["levels"] = std::move(levels);
        std::ofstream out(out_dir / "rubric.json", std::ios::binary);
        out << doc.dump(2) << "\n";
    }

    std::map<std::string, std::string> questions;
    for (int p = 1; p <= cfg.n_prompts; ++p)
        questions["p" + std::to_string(p)] =
            "Write a persuasive essay responding to assigned prompt " + std::to_string(p) + ".";
    {
        json doc;
        doc["meta"] = meta.meta_json();
        doc["questions"] = questions;
        std::ofstream out(out_dir / "questions.json", std::ios::binary);
        out << doc.dump(2) << "\n";
    }

    if (!args.model_id.empty()) {
        const sim_source* src = nullptr;
        for (const auto& s : cfg.sources)
            if (s.id == args.model_id) src = &s;
        if (!src)
            throw error(errc::unknown_source,
                        "--model-id '" + args.model_id + "' is not a simulated source");
        if (!cfg.emit_response_text)
            throw error(errc::invalid_config, "fixture emission needs emit_response_text");
        prompt_template tmpl;
        const std::string rubric_text = rubric_text_from_levels(rubric);
        std::ofstream fix(out_dir / "fixture.jsonl", std::ios::binary);
        for (const auto& c : meta.comments()) fix << "# " << c << "\n";
        for (const auto& rec : sim.data.records) {
            for (int run = 1; run <= src->runs; ++run) {
                auto sit = rec.ai_scores.find({src->id, run});
                if (sit == rec.ai_scores.end()) continue;
                scoring_request req{rec.response_id,
                                    questions.at(rec.prompt_id),
                                    rubric_text,
                                    rec.response_text.value_or(""),
                                    args.temperature,
                                    src->id,
                                    run};
                const std::string prompt = build_prompt(tmpl, req);
                json completion;
                completion["score"] = static_cast<int>(sit->second);
                auto rit = rec.rationales.find({src->id, run});
                completion["reasoning"] = rit != rec.rationales.end() ? rit->second : "";
                append_fixture_entry(fix, request_hash(req, prompt), completion.dump());
            }
        }
    }

    // withhold fixture-only sources so a replay run fills them in
    for (const auto& s : cfg.sources) {
        if (!s.fixture_only) continue;
        std::erase_if(sim.data.source_catalog,
                      [&](const source_info& info) { return info.id == s.id; });
        for (auto& rec : sim.data.records) {
            std::erase_if(rec.ai_scores,
                          [&](const auto& kv) { return kv.first.source_id == s.id; });
            std::erase_if(rec.rationales,
                          [&](const auto& kv) { return kv.first.source_id == s.id; });
        }
    }
    save_dataset_csv(sim.data, out_dir / "data.csv", meta.comments());

    {
        json doc;
        doc["meta"] = meta.meta_json();
        doc["n"] = cfg.n;
        doc["seed"] = args.seed;
        std::ofstream out(out_dir / "sim_config.json", std::ios::binary);
        out << doc.dump(2) << "\n";
    }
    std::cout << "simulated " << sim.data.records.size() << " responses into " << args.out_dir
              << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// score

struct score_args {
    dataset_flags data;
    std::string out_dir;
    std::string model_id;
    int runs = 1;
    double temperature = 0.0;
    std::string replay_fixture;
    std::string record_fixture;
    std::string cache_dir;
    std::string rubric_file;
    std::string questions_file;
    std::string question_text;
    std::string template_file;
    bool fresh_tags = false;
    int concurrency = 4;
    int max_retries = 3;
    int backoff_ms = 1000;
    std::string provider_url = "https://api.openai.com";
    std::string provider_path = "/v1/chat/completions";
    std::uint64_t seed = 0;
};

int cmd_score(const score_args& args) {
    run_meta meta;
    meta.seed = args.seed;
    meta.config = json{{"command", "score"},
                       {"data", args.data.to_json()},
                       {"model_id", args.model_id},
                       {"runs", args.runs},
                       {"temperature", args.temperature},
                       {"replay", args.replay_fixture},
                       {"record", args.record_fixture},
                       {"cache", args.cache_dir},
                       {"rubric_file", args.rubric_file},
                       {"questions_file", args.questions_file},
                       {"template_file", args.template_file},
                       {"fresh_tags", args.fresh_tags},
                       {"concurrency", args.concurrency}};

    const fs::path out_dir = args.out_dir;
    fs::create_directories(out_dir);
    dataset ds = load_or_die(args.data, meta, out_dir);

    prompt_template tmpl =
        args.template_file.empty() ? prompt_template{} : template_from_json_file(args.template_file);
    if (args.fresh_tags) tmpl.fresh_tags_per_request = true;

    scoring_inputs inputs;
    inputs.rubric_text = rubric_text_from_levels(load_rubric_levels(args.rubric_file));
    if (!args.questions_file.empty()) {
        inputs.question_texts = load_questions(args.questions_file);
    } else if (!args.question_text.empty()) {
        std::set<std::string> prompts;
        for (const auto& rec : ds.records) prompts.insert(rec.prompt_id);
        for (const auto& p : prompts) inputs.question_texts[p] = args.question_text;
    } else {
        throw error(errc::empty_content, "provide --questions-file or --question-text");
    }

    std::unique_ptr<provider_client> client;
    if (!args.replay_fixture.empty()) {
        client = record_replay_client(args.replay_fixture, rr_mode::replay);
    } else {
        http_client_options http;
        http.base_url = args.provider_url;
        http.path = args.provider_path;
        client = make_http_client(http);
        if (!args.record_fixture.empty())
            client = record_replay_client(args.record_fixture, rr_mode::record, std::move(client));
    }

    std::unique_ptr<result_cache> cache;
    if (!args.cache_dir.empty()) cache = std::make_unique<result_cache>(args.cache_dir);

    batch_limits limits;
    limits.max_in_flight = args.concurrency;
    limits.max_retries = args.max_retries;
    limits.initial_backoff_ms = args.backoff_ms;

    batch_result batch = score_batch(ds, tmpl, *client, args.model_id, args.runs,
                                     args.temperature, inputs, limits, cache.get());

    save_dataset_csv(batch.data, out_dir / "scored.csv", meta.comments());

    std::size_t n_ok = 0, n_malformed = 0, n_failed = 0;
    {
        std::ofstream out = open_out(out_dir / "results.jsonl", meta, false);
        json head;
        head["schema"] = "scoreval.results.v1";
        head["meta"] = meta.meta_json();
        out << head.dump() << "\n";
        for (const auto& res : batch.results) {
            json line;
            line["response_id"] = res.response_id;
            line["model_id"] = res.model_id;
            line["run"] = res.run_index;
            line["status"] = result_status_name(res.status);
            if (res.score) line["score"] = *res.score;
            if (res.rationale) line["rationale"] = *res.rationale;
            if (res.rationale_over_length) line["rationale_over_length"] = true;
            line["attempts"] = res.attempts;
            line["raw_completion"] = res.raw_completion;
            if (!res.error_message.empty()) line["error"] = res.error_message;
            out << line.dump() << "\n";
            switch (res.status) {
                case result_status::ok: ++n_ok; break;
                case result_status::malformed: ++n_malformed; break;
                case result_status::failed: ++n_failed; break;
            }
        }
    }

    const std::string tag_policy = tmpl.fresh_tags_per_request
                                       ? "per-request tags derived from the request identity"
                                       : "fixed opaque tag names";
    {
        evidence_artifact art;
        art.kind = "harness_protocol";
        art.name = "harness_protocol_" + args.model_id;
        art.provenance = "score " + args.model_id;
        art.payload = json{{"model_id", args.model_id},
                           {"runs", args.runs},
                           {"temperature", args.temperature},
                           {"template_digest",
                            hex64(fnv1a64(tmpl.role_preamble + "\x1f" + tmpl.instructions + "\x1f" +
                                          tmpl.question_tag + "\x1f" + tmpl.rubric_tag + "\x1f" +
                                          tmpl.answer_tag + "\x1f" + tmpl.output_format_block))},
                           {"tag_policy", tag_policy},
                           {"n_results", batch.results.size()},
                           {"n_ok", n_ok},
                           {"n_malformed", n_malformed},
                           {"n_failed", n_failed},
                           {"n_skipped", batch.n_skipped},
                           {"cache_hits", batch.cache_hits},
                           {"submissions", batch.submissions}};
        write_artifact(art, out_dir, meta);
    }
    {
        evidence_artifact art;
        art.kind = "injection_hardening";
        art.name = "injection_hardening_" + args.model_id;
        art.provenance = "score " + args.model_id;
        art.payload =
            json{{"tag_policy", tag_policy},
                 {"collision_check",
                  "requests whose content contains a tag string are refused, not escaped"}};
        write_artifact(art, out_dir, meta);
    }

    std::cout << "scored " << batch.results.size() << " requests: " << n_ok << " ok, "
              << n_malformed << " malformed, " << n_failed << " failed (" << batch.cache_hits
              << " cache hits, " << batch.submissions << " submissions)\n";
    return n_failed == 0 ? 0 : 2;
}

// ---------------------------------------------------------------------------
// agree

struct agree_args {
    dataset_flags data;
    std::string out_dir;
    std::vector<std::string> sources;
    std::string reference = "human";
    std::string percent_table;
    std::uint64_t seed = 0;
};

int cmd_agree(const agree_args& args) {
    run_meta meta;
    meta.seed = args.seed;
    meta.config = json{{"command", "agree"},
                       {"sources", args.sources},
                       {"reference", args.reference},
                       {"percent_table", args.percent_table}};
    if (!args.percent_table.empty())
        meta.config["scale"] = json{{"min", args.data.scale_min}, {"max", args.data.scale_max}};
    else
        meta.config["data"] = args.data.to_json();

    const fs::path out_dir = args.out_dir;
    fs::create_directories(out_dir);
    json rows = json::array();
    std::string suffix;

    if (!args.percent_table.empty()) {
        score_scale scale{args.data.scale_min, args.data.scale_max, args.data.zero_reserved};
        conditional_percent_table table = load_percent_table(args.percent_table, scale);
        confusion_matrix conf = confusion_from_conditional(table);
        suffix = sanitize(fs::path(args.percent_table).stem().string());

        std::ofstream mat = open_out(out_dir / ("reconstructed_confusion_" + suffix + ".csv"), meta);
        std::vector<std::string> header = {"row_level"};
        for (int s = scale.min; s <= scale.max; ++s) header.push_back("c" + std::to_string(s));
        write_csv_row(mat, header);
        for (int r = scale.min; r <= scale.max; ++r) {
            std::vector<std::string> row = {std::to_string(r)};
            for (int c = scale.min; c <= scale.max; ++c)
                row.push_back(std::to_string(conf.at(r, c)));
            write_csv_row(mat, row);
        }

        agreement_summary s = summarize_confusion(conf);
        rows.push_back(summary_to_json(suffix + " vs reference", s));
        std::ofstream out = open_out(out_dir / ("agreement_" + suffix + ".csv"), meta);
        write_csv_row(out, k_summary_header);
        write_summary_row(out, suffix + " vs reference", s);
    } else {
        if (args.sources.empty())
            throw error(errc::invalid_config, "give --source (repeatable) or --percent-table");
        dataset ds = load_or_die(args.data, meta, out_dir);
        const source_ref reference = parse_source_ref(args.reference);
        suffix = sanitize(join(args.sources, "__") + "__" + args.reference);

        std::ofstream out = open_out(out_dir / ("agreement_" + suffix + ".csv"), meta);
        write_csv_row(out, k_summary_header);
        for (const auto& src_text : args.sources) {
            const source_ref src = parse_source_ref(src_text);
            agreement_summary s = summarize_agreement(ds, src, reference);
            const std::string pair = src.label() + " vs " + reference.label();
            rows.push_back(summary_to_json(pair, s));
            write_summary_row(out, pair, s);
        }
    }

    evidence_artifact art;
    art.kind = args.reference == "human" || !args.percent_table.empty() ? "agreement_human"
                                                                        : "agreement_sources";
    art.name = "agreement_" + suffix;
    art.provenance = "agree";
    art.payload = json{{"reference", args.reference}, {"rows", rows}};
    write_artifact(art, out_dir, meta);
    return 0;
}

// ---------------------------------------------------------------------------
// fairness

struct fairness_args {
    dataset_flags data;
    std::string out_dir;
    std::string source;
    std::string reference = "human";
    std::string dimension;
    double threshold = 0.10;
    std::size_t min_n = 50;
    std::uint64_t seed = 0;
};

int cmd_fairness(const fairness_args& args) {
    run_meta meta;
    meta.seed = args.seed;
    meta.config = json{{"command", "fairness"}, {"data", args.data.to_json()},
                       {"source", args.source}, {"reference", args.reference},
                       {"dimension", args.dimension}, {"threshold", args.threshold},
                       {"min_n", args.min_n}};
    const fs::path out_dir = args.out_dir;
    fs::create_directories(out_dir);
    dataset ds = load_or_die(args.data, meta, out_dir);
    const source_ref src = parse_source_ref(args.source);
    const source_ref ref = parse_source_ref(args.reference);
    const std::string suffix = sanitize(args.dimension + "__" + args.source);

    subgroup_audit audit = subgroup_smd(ds, src, ref, args.dimension, args.threshold, args.min_n);
    {
        std::ofstream out = open_out(out_dir / ("subgroup_smd_" + suffix + ".csv"), meta);
        write_csv_row(out, {"label", "n", "smd_adjusted", "flagged", "suppressed", "qwk"});
        for (const auto& row : audit.rows)
            write_csv_row(out, {row.label, std::to_string(row.n), opt_num(row.smd_adjusted),
                                row.flagged ? "1" : "0", row.suppressed ? "1" : "0",
                                opt_num(row.qwk)});
    }
    {
        // plot-ready series: one (label, smd) point per reportable row
        std::ofstream out = open_out(out_dir / ("smd_series_" + suffix + ".csv"), meta);
        write_csv_row(out, {"label", "smd"});
        for (const auto& row : audit.rows)
            if (row.smd_adjusted && !row.suppressed)
                write_csv_row(out, {row.label, num_to_string(*row.smd_adjusted)});
    }
    {
        json rows = json::array();
        for (const auto& row : audit.rows) {
            json r{{"label", row.label}, {"n", row.n}, {"flagged", row.flagged},
                   {"suppressed", row.suppressed}};
            r["smd_adjusted"] = row.smd_adjusted ? json(*row.smd_adjusted) : json();
            r["qwk"] = row.qwk ? json(*row.qwk) : json();
            rows.push_back(std::move(r));
        }
        evidence_artifact art;
        art.kind = "subgroup_smd_audit";
        art.name = "subgroup_smd_" + suffix;
        art.provenance = "fairness " + args.dimension;
        art.payload = json{{"dimension", args.dimension},
                           {"source", args.source},
                           {"reference", args.reference},
                           {"threshold", args.threshold},
                           {"min_n", args.min_n},
                           {"pooled_sd", "subgroup-local"},
                           {"rows", rows}};
        write_artifact(art, out_dir, meta);
    }

    bool discrete = !ds.is_continuous(src) && !ds.is_continuous(ref);
    if (discrete) {
        auto rows = subgroup_agreement(ds, src, ref, args.dimension);
        std::ofstream out = open_out(out_dir / ("subgroup_agreement_" + suffix + ".csv"), meta);
        write_csv_row(out, {"label", "n", "smd", "pct_exact", "pct_adjacent", "qwk", "pearson",
                            "spearman"});
        json jrows = json::array();
        for (const auto& row : rows) {
            if (row.summary) {
                const auto& s = *row.summary;
                write_csv_row(out, {row.label, std::to_string(row.n), num_to_string(s.smd),
                                    num_to_string(s.pct_exact), num_to_string(s.pct_adjacent),
                                    num_to_string(s.qwk), num_to_string(s.pearson),
                                    num_to_string(s.spearman)});
                jrows.push_back(summary_to_json(row.label, s));
            } else {
                write_csv_row(out, {row.label, std::to_string(row.n), "", "", "", "", "", ""});
                jrows.push_back(json{{"pair", row.label}, {"n", row.n}, {"suppressed", true}});
            }
        }
        evidence_artifact art;
        art.kind = "subgroup_agreement";
        art.name = "subgroup_agreement_" + suffix;
        art.provenance = "fairness " + args.dimension;
        art.payload = json{{"dimension", args.dimension}, {"rows", jrows}};
        write_artifact(art, out_dir, meta);
    }

    bool any_features = false;
    for (const auto& rec : ds.records)
        if (!rec.features.empty()) any_features = true;
    if (any_features) {
        auto rows = feature_means_by_subgroup(ds, args.dimension);
        std::set<std::string> names;
        for (const auto& row : rows)
            for (const auto& [name, _] : row.feature_means) names.insert(name);
        std::ofstream out = open_out(out_dir / ("feature_subgroup_" + suffix + ".csv"), meta);
        std::vector<std::string> header = {"label", "n"};
        header.insert(header.end(), names.begin(), names.end());
        write_csv_row(out, header);
        json jrows = json::array();
        for (const auto& row : rows) {
            std::vector<std::string> line = {row.label, std::to_string(row.n)};
            for (const auto& name : names) {
                auto it = row.feature_means.find(name);
                line.push_back(it != row.feature_means.end() ? num_to_string(it->second) : "");
            }
            write_csv_row(out, line);
            jrows.push_back(
                json{{"label", row.label}, {"n", row.n}, {"feature_means", row.feature_means}});
        }
        evidence_artifact art;
        art.kind = "feature_subgroup_summary";
        art.name = "feature_subgroup_" + suffix;
        art.provenance = "fairness " + args.dimension;
        art.payload = json{{"dimension", args.dimension}, {"rows", jrows}};
        write_artifact(art, out_dir, meta);
    }

    std::size_t flagged = 0;
    for (const auto& row : audit.rows) flagged += row.flagged ? 1 : 0;
    std::cout << "audited " << audit.rows.size() << " subgroup(s), " << flagged << " flagged\n";
    return 0;
}

// ---------------------------------------------------------------------------
// consistency

struct consistency_args {
    dataset_flags data;
    std::string out_dir;
    std::string source;
    std::string runs_text;
    std::vector<std::string> windows; // LABEL=FILE
    std::string reference = "human";
    double warn_threshold = 0.05;
    bool rolling = false;
    bool average = false;
    bool rounded = false;
    std::uint64_t seed = 0;
};

std::vector<int> parse_runs(const std::string& text) {
    std::vector<int> runs;
    for (const auto& part : split(text, ',')) {
        auto v = parse_int(part);
        if (!v || *v < 1) throw error(errc::invalid_config, "bad run list '" + text + "'");
        runs.push_back(static_cast<int>(*v));
    }
    return runs;
}

int cmd_consistency(const consistency_args& args) {
    run_meta meta;
    meta.seed = args.seed;
    meta.config = json{{"command", "consistency"}, {"source", args.source},
                       {"runs", args.runs_text},   {"windows", args.windows},
                       {"reference", args.reference}, {"warn_threshold", args.warn_threshold},
                       {"rolling", args.rolling},  {"average", args.average},
                       {"rounded", args.rounded}};
    if (args.windows.empty()) meta.config["data"] = args.data.to_json();
    const fs::path out_dir = args.out_dir;
    fs::create_directories(out_dir);

    if (!args.windows.empty()) {
        std::vector<std::pair<std::string, dataset>> windows;
        for (const auto& spec : args.windows) {
            auto eq = spec.find('=');
            if (eq == std::string::npos)
                throw error(errc::invalid_config,
                            "--window expects LABEL=FILE, got '" + spec + "'");
            dataset_flags flags = args.data;
            flags.input = spec.substr(eq + 1);
            windows.emplace_back(spec.substr(0, eq), load_or_die(flags, meta, out_dir));
        }
        const source_ref src = parse_source_ref(args.source);
        const source_ref ref = parse_source_ref(args.reference);
        trend_report rep = trend_compare(windows, src, ref, args.warn_threshold, args.rolling);

        const std::string suffix = sanitize(args.source);
        {
            std::ofstream out = open_out(out_dir / ("trend_" + suffix + ".csv"), meta);
            write_csv_row(out, {"window", "n", "smd_vs_baseline", "qwk_vs_baseline", "pct_exact",
                                "mean_score", "smd_vs_reference"});
            for (const auto& w : rep.windows)
                write_csv_row(out, {w.label, std::to_string(w.vs_baseline.n),
                                    num_to_string(w.vs_baseline.smd),
                                    num_to_string(w.vs_baseline.qwk),
                                    num_to_string(w.vs_baseline.pct_exact),
                                    num_to_string(w.mean_score),
                                    num_to_string(w.smd_vs_reference)});
        }
        {
            std::ofstream out = open_out(out_dir / ("trend_series_" + suffix + ".csv"), meta);
            write_csv_row(out, {"window", "smd", "qwk"});
            for (const auto& w : rep.windows)
                write_csv_row(out, {w.label, num_to_string(w.vs_baseline.smd),
                                    num_to_string(w.vs_baseline.qwk)});
        }
        json jrows = json::array();
        for (const auto& w : rep.windows)
            jrows.push_back(json{{"window", w.label},
                                 {"smd_vs_baseline", w.vs_baseline.smd},
                                 {"qwk_vs_baseline", w.vs_baseline.qwk},
                                 {"mean_score", w.mean_score},
                                 {"smd_vs_reference", w.smd_vs_reference}});
        const char* direction = rep.direction == trend_direction::increasing   ? "increasing"
                                : rep.direction == trend_direction::decreasing ? "decreasing"
                                                                               : "none";
        evidence_artifact art;
        art.kind = "trend";
        art.name = "trend_" + suffix;
        art.provenance = "consistency windows";
        art.payload = json{{"source", args.source},
                           {"warn_threshold", args.warn_threshold},
                           {"drift_flag", rep.drift_flag},
                           {"direction", direction},
                           {"windows", jrows}};
        write_artifact(art, out_dir, meta);
        std::cout << (rep.drift_flag ? "drift detected\n" : "no drift\n");
        return 0;
    }

    dataset ds = load_or_die(args.data, meta, out_dir);
    std::vector<int> runs = parse_runs(args.runs_text.empty() ? "1,2" : args.runs_text);

    if (args.average) {
        dataset averaged = average_runs(ds, args.source, runs, args.rounded);
        save_dataset_csv(averaged, out_dir / "averaged.csv", meta.comments());
        std::cout << "averaged runs written\n";
        return 0;
    }

    if (runs.size() != 2)
        throw error(errc::invalid_config, "run-pair mode needs exactly two runs, e.g. --runs 1,2");
    run_pair_report rep = run_pair_agreement(ds, args.source, runs[0], runs[1]);
    const std::string pair = args.source + " run " + std::to_string(runs[0]) + " vs run " +
                             std::to_string(runs[1]);
    const std::string suffix = sanitize(args.source);
    {
        std::ofstream out = open_out(out_dir / ("run_pair_" + suffix + ".csv"), meta);
        std::vector<std::string> header = k_summary_header;
        header.push_back("max_abs_diff");
        header.push_back("n_diff_gt1");
        write_csv_row(out, header);
        write_csv_row(out, {pair, std::to_string(rep.summary.n), num_to_string(rep.summary.smd),
                            num_to_string(rep.summary.pct_exact),
                            num_to_string(rep.summary.pct_adjacent), num_to_string(rep.summary.qwk),
                            num_to_string(rep.summary.pearson), num_to_string(rep.summary.spearman),
                            std::to_string(rep.max_abs_diff), std::to_string(rep.n_diff_gt1)});
    }
    json row = summary_to_json(pair, rep.summary);
    row["max_abs_diff"] = rep.max_abs_diff;
    row["n_diff_gt1"] = rep.n_diff_gt1;
    evidence_artifact art;
    art.kind = "run_pair";
    art.name = "run_pair_" + suffix;
    art.provenance = "consistency " + args.source;
    art.payload = json{{"source", args.source}, {"rows", json::array({row})}};
    write_artifact(art, out_dir, meta);
    return 0;
}

// ---------------------------------------------------------------------------
// rationale

struct rationale_args {
    dataset_flags data;
    std::string out_dir;
    std::string source;
    std::string score_source;
    std::string rubric_file;
    std::size_t pair_cap = 2'000'000;
    std::uint64_t seed = 0;
};

int cmd_rationale(const rationale_args& args) {
    run_meta meta;
    meta.seed = args.seed;
    meta.config = json{{"command", "rationale"},   {"data", args.data.to_json()},
                       {"source", args.source},    {"score_source", args.score_source},
                       {"rubric_file", args.rubric_file}, {"pair_cap", args.pair_cap}};
    const fs::path out_dir = args.out_dir;
    fs::create_directories(out_dir);
    dataset ds = load_or_die(args.data, meta, out_dir);
    const source_ref rat = parse_source_ref(args.source);
    const source_ref score =
        args.score_source.empty() ? rat : parse_source_ref(args.score_source);
    const std::string suffix = sanitize(args.source);

    similarity_profile profile =
        similarity_by_score_diff(ds, rat, score, args.pair_cap, args.seed);
    {
        std::ofstream out = open_out(out_dir / ("similarity_profile_" + suffix + ".csv"), meta);
        write_csv_row(out, {"score_diff", "n_pairs", "mean", "sd", "q10", "q50", "q90"});
        for (const auto& bin : profile.bins)
            write_csv_row(out, {std::to_string(bin.score_diff), std::to_string(bin.n_pairs),
                                num_to_string(bin.mean), opt_num(bin.sd), num_to_string(bin.q10),
                                num_to_string(bin.q50), num_to_string(bin.q90)});
    }
    {
        json bins = json::array();
        for (const auto& bin : profile.bins) {
            json b{{"score_diff", bin.score_diff}, {"n_pairs", bin.n_pairs}, {"mean", bin.mean},
                   {"q10", bin.q10},               {"q50", bin.q50},         {"q90", bin.q90}};
            b["sd"] = bin.sd ? json(*bin.sd) : json();
            bins.push_back(std::move(b));
        }
        evidence_artifact art;
        art.kind = "similarity_profile";
        art.name = "similarity_profile_" + suffix;
        art.provenance = "rationale " + args.source;
        art.payload = json{{"rationale_source", args.source},
                           {"score_source", score.label()},
                           {"n_pairs_total", profile.n_pairs_total},
                           {"subsampled", profile.subsampled},
                           {"pair_cap", profile.pair_cap},
                           {"bins", bins}};
        write_artifact(art, out_dir, meta);
    }

    if (!args.rubric_file.empty()) {
        auto levels = load_rubric_levels(args.rubric_file);
        rubric_alignment_profile alignment = rubric_alignment(ds, rat, levels);
        std::ofstream out = open_out(out_dir / ("rubric_alignment_" + suffix + ".csv"), meta);
        std::vector<std::string> header = {"assigned_level", "n"};
        for (int level : alignment.rubric_levels)
            header.push_back("sim_to_" + std::to_string(level));
        write_csv_row(out, header);
        json jrows = json::array();
        for (const auto& row : alignment.rows) {
            std::vector<std::string> line = {std::to_string(row.assigned_level),
                                             std::to_string(row.n)};
            for (double v : row.mean_similarity) line.push_back(num_to_string(v));
            write_csv_row(out, line);
            jrows.push_back(json{{"assigned_level", row.assigned_level},
                                 {"n", row.n},
                                 {"mean_similarity", row.mean_similarity}});
        }
        evidence_artifact art;
        art.kind = "rubric_alignment";
        art.name = "rubric_alignment_" + suffix;
        art.provenance = "rationale " + args.source;
        art.payload = json{{"rationale_source", args.source},
                           {"rubric_levels", alignment.rubric_levels},
                           {"rows", jrows}};
        write_artifact(art, out_dir, meta);
    }
    return 0;
}

// ---------------------------------------------------------------------------
// regress

struct regress_args {
    dataset_flags data;
    std::string out_dir;
    std::string target;
    std::string predictors_text;
    std::string correlate_text;
    std::string model_file;
    bool predict = false;
    bool half_sample = false;
    std::uint64_t seed = 0;
};

int cmd_regress(const regress_args& args) {
    run_meta meta;
    meta.seed = args.seed;
    meta.config = json{{"command", "regress"},     {"data", args.data.to_json()},
                       {"target", args.target},    {"predictors", args.predictors_text},
                       {"correlate", args.correlate_text}, {"model_file", args.model_file},
                       {"predict", args.predict},  {"half_sample", args.half_sample}};
    const fs::path out_dir = args.out_dir;
    fs::create_directories(out_dir);

    if (!args.correlate_text.empty()) {
        dataset ds = load_or_die(args.data, meta, out_dir);
        std::vector<var_ref> vars;
        for (const auto& part : split(args.correlate_text, ','))
            vars.push_back(var_ref::parse(trim(part)));
        correlation_matrix_result corr = correlation_matrix(ds, vars);
        std::ofstream out = open_out(out_dir / "correlation.csv", meta);
        std::vector<std::string> header = {"variable"};
        header.insert(header.end(), corr.labels.begin(), corr.labels.end());
        write_csv_row(out, header);
        for (std::size_t i = 0; i < corr.labels.size(); ++i) {
            std::vector<std::string> row = {corr.labels[i]};
            for (double v : corr.values[i]) row.push_back(num_to_string(v));
            write_csv_row(out, row);
        }
        evidence_artifact art;
        art.kind = "correlation_matrix";
        art.name = "correlation_matrix";
        art.provenance = "regress --correlate";
        art.payload = json{{"labels", corr.labels}, {"values", corr.values}, {"n", corr.n}};
        write_artifact(art, out_dir, meta);
        return 0;
    }

    if (args.predict) {
        if (args.model_file.empty())
            throw error(errc::invalid_config, "--predict needs --model-file");
        regression_model model = load_model(args.model_file);
        dataset ds = load_or_die(args.data, meta, out_dir);
        std::ofstream out = open_out(out_dir / "predictions.csv", meta);
        write_csv_row(out, {"response_id", "prediction"});
        std::size_t skipped = 0;
        for (const auto& rec : ds.records) {
            try {
                write_csv_row(out,
                              {rec.response_id, num_to_string(ols_predict(model, rec.features))});
            } catch (const error& e) {
                if (e.kind() != errc::missing_feature) throw;
                ++skipped;
            }
        }
        if (skipped) std::cerr << "note: " << skipped << " record(s) missing features, skipped\n";
        return 0;
    }

    if (args.target.empty() || args.predictors_text.empty())
        throw error(errc::invalid_config, "fit mode needs --target and --predictors");
    dataset ds = load_or_die(args.data, meta, out_dir);
    std::vector<var_ref> predictors;
    for (const auto& part : split(args.predictors_text, ','))
        predictors.push_back(var_ref::parse(trim(part)));
    ols_options opts;
    opts.half_sample = args.half_sample;
    opts.seed = args.seed;
    regression_model model = ols_fit(ds, var_ref::parse(args.target), predictors, opts);

    fs::create_directories(out_dir);
    save_model(model, out_dir / "model.txt", meta.comments());
    {
        std::ofstream out = open_out(out_dir / "regression.csv", meta);
        write_csv_row(out, {"term", "estimate", "se"});
        write_csv_row(out, {"(Intercept)", num_to_string(model.intercept),
                            num_to_string(model.intercept_se)});
        for (const auto& [name, coef] : model.coefficients)
            write_csv_row(out,
                          {name, num_to_string(coef), num_to_string(model.standard_errors.at(name))});
    }
    evidence_artifact art;
    art.kind = "regression_model";
    art.name = "regression_" + sanitize(args.target);
    art.provenance = "regress " + args.target;
    art.payload = json{{"target", args.target},
                       {"predictors", args.predictors_text},
                       {"n", model.n},
                       {"df", json::array({model.df.first, model.df.second})},
                       {"r_squared", model.r_squared},
                       {"f_statistic", model.f_statistic},
                       {"intercept", model.intercept},
                       {"coefficients", model.coefficients},
                       {"standard_errors", model.standard_errors}};
    write_artifact(art, out_dir, meta);
    std::cout << "R^2 = " << num_to_string(model.r_squared) << ", F(" << model.df.first << ", "
              << model.df.second << ") = " << num_to_string(model.f_statistic) << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// cohort

struct cohort_args {
    dataset_flags data;
    std::string out_dir;
    std::string sources_text;
    std::string row_source;
    std::string col_source;
    bool marginal = false;
    std::uint64_t seed = 0;
};

int cmd_cohort(const cohort_args& args) {
    run_meta meta;
    meta.seed = args.seed;
    meta.config = json{{"command", "cohort"},       {"data", args.data.to_json()},
                       {"sources", args.sources_text}, {"row_source", args.row_source},
                       {"col_source", args.col_source}, {"marginal", args.marginal}};
    const fs::path out_dir = args.out_dir;
    fs::create_directories(out_dir);
    dataset ds = load_or_die(args.data, meta, out_dir);

    if (!args.sources_text.empty()) {
        std::vector<source_ref> sources;
        for (const auto& part : split(args.sources_text, ','))
            sources.push_back(parse_source_ref(trim(part)));

        auto emit = [&](const cohort_summary& summary, const std::string& base, const char* kind) {
            std::ofstream out = open_out(out_dir / (base + ".csv"), meta);
            std::vector<std::string> header = {"cohort", "n"};
            for (const auto& label : summary.source_labels) {
                header.push_back(label + "_mean");
                header.push_back(label + "_sd");
            }
            write_csv_row(out, header);
            auto emit_row = [&](const cohort_row& row) {
                std::vector<std::string> line = {row.label, std::to_string(row.n)};
                for (const auto& st : row.per_source) {
                    line.push_back(opt_num(st.mean));
                    line.push_back(opt_num(st.sd));
                }
                write_csv_row(out, line);
            };
            for (const auto& row : summary.rows) emit_row(row);
            emit_row(summary.total);

            json jrows = json::array();
            auto row_json = [](const cohort_row& row) {
                json stats = json::array();
                for (const auto& st : row.per_source)
                    stats.push_back(json{{"n_scored", st.n_scored},
                                         {"mean", st.mean ? json(*st.mean) : json()},
                                         {"sd", st.sd ? json(*st.sd) : json()}});
                return json{{"label", row.label}, {"n", row.n}, {"per_source", stats}};
            };
            for (const auto& row : summary.rows) jrows.push_back(row_json(row));
            evidence_artifact art;
            art.kind = kind;
            art.name = base;
            art.provenance = "cohort";
            art.payload = json{{"sources", summary.source_labels},
                               {"rows", jrows},
                               {"total", row_json(summary.total)}};
            write_artifact(art, out_dir, meta);
        };

        emit(advisory_summary(ds, sources), "advisory_summary", "advisory_summary");
        if (args.marginal)
            emit(advisory_marginals(ds, sources), "advisory_marginals", "advisory_marginals");
    }

    if (!args.row_source.empty() && !args.col_source.empty()) {
        conditional_percent_table table = conditional_distribution(
            ds, parse_source_ref(args.row_source), parse_source_ref(args.col_source));
        const std::string suffix = sanitize(args.row_source) + "__" + sanitize(args.col_source);
        save_percent_table(table, out_dir / ("conditional_" + suffix + ".csv"), meta.comments());
        evidence_artifact art;
        art.kind = "conditional_table";
        art.name = "conditional_" + suffix;
        art.provenance = "cohort conditional";
        art.payload = json{{"row_source", table.row_source},
                           {"col_source", table.col_source},
                           {"row_levels", table.row_levels},
                           {"row_counts", table.row_counts},
                           {"cell_percents", table.cell_percents}};
        write_artifact(art, out_dir, meta);
    }
    return 0;
}

// ---------------------------------------------------------------------------
// report

struct report_args {
    std::string analysis_dir;
    std::string scope_file;
    std::string format = "both";
    std::string out_dir;
    std::uint64_t seed = 0;
};

int cmd_report(const report_args& args) {
    run_meta meta;
    meta.seed = args.seed;
    meta.config = json{{"command", "report"},
                       {"analysis_dir", args.analysis_dir},
                       {"scope", args.scope_file},
                       {"format", args.format}};
    const fs::path out_dir = args.out_dir;
    fs::create_directories(out_dir);
    fs::create_directories(out_dir);

    analysis_bundle bundle = load_bundle(args.analysis_dir);
    ledger_config cfg;
    if (!args.scope_file.empty()) cfg = ledger_config_from_json_file(args.scope_file);
    evidence_ledger ledger = build_ledger(bundle, cfg);

    if (args.format == "markdown" || args.format == "both") {
        std::ofstream out(out_dir / "report.md", std::ios::binary);
        out << "<!-- scoreval " << k_version << " config=" << meta.digest()
            << " seed=" << meta.seed << " -->\n";
        out << render_report_markdown(ledger);
    }
    if (args.format == "structured" || args.format == "both") {
        json doc = render_report_structured(ledger);
        doc["meta"] = meta.meta_json();
        std::ofstream out(out_dir / "report.json", std::ios::binary);
        out << doc.dump(2) << "\n";
    }

    std::size_t missing = 0;
    for (const auto& row : ledger.rows)
        if (row.status == evidence_status::missing) ++missing;
    std::cout << ledger.rows.size() << " ledger rows, " << missing << " missing\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    std::setlocale(LC_ALL, "C");
    CLI::App app{"validity-evidence toolkit for constructed-response scoring"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string("scoreval ") + k_version);

    simulate_args sim;
    auto* simulate = app.add_subcommand("simulate", "generate a seeded synthetic dataset");
    simulate->add_option("--config", sim.config_file, "simulation config JSON");
    simulate->add_option("--n", sim.n_override, "override record count");
    simulate->add_option("--seed", sim.seed, "generator seed");
    simulate->add_option("--model-id", sim.model_id,
                         "also emit a replay fixture for this simulated source");
    simulate->add_option("--temperature", sim.temperature, "temperature recorded in the fixture");
    simulate->add_option("--out", sim.out_dir, "output directory")->required();

    score_args sc;
    auto* score = app.add_subcommand("score", "run the scoring harness over a dataset");
    sc.data.add_to(score);
    score->add_option("--model-id", sc.model_id, "provider model identifier")->required();
    score->add_option("--runs", sc.runs, "number of scoring runs");
    score->add_option("--temperature", sc.temperature, "sampling temperature");
    score->add_option("--replay", sc.replay_fixture, "serve completions from this fixture file");
    score->add_option("--record", sc.record_fixture, "record completions into this fixture file");
    score->add_option("--cache", sc.cache_dir, "completion cache directory");
    score->add_option("--rubric-file", sc.rubric_file, "rubric levels JSON")->required();
    score->add_option("--questions-file", sc.questions_file, "prompt_id -> question text JSON");
    score->add_option("--question-text", sc.question_text, "one question text for every prompt");
    score->add_option("--template-file", sc.template_file, "prompt template JSON");
    score->add_flag("--fresh-tags", sc.fresh_tags, "derive tags per request");
    score->add_option("--concurrency", sc.concurrency, "max in-flight requests");
    score->add_option("--max-retries", sc.max_retries, "retries per transient failure");
    score->add_option("--backoff-ms", sc.backoff_ms, "initial retry backoff (0 disables)");
    score->add_option("--provider-url", sc.provider_url, "provider base url");
    score->add_option("--provider-path", sc.provider_path, "provider completion path");
    score->add_option("--seed", sc.seed, "seed recorded in metadata");
    score->add_option("--out", sc.out_dir, "output directory")->required();

    agree_args ag;
    auto* agree = app.add_subcommand("agree", "agreement battery between two score sources");
    ag.data.add_to(agree, /*required=*/false);
    agree->add_option("--source", ag.sources, "source ref (repeatable)");
    agree->add_option("--reference", ag.reference, "reference ref (default human)");
    agree->add_option("--percent-table", ag.percent_table,
                      "reconstruct the joint from a conditional percent table");
    agree->add_option("--seed", ag.seed, "seed recorded in metadata");
    agree->add_option("--out", ag.out_dir, "output directory")->required();

    fairness_args fa;
    auto* fair = app.add_subcommand("fairness", "subgroup audit with adjusted SMDs");
    fa.data.add_to(fair);
    fair->add_option("--source", fa.source, "source ref")->required();
    fair->add_option("--reference", fa.reference, "reference ref (default human)");
    fair->add_option("--dimension", fa.dimension, "subgroup dimension")->required();
    fair->add_option("--threshold", fa.threshold, "|SMD| review threshold");
    fair->add_option("--min-n", fa.min_n, "suppress labels under this n");
    fair->add_option("--seed", fa.seed, "seed recorded in metadata");
    fair->add_option("--out", fa.out_dir, "output directory")->required();

    consistency_args co;
    auto* consistency = app.add_subcommand("consistency", "run-pair, averaging, and trend checks");
    co.data.add_to(consistency, /*required=*/false);
    consistency->add_option("--source", co.source, "source id (runs) or source ref (windows)");
    consistency->add_option("--runs", co.runs_text, "two run indices, e.g. 1,2");
    consistency->add_option("--window", co.windows, "LABEL=FILE trend window (repeatable)");
    consistency->add_option("--reference", co.reference, "reference ref for trend windows");
    consistency->add_option("--warn-threshold", co.warn_threshold, "drift SMD threshold");
    consistency->add_flag("--rolling-baseline", co.rolling, "compare each window to the previous");
    consistency->add_flag("--average", co.average, "emit the run average as a new source");
    consistency->add_flag("--rounded", co.rounded, "round the averaged score");
    consistency->add_option("--seed", co.seed, "seed recorded in metadata");
    consistency->add_option("--out", co.out_dir, "output directory")->required();

    rationale_args ra;
    auto* rationale = app.add_subcommand("rationale", "bigram similarity profiles for rationales");
    ra.data.add_to(rationale);
    rationale->add_option("--source", ra.source, "rationale source ref")->required();
    rationale->add_option("--score-source", ra.score_source,
                          "score source for binning (default: the rationale source)");
    rationale->add_option("--rubric-file", ra.rubric_file, "rubric levels JSON for alignment");
    rationale->add_option("--pair-cap", ra.pair_cap, "per-prompt pair cap before subsampling");
    rationale->add_option("--seed", ra.seed, "subsampling seed");
    rationale->add_option("--out", ra.out_dir, "output directory")->required();

    regress_args re;
    auto* regress = app.add_subcommand("regress", "OLS, predictions, and correlation matrices");
    re.data.add_to(regress);
    regress->add_option("--target", re.target, "target ref (fit mode)");
    regress->add_option("--predictors", re.predictors_text, "comma-separated predictor refs");
    regress->add_option("--correlate", re.correlate_text, "comma-separated refs (matrix mode)");
    regress->add_option("--model-file", re.model_file, "model file for --predict");
    regress->add_flag("--predict", re.predict, "predict from --model-file");
    regress->add_flag("--half-sample", re.half_sample, "fit on a seeded random half");
    regress->add_option("--seed", re.seed, "half-sample seed");
    regress->add_option("--out", re.out_dir, "output directory")->required();

    cohort_args ch;
    auto* cohort = app.add_subcommand("cohort", "advisory cohorts and conditional distributions");
    ch.data.add_to(cohort);
    cohort->add_option("--sources", ch.sources_text, "comma-separated source refs");
    cohort->add_option("--row-source", ch.row_source, "conditional table row source");
    cohort->add_option("--col-source", ch.col_source, "conditional table column source");
    cohort->add_flag("--marginal", ch.marginal, "also emit per-flag marginal cohorts");
    cohort->add_option("--seed", ch.seed, "seed recorded in metadata");
    cohort->add_option("--out", ch.out_dir, "output directory")->required();

    report_args rp;
    auto* report = app.add_subcommand("report", "assemble the validity evidence ledger");
    report->add_option("--analysis-dir", rp.analysis_dir, "directory of *.artifact.json files")
        ->required();
    report->add_option("--scope", rp.scope_file, "ledger scope/declarations JSON");
    report->add_option("--format", rp.format, "markdown, structured, or both")
        ->check(CLI::IsMember({"markdown", "structured", "both"}));
    report->add_option("--seed", rp.seed, "seed recorded in metadata");
    report->add_option("--out", rp.out_dir, "output directory")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (simulate->parsed()) return cmd_simulate(sim);
        if (score->parsed()) return cmd_score(sc);
        if (agree->parsed()) return cmd_agree(ag);
        if (fair->parsed()) return cmd_fairness(fa);
        if (consistency->parsed()) return cmd_consistency(co);
        if (rationale->parsed()) return cmd_rationale(ra);
        if (regress->parsed()) return cmd_regress(re);
        if (cohort->parsed()) return cmd_cohort(ch);
        if (report->parsed()) return cmd_report(rp);
    } catch (const error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.kind() == errc::invalid_config ? 1 : 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
