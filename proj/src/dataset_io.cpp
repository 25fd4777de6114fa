#include "scoreval/dataset_io.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "scoreval/csv.hpp"
#include "scoreval/util.hpp"

namespace scoreval {

namespace {

using nlohmann::json;

struct column_spec {
    enum class role {
        response_id,
        prompt_id,
        response_text,
        human_final,
        human_rater,
        subgroup,
        feature,
        advisory,
        score,
        rationale,
    } kind;
    std::string name;  // dimension / feature / source id
    int run = 0;       // rater index or run index
};

column_spec classify_column(const std::string& col) {
    using role = column_spec::role;
    if (col == "response_id") return {role::response_id, "", 0};
    if (col == "prompt_id") return {role::prompt_id, "", 0};
    if (col == "response_text") return {role::response_text, "", 0};
    if (col == "human_final") return {role::human_final, "", 0};
    if (col == "advisory") return {role::advisory, "", 0};
    if (starts_with(col, "human_r")) {
        auto idx = parse_int(col.substr(7));
        if (idx && *idx >= 1) return {role::human_rater, "", static_cast<int>(*idx)};
    }
    if (starts_with(col, "subgroup.")) {
        std::string dim = col.substr(9);
        if (!dim.empty()) return {role::subgroup, dim, 0};
    }
    if (starts_with(col, "feat_")) {
        std::string name = col.substr(5);
        if (!name.empty()) return {role::feature, name, 0};
    }
    if (starts_with(col, "score.") || starts_with(col, "rationale.")) {
        bool is_score = starts_with(col, "score.");
        std::string rest = col.substr(is_score ? 6 : 10);
        auto dot = rest.rfind('.');
        if (dot != std::string::npos && dot > 0) {
            auto run = parse_int(rest.substr(dot + 1));
            if (run && *run >= 1)
                return {is_score ? role::score : role::rationale, rest.substr(0, dot),
                        static_cast<int>(*run)};
        }
        throw error(errc::schema_error, "column '" + col + "' must be " +
                                            (is_score ? "score.<source>.<run>" : "rationale.<source>.<run>") +
                                            " with run >= 1");
    }
    throw error(errc::schema_error, "unrecognized column '" + col + "'");
}

struct row_problem {
    errc kind;
    std::string reason;
};

class record_builder {
public:
    record_builder(const ingest_options& opts) : opts_(opts) {}

    // Returns problems found; record is still fully populated on failure so
    // lenient callers can report context.
    std::vector<row_problem> validate(const score_record& rec, const std::set<std::string>& seen_ids) const {
        std::vector<row_problem> problems;
        const auto& scale = opts_.scale;
        if (rec.response_id.empty())
            problems.push_back({errc::schema_error, "empty response_id"});
        else if (seen_ids.count(rec.response_id))
            problems.push_back({errc::schema_error, "duplicate response_id '" + rec.response_id + "'"});
        if (rec.human_final && !scale.contains(*rec.human_final))
            problems.push_back({errc::range_error,
                                "human_final " + std::to_string(*rec.human_final) + " outside scale [" +
                                    std::to_string(scale.min) + "," + std::to_string(scale.max) + "]"});
        for (int s : rec.human_rater_scores)
            if (!scale.contains(s))
                problems.push_back({errc::range_error,
                                    "human rater score " + std::to_string(s) + " outside scale"});
        for (const auto& [key, v] : rec.ai_scores) {
            bool continuous = opts_.continuous_sources.count(key.source_id) > 0;
            if (continuous) continue;
            double r = std::round(v);
            if (std::abs(v - r) > 1e-9)
                problems.push_back({errc::range_error,
                                    "score." + key.source_id + "." + std::to_string(key.run) +
                                        " = " + num_to_string(v) + " is not an integer"});
            else if (!scale.contains(static_cast<int>(r)))
                problems.push_back({errc::range_error,
                                    "score." + key.source_id + "." + std::to_string(key.run) + " = " +
                                        num_to_string(v) + " outside scale"});
        }
        return problems;
    }

private:
    const ingest_options& opts_;
};

void apply_field(score_record& rec, const column_spec& spec, const std::string& raw,
                 std::size_t row_number) {
    using role = column_spec::role;
    if (raw.empty() && spec.kind != role::response_id) return;
    switch (spec.kind) {
        case role::response_id: rec.response_id = raw; break;
        case role::prompt_id: rec.prompt_id = raw; break;
        case role::response_text: rec.response_text = raw; break;
        case role::human_final: {
            auto v = parse_int(raw);
            if (!v) throw error(errc::schema_error,
                                "row " + std::to_string(row_number) + ": human_final '" + raw +
                                    "' is not an integer");
            rec.human_final = static_cast<int>(*v);
            break;
        }
        case role::human_rater: {
            auto v = parse_int(raw);
            if (!v) throw error(errc::schema_error,
                                "row " + std::to_string(row_number) + ": human rater score '" + raw +
                                    "' is not an integer");
            if (static_cast<std::size_t>(spec.run) > rec.human_rater_scores.size())
                rec.human_rater_scores.resize(spec.run, INT32_MIN);
            rec.human_rater_scores[spec.run - 1] = static_cast<int>(*v);
            break;
        }
        case role::subgroup: rec.subgroups[spec.name] = raw; break;
        case role::feature: {
            auto v = parse_double(raw);
            if (!v) throw error(errc::schema_error,
                                "row " + std::to_string(row_number) + ": feat_" + spec.name + " '" +
                                    raw + "' is not numeric");
            rec.features[spec.name] = *v;
            break;
        }
        case role::advisory:
            for (auto& name : split(raw, ';'))
                if (!trim(name).empty()) rec.advisories.insert(trim(name));
            break;
        case role::score: {
            auto v = parse_double(raw);
            if (!v) throw error(errc::schema_error,
                                "row " + std::to_string(row_number) + ": score." + spec.name + " '" +
                                    raw + "' is not numeric");
            rec.ai_scores[{spec.name, spec.run}] = *v;
            break;
        }
        case role::rationale: rec.rationales[{spec.name, spec.run}] = raw; break;
    }
}

void finish_record(score_record& rec) {
    // drop rater slots never filled (sparse human_r columns)
    std::erase(rec.human_rater_scores, INT32_MIN);
}

load_result assemble(std::vector<score_record> rows, const ingest_options& opts,
                     const std::set<std::string>& score_sources) {
    opts.scale.validate();
    load_result out;
    out.data.scale = opts.scale;
    for (const auto& id : score_sources) {
        source_info info;
        info.id = id;
        if (opts.continuous_sources.count(id)) {
            info.kind = source_kind::feature_engine;
            info.continuous = true;
        } else if (auto it = opts.source_kinds.find(id); it != opts.source_kinds.end()) {
            info.kind = it->second;
        }
        out.data.source_catalog.push_back(info);
    }

    record_builder builder(opts);
    std::set<std::string> seen_ids;
    std::size_t row_number = 0;
    for (auto& rec : rows) {
        ++row_number;
        auto problems = builder.validate(rec, seen_ids);
        if (problems.empty()) {
            seen_ids.insert(rec.response_id);
            out.data.records.push_back(std::move(rec));
            continue;
        }
        if (opts.strict) {
            const auto& p = problems.front();
            throw error(p.kind, "row " + std::to_string(row_number) + " (response '" +
                                    rec.response_id + "'): " + p.reason);
        }
        std::string reasons;
        for (const auto& p : problems) {
            if (!reasons.empty()) reasons += "; ";
            reasons += p.reason;
        }
        out.rejects.push_back({row_number, rec.response_id, reasons});
    }
    out.data.validate_catalog();
    return out;
}

load_result load_csv(const std::filesystem::path& path, const ingest_options& opts) {
    csv_table table = read_csv(path);
    if (table.header.empty())
        throw error(errc::schema_error, path.string() + ": empty file, no header");

    std::vector<column_spec> specs;
    bool have_response_id = false;
    for (const auto& col : table.header) {
        specs.push_back(classify_column(col));
        if (specs.back().kind == column_spec::role::response_id) have_response_id = true;
    }
    if (!have_response_id)
        throw error(errc::schema_error, path.string() + ": required column 'response_id' missing");

    std::set<std::string> score_sources;
    for (const auto& s : specs)
        if (s.kind == column_spec::role::score || s.kind == column_spec::role::rationale)
            score_sources.insert(s.name);

    std::vector<score_record> rows;
    std::size_t row_number = 0;
    for (const auto& row : table.rows) {
        ++row_number;
        if (row.size() != table.header.size())
            throw error(errc::schema_error,
                        "row " + std::to_string(row_number) + ": " + std::to_string(row.size()) +
                            " fields, header has " + std::to_string(table.header.size()));
        score_record rec;
        rec.prompt_id = "default";
        for (std::size_t c = 0; c < row.size(); ++c) apply_field(rec, specs[c], row[c], row_number);
        finish_record(rec);
        rows.push_back(std::move(rec));
    }
    return assemble(std::move(rows), opts, score_sources);
}

load_result load_jsonl(const std::filesystem::path& path, const ingest_options& opts) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw error(errc::io_error, "cannot open " + path.string());

    std::vector<score_record> rows;
    std::set<std::string> score_sources;
    std::string line;
    std::size_t row_number = 0;
    while (std::getline(in, line)) {
        if (trim(line).empty() || line[0] == '#') continue;
        ++row_number;
        json obj = json::parse(line, nullptr, false);
        if (obj.is_discarded() || !obj.is_object())
            throw error(errc::schema_error, "line " + std::to_string(row_number) + ": not a JSON object");
        score_record rec;
        rec.prompt_id = "default";
        bool have_response_id = false;
        for (const auto& [key, val] : obj.items()) {
            auto spec = classify_column(key);
            if (spec.kind == column_spec::role::response_id) have_response_id = true;
            if (spec.kind == column_spec::role::score || spec.kind == column_spec::role::rationale)
                score_sources.insert(spec.name);
            std::string raw;
            if (val.is_string()) raw = val.get<std::string>();
            else if (val.is_number_integer()) raw = num_to_string(val.get<long long>());
            else if (val.is_number()) raw = num_to_string(val.get<double>());
            else if (val.is_null()) continue;
            else throw error(errc::schema_error,
                             "line " + std::to_string(row_number) + ": field '" + key +
                                 "' must be a string or number");
            apply_field(rec, spec, raw, row_number);
        }
        if (!have_response_id)
            throw error(errc::schema_error,
                        "line " + std::to_string(row_number) + ": required field 'response_id' missing");
        finish_record(rec);
        rows.push_back(std::move(rec));
    }
    return assemble(std::move(rows), opts, score_sources);
}

bool is_jsonl(const std::filesystem::path& path) {
    auto ext = path.extension().string();
    return ext == ".jsonl" || ext == ".ndjson";
}

} // namespace

load_result load_dataset(const std::filesystem::path& path, const ingest_options& opts) {
    if (!std::filesystem::exists(path))
        throw error(errc::io_error, "no such file: " + path.string());
    return is_jsonl(path) ? load_jsonl(path, opts) : load_csv(path, opts);
}

namespace {

struct wide_header {
    std::size_t n_raters = 0;
    std::vector<std::string> subgroup_dims;
    std::vector<std::string> feature_names;
    std::vector<source_run_key> score_keys;
    std::vector<source_run_key> rationale_keys;
    bool any_text = false;
    bool any_human = false;
    bool any_advisory = false;
};

wide_header collect_header(const dataset& ds) {
    wide_header h;
    std::set<std::string> dims, feats;
    std::set<source_run_key> scores, rats;
    for (const auto& rec : ds.records) {
        h.n_raters = std::max(h.n_raters, rec.human_rater_scores.size());
        h.any_text |= rec.response_text.has_value();
        h.any_human |= rec.human_final.has_value();
        h.any_advisory |= !rec.advisories.empty();
        for (const auto& [d, _] : rec.subgroups) dims.insert(d);
        for (const auto& [f, _] : rec.features) feats.insert(f);
        for (const auto& [k, _] : rec.ai_scores) scores.insert(k);
        for (const auto& [k, _] : rec.rationales) rats.insert(k);
    }
    h.subgroup_dims.assign(dims.begin(), dims.end());
    h.feature_names.assign(feats.begin(), feats.end());
    h.score_keys.assign(scores.begin(), scores.end());
    h.rationale_keys.assign(rats.begin(), rats.end());
    return h;
}

std::string advisory_field(const score_record& rec) {
    std::vector<std::string> names(rec.advisories.begin(), rec.advisories.end());
    return join(names, ";");
}

} // namespace

void save_dataset_csv(const dataset& ds, const std::filesystem::path& path,
                      const std::vector<std::string>& header_comments) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw error(errc::io_error, "cannot write " + path.string());
    for (const auto& c : header_comments) out << "# " << c << "\n";

    wide_header h = collect_header(ds);
    std::vector<std::string> cols = {"response_id", "prompt_id"};
    if (h.any_text) cols.push_back("response_text");
    if (h.any_human) cols.push_back("human_final");
    for (std::size_t i = 1; i <= h.n_raters; ++i) cols.push_back("human_r" + std::to_string(i));
    for (const auto& d : h.subgroup_dims) cols.push_back("subgroup." + d);
    for (const auto& f : h.feature_names) cols.push_back("feat_" + f);
    if (h.any_advisory) cols.push_back("advisory");
    for (const auto& k : h.score_keys)
        cols.push_back("score." + k.source_id + "." + std::to_string(k.run));
    for (const auto& k : h.rationale_keys)
        cols.push_back("rationale." + k.source_id + "." + std::to_string(k.run));
    write_csv_row(out, cols);

    for (const auto& rec : ds.records) {
        std::vector<std::string> row = {rec.response_id, rec.prompt_id};
        if (h.any_text) row.push_back(rec.response_text.value_or(""));
        if (h.any_human)
            row.push_back(rec.human_final ? std::to_string(*rec.human_final) : "");
        for (std::size_t i = 0; i < h.n_raters; ++i)
            row.push_back(i < rec.human_rater_scores.size()
                              ? std::to_string(rec.human_rater_scores[i])
                              : "");
        for (const auto& d : h.subgroup_dims) {
            auto it = rec.subgroups.find(d);
            row.push_back(it != rec.subgroups.end() ? it->second : "");
        }
        for (const auto& f : h.feature_names) {
            auto it = rec.features.find(f);
            row.push_back(it != rec.features.end() ? num_to_string(it->second) : "");
        }
        if (h.any_advisory) row.push_back(advisory_field(rec));
        for (const auto& k : h.score_keys) {
            auto it = rec.ai_scores.find(k);
            row.push_back(it != rec.ai_scores.end() ? num_to_string(it->second) : "");
        }
        for (const auto& k : h.rationale_keys) {
            auto it = rec.rationales.find(k);
            row.push_back(it != rec.rationales.end() ? it->second : "");
        }
        write_csv_row(out, row);
    }
}

void save_dataset_jsonl(const dataset& ds, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw error(errc::io_error, "cannot write " + path.string());
    for (const auto& rec : ds.records) {
        json obj;
        obj["response_id"] = rec.response_id;
        obj["prompt_id"] = rec.prompt_id;
        if (rec.response_text) obj["response_text"] = *rec.response_text;
        if (rec.human_final) obj["human_final"] = *rec.human_final;
        for (std::size_t i = 0; i < rec.human_rater_scores.size(); ++i)
            obj["human_r" + std::to_string(i + 1)] = rec.human_rater_scores[i];
        for (const auto& [d, label] : rec.subgroups) obj["subgroup." + d] = label;
        for (const auto& [f, v] : rec.features) obj["feat_" + f] = v;
        if (!rec.advisories.empty()) obj["advisory"] = advisory_field(rec);
        for (const auto& [k, v] : rec.ai_scores)
            obj["score." + k.source_id + "." + std::to_string(k.run)] = v;
        for (const auto& [k, v] : rec.rationales)
            obj["rationale." + k.source_id + "." + std::to_string(k.run)] = v;
        out << obj.dump() << "\n";
    }
}

} // namespace scoreval
