#include "scoreval/report.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "scoreval/util.hpp"

namespace scoreval {

using nlohmann::json;

const char* evidence_category_name(evidence_category c) {
    switch (c) {
        case evidence_category::internal_structure: return "internal_structure";
        case evidence_category::external_relations: return "external_relations";
        case evidence_category::response_processes: return "response_processes";
        case evidence_category::test_content: return "test_content";
        case evidence_category::consequences: return "consequences";
        case evidence_category::fairness: return "fairness";
    }
    return "internal_structure";
}

evidence_category parse_evidence_category(const std::string& s) {
    for (auto c : {evidence_category::internal_structure, evidence_category::external_relations,
                   evidence_category::response_processes, evidence_category::test_content,
                   evidence_category::consequences, evidence_category::fairness})
        if (s == evidence_category_name(c)) return c;
    throw error(errc::schema_error, "unknown evidence category '" + s + "'");
}

const char* evidence_status_name(evidence_status s) {
    switch (s) {
        case evidence_status::present: return "present";
        case evidence_status::partial: return "partial";
        case evidence_status::missing: return "missing";
        case evidence_status::out_of_scope: return "out_of_scope";
    }
    return "missing";
}

evidence_status parse_evidence_status(const std::string& s) {
    for (auto st : {evidence_status::present, evidence_status::partial, evidence_status::missing,
                    evidence_status::out_of_scope})
        if (s == evidence_status_name(st)) return st;
    throw error(errc::schema_error, "unknown evidence status '" + s + "'");
}

const std::vector<checklist_item>& default_checklist() {
    static const std::vector<checklist_item> items = {
        {"prompting_protocol", evidence_category::internal_structure,
         "Prompting protocol documented (template, temperature, runs)",
         {"harness_protocol"},
         "run the score command; it records the protocol artifact"},
        {"rationale_construct_consistency", evidence_category::internal_structure,
         "Rationale similarity tracks score differences (construct consistency)",
         {"similarity_profile"},
         "run the rationale command for a similarity-by-score-difference profile"},
        {"training_data_representativeness", evidence_category::internal_structure,
         "Pre-training / fine-tuning data representativeness documented",
         {},
         "declare what is known about the model's training data"},
        {"external_section_scores", evidence_category::external_relations,
         "Correlations with section/total scores",
         {"external_correlations"},
         "supply external section or total scores and correlate them with the AI scores"},
        {"external_test_scores", evidence_category::external_relations,
         "Correlations with other tests or external variables",
         {"external_test_correlations"},
         "supply scores from an external test and correlate them with the AI scores"},
        {"atypical_response_handling", evidence_category::response_processes,
         "Treatment of atypical responses (advisory cohorts)",
         {"advisory_summary"},
         "run the cohort command over advisory flags"},
        {"rationale_rubric_alignment", evidence_category::response_processes,
         "Rationales align with rubric level language",
         {"rubric_alignment"},
         "run the rationale command with a rubric-levels file"},
        {"prompt_injection_mitigation", evidence_category::response_processes,
         "Prompt-injection mitigation documented",
         {"injection_hardening"},
         "run the score command; it records the tag policy artifact"},
        {"expert_review", evidence_category::response_processes,
         "Expert review / annotation of responses and scores",
         {"expert_review"},
         "collect expert annotations and attach them as an expert_review artifact"},
        {"llm_choice", evidence_category::test_content,
         "Choice of model documented",
         {"model_choice"},
         "declare which model was used and why"},
        {"fine_tuning_disclosure", evidence_category::test_content,
         "Fine-tuning performed or explicitly not performed",
         {},
         "declare the fine-tuning status"},
        {"icl_disclosure", evidence_category::test_content,
         "In-context learning performed or explicitly not performed",
         {},
         "declare the in-context-learning status"},
        {"intra_llm_consistency", evidence_category::test_content,
         "Reproducibility across repeated runs",
         {"run_pair"},
         "score twice and run the consistency command on the two runs"},
        {"trend_monitoring", evidence_category::test_content,
         "Score consistency monitored over time on a fixed response set",
         {"trend"},
         "re-score the trend set per period and run the consistency command in window mode"},
        {"concordance_human", evidence_category::test_content,
         "Concordance with human ratings",
         {"agreement_human"},
         "run the agree command against the human reference"},
        {"concordance_engine", evidence_category::test_content,
         "Concordance with an existing automated engine",
         {"agreement_sources"},
         "run the agree command between the AI source and the engine source"},
        {"score_feature_association", evidence_category::test_content,
         "Association between scores and writing features",
         {"correlation_matrix", "regression_model"},
         "run the regress command with feature predictors or a correlation matrix"},
        {"sample_quality", evidence_category::test_content,
         "Quality of the evaluation sample and its human ratings",
         {},
         "declare how the human ratings were produced (raters, adjudication)"},
        {"consequences_analysis", evidence_category::consequences,
         "Intended and unintended consequences of score use",
         {"consequence_study"},
         "attach a consequence study artifact once score use is observed"},
        {"subgroup_smd", evidence_category::fairness,
         "Adjusted subgroup score differences vs the reference",
         {"subgroup_smd_audit"},
         "run the fairness command with a subgroup dimension"},
        {"subgroup_agreement", evidence_category::fairness,
         "Agreement metrics by subgroup",
         {"subgroup_agreement"},
         "run the fairness command; per-label agreement is part of its output"},
        {"training_fairness", evidence_category::fairness,
         "Fairness of ratings used in fine-tuning / in-context learning",
         {},
         "declare whether training or ICL used human ratings and how they were audited"},
        {"fairness_explainability_review", evidence_category::fairness,
         "Feature distributions by subgroup reviewed for unfairness sources",
         {"feature_subgroup_summary"},
         "run the fairness command on a dataset with feature columns"},
    };
    return items;
}

ledger_config ledger_config_from_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw error(errc::io_error, "cannot open " + path.string());
    json obj = json::parse(in, nullptr, false);
    if (obj.is_discarded() || !obj.is_object())
        throw error(errc::invalid_config, path.string() + ": not a JSON object");
    ledger_config cfg;
    const json out_of_scope = obj.value("out_of_scope", json::object());
    for (const auto& [k, v] : out_of_scope.items()) cfg.out_of_scope[k] = v.get<std::string>();
    const json partial = obj.value("partial", json::object());
    for (const auto& [k, v] : partial.items()) cfg.partial[k] = v.get<std::string>();
    const json declare = obj.value("declare", json::object());
    for (const auto& [k, v] : declare.items()) cfg.declare[k] = v.get<std::string>();
    for (const auto& item : obj.value("extra_items", json::array())) {
        checklist_item ci;
        ci.id = item.at("id").get<std::string>();
        ci.category = parse_evidence_category(item.at("category").get<std::string>());
        ci.description = item.at("description").get<std::string>();
        for (const auto& k : item.value("artifact_kinds", json::array()))
            ci.artifact_kinds.push_back(k.get<std::string>());
        ci.fills_hint = item.value("fills_hint", "");
        cfg.extra_items.push_back(std::move(ci));
    }
    return cfg;
}

evidence_ledger build_ledger(const analysis_bundle& bundle, const ledger_config& cfg) {
    std::vector<checklist_item> checklist = default_checklist();
    checklist.insert(checklist.end(), cfg.extra_items.begin(), cfg.extra_items.end());

    // synthesize declaration artifacts from the config
    analysis_bundle full = bundle;
    for (const auto& [item_id, text] : cfg.declare) {
        evidence_artifact art;
        art.kind = "declaration";
        art.name = item_id;
        art.payload = json{{"item", item_id}, {"text", text}};
        art.provenance = "operator declaration";
        full.artifacts.push_back(std::move(art));
    }

    std::map<std::string, std::size_t> item_index;
    evidence_ledger ledger;
    for (const auto& ci : checklist) {
        ledger_row row;
        row.item_id = ci.id;
        row.category = ci.category;
        row.item = ci.description;
        item_index[ci.id] = ledger.rows.size();
        ledger.rows.push_back(std::move(row));
    }

    std::map<std::string, std::string> kind_to_item;
    for (const auto& ci : checklist)
        for (const auto& k : ci.artifact_kinds) kind_to_item[k] = ci.id;

    for (const auto& art : full.artifacts) {
        std::string target;
        if (art.kind == "declaration") {
            if (!art.payload.is_object() || !art.payload.contains("item"))
                throw error(errc::schema_error,
                            "declaration artifact '" + art.name + "' lacks payload.item");
            target = art.payload.at("item").get<std::string>();
        } else if (auto it = kind_to_item.find(art.kind); it != kind_to_item.end()) {
            target = it->second;
        }
        if (target.empty() || !item_index.count(target)) {
            // unmapped evidence still gets exactly one row
            ledger_row row;
            row.item_id = "extra." + art.kind;
            row.category = evidence_category::test_content;
            row.item = "Additional evidence (" + art.kind + ")";
            if (auto it = item_index.find(row.item_id); it != item_index.end()) {
                ledger.rows[it->second].findings.push_back(art);
                ledger.rows[it->second].provenance.push_back(art.provenance);
                continue;
            }
            row.findings.push_back(art);
            row.provenance.push_back(art.provenance);
            item_index[row.item_id] = ledger.rows.size();
            ledger.rows.push_back(std::move(row));
            continue;
        }
        auto& row = ledger.rows[item_index.at(target)];
        row.findings.push_back(art);
        row.provenance.push_back(art.provenance);
    }

    for (auto& row : ledger.rows) {
        if (auto it = cfg.out_of_scope.find(row.item_id); it != cfg.out_of_scope.end()) {
            row.status = evidence_status::out_of_scope;
            row.notes = it->second;
            continue;
        }
        if (row.findings.empty()) {
            row.status = evidence_status::missing;
            for (const auto& ci : checklist)
                if (ci.id == row.item_id) row.notes = "to fill: " + ci.fills_hint;
            continue;
        }
        if (auto it = cfg.partial.find(row.item_id); it != cfg.partial.end()) {
            row.status = evidence_status::partial;
            row.notes = "still needed: " + it->second;
            continue;
        }
        row.status = evidence_status::present;
    }
    return ledger;
}

namespace {

// conventions that matter when reading the numbers; embedded in every render
const char* k_convention_notes[] = {
    "SMD is (mean(source) - mean(reference)) / sqrt((var(source) + var(reference)) / 2) with "
    "n-1 variances; positive values mean the source scores higher than the reference. Published "
    "agreement tables sometimes state the opposite orientation while reporting unsigned "
    "magnitudes, so compare |SMD| when cross-checking.",
    "Adjacent agreement counts |difference| <= 1 score point.",
    "Continuous scores are rounded half away from zero and clamped to the scale before any "
    "categorical metric (exact/adjacent/kappa).",
    "Subgroup SMDs first shift the source by its overall mean difference from the reference "
    "(computed on the full shared sample), then pool SDs within each subgroup.",
    "Subgroup rows under the configured minimum n are suppressed, never flagged.",
    "Rationale similarity uses raw bigram term-frequency vectors (lowercased; characters other "
    "than letters, digits and apostrophes stripped); no idf weighting and no neural embeddings.",
};

std::string md_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        if (c == '|') out += "\\|";
        else if (c == '\n') out += ' ';
        else out += c;
    }
    return out;
}

std::string fmt_metric(double v) {
    std::ostringstream ss;
    ss.imbue(std::locale::classic());
    ss.precision(4);
    ss << std::fixed << v;
    return ss.str();
}

void render_agreement_table(std::ostringstream& md, const json& payload) {
    if (!payload.contains("rows")) return;
    md << "\n| Pair | n | SMD | % Exact | % Adjacent | QWK | Pearson | Spearman |\n";
    md << "|---|---|---|---|---|---|---|---|\n";
    for (const auto& row : payload.at("rows")) {
        md << "| " << md_escape(row.value("pair", "")) << " | " << row.value("n", 0) << " | "
           << fmt_metric(row.value("smd", 0.0)) << " | " << fmt_metric(row.value("pct_exact", 0.0))
           << " | " << fmt_metric(row.value("pct_adjacent", 0.0)) << " | "
           << fmt_metric(row.value("qwk", 0.0)) << " | " << fmt_metric(row.value("pearson", 0.0))
           << " | " << fmt_metric(row.value("spearman", 0.0)) << " |\n";
    }
}

void render_subgroup_table(std::ostringstream& md, const json& payload) {
    if (!payload.contains("rows")) return;
    md << "\n| Label | n | adjusted SMD | flagged | suppressed |\n|---|---|---|---|---|\n";
    for (const auto& row : payload.at("rows")) {
        md << "| " << md_escape(row.value("label", "")) << " | " << row.value("n", 0) << " | ";
        if (row.contains("smd_adjusted") && !row.at("smd_adjusted").is_null())
            md << fmt_metric(row.at("smd_adjusted").get<double>());
        else
            md << "--";
        md << " | " << (row.value("flagged", false) ? "yes" : "no") << " | "
           << (row.value("suppressed", false) ? "yes" : "no") << " |\n";
    }
}

void render_cohort_table(std::ostringstream& md, const json& payload) {
    if (!payload.contains("rows") || !payload.contains("sources")) return;
    md << "\n| Cohort | n |";
    for (const auto& s : payload.at("sources")) md << " " << md_escape(s.get<std::string>()) << " M | SD |";
    md << "\n|---|---|";
    for (std::size_t i = 0; i < payload.at("sources").size(); ++i) md << "---|---|";
    md << "\n";
    auto emit = [&](const json& row) {
        md << "| " << md_escape(row.value("label", "")) << " | " << row.value("n", 0) << " |";
        for (const auto& st : row.at("per_source")) {
            if (st.contains("mean") && !st.at("mean").is_null())
                md << " " << fmt_metric(st.at("mean").get<double>()) << " |";
            else
                md << " -- |";
            if (st.contains("sd") && !st.at("sd").is_null())
                md << " " << fmt_metric(st.at("sd").get<double>()) << " |";
            else
                md << " -- |";
        }
        md << "\n";
    };
    for (const auto& row : payload.at("rows")) emit(row);
    if (payload.contains("total")) emit(payload.at("total"));
}

} // namespace

std::string render_report_markdown(const evidence_ledger& ledger) {
    std::ostringstream md;
    md << "# Validity evidence ledger\n";
    const evidence_category order[] = {
        evidence_category::internal_structure, evidence_category::external_relations,
        evidence_category::response_processes, evidence_category::test_content,
        evidence_category::consequences,       evidence_category::fairness,
    };
    for (auto cat : order) {
        md << "\n## " << evidence_category_name(cat) << "\n\n";
        md << "| Item | Status | Notes | Provenance |\n|---|---|---|---|\n";
        for (const auto& row : ledger.rows) {
            if (row.category != cat) continue;
            std::string prov = join(row.provenance, "; ");
            md << "| " << md_escape(row.item) << " | " << evidence_status_name(row.status) << " | "
               << md_escape(row.notes) << " | " << md_escape(prov) << " |\n";
        }
        for (const auto& row : ledger.rows) {
            if (row.category != cat) continue;
            for (const auto& art : row.findings) {
                if (art.kind == "agreement_human" || art.kind == "agreement_sources" ||
                    art.kind == "run_pair")
                    render_agreement_table(md, art.payload);
                else if (art.kind == "subgroup_smd_audit")
                    render_subgroup_table(md, art.payload);
                else if (art.kind == "advisory_summary")
                    render_cohort_table(md, art.payload);
            }
        }
    }
    md << "\n## Conventions\n\n";
    for (const auto* note : k_convention_notes) md << "- " << note << "\n";
    return md.str();
}

nlohmann::json render_report_structured(const evidence_ledger& ledger) {
    json doc;
    doc["schema"] = "scoreval.report.v1";
    json rows = json::array();
    for (const auto& row : ledger.rows) {
        json r;
        r["item_id"] = row.item_id;
        r["category"] = evidence_category_name(row.category);
        r["item"] = row.item;
        r["status"] = evidence_status_name(row.status);
        r["notes"] = row.notes;
        json findings = json::array();
        for (const auto& art : row.findings) {
            json a;
            a["kind"] = art.kind;
            a["name"] = art.name;
            a["payload"] = art.payload;
            a["provenance"] = art.provenance;
            findings.push_back(std::move(a));
        }
        r["findings"] = std::move(findings);
        r["provenance"] = row.provenance;
        rows.push_back(std::move(r));
    }
    doc["rows"] = std::move(rows);
    json conventions = json::array();
    for (const auto* note : k_convention_notes) conventions.push_back(note);
    doc["conventions"] = std::move(conventions);
    return doc;
}

evidence_ledger parse_report_structured(const nlohmann::json& doc) {
    if (!doc.is_object() || doc.value("schema", "") != "scoreval.report.v1")
        throw error(errc::schema_error, "not a scoreval.report.v1 document");
    evidence_ledger ledger;
    for (const auto& r : doc.at("rows")) {
        ledger_row row;
        row.item_id = r.at("item_id").get<std::string>();
        row.category = parse_evidence_category(r.at("category").get<std::string>());
        row.item = r.at("item").get<std::string>();
        row.status = parse_evidence_status(r.at("status").get<std::string>());
        row.notes = r.value("notes", "");
        for (const auto& a : r.value("findings", json::array())) {
            evidence_artifact art;
            art.kind = a.at("kind").get<std::string>();
            art.name = a.value("name", "");
            art.payload = a.value("payload", json());
            art.provenance = a.value("provenance", "");
            row.findings.push_back(std::move(art));
        }
        for (const auto& p : r.value("provenance", json::array()))
            row.provenance.push_back(p.get<std::string>());
        ledger.rows.push_back(std::move(row));
    }
    return ledger;
}

std::string render_report(const evidence_ledger& ledger, const std::string& format) {
    if (format == "markdown") return render_report_markdown(ledger);
    if (format == "structured") return render_report_structured(ledger).dump(2) + "\n";
    throw error(errc::unsupported_format, "format '" + format + "' (want markdown or structured)");
}

void save_artifact(const evidence_artifact& art, const std::filesystem::path& path,
                   const nlohmann::json& meta) {
    json doc;
    doc["schema"] = "scoreval.artifact.v1";
    doc["kind"] = art.kind;
    doc["name"] = art.name;
    doc["provenance"] = art.provenance;
    doc["payload"] = art.payload;
    if (!meta.is_null() && !meta.empty()) doc["meta"] = meta;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw error(errc::io_error, "cannot write " + path.string());
    out << doc.dump(2) << "\n";
}

evidence_artifact load_artifact(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw error(errc::io_error, "cannot open " + path.string());
    json doc = json::parse(in, nullptr, false);
    if (doc.is_discarded() || !doc.is_object() || doc.value("schema", "") != "scoreval.artifact.v1")
        throw error(errc::schema_error, path.string() + ": not a scoreval.artifact.v1 file");
    evidence_artifact art;
    art.kind = doc.at("kind").get<std::string>();
    art.name = doc.value("name", "");
    art.payload = doc.value("payload", json());
    art.provenance = doc.value("provenance", "");
    return art;
}

analysis_bundle load_bundle(const std::filesystem::path& dir) {
    analysis_bundle bundle;
    if (!std::filesystem::exists(dir)) return bundle;
    std::vector<std::filesystem::path> paths;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        const auto name = entry.path().filename().string();
        if (name.size() > 14 && name.substr(name.size() - 14) == ".artifact.json")
            paths.push_back(entry.path());
    }
    std::sort(paths.begin(), paths.end());
    for (const auto& p : paths) bundle.artifacts.push_back(load_artifact(p));
    return bundle;
}

} // namespace scoreval
