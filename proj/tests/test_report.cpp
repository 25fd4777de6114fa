#include <doctest.h>

#include <set>

#include "scoreval/report.hpp"
#include "scoreval/util.hpp"
#include "test_helpers.hpp"

using namespace scoreval;
using nlohmann::json;

namespace {

evidence_artifact make(const std::string& kind, const std::string& name,
                       json payload = json::object()) {
    evidence_artifact art;
    art.kind = kind;
    art.name = name;
    art.payload = std::move(payload);
    art.provenance = "test " + kind;
    return art;
}

// everything the seeded checklist can take from analysis outputs
analysis_bundle full_bundle() {
    analysis_bundle bundle;
    json agreement_rows =
        json{{"rows", json::array({json{{"pair", "m vs human"}, {"n", 100},    {"smd", -0.5},
                                        {"pct_exact", 40.0},    {"pct_adjacent", 90.0},
                                        {"qwk", 0.6},           {"pearson", 0.7},
                                        {"spearman", 0.7}}})}};
    bundle.artifacts = {
        make("harness_protocol", "protocol"),
        make("similarity_profile", "sim"),
        make("rubric_alignment", "rubric"),
        make("advisory_summary", "cohorts"),
        make("injection_hardening", "tags"),
        make("run_pair", "runs", agreement_rows),
        make("trend", "trend"),
        make("agreement_human", "agree_h", agreement_rows),
        make("agreement_sources", "agree_s", agreement_rows),
        make("correlation_matrix", "corr"),
        make("regression_model", "reg"),
        make("subgroup_smd_audit", "smd"),
        make("subgroup_agreement", "sub_agree"),
        make("feature_subgroup_summary", "feat_sub"),
    };
    return bundle;
}

ledger_config full_scope() {
    ledger_config cfg;
    cfg.declare = {
        {"training_data_representativeness", "General-purpose pretraining; composition unknown."},
        {"llm_choice", "model-x selected for rubric-following ability."},
        {"fine_tuning_disclosure", "No fine-tuning was performed."},
        {"icl_disclosure", "No in-context examples were provided."},
        {"sample_quality", "Two trained raters with full adjudication of disagreements."},
        {"training_fairness", "No ratings were used for tuning, so none required auditing."},
    };
    cfg.out_of_scope = {
        {"external_section_scores", "no external scores exist for this administration"},
        {"external_test_scores", "no external tests available"},
        {"expert_review", "expert annotation round not yet commissioned"},
        {"consequences_analysis", "scores not yet used operationally"},
    };
    return cfg;
}

const ledger_row* find_row(const evidence_ledger& ledger, const std::string& item_id) {
    for (const auto& row : ledger.rows)
        if (row.item_id == item_id) return &row;
    return nullptr;
}

} // namespace

TEST_CASE("a bundle without external inputs leaves external_relations missing") {
    analysis_bundle bundle;
    bundle.artifacts = {make("agreement_human", "agree")};
    evidence_ledger ledger = build_ledger(bundle, {});
    for (const auto& row : ledger.rows)
        if (row.category == evidence_category::external_relations) {
            CHECK(row.status == evidence_status::missing);
            CHECK(row.notes.find("to fill:") == 0);
        }
    CHECK(find_row(ledger, "concordance_human")->status == evidence_status::present);
}

TEST_CASE("the full synthetic bundle leaves no in-scope row missing") {
    evidence_ledger ledger = build_ledger(full_bundle(), full_scope());
    for (const auto& row : ledger.rows) {
        INFO("row ", row.item_id);
        CHECK(row.status != evidence_status::missing);
    }
}

TEST_CASE("every category appears in the ledger") {
    evidence_ledger ledger = build_ledger({}, {});
    std::set<evidence_category> seen;
    for (const auto& row : ledger.rows) seen.insert(row.category);
    CHECK(seen.size() == 6);
}

TEST_CASE("build_ledger is deterministic and status-monotone") {
    analysis_bundle partial;
    partial.artifacts = {make("agreement_human", "agree"), make("run_pair", "runs")};
    evidence_ledger a = build_ledger(partial, {});
    evidence_ledger b = build_ledger(partial, {});
    CHECK(a == b);

    analysis_bundle more = partial;
    more.artifacts.push_back(make("subgroup_smd_audit", "smd"));
    evidence_ledger grown = build_ledger(more, {});
    for (std::size_t i = 0; i < a.rows.size(); ++i) {
        if (a.rows[i].status == evidence_status::present)
            CHECK(grown.rows[i].status == evidence_status::present);
    }
}

TEST_CASE("each artifact lands in exactly one row") {
    analysis_bundle bundle = full_bundle();
    bundle.artifacts.push_back(make("mystery_kind", "odd"));
    evidence_ledger ledger = build_ledger(bundle, {});

    std::map<std::string, int> seen; // artifact name -> rows containing it
    for (const auto& row : ledger.rows)
        for (const auto& art : row.findings) ++seen[art.name];
    for (const auto& art : bundle.artifacts) {
        INFO("artifact ", art.name);
        CHECK(seen[art.name] == 1);
    }

    const ledger_row* extra = find_row(ledger, "extra.mystery_kind");
    REQUIRE(extra != nullptr);
    CHECK(extra->status == evidence_status::present);
}

TEST_CASE("declarations route to their items; scope labels apply") {
    ledger_config cfg;
    cfg.declare = {{"fine_tuning_disclosure", "No fine-tuning was performed."}};
    cfg.out_of_scope = {{"consequences_analysis", "not deployed"}};
    cfg.partial = {{"concordance_human", "only one prompt family covered"}};

    analysis_bundle bundle;
    bundle.artifacts = {make("agreement_human", "agree")};
    evidence_ledger ledger = build_ledger(bundle, cfg);

    const ledger_row* ft = find_row(ledger, "fine_tuning_disclosure");
    REQUIRE(ft != nullptr);
    CHECK(ft->status == evidence_status::present);
    REQUIRE(ft->findings.size() == 1);
    CHECK(ft->findings[0].kind == "declaration");

    const ledger_row* cons = find_row(ledger, "consequences_analysis");
    CHECK(cons->status == evidence_status::out_of_scope);
    CHECK(cons->notes == "not deployed");

    const ledger_row* conc = find_row(ledger, "concordance_human");
    CHECK(conc->status == evidence_status::partial);
    CHECK(conc->notes.find("only one prompt family") != std::string::npos);
}

TEST_CASE("markdown render includes the agreement column order and conventions") {
    evidence_ledger ledger = build_ledger(full_bundle(), full_scope());
    const std::string md = render_report_markdown(ledger);
    CHECK(md.find("| Pair | n | SMD | % Exact | % Adjacent | QWK | Pearson | Spearman |") !=
          std::string::npos);
    CHECK(md.find("## fairness") != std::string::npos);
    CHECK(md.find("## Conventions") != std::string::npos);
    CHECK(md.find("positive values mean the source scores higher") != std::string::npos);
}

TEST_CASE("structured render round-trips losslessly") {
    evidence_ledger ledger = build_ledger(full_bundle(), full_scope());
    json doc = render_report_structured(ledger);
    evidence_ledger back = parse_report_structured(doc);
    CHECK(back == ledger);

    SUBCASE("extra top-level keys are tolerated") {
        doc["meta"] = json{{"version", "x"}};
        CHECK(parse_report_structured(doc) == ledger);
    }
    SUBCASE("wrong schema is rejected") {
        json bad = doc;
        bad["schema"] = "something.else";
        CHECK_THROWS_AS(parse_report_structured(bad), error);
    }
}

TEST_CASE("an empty ledger renders every category with missing rows") {
    evidence_ledger ledger = build_ledger({}, {});
    const std::string md = render_report_markdown(ledger);
    for (const char* cat : {"internal_structure", "external_relations", "response_processes",
                            "test_content", "consequences", "fairness"})
        CHECK(md.find(std::string("## ") + cat) != std::string::npos);
    CHECK(md.find("missing") != std::string::npos);
}

TEST_CASE("render_report format dispatch") {
    evidence_ledger ledger = build_ledger({}, {});
    CHECK(render_report(ledger, "markdown").find("# Validity evidence ledger") == 0);
    CHECK_NOTHROW(render_report(ledger, "structured"));
    try {
        render_report(ledger, "pdf");
        FAIL("expected unsupported_format");
    } catch (const error& e) {
        CHECK(e.kind() == errc::unsupported_format);
    }
}

TEST_CASE("artifact files round-trip through save and load") {
    helpers::temp_dir dir("artifacts");
    evidence_artifact art = make("agreement_human", "agree", json{{"rows", json::array()}});
    save_artifact(art, dir.file("agree.artifact.json"), json{{"version", "0.1.0"}});
    evidence_artifact back = load_artifact(dir.file("agree.artifact.json"));
    CHECK(back == art);

    analysis_bundle bundle = load_bundle(dir.path);
    REQUIRE(bundle.artifacts.size() == 1);
    CHECK(bundle.artifacts[0] == art);

    SUBCASE("non-artifact files are ignored") {
        helpers::write_file(dir.file("notes.txt"), "hello");
        CHECK(load_bundle(dir.path).artifacts.size() == 1);
    }
    SUBCASE("an empty directory is an empty bundle") {
        helpers::temp_dir other("empty");
        CHECK(load_bundle(other.path).artifacts.empty());
    }
}
