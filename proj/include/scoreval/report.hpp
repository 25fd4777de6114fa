#pragma once

#include <filesystem>

#include <json.hpp>

#include "scoreval/types.hpp"

namespace scoreval {

enum class evidence_category {
    internal_structure,
    external_relations,
    response_processes,
    test_content,
    consequences,
    fairness,
};

const char* evidence_category_name(evidence_category);
evidence_category parse_evidence_category(const std::string&);

enum class evidence_status { present, partial, missing, out_of_scope };

const char* evidence_status_name(evidence_status);
evidence_status parse_evidence_status(const std::string&);

// One analysis output (or operator declaration) collected for the ledger.
struct evidence_artifact {
    std::string kind; // routing key, e.g. "agreement_human", "subgroup_smd_audit"
    std::string name;
    nlohmann::json payload;
    std::string provenance; // operation/command that produced it

    bool operator==(const evidence_artifact&) const = default;
};

struct analysis_bundle {
    std::vector<evidence_artifact> artifacts;
};

struct ledger_row {
    std::string item_id;
    evidence_category category = evidence_category::internal_structure;
    std::string item; // human-readable description
    evidence_status status = evidence_status::missing;
    std::string notes; // fills-hint when missing, rationale when out of scope
    std::vector<evidence_artifact> findings;
    std::vector<std::string> provenance;

    bool operator==(const ledger_row&) const = default;
};

struct evidence_ledger {
    std::vector<ledger_row> rows;

    bool operator==(const evidence_ledger&) const = default;
};

struct checklist_item {
    std::string id;
    evidence_category category;
    std::string description;
    std::vector<std::string> artifact_kinds; // kinds that fill this item
    std::string fills_hint;                  // what analysis would fill it
};

// The seeded expected-evidence checklist; operators may extend it via
// ledger_config::extra_items.
const std::vector<checklist_item>& default_checklist();

struct ledger_config {
    std::map<std::string, std::string> out_of_scope; // item id -> rationale
    std::map<std::string, std::string> partial;      // item id -> missing sub-analysis note
    std::map<std::string, std::string> declare;      // item id -> declaration text
    std::vector<checklist_item> extra_items;
};

ledger_config ledger_config_from_json_file(const std::filesystem::path&);

// Resolves each checklist item against the bundle. Artifacts of kind
// "declaration" route to the item named in payload["item"]. Every artifact
// lands in exactly one row; unknown kinds append an extra row.
evidence_ledger build_ledger(const analysis_bundle&, const ledger_config& = {});

std::string render_report_markdown(const evidence_ledger&);
nlohmann::json render_report_structured(const evidence_ledger&);
evidence_ledger parse_report_structured(const nlohmann::json&);

// format is "markdown" or "structured"; anything else is unsupported_format.
std::string render_report(const evidence_ledger&, const std::string& format);

// Artifact files: {"schema": "scoreval.artifact.v1", kind, name, provenance,
// payload}; write adds a meta block the loader ignores.
void save_artifact(const evidence_artifact&, const std::filesystem::path&,
                   const nlohmann::json& meta = {});
evidence_artifact load_artifact(const std::filesystem::path&);

// Reads every *.artifact.json under dir (sorted by filename).
analysis_bundle load_bundle(const std::filesystem::path& dir);

} // namespace scoreval
