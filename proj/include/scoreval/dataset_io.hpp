#pragma once

#include <filesystem>
#include <map>

#include "scoreval/types.hpp"

namespace scoreval {

// Canonical wide schema shared by CSV and JSONL:
//   response_id, prompt_id, response_text, human_final, human_r<k>,
//   subgroup.<dimension>, feat_<name>, advisory (semicolon-joined),
//   score.<source>.<run>, rationale.<source>.<run>
struct ingest_options {
    score_scale scale;
    // When strict, the first invalid row raises range_error/schema_error
    // naming the row. Otherwise invalid rows land in the rejects report.
    bool strict = true;
    // Source ids whose scores are continuous (implies feature_engine kind).
    std::set<std::string> continuous_sources;
    // Optional explicit kinds, e.g. {"erater", feature_engine}. Unlisted
    // score sources default to llm.
    std::map<std::string, source_kind> source_kinds;
};

struct reject_row {
    std::size_t row_number = 0; // 1-based data row
    std::string response_id;
    std::string reason;
};

struct load_result {
    dataset data;
    std::vector<reject_row> rejects;
};

// Dispatches on extension: .jsonl / .ndjson parse as JSON lines, anything
// else as CSV.
load_result load_dataset(const std::filesystem::path&, const ingest_options&);

void save_dataset_csv(const dataset&, const std::filesystem::path&,
                      const std::vector<std::string>& header_comments = {});
void save_dataset_jsonl(const dataset&, const std::filesystem::path&);

} // namespace scoreval
