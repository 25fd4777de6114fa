#pragma once

#include <compare>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "scoreval/error.hpp"

namespace scoreval {

// Discrete score scale. When zero_reserved is set, the 0 point exists for
// atypical responses (off-topic, unusual challenges) and min must be 0.
struct score_scale {
    int min = 1;
    int max = 6;
    bool zero_reserved = false;

    int size() const { return max - min + 1; }
    bool contains(int v) const { return v >= min && v <= max; }
    bool contains(double v) const;
    void validate() const;

    bool operator==(const score_scale&) const = default;
};

enum class source_kind { human, feature_engine, llm };

const char* source_kind_name(source_kind);
source_kind parse_source_kind(const std::string&);

struct source_info {
    std::string id;
    source_kind kind = source_kind::llm;
    bool continuous = false;
    bool derived = false; // produced by round_scores / average_runs, not ingested

    bool operator==(const source_info&) const = default;
};

// Identifies one score column: the reserved id "human" selects the final human
// rating; anything else selects (source_id, run_index) from ai_scores.
struct source_ref {
    std::string id;
    int run = 1;

    bool is_human() const { return id == "human"; }
    std::string label() const { return is_human() ? id : id + ":" + std::to_string(run); }

    bool operator==(const source_ref&) const = default;
};

// Accepts "human", "gpt4o", or "gpt4o:2".
source_ref parse_source_ref(const std::string& text);

struct source_run_key {
    std::string source_id;
    int run = 1;

    auto operator<=>(const source_run_key&) const = default;
};

struct score_record {
    std::string response_id;
    std::string prompt_id;
    std::optional<std::string> response_text;
    std::optional<int> human_final;
    std::vector<int> human_rater_scores;
    std::map<source_run_key, double> ai_scores;
    std::map<std::string, std::string> subgroups;
    std::map<std::string, double> features;
    std::set<std::string> advisories;
    std::map<source_run_key, std::string> rationales;

    bool operator==(const score_record&) const = default;
};

struct dataset {
    score_scale scale;
    std::vector<score_record> records;
    std::vector<source_info> source_catalog;

    const source_info* find_source(const std::string& id) const;
    bool is_continuous(const source_ref&) const;
    std::optional<double> value(const score_record&, const source_ref&) const;
    void add_source(const source_info&); // no-op if id already present
    void validate_catalog() const;

    bool operator==(const dataset&) const = default;
};

// Pairwise-complete extraction of two score columns, in record order.
struct score_pairs {
    std::vector<double> a;
    std::vector<double> b;
    std::vector<std::size_t> record_index;
    std::size_t n_excluded = 0; // records holding neither or only one of the two
};

score_pairs paired_scores(const dataset&, const source_ref& a, const source_ref& b);

// Word count of response_text: whitespace-delimited tokens.
std::size_t word_count(const std::string& text);

} // namespace scoreval
