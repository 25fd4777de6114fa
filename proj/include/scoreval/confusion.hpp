#pragma once

#include <filesystem>

#include "scoreval/types.hpp"

namespace scoreval {

struct confusion_matrix {
    score_scale scale;
    std::vector<std::vector<long long>> counts; // K x K, indexed by score - scale.min
    std::string row_source;
    std::string col_source;

    int size() const { return scale.size(); }
    long long total() const;
    long long at(int row_score, int col_score) const;
    long long& cell(int row_score, int col_score);
    std::vector<long long> row_marginals() const;
    std::vector<long long> col_marginals() const;
    confusion_matrix transposed() const;

    static confusion_matrix zeros(const score_scale&, std::string row_source = {},
                                  std::string col_source = {});
};

struct pair_confusion {
    confusion_matrix matrix;
    std::size_t n_excluded = 0; // records missing one of the two scores
};

// Tallies records carrying both scores; both sources must be discrete.
pair_confusion confusion_from_pairs(const dataset&, const source_ref& a, const source_ref& b);

// Row-conditional integer percentages, Table-7 shaped. Only levels with at
// least one observation appear as rows.
struct conditional_percent_table {
    score_scale scale;
    std::string row_source;
    std::string col_source;
    std::vector<int> row_levels;
    std::vector<long long> row_counts;
    std::vector<std::vector<int>> cell_percents; // per row, scale.size() entries

    void validate() const; // row invariants: counts positive, percents sum to 100 +/- 2
};

// Rebuilds counts from conditional percentages: each cell is
// round(percent/100 * row_count); the row's largest cell absorbs the rounding
// residual (ties broken toward the lower score), so rows sum exactly.
confusion_matrix confusion_from_conditional(const conditional_percent_table&);

// CSV with columns: level, n, p<min>..p<max>.
conditional_percent_table load_percent_table(const std::filesystem::path&, const score_scale&);
void save_percent_table(const conditional_percent_table&, const std::filesystem::path&,
                        const std::vector<std::string>& header_comments = {});

// Adds a discrete copy of a continuous source: values rounded half away from
// zero, then clamped to the scale. new_id defaults to "<source>_rounded".
dataset round_scores(const dataset&, const std::string& source_id, std::string new_id = {});

} // namespace scoreval
