#pragma once

#include "scoreval/confusion.hpp"
#include "scoreval/types.hpp"

namespace scoreval {

struct cohort_stats {
    std::size_t n_scored = 0;
    std::optional<double> mean; // absent when no record in the cohort has the score
    std::optional<double> sd;   // absent for n_scored < 2
};

struct cohort_row {
    std::string label;
    std::size_t n = 0;
    std::vector<cohort_stats> per_source;
};

struct cohort_summary {
    std::vector<std::string> source_labels;
    std::vector<cohort_row> rows; // by n descending, then label
    cohort_row total;             // "All Responses"
};

// Cohorts are exact advisory-set combinations ("A + B" rows are distinct from
// "A" rows); records without advisories form the "No Advisories" cohort.
cohort_summary advisory_summary(const dataset&, const std::vector<source_ref>& sources);

// Secondary marginal view: one row per advisory name, counting every record
// that carries it (rows overlap, so ns do not sum to the total).
cohort_summary advisory_marginals(const dataset&, const std::vector<source_ref>& sources);

// Row percentages of col_source at each row_source level (both discrete);
// percents are integers rounded half away from zero.
conditional_percent_table conditional_distribution(const dataset&, const source_ref& row_source,
                                                   const source_ref& col_source);

} // namespace scoreval
