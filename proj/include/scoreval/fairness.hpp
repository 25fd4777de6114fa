#pragma once

#include "scoreval/agreement.hpp"
#include "scoreval/types.hpp"

namespace scoreval {

// Mean-matched source scores on the shared sample: every value is shifted by
// (mean(reference) - mean(source)), so the adjusted overall mean equals the
// reference mean exactly.
struct adjusted_scores {
    std::vector<std::size_t> record_index;
    std::vector<double> adjusted;
    std::vector<double> reference;
    double shift = 0;
};

adjusted_scores adjust_scores(const dataset&, const source_ref& source,
                              const source_ref& reference);

struct subgroup_row {
    std::string label;
    std::size_t n = 0;
    std::optional<double> smd_adjusted; // absent when not computable
    bool flagged = false;
    bool suppressed = false; // n below min_n; never flagged
    std::optional<double> qwk;
};

struct subgroup_audit {
    std::string dimension;
    double threshold = 0.10;
    std::size_t min_n = 50;
    std::vector<subgroup_row> rows; // label order
};

// Per-label SMD of globally mean-adjusted source scores against the
// reference, pooled SD taken within the subgroup. |SMD| > threshold flags a
// label for review; labels under min_n are suppressed instead.
subgroup_audit subgroup_smd(const dataset&, const source_ref& source, const source_ref& reference,
                            const std::string& dimension, double threshold = 0.10,
                            std::size_t min_n = 50);

struct subgroup_agreement_row {
    std::string label;
    std::size_t n = 0;
    std::optional<agreement_summary> summary; // absent when suppressed
};

std::vector<subgroup_agreement_row> subgroup_agreement(const dataset&, const source_ref& source,
                                                       const source_ref& reference,
                                                       const std::string& dimension,
                                                       std::size_t min_n = 2);

// Per-label feature means, for reviewing score differences against writing
// characteristics by group.
struct feature_subgroup_row {
    std::string label;
    std::size_t n = 0;
    std::map<std::string, double> feature_means;
};

std::vector<feature_subgroup_row> feature_means_by_subgroup(const dataset&,
                                                            const std::string& dimension);

} // namespace scoreval
