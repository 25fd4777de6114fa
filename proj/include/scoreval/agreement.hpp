#pragma once

#include <span>

#include "scoreval/confusion.hpp"
#include "scoreval/types.hpp"

namespace scoreval {

enum class weight_scheme { quadratic, linear, unweighted };

const char* weight_scheme_name(weight_scheme);

double mean(std::span<const double>);
// n-1 denominator throughout.
double sample_variance(std::span<const double>);

// Average ranks; ties share the mean of the ranks they span.
std::vector<double> average_ranks(std::span<const double>);

// (mean(m) - mean(h)) / sqrt((var(m) + var(h)) / 2). Positive means the first
// argument scores higher on average.
double smd(std::span<const double> scores_m, std::span<const double> scores_h);

// (percent exact, percent adjacent); adjacent means |difference| <= 1 point.
std::pair<double, double> exact_adjacent(const confusion_matrix&);

double weighted_kappa(const confusion_matrix&, weight_scheme);

double pearson(std::span<const double> x, std::span<const double> y);
double spearman(std::span<const double> x, std::span<const double> y);

struct agreement_summary {
    double smd = 0;
    double pct_exact = 0;
    double pct_adjacent = 0;
    double qwk = 0;
    double pearson = 0;
    double spearman = 0;
    std::size_t n = 0;
    std::size_t n_excluded = 0;
};

// One row of the agreement battery. SMD, Pearson and Spearman use raw scores
// (continuous sources included as-is); exact/adjacent/kappa tally rounded
// values when a source is continuous.
agreement_summary summarize_agreement(const dataset&, const source_ref& source,
                                      const source_ref& reference);

// Expands a confusion matrix back into paired score vectors (a = row scores,
// b = column scores).
score_pairs pairs_from_confusion(const confusion_matrix&);

// The battery computed from a joint distribution alone. SMD is oriented
// column-minus-row so that rows = reference, columns = source matches
// summarize_agreement(source, reference).
agreement_summary summarize_confusion(const confusion_matrix&);

} // namespace scoreval
