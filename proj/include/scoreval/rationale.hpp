#pragma once

#include <cstdint>

#include "scoreval/types.hpp"

namespace scoreval {

// Word-bigram term frequencies. Tokenization: lowercase, characters outside
// letters/digits/apostrophes become spaces (bytes >= 0x80 are kept), then a
// whitespace split; bigrams are contiguous token pairs across the whole text.
struct bigram_vector {
    std::map<std::string, int> counts; // key "tok1 tok2"
    std::size_t token_count = 0;

    std::size_t bigram_total() const; // sum of counts = max(token_count - 1, 0)
    double norm() const;
};

bigram_vector make_bigram_vector(std::string_view text);

// dot / (|u| |v|); 0 when either vector is empty. In [0, 1] for count vectors.
double cosine(const bigram_vector&, const bigram_vector&);

struct similarity_bin {
    int score_diff = 0;
    std::size_t n_pairs = 0;
    double mean = 0;
    std::optional<double> sd; // absent for a single pair
    double q10 = 0, q50 = 0, q90 = 0;
};

struct similarity_profile {
    std::vector<similarity_bin> bins; // ordered by score_diff
    std::size_t n_pairs_total = 0;
    bool subsampled = false;
    std::size_t pair_cap = 0;
    std::uint64_t seed = 0;
};

// All rationale pairs within the same prompt, binned by absolute score
// difference. Prompts whose pair count exceeds pair_cap are subsampled with
// the seeded generator (noted in the profile).
similarity_profile similarity_by_score_diff(const dataset&, const source_ref& rationale_source,
                                            const source_ref& score_source,
                                            std::size_t pair_cap = 2'000'000,
                                            std::uint64_t seed = 0);

struct rubric_alignment_row {
    int assigned_level = 0;
    std::size_t n = 0;
    std::vector<double> mean_similarity; // one entry per rubric level, scale order
};

struct rubric_alignment_profile {
    std::vector<int> rubric_levels; // scale points, ascending
    std::vector<rubric_alignment_row> rows;
};

// Mean cosine between rationales grouped by their assigned score and each
// rubric level's text. rubric_levels must cover every scale point.
rubric_alignment_profile rubric_alignment(const dataset&, const source_ref& rationale_source,
                                          const std::map<int, std::string>& rubric_levels);

} // namespace scoreval
