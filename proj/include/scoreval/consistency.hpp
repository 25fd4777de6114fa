#pragma once

#include "scoreval/agreement.hpp"
#include "scoreval/types.hpp"

namespace scoreval {

struct run_pair_report {
    std::string source_id;
    int run_a = 1;
    int run_b = 2;
    agreement_summary summary;
    int max_abs_diff = 0;
    std::size_t n_diff_gt1 = 0;
};

run_pair_report run_pair_agreement(const dataset&, const std::string& source_id, int run_a,
                                   int run_b);

// Per-record mean over the listed runs, added as a new source
// ("<source>_mean" by default). With rounding the result is discrete.
dataset average_runs(const dataset&, const std::string& source_id, const std::vector<int>& runs,
                     bool round, std::string new_id = {});

enum class trend_direction { none, increasing, decreasing };

struct trend_window_row {
    std::string label;
    agreement_summary vs_baseline; // this window's scores against the baseline window's
    double mean_score = 0;
    double smd_vs_reference = 0;
};

struct trend_report {
    std::vector<trend_window_row> windows;
    double warn_threshold = 0.05;
    bool drift_flag = false;
    trend_direction direction = trend_direction::none;
};

// Every window re-scores the same fixed response set; any missing response id
// raises trend_set_mismatch. Window 0 is the baseline (or the previous window
// when rolling_baseline is set); a window whose |SMD vs baseline| exceeds
// warn_threshold raises the drift flag.
trend_report trend_compare(const std::vector<std::pair<std::string, dataset>>& windows,
                           const source_ref& source, const source_ref& reference,
                           double warn_threshold = 0.05, bool rolling_baseline = false);

} // namespace scoreval
