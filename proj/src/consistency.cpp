#include "scoreval/consistency.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "scoreval/util.hpp"

namespace scoreval {

run_pair_report run_pair_agreement(const dataset& ds, const std::string& source_id, int run_a,
                                   int run_b) {
    const source_ref a{source_id, run_a};
    const source_ref b{source_id, run_b};
    score_pairs pairs = paired_scores(ds, a, b);
    if (pairs.a.size() < 2) {
        // distinguish a missing run from sparse overlap
        for (int run : {run_a, run_b}) {
            bool present = false;
            for (const auto& rec : ds.records)
                if (rec.ai_scores.count({source_id, run})) {
                    present = true;
                    break;
                }
            if (!present)
                throw error(errc::missing_run,
                            "source '" + source_id + "' has no run " + std::to_string(run));
        }
        throw error(errc::insufficient_n, "runs share fewer than 2 records");
    }

    run_pair_report rep;
    rep.source_id = source_id;
    rep.run_a = run_a;
    rep.run_b = run_b;
    rep.summary = summarize_agreement(ds, a, b);
    for (std::size_t i = 0; i < pairs.a.size(); ++i) {
        const int d = static_cast<int>(round_half_away(std::abs(pairs.a[i] - pairs.b[i])));
        rep.max_abs_diff = std::max(rep.max_abs_diff, d);
        if (d > 1) ++rep.n_diff_gt1;
    }
    return rep;
}

dataset average_runs(const dataset& ds, const std::string& source_id, const std::vector<int>& runs,
                     bool round, std::string new_id) {
    if (runs.empty()) throw error(errc::invalid_config, "no runs listed");
    const source_info* src = ds.find_source(source_id);
    if (!src) throw error(errc::unknown_source, "no source '" + source_id + "'");
    if (new_id.empty()) new_id = source_id + "_mean";

    dataset out = ds;
    source_info info = *src;
    info.id = new_id;
    info.continuous = !round;
    info.derived = true;
    out.add_source(info);

    for (auto& rec : out.records) {
        std::size_t present = 0;
        double sum = 0;
        for (int run : runs) {
            auto it = rec.ai_scores.find({source_id, run});
            if (it != rec.ai_scores.end()) {
                ++present;
                sum += it->second;
            }
        }
        if (present == 0) continue;
        if (present != runs.size())
            throw error(errc::missing_run,
                        "response '" + rec.response_id + "' has only " + std::to_string(present) +
                            " of " + std::to_string(runs.size()) + " runs for '" + source_id + "'");
        double avg = sum / static_cast<double>(runs.size());
        if (round)
            avg = static_cast<double>(clamp_score(round_half_away(avg), ds.scale.min, ds.scale.max));
        rec.ai_scores[{new_id, 1}] = avg;
    }
    return out;
}

trend_report trend_compare(const std::vector<std::pair<std::string, dataset>>& windows,
                           const source_ref& source, const source_ref& reference,
                           double warn_threshold, bool rolling_baseline) {
    if (windows.empty()) throw error(errc::invalid_config, "no trend windows given");

    // the trend set: response ids of the first window
    std::vector<std::string> trend_ids;
    for (const auto& rec : windows.front().second.records) trend_ids.push_back(rec.response_id);
    std::sort(trend_ids.begin(), trend_ids.end());

    struct window_data {
        std::map<std::string, double> source_scores;
        std::vector<double> src, ref; // paired within the window
    };
    std::vector<window_data> data(windows.size());
    for (std::size_t w = 0; w < windows.size(); ++w) {
        const dataset& ds = windows[w].second;
        std::vector<std::string> ids;
        for (const auto& rec : ds.records) ids.push_back(rec.response_id);
        std::sort(ids.begin(), ids.end());
        if (ids != trend_ids)
            throw error(errc::trend_set_mismatch,
                        "window '" + windows[w].first + "' does not cover the trend response set");
        for (const auto& rec : ds.records) {
            auto vs = ds.value(rec, source);
            auto vr = ds.value(rec, reference);
            if (!vs)
                throw error(errc::trend_set_mismatch,
                            "window '" + windows[w].first + "' is missing '" + source.label() +
                                "' for response '" + rec.response_id + "'");
            data[w].source_scores[rec.response_id] = *vs;
            if (vr) {
                data[w].src.push_back(*vs);
                data[w].ref.push_back(*vr);
            }
        }
    }

    trend_report rep;
    rep.warn_threshold = warn_threshold;
    const score_scale& scale = windows.front().second.scale;
    for (std::size_t w = 0; w < windows.size(); ++w) {
        const std::size_t base = rolling_baseline && w > 0 ? w - 1 : 0;
        trend_window_row row;
        row.label = windows[w].first;

        std::vector<double> cur, prev;
        for (const auto& [id, v] : data[w].source_scores) {
            cur.push_back(v);
            prev.push_back(data[base].source_scores.at(id));
        }
        agreement_summary s;
        s.n = cur.size();
        s.smd = smd(cur, prev);
        confusion_matrix conf = confusion_matrix::zeros(scale);
        for (std::size_t i = 0; i < cur.size(); ++i)
            ++conf.cell(clamp_score(round_half_away(cur[i]), scale.min, scale.max),
                        clamp_score(round_half_away(prev[i]), scale.min, scale.max));
        std::tie(s.pct_exact, s.pct_adjacent) = exact_adjacent(conf);
        try {
            s.qwk = weighted_kappa(conf, weight_scheme::quadratic);
            s.pearson = pearson(cur, prev);
            s.spearman = spearman(cur, prev);
        } catch (const error&) {
            // a window identical to baseline with zero spread has no defined
            // correlation; agreement is already captured by exact = 100
            s.qwk = s.pearson = s.spearman = 1.0;
        }
        row.vs_baseline = s;
        row.mean_score = mean(cur);
        row.smd_vs_reference = data[w].src.size() >= 2 ? smd(data[w].src, data[w].ref) : 0.0;
        if (w > 0 && std::abs(s.smd) > warn_threshold) rep.drift_flag = true;
        rep.windows.push_back(std::move(row));
    }

    if (rep.windows.size() >= 2) {
        bool inc = true, dec = true;
        for (std::size_t w = 1; w < rep.windows.size(); ++w) {
            inc &= rep.windows[w].mean_score > rep.windows[w - 1].mean_score;
            dec &= rep.windows[w].mean_score < rep.windows[w - 1].mean_score;
        }
        rep.direction = inc   ? trend_direction::increasing
                        : dec ? trend_direction::decreasing
                              : trend_direction::none;
    }
    return rep;
}

} // namespace scoreval
