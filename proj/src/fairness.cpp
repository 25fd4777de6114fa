#include "scoreval/fairness.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "scoreval/util.hpp"

namespace scoreval {

adjusted_scores adjust_scores(const dataset& ds, const source_ref& source,
                              const source_ref& reference) {
    score_pairs pairs = paired_scores(ds, source, reference);
    if (pairs.a.size() < 2)
        throw error(errc::empty_overlap,
                    "sources '" + source.label() + "' and '" + reference.label() +
                        "' share fewer than 2 records");
    adjusted_scores out;
    out.record_index = pairs.record_index;
    out.reference = pairs.b;
    out.shift = mean(pairs.b) - mean(pairs.a);
    out.adjusted.reserve(pairs.a.size());
    for (double v : pairs.a) out.adjusted.push_back(v + out.shift);
    return out;
}

namespace {

std::map<std::string, std::vector<std::size_t>> group_by_label(
    const dataset& ds, const std::vector<std::size_t>& record_index, const std::string& dimension) {
    std::map<std::string, std::vector<std::size_t>> groups; // label -> positions in record_index
    bool dimension_seen = false;
    for (const auto& rec : ds.records)
        if (rec.subgroups.count(dimension)) {
            dimension_seen = true;
            break;
        }
    if (!dimension_seen)
        throw error(errc::unknown_dimension, "no record carries dimension '" + dimension + "'");
    for (std::size_t pos = 0; pos < record_index.size(); ++pos) {
        const auto& rec = ds.records[record_index[pos]];
        auto it = rec.subgroups.find(dimension);
        if (it != rec.subgroups.end()) groups[it->second].push_back(pos);
    }
    return groups;
}

} // namespace

subgroup_audit subgroup_smd(const dataset& ds, const source_ref& source,
                            const source_ref& reference, const std::string& dimension,
                            double threshold, std::size_t min_n) {
    adjusted_scores adj = adjust_scores(ds, source, reference);
    auto groups = group_by_label(ds, adj.record_index, dimension);

    subgroup_audit audit;
    audit.dimension = dimension;
    audit.threshold = threshold;
    audit.min_n = min_n;

    const bool discrete = !ds.is_continuous(source) && !ds.is_continuous(reference);
    for (const auto& [label, positions] : groups) {
        subgroup_row row;
        row.label = label;
        row.n = positions.size();
        row.suppressed = row.n < min_n;
        if (row.n >= 2) {
            std::vector<double> m, h;
            for (std::size_t pos : positions) {
                m.push_back(adj.adjusted[pos]);
                h.push_back(adj.reference[pos]);
            }
            try {
                row.smd_adjusted = smd(m, h);
            } catch (const error&) {
                row.suppressed = true; // degenerate within the group
            }
            if (discrete) {
                confusion_matrix conf = confusion_matrix::zeros(ds.scale);
                for (std::size_t pos : positions) {
                    const auto& rec = ds.records[adj.record_index[pos]];
                    auto vs = ds.value(rec, source);
                    auto vr = ds.value(rec, reference);
                    ++conf.cell(clamp_score(round_half_away(*vs), ds.scale.min, ds.scale.max),
                                clamp_score(round_half_away(*vr), ds.scale.min, ds.scale.max));
                }
                try {
                    row.qwk = weighted_kappa(conf, weight_scheme::quadratic);
                } catch (const error&) {
                    // single occupied category: leave qwk absent
                }
            }
        } else {
            row.suppressed = true;
        }
        row.flagged = !row.suppressed && row.smd_adjusted &&
                      std::abs(*row.smd_adjusted) > threshold;
        audit.rows.push_back(std::move(row));
    }
    return audit;
}

std::vector<subgroup_agreement_row> subgroup_agreement(const dataset& ds, const source_ref& source,
                                                       const source_ref& reference,
                                                       const std::string& dimension,
                                                       std::size_t min_n) {
    score_pairs pairs = paired_scores(ds, source, reference);
    if (pairs.a.empty())
        throw error(errc::empty_overlap,
                    "sources '" + source.label() + "' and '" + reference.label() + "' never overlap");
    auto groups = group_by_label(ds, pairs.record_index, dimension);

    std::vector<subgroup_agreement_row> rows;
    for (const auto& [label, positions] : groups) {
        subgroup_agreement_row row;
        row.label = label;
        row.n = positions.size();
        if (row.n >= std::max<std::size_t>(min_n, 2)) {
            dataset slice;
            slice.scale = ds.scale;
            slice.source_catalog = ds.source_catalog;
            for (std::size_t pos : positions)
                slice.records.push_back(ds.records[pairs.record_index[pos]]);
            try {
                row.summary = summarize_agreement(slice, source, reference);
            } catch (const error&) {
                // degenerate group: report n only
            }
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

std::vector<feature_subgroup_row> feature_means_by_subgroup(const dataset& ds,
                                                            const std::string& dimension) {
    std::vector<std::size_t> all(ds.records.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    auto groups = group_by_label(ds, all, dimension);

    std::vector<feature_subgroup_row> rows;
    for (const auto& [label, positions] : groups) {
        feature_subgroup_row row;
        row.label = label;
        row.n = positions.size();
        std::map<std::string, std::pair<double, std::size_t>> acc;
        for (std::size_t pos : positions)
            for (const auto& [name, v] : ds.records[pos].features) {
                acc[name].first += v;
                acc[name].second += 1;
            }
        for (const auto& [name, sum_n] : acc)
            row.feature_means[name] = sum_n.first / static_cast<double>(sum_n.second);
        rows.push_back(std::move(row));
    }
    return rows;
}

} // namespace scoreval
