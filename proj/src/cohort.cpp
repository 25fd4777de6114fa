#include "scoreval/cohort.hpp"

#include <algorithm>
#include <cmath>

#include "scoreval/util.hpp"

namespace scoreval {

namespace {

void check_sources(const dataset& ds, const std::vector<source_ref>& sources) {
    if (sources.empty()) throw error(errc::invalid_config, "no sources listed");
    for (const auto& ref : sources) {
        if (ref.is_human()) continue;
        if (!ds.find_source(ref.id))
            throw error(errc::unknown_source, "no source '" + ref.id + "'");
    }
}

cohort_row summarize_cohort(const dataset& ds, const std::string& label,
                            const std::vector<std::size_t>& members,
                            const std::vector<source_ref>& sources) {
    cohort_row row;
    row.label = label;
    row.n = members.size();
    for (const auto& ref : sources) {
        std::vector<double> values;
        for (std::size_t i : members) {
            auto v = ds.value(ds.records[i], ref);
            if (v) values.push_back(*v);
        }
        cohort_stats stats;
        stats.n_scored = values.size();
        if (!values.empty()) {
            double m = 0;
            for (double v : values) m += v;
            m /= static_cast<double>(values.size());
            stats.mean = m;
            if (values.size() >= 2) {
                double ss = 0;
                for (double v : values) ss += (v - m) * (v - m);
                stats.sd = std::sqrt(ss / static_cast<double>(values.size() - 1));
            }
        }
        row.per_source.push_back(stats);
    }
    return row;
}

cohort_summary build_summary(const dataset& ds,
                             const std::map<std::string, std::vector<std::size_t>>& cohorts,
                             const std::vector<source_ref>& sources) {
    cohort_summary out;
    for (const auto& ref : sources) out.source_labels.push_back(ref.label());
    for (const auto& [label, members] : cohorts)
        out.rows.push_back(summarize_cohort(ds, label, members, sources));
    std::stable_sort(out.rows.begin(), out.rows.end(), [](const cohort_row& a, const cohort_row& b) {
        if (a.n != b.n) return a.n > b.n;
        return a.label < b.label;
    });
    std::vector<std::size_t> all(ds.records.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    out.total = summarize_cohort(ds, "All Responses", all, sources);
    return out;
}

} // namespace

cohort_summary advisory_summary(const dataset& ds, const std::vector<source_ref>& sources) {
    check_sources(ds, sources);
    std::map<std::string, std::vector<std::size_t>> cohorts;
    for (std::size_t i = 0; i < ds.records.size(); ++i) {
        const auto& adv = ds.records[i].advisories;
        std::string label = adv.empty()
                                ? "No Advisories"
                                : join(std::vector<std::string>(adv.begin(), adv.end()), " + ");
        cohorts[label].push_back(i);
    }
    return build_summary(ds, cohorts, sources);
}

cohort_summary advisory_marginals(const dataset& ds, const std::vector<source_ref>& sources) {
    check_sources(ds, sources);
    std::map<std::string, std::vector<std::size_t>> cohorts;
    for (std::size_t i = 0; i < ds.records.size(); ++i)
        for (const auto& name : ds.records[i].advisories) cohorts[name].push_back(i);
    return build_summary(ds, cohorts, sources);
}

conditional_percent_table conditional_distribution(const dataset& ds, const source_ref& row_source,
                                                   const source_ref& col_source) {
    pair_confusion conf = confusion_from_pairs(ds, row_source, col_source);
    conditional_percent_table table;
    table.scale = ds.scale;
    table.row_source = row_source.label();
    table.col_source = col_source.label();
    const auto rows = conf.matrix.row_marginals();
    for (int level = ds.scale.min; level <= ds.scale.max; ++level) {
        const long long n = rows[level - ds.scale.min];
        if (n == 0) continue;
        table.row_levels.push_back(level);
        table.row_counts.push_back(n);
        std::vector<int> pcts;
        for (int col = ds.scale.min; col <= ds.scale.max; ++col)
            pcts.push_back(static_cast<int>(round_half_away(
                100.0 * static_cast<double>(conf.matrix.at(level, col)) / static_cast<double>(n))));
        table.cell_percents.push_back(std::move(pcts));
    }
    return table;
}

} // namespace scoreval
