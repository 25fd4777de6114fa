#include "scoreval/confusion.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "scoreval/csv.hpp"
#include "scoreval/util.hpp"

namespace scoreval {

long long confusion_matrix::total() const {
    long long t = 0;
    for (const auto& row : counts) t += std::accumulate(row.begin(), row.end(), 0ll);
    return t;
}

long long confusion_matrix::at(int row_score, int col_score) const {
    return counts[row_score - scale.min][col_score - scale.min];
}

long long& confusion_matrix::cell(int row_score, int col_score) {
    return counts[row_score - scale.min][col_score - scale.min];
}

std::vector<long long> confusion_matrix::row_marginals() const {
    std::vector<long long> m(size(), 0);
    for (int i = 0; i < size(); ++i)
        m[i] = std::accumulate(counts[i].begin(), counts[i].end(), 0ll);
    return m;
}

std::vector<long long> confusion_matrix::col_marginals() const {
    std::vector<long long> m(size(), 0);
    for (int i = 0; i < size(); ++i)
        for (int j = 0; j < size(); ++j) m[j] += counts[i][j];
    return m;
}

confusion_matrix confusion_matrix::transposed() const {
    confusion_matrix t = zeros(scale, col_source, row_source);
    for (int i = 0; i < size(); ++i)
        for (int j = 0; j < size(); ++j) t.counts[j][i] = counts[i][j];
    return t;
}

confusion_matrix confusion_matrix::zeros(const score_scale& scale, std::string row_source,
                                         std::string col_source) {
    confusion_matrix m;
    m.scale = scale;
    m.counts.assign(scale.size(), std::vector<long long>(scale.size(), 0));
    m.row_source = std::move(row_source);
    m.col_source = std::move(col_source);
    return m;
}

pair_confusion confusion_from_pairs(const dataset& ds, const source_ref& a, const source_ref& b) {
    for (const auto& ref : {a, b}) {
        if (ds.is_continuous(ref))
            throw error(errc::invalid_config,
                        "source '" + ref.label() + "' is continuous; apply round_scores first");
    }
    score_pairs pairs = paired_scores(ds, a, b);
    if (pairs.a.empty()) throw error(errc::empty_overlap,
                                     "no record has both '" + a.label() + "' and '" + b.label() + "'");
    pair_confusion out;
    out.matrix = confusion_matrix::zeros(ds.scale, a.label(), b.label());
    out.n_excluded = pairs.n_excluded;
    for (std::size_t i = 0; i < pairs.a.size(); ++i) {
        int va = clamp_score(round_half_away(pairs.a[i]), ds.scale.min, ds.scale.max);
        int vb = clamp_score(round_half_away(pairs.b[i]), ds.scale.min, ds.scale.max);
        ++out.matrix.cell(va, vb);
    }
    return out;
}

void conditional_percent_table::validate() const {
    if (row_levels.size() != row_counts.size() || row_levels.size() != cell_percents.size())
        throw error(errc::schema_error, "percent table rows are ragged");
    for (std::size_t r = 0; r < row_levels.size(); ++r) {
        if (!scale.contains(row_levels[r]))
            throw error(errc::range_error,
                        "row level " + std::to_string(row_levels[r]) + " outside scale");
        if (row_counts[r] <= 0)
            throw error(errc::inconsistent_row,
                        "row " + std::to_string(row_levels[r]) + " has nonpositive count");
        if (cell_percents[r].size() != static_cast<std::size_t>(scale.size()))
            throw error(errc::schema_error,
                        "row " + std::to_string(row_levels[r]) + " needs " +
                            std::to_string(scale.size()) + " percent cells");
        int sum = std::accumulate(cell_percents[r].begin(), cell_percents[r].end(), 0);
        if (sum < 98 || sum > 102)
            throw error(errc::inconsistent_row,
                        "row " + std::to_string(row_levels[r]) + " percents sum to " +
                            std::to_string(sum) + ", outside 100 +/- 2");
        for (int p : cell_percents[r])
            if (p < 0)
                throw error(errc::inconsistent_row,
                            "row " + std::to_string(row_levels[r]) + " has a negative percent");
    }
}

confusion_matrix confusion_from_conditional(const conditional_percent_table& table) {
    table.validate();
    confusion_matrix m = confusion_matrix::zeros(table.scale, table.row_source, table.col_source);
    for (std::size_t r = 0; r < table.row_levels.size(); ++r) {
        const long long n = table.row_counts[r];
        std::vector<long long> cells(table.cell_percents[r].size());
        for (std::size_t c = 0; c < cells.size(); ++c)
            cells[c] = round_half_away(table.cell_percents[r][c] * static_cast<double>(n) / 100.0);
        long long residual = n - std::accumulate(cells.begin(), cells.end(), 0ll);
        if (residual != 0) {
            std::size_t target = 0;
            for (std::size_t c = 1; c < cells.size(); ++c)
                if (cells[c] > cells[target]) target = c; // first max wins: lower score on ties
            cells[target] += residual;
        }
        auto& row = m.counts[table.row_levels[r] - table.scale.min];
        for (std::size_t c = 0; c < cells.size(); ++c) row[c] += cells[c];
    }
    return m;
}

conditional_percent_table load_percent_table(const std::filesystem::path& path,
                                             const score_scale& scale) {
    csv_table csv = read_csv(path);
    const std::size_t want = 2 + static_cast<std::size_t>(scale.size());
    if (csv.header.size() != want || csv.header[0] != "level" || csv.header[1] != "n")
        throw error(errc::schema_error,
                    path.string() + ": expected header level,n,p" + std::to_string(scale.min) +
                        "..p" + std::to_string(scale.max));
    conditional_percent_table t;
    t.scale = scale;
    for (const auto& row : csv.rows) {
        if (row.size() != want)
            throw error(errc::schema_error, path.string() + ": ragged percent table row");
        auto level = parse_int(row[0]);
        auto n = parse_int(row[1]);
        if (!level || !n)
            throw error(errc::schema_error, path.string() + ": non-numeric level or n");
        t.row_levels.push_back(static_cast<int>(*level));
        t.row_counts.push_back(*n);
        std::vector<int> pcts;
        for (std::size_t c = 2; c < row.size(); ++c) {
            auto p = parse_int(row[c]);
            if (!p) throw error(errc::schema_error, path.string() + ": non-numeric percent");
            pcts.push_back(static_cast<int>(*p));
        }
        t.cell_percents.push_back(std::move(pcts));
    }
    t.validate();
    return t;
}

void save_percent_table(const conditional_percent_table& table, const std::filesystem::path& path,
                        const std::vector<std::string>& header_comments) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw error(errc::io_error, "cannot write " + path.string());
    for (const auto& c : header_comments) out << "# " << c << "\n";
    std::vector<std::string> header = {"level", "n"};
    for (int s = table.scale.min; s <= table.scale.max; ++s)
        header.push_back("p" + std::to_string(s));
    write_csv_row(out, header);
    for (std::size_t r = 0; r < table.row_levels.size(); ++r) {
        std::vector<std::string> row = {std::to_string(table.row_levels[r]),
                                        std::to_string(table.row_counts[r])};
        for (int p : table.cell_percents[r]) row.push_back(std::to_string(p));
        write_csv_row(out, row);
    }
}

dataset round_scores(const dataset& ds, const std::string& source_id, std::string new_id) {
    const source_info* src = ds.find_source(source_id);
    if (!src) throw error(errc::unknown_source, "no source '" + source_id + "'");
    if (new_id.empty()) new_id = source_id + "_rounded";

    dataset out = ds;
    source_info info = *src;
    info.id = new_id;
    info.continuous = false;
    info.derived = true;
    out.add_source(info);
    for (auto& rec : out.records) {
        std::vector<std::pair<source_run_key, double>> rounded;
        for (const auto& [key, v] : rec.ai_scores)
            if (key.source_id == source_id)
                rounded.push_back({{new_id, key.run},
                                   static_cast<double>(clamp_score(round_half_away(v), ds.scale.min,
                                                                   ds.scale.max))});
        for (auto& [key, v] : rounded) rec.ai_scores[key] = v;
    }
    return out;
}

} // namespace scoreval
