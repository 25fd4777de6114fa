#include "scoreval/rationale.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>
#include <unordered_map>

#include "scoreval/util.hpp"

namespace scoreval {

std::size_t bigram_vector::bigram_total() const {
    std::size_t t = 0;
    for (const auto& [_, c] : counts) t += static_cast<std::size_t>(c);
    return t;
}

double bigram_vector::norm() const {
    double ss = 0;
    for (const auto& [_, c] : counts) ss += static_cast<double>(c) * c;
    return std::sqrt(ss);
}

namespace {

std::vector<std::string> tokenize(std::string_view text) {
    std::string norm;
    norm.reserve(text.size());
    for (unsigned char c : text) {
        if (std::isalnum(c) || c == '\'' || c >= 0x80)
            norm += static_cast<char>(std::tolower(c));
        else
            norm += ' ';
    }
    std::vector<std::string> tokens;
    std::size_t i = 0;
    while (i < norm.size()) {
        while (i < norm.size() && norm[i] == ' ') ++i;
        std::size_t j = i;
        while (j < norm.size() && norm[j] != ' ') ++j;
        if (j > i) tokens.push_back(norm.substr(i, j - i));
        i = j;
    }
    return tokens;
}

} // namespace

bigram_vector make_bigram_vector(std::string_view text) {
    bigram_vector v;
    auto tokens = tokenize(text);
    v.token_count = tokens.size();
    for (std::size_t i = 0; i + 1 < tokens.size(); ++i)
        ++v.counts[tokens[i] + " " + tokens[i + 1]];
    return v;
}

double cosine(const bigram_vector& u, const bigram_vector& v) {
    if (u.counts.empty() || v.counts.empty()) return 0.0;
    double dot = 0;
    auto iu = u.counts.begin();
    auto iv = v.counts.begin();
    while (iu != u.counts.end() && iv != v.counts.end()) {
        if (iu->first < iv->first) ++iu;
        else if (iv->first < iu->first) ++iv;
        else {
            dot += static_cast<double>(iu->second) * iv->second;
            ++iu;
            ++iv;
        }
    }
    if (dot == 0.0) return 0.0;
    return dot / (u.norm() * v.norm());
}

namespace {

// bigram ids instead of strings for the pairwise sweeps
struct sparse_vec {
    std::vector<std::pair<int, int>> entries; // (bigram id, count), id-sorted
    double norm = 0;
};

class interner {
public:
    sparse_vec intern(const bigram_vector& v) {
        sparse_vec s;
        s.entries.reserve(v.counts.size());
        double ss = 0;
        for (const auto& [key, c] : v.counts) {
            auto [it, _] = ids_.try_emplace(key, static_cast<int>(ids_.size()));
            s.entries.push_back({it->second, c});
            ss += static_cast<double>(c) * c;
        }
        std::sort(s.entries.begin(), s.entries.end());
        s.norm = std::sqrt(ss);
        return s;
    }

private:
    std::unordered_map<std::string, int> ids_;
};

double cosine_sparse(const sparse_vec& a, const sparse_vec& b) {
    if (a.entries.empty() || b.entries.empty()) return 0.0;
    double dot = 0;
    std::size_t i = 0, j = 0;
    while (i < a.entries.size() && j < b.entries.size()) {
        if (a.entries[i].first < b.entries[j].first) ++i;
        else if (b.entries[j].first < a.entries[i].first) ++j;
        else dot += static_cast<double>(a.entries[i++].second) * b.entries[j++].second;
    }
    if (dot == 0.0) return 0.0;
    return dot / (a.norm * b.norm);
}

double quantile(const std::vector<double>& sorted, double q) {
    if (sorted.empty()) return 0.0;
    if (sorted.size() == 1) return sorted[0];
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(pos);
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] * (1.0 - frac) + sorted[hi] * frac;
}

} // namespace

similarity_profile similarity_by_score_diff(const dataset& ds, const source_ref& rationale_source,
                                            const source_ref& score_source, std::size_t pair_cap,
                                            std::uint64_t seed) {
    if (pair_cap == 0) throw error(errc::invalid_config, "pair_cap must be positive");

    struct item {
        sparse_vec vec;
        int score;
    };
    interner intern;
    std::map<std::string, std::vector<item>> by_prompt;
    const source_run_key rat_key{rationale_source.id, rationale_source.run};
    for (const auto& rec : ds.records) {
        auto rit = rec.rationales.find(rat_key);
        if (rit == rec.rationales.end()) continue;
        auto score = ds.value(rec, score_source);
        if (!score) continue;
        by_prompt[rec.prompt_id].push_back(
            {intern.intern(make_bigram_vector(rit->second)),
             static_cast<int>(round_half_away(*score))});
    }

    bool any_pairable = false;
    for (const auto& [_, items] : by_prompt)
        if (items.size() >= 2) any_pairable = true;
    if (!any_pairable)
        throw error(errc::no_rationales,
                    "no prompt has 2+ records with both '" + rationale_source.label() +
                        "' rationales and '" + score_source.label() + "' scores");

    similarity_profile profile;
    profile.pair_cap = pair_cap;
    profile.seed = seed;

    std::map<int, std::vector<double>> bins;
    rng64 rng(seed);
    for (const auto& [_, items] : by_prompt) {
        const std::size_t n = items.size();
        if (n < 2) continue;
        const std::size_t total_pairs = n * (n - 1) / 2;
        auto record_pair = [&](std::size_t i, std::size_t j) {
            bins[std::abs(items[i].score - items[j].score)].push_back(
                cosine_sparse(items[i].vec, items[j].vec));
            ++profile.n_pairs_total;
        };
        if (total_pairs <= pair_cap) {
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = i + 1; j < n; ++j) record_pair(i, j);
        } else {
            profile.subsampled = true;
            for (std::size_t k = 0; k < pair_cap; ++k) {
                std::size_t i = rng.below(n);
                std::size_t j = rng.below(n - 1);
                if (j >= i) ++j;
                record_pair(std::min(i, j), std::max(i, j));
            }
        }
    }

    for (auto& [diff, values] : bins) {
        similarity_bin bin;
        bin.score_diff = diff;
        bin.n_pairs = values.size();
        bin.mean = std::accumulate(values.begin(), values.end(), 0.0) /
                   static_cast<double>(values.size());
        if (values.size() >= 2) {
            double ss = 0;
            for (double v : values) ss += (v - bin.mean) * (v - bin.mean);
            bin.sd = std::sqrt(ss / static_cast<double>(values.size() - 1));
        }
        std::sort(values.begin(), values.end());
        bin.q10 = quantile(values, 0.10);
        bin.q50 = quantile(values, 0.50);
        bin.q90 = quantile(values, 0.90);
        profile.bins.push_back(bin);
    }
    return profile;
}

rubric_alignment_profile rubric_alignment(const dataset& ds, const source_ref& rationale_source,
                                          const std::map<int, std::string>& rubric_levels) {
    rubric_alignment_profile profile;
    for (int level = ds.scale.min; level <= ds.scale.max; ++level) {
        if (!rubric_levels.count(level))
            throw error(errc::missing_rubric_level,
                        "no rubric text for score level " + std::to_string(level));
        profile.rubric_levels.push_back(level);
    }

    std::vector<bigram_vector> rubric_vecs;
    for (int level : profile.rubric_levels)
        rubric_vecs.push_back(make_bigram_vector(rubric_levels.at(level)));

    const source_run_key rat_key{rationale_source.id, rationale_source.run};
    std::map<int, std::pair<std::vector<double>, std::size_t>> acc; // level -> (sums, n)
    for (const auto& rec : ds.records) {
        auto rit = rec.rationales.find(rat_key);
        if (rit == rec.rationales.end()) continue;
        auto score = ds.value(rec, rationale_source);
        if (!score) continue;
        const int level = static_cast<int>(round_half_away(*score));
        bigram_vector vec = make_bigram_vector(rit->second);
        auto& [sums, n] = acc[level];
        if (sums.empty()) sums.assign(rubric_vecs.size(), 0.0);
        for (std::size_t r = 0; r < rubric_vecs.size(); ++r)
            sums[r] += cosine(vec, rubric_vecs[r]);
        ++n;
    }
    if (acc.empty())
        throw error(errc::no_rationales,
                    "no record carries both a rationale and a score for '" +
                        rationale_source.label() + "'");

    for (const auto& [level, sums_n] : acc) {
        rubric_alignment_row row;
        row.assigned_level = level;
        row.n = sums_n.second;
        for (double s : sums_n.first)
            row.mean_similarity.push_back(s / static_cast<double>(sums_n.second));
        profile.rows.push_back(std::move(row));
    }
    return profile;
}

} // namespace scoreval
