#include "scoreval/agreement.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "scoreval/util.hpp"

namespace scoreval {

const char* weight_scheme_name(weight_scheme s) {
    switch (s) {
        case weight_scheme::quadratic: return "quadratic";
        case weight_scheme::linear: return "linear";
        case weight_scheme::unweighted: return "unweighted";
    }
    return "quadratic";
}

double mean(std::span<const double> v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double sample_variance(std::span<const double> v) {
    const double m = mean(v);
    double ss = 0;
    for (double x : v) ss += (x - m) * (x - m);
    return ss / static_cast<double>(v.size() - 1);
}

std::vector<double> average_ranks(std::span<const double> v) {
    const std::size_t n = v.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0u);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> ranks(n, 0.0);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && v[order[j + 1]] == v[order[i]]) ++j;
        const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
        i = j + 1;
    }
    return ranks;
}

namespace {

void require_paired(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size())
        throw error(errc::insufficient_n, "vectors differ in length");
    if (a.size() < 2)
        throw error(errc::insufficient_n, "need at least 2 paired observations");
}

} // namespace

double smd(std::span<const double> m, std::span<const double> h) {
    require_paired(m, h);
    const double vm = sample_variance(m);
    const double vh = sample_variance(h);
    const double pooled = std::sqrt((vm + vh) / 2.0);
    if (pooled == 0.0) {
        if (mean(m) == mean(h)) return 0.0;
        throw error(errc::degenerate_variance, "both variances zero with unequal means");
    }
    return (mean(m) - mean(h)) / pooled;
}

std::pair<double, double> exact_adjacent(const confusion_matrix& conf) {
    const long long n = conf.total();
    if (n < 1) throw error(errc::insufficient_n, "empty confusion matrix");
    long long exact = 0, adjacent = 0;
    const int k = conf.size();
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j) {
            if (i == j) exact += conf.counts[i][j];
            if (std::abs(i - j) <= 1) adjacent += conf.counts[i][j];
        }
    return {100.0 * static_cast<double>(exact) / static_cast<double>(n),
            100.0 * static_cast<double>(adjacent) / static_cast<double>(n)};
}

double weighted_kappa(const confusion_matrix& conf, weight_scheme scheme) {
    const long long n = conf.total();
    if (n < 2) throw error(errc::insufficient_n, "weighted kappa needs N >= 2");
    const int k = conf.size();
    const double span = static_cast<double>(k - 1);
    auto weight = [&](int i, int j) -> double {
        const double d = std::abs(i - j);
        switch (scheme) {
            case weight_scheme::quadratic: return 1.0 - (d * d) / (span * span);
            case weight_scheme::linear: return 1.0 - d / span;
            case weight_scheme::unweighted: return i == j ? 1.0 : 0.0;
        }
        return 0.0;
    };
    const auto rows = conf.row_marginals();
    const auto cols = conf.col_marginals();
    double po = 0, pe = 0;
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j) {
            po += weight(i, j) * static_cast<double>(conf.counts[i][j]);
            pe += weight(i, j) * static_cast<double>(rows[i]) * static_cast<double>(cols[j]);
        }
    po /= static_cast<double>(n);
    pe /= static_cast<double>(n) * static_cast<double>(n);
    if (std::abs(1.0 - pe) < 1e-14)
        throw error(errc::degenerate_marginals, "chance agreement is 1; kappa undefined");
    return std::clamp((po - pe) / (1.0 - pe), -1.0, 1.0);
}

double pearson(std::span<const double> x, std::span<const double> y) {
    require_paired(x, y);
    const double mx = mean(x), my = mean(y);
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - mx, dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0)
        throw error(errc::degenerate_variance, "zero variance in correlation input");
    return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

double spearman(std::span<const double> x, std::span<const double> y) {
    require_paired(x, y);
    const auto rx = average_ranks(x);
    const auto ry = average_ranks(y);
    return pearson(rx, ry);
}

score_pairs pairs_from_confusion(const confusion_matrix& conf) {
    score_pairs pairs;
    const int k = conf.size();
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j)
            for (long long c = 0; c < conf.counts[i][j]; ++c) {
                pairs.a.push_back(static_cast<double>(conf.scale.min + i));
                pairs.b.push_back(static_cast<double>(conf.scale.min + j));
            }
    return pairs;
}

agreement_summary summarize_confusion(const confusion_matrix& conf) {
    score_pairs pairs = pairs_from_confusion(conf);
    if (pairs.a.size() < 2)
        throw error(errc::insufficient_n, "confusion matrix holds fewer than 2 observations");
    agreement_summary s;
    s.n = pairs.a.size();
    s.smd = smd(pairs.b, pairs.a);
    s.pearson = pearson(pairs.a, pairs.b);
    s.spearman = spearman(pairs.a, pairs.b);
    std::tie(s.pct_exact, s.pct_adjacent) = exact_adjacent(conf);
    s.qwk = weighted_kappa(conf, weight_scheme::quadratic);
    return s;
}

agreement_summary summarize_agreement(const dataset& ds, const source_ref& source,
                                      const source_ref& reference) {
    score_pairs pairs = paired_scores(ds, source, reference);
    if (pairs.a.size() < 2)
        throw error(errc::insufficient_n,
                    "sources '" + source.label() + "' and '" + reference.label() +
                        "' share fewer than 2 records");

    agreement_summary s;
    s.n = pairs.a.size();
    s.n_excluded = pairs.n_excluded;
    s.smd = smd(pairs.a, pairs.b);
    s.pearson = pearson(pairs.a, pairs.b);
    s.spearman = spearman(pairs.a, pairs.b);

    confusion_matrix conf = confusion_matrix::zeros(ds.scale, source.label(), reference.label());
    for (std::size_t i = 0; i < pairs.a.size(); ++i) {
        int va = clamp_score(round_half_away(pairs.a[i]), ds.scale.min, ds.scale.max);
        int vb = clamp_score(round_half_away(pairs.b[i]), ds.scale.min, ds.scale.max);
        ++conf.cell(va, vb);
    }
    std::tie(s.pct_exact, s.pct_adjacent) = exact_adjacent(conf);
    s.qwk = weighted_kappa(conf, weight_scheme::quadratic);
    return s;
}

} // namespace scoreval
