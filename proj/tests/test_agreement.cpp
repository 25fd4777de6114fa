#include <doctest.h>

#include <algorithm>

#include "oracles.hpp"
#include "scoreval/agreement.hpp"
#include "scoreval/synthetic.hpp"
#include "scoreval/util.hpp"
#include "test_helpers.hpp"

using namespace scoreval;
using helpers::dataset_builder;

namespace {

confusion_matrix matrix_from(const std::vector<std::vector<long long>>& counts) {
    score_scale scale{1, static_cast<int>(counts.size()), false};
    confusion_matrix m = confusion_matrix::zeros(scale);
    m.counts = counts;
    return m;
}

confusion_matrix random_matrix(rng64& rng, int k, int max_n) {
    score_scale scale{1, k, false};
    confusion_matrix m = confusion_matrix::zeros(scale);
    const int n = 2 + static_cast<int>(rng.below(max_n - 1));
    for (int i = 0; i < n; ++i)
        ++m.counts[rng.below(static_cast<std::size_t>(k))][rng.below(static_cast<std::size_t>(k))];
    return m;
}

bool degenerate(const confusion_matrix& m) {
    // all mass in a single row and single column
    auto rows = m.row_marginals();
    auto cols = m.col_marginals();
    auto occupied = [](const std::vector<long long>& v) {
        return std::count_if(v.begin(), v.end(), [](long long c) { return c > 0; });
    };
    return occupied(rows) <= 1 && occupied(cols) <= 1;
}

} // namespace

TEST_CASE("smd hand values") {
    std::vector<double> m = {1, 2, 3}, h = {2, 3, 4};
    CHECK(smd(m, m) == 0.0);
    CHECK(smd(m, h) == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(smd(h, m) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("smd properties") {
    rng64 rng(21);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 3 + rng.below(40);
        std::vector<double> a(n), b(n);
        for (std::size_t i = 0; i < n; ++i) {
            a[i] = rng.normal(3.0, 1.2);
            b[i] = rng.normal(3.4, 0.8);
        }
        const double base = smd(a, b);
        CHECK(smd(b, a) == doctest::Approx(-base).epsilon(1e-12));

        std::vector<double> a_shift = a, b_shift = b;
        for (auto& v : a_shift) v += 2.5;
        for (auto& v : b_shift) v += 2.5;
        CHECK(smd(a_shift, b_shift) == doctest::Approx(base).epsilon(1e-9));

        std::vector<double> a_scaled = a, b_scaled = b;
        for (auto& v : a_scaled) v /= 3.0;
        for (auto& v : b_scaled) v /= 3.0;
        CHECK(smd(a_scaled, b_scaled) == doctest::Approx(base).epsilon(1e-9));
    }
}

TEST_CASE("smd degenerate variance") {
    std::vector<double> a = {2, 2}, b = {3, 3};
    try {
        smd(a, b);
        FAIL("expected degenerate_variance");
    } catch (const error& e) {
        CHECK(e.kind() == errc::degenerate_variance);
    }
    CHECK(smd(a, a) == 0.0); // equal means with zero variance is defined
}

TEST_CASE("exact_adjacent on a diagonal matrix is (100, 100)") {
    auto m = matrix_from({{3, 0, 0}, {0, 5, 0}, {0, 0, 2}});
    auto [exact, adjacent] = exact_adjacent(m);
    CHECK(exact == 100.0);
    CHECK(adjacent == 100.0);
}

TEST_CASE("exact_adjacent is invariant under transposition") {
    rng64 rng(31);
    for (int trial = 0; trial < 50; ++trial) {
        confusion_matrix m = random_matrix(rng, 2 + static_cast<int>(rng.below(5)), 60);
        auto [e1, a1] = exact_adjacent(m);
        auto [e2, a2] = exact_adjacent(m.transposed());
        CHECK(e1 == doctest::Approx(e2).epsilon(1e-12));
        CHECK(a1 == doctest::Approx(a2).epsilon(1e-12));
    }
}

TEST_CASE("weighted_kappa hand values") {
    CHECK(weighted_kappa(matrix_from({{4, 0}, {0, 3}}), weight_scheme::quadratic) == 1.0);
    CHECK(weighted_kappa(matrix_from({{0, 2}, {2, 0}}), weight_scheme::quadratic) ==
          doctest::Approx(-1.0).epsilon(1e-12));
    // all mass on one cell: chance agreement is 1
    try {
        weighted_kappa(matrix_from({{5, 0}, {0, 0}}), weight_scheme::quadratic);
        FAIL("expected degenerate_marginals");
    } catch (const error& e) {
        CHECK(e.kind() == errc::degenerate_marginals);
    }
}

TEST_CASE("weighted_kappa matches the pair-enumeration oracle") {
    rng64 rng(41);
    for (int trial = 0; trial < 300; ++trial) {
        confusion_matrix m = random_matrix(rng, 2 + static_cast<int>(rng.below(5)), 50);
        if (degenerate(m)) continue;
        for (auto scheme :
             {weight_scheme::quadratic, weight_scheme::linear, weight_scheme::unweighted}) {
            CHECK(weighted_kappa(m, scheme) ==
                  doctest::Approx(oracles::kappa(m, scheme)).epsilon(1e-12));
        }
    }
}

TEST_CASE("unweighted kappa equals Cohen's kappa exhaustively on small instances") {
    // every 2x2 matrix with N <= 12
    for (int a = 0; a <= 12; ++a)
        for (int b = 0; a + b <= 12; ++b)
            for (int c = 0; a + b + c <= 12; ++c)
                for (int d = 0; a + b + c + d <= 12; ++d) {
                    if (a + b + c + d < 2) continue;
                    auto m = matrix_from({{a, b}, {c, d}});
                    if (degenerate(m)) continue;
                    CHECK(weighted_kappa(m, weight_scheme::unweighted) ==
                          doctest::Approx(oracles::kappa(m, weight_scheme::unweighted))
                              .epsilon(1e-12));
                }
    // every 3x3 matrix with N <= 4 (by enumerating cell index multisets)
    for (int n = 2; n <= 4; ++n) {
        std::vector<int> cells(static_cast<std::size_t>(n), 0);
        while (true) {
            auto m = matrix_from({{0, 0, 0}, {0, 0, 0}, {0, 0, 0}});
            for (int item : cells) ++m.counts[item / 3][item % 3];
            if (!degenerate(m))
                CHECK(weighted_kappa(m, weight_scheme::unweighted) ==
                      doctest::Approx(oracles::kappa(m, weight_scheme::unweighted))
                          .epsilon(1e-12));
            int pos = n - 1;
            while (pos >= 0 && cells[pos] == 8) --pos;
            if (pos < 0) break;
            ++cells[pos];
            for (int i = pos + 1; i < n; ++i) cells[i] = cells[pos];
        }
    }
}

TEST_CASE("weighted_kappa is invariant under scale reversal") {
    rng64 rng(51);
    for (int trial = 0; trial < 50; ++trial) {
        confusion_matrix m = random_matrix(rng, 2 + static_cast<int>(rng.below(5)), 60);
        if (degenerate(m)) continue;
        const int k = m.size();
        confusion_matrix rev = confusion_matrix::zeros(m.scale);
        for (int i = 0; i < k; ++i)
            for (int j = 0; j < k; ++j) rev.counts[k - 1 - i][k - 1 - j] = m.counts[i][j];
        if (degenerate(rev)) continue;
        for (auto scheme : {weight_scheme::quadratic, weight_scheme::linear})
            CHECK(weighted_kappa(m, scheme) ==
                  doctest::Approx(weighted_kappa(rev, scheme)).epsilon(1e-12));
    }
}

TEST_CASE("pearson hand values") {
    std::vector<double> x = {1, 2, 3, 4};
    std::vector<double> y, z;
    for (double v : x) {
        y.push_back(2 * v + 3);
        z.push_back(-v);
    }
    CHECK(pearson(x, y) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(pearson(x, z) == doctest::Approx(-1.0).epsilon(1e-12));
    std::vector<double> c = {2, 2, 2, 2};
    CHECK_THROWS_AS(pearson(x, c), error);
}

TEST_CASE("spearman uses average ranks") {
    std::vector<double> x = {1, 2, 2, 3}, y = {1, 3, 2, 4};
    CHECK(spearman(x, y) == doctest::Approx(oracles::spearman(x, y)).epsilon(1e-12));

    SUBCASE("strictly monotone transforms give 1") {
        std::vector<double> base = {0.2, 1.7, 3.1, 4.9, 9.4};
        std::vector<double> cubed;
        for (double v : base) cubed.push_back(v * v * v + 2.0);
        CHECK(spearman(base, cubed) == doctest::Approx(1.0).epsilon(1e-12));
    }
    SUBCASE("invariant under monotone transform of either argument") {
        rng64 rng(61);
        for (int trial = 0; trial < 50; ++trial) {
            const std::size_t n = 4 + rng.below(30);
            std::vector<double> a(n), b(n), a_t(n);
            for (std::size_t i = 0; i < n; ++i) {
                a[i] = rng.normal(0, 1);
                b[i] = rng.normal(0, 1);
                a_t[i] = std::exp(a[i]);
            }
            CHECK(spearman(a, b) == doctest::Approx(spearman(a_t, b)).epsilon(1e-9));
        }
    }
    SUBCASE("random vectors agree with the oracle") {
        rng64 rng(62);
        for (int trial = 0; trial < 50; ++trial) {
            const std::size_t n = 3 + rng.below(20);
            std::vector<double> a(n), b(n);
            for (std::size_t i = 0; i < n; ++i) {
                a[i] = static_cast<double>(rng.below(5)); // heavy ties
                b[i] = static_cast<double>(rng.below(5));
            }
            bool a_const = std::all_of(a.begin(), a.end(), [&](double v) { return v == a[0]; });
            bool b_const = std::all_of(b.begin(), b.end(), [&](double v) { return v == b[0]; });
            if (a_const || b_const) continue;
            CHECK(spearman(a, b) == doctest::Approx(oracles::spearman(a, b)).epsilon(1e-12));
        }
    }
}

TEST_CASE("summarize_agreement on zero-noise data is perfect") {
    sim_config cfg;
    cfg.n = 100;
    cfg.scale = {1, 6, false};
    cfg.sources = {{"m", source_kind::llm, false, 1, 0.0, 0.0, false}};
    sim_result sim = generate_synthetic(cfg, 17);
    agreement_summary s = summarize_agreement(sim.data, {"m", 1}, {"human", 1});
    CHECK(s.smd == 0.0);
    CHECK(s.pct_exact == 100.0);
    CHECK(s.pct_adjacent == 100.0);
    CHECK(s.qwk == 1.0);
    CHECK(s.pearson == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(s.spearman == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(s.n == 100);
}

TEST_CASE("summarize_agreement rounds continuous sources for categorical metrics") {
    dataset_builder b({1, 6, false});
    b.source("e", source_kind::feature_engine, true);
    // raw values straddle the rounding boundary
    b.add("r1", 3).ai_scores[{"e", 1}] = 3.4;
    b.add("r2", 4).ai_scores[{"e", 1}] = 3.6;
    b.add("r3", 5).ai_scores[{"e", 1}] = 5.2;
    b.add("r4", 2).ai_scores[{"e", 1}] = 1.9;
    agreement_summary s = summarize_agreement(b.ds, {"e", 1}, {"human", 1});
    CHECK(s.pct_exact == 100.0); // rounded values match exactly
    CHECK(s.smd != 0.0);         // raw SMD sees the continuous offsets
}

TEST_CASE("summarize_confusion matches pairwise computation") {
    dataset_builder b({1, 4, false});
    b.source("m");
    rng64 rng(71);
    for (int i = 0; i < 60; ++i) {
        int h = 1 + static_cast<int>(rng.below(4));
        int v = std::clamp(h + static_cast<int>(rng.below(3)) - 1, 1, 4);
        b.add("r" + std::to_string(i), h).ai_scores[{"m", 1}] = v;
    }
    agreement_summary direct = summarize_agreement(b.ds, {"m", 1}, {"human", 1});
    pair_confusion pc = confusion_from_pairs(b.ds, {"human", 1}, {"m", 1});
    agreement_summary via = summarize_confusion(pc.matrix);
    CHECK(via.smd == doctest::Approx(direct.smd).epsilon(1e-12));
    CHECK(via.qwk == doctest::Approx(direct.qwk).epsilon(1e-12));
    CHECK(via.pct_exact == doctest::Approx(direct.pct_exact).epsilon(1e-12));
    CHECK(via.pearson == doctest::Approx(direct.pearson).epsilon(1e-12));
    CHECK(via.spearman == doctest::Approx(direct.spearman).epsilon(1e-12));
}
