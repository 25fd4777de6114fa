#pragma once

#include <filesystem>

#include "scoreval/types.hpp"

namespace scoreval {

// A variable usable in correlation/regression work: a score column, a
// feature, or the response word count.
struct var_ref {
    enum class kind { score, feature, length } k = kind::score;
    source_ref score;    // kind::score
    std::string feature; // kind::feature

    std::string label() const;
    // "human" | "<source>[:run]" | "feat:<name>" | "length"
    static var_ref parse(const std::string&);

    bool operator==(const var_ref&) const = default;
};

std::optional<double> var_value(const dataset&, const score_record&, const var_ref&);

struct correlation_matrix_result {
    std::vector<std::string> labels;
    std::vector<std::vector<double>> values;  // symmetric, unit diagonal
    std::vector<std::vector<std::size_t>> n;  // pairwise-complete counts
};

correlation_matrix_result correlation_matrix(const dataset&, const std::vector<var_ref>&);

// First-order formula: (r_xy - r_xz r_yz) / sqrt((1 - r_xz^2)(1 - r_yz^2)).
double partial_correlation(double r_xy, double r_xz, double r_yz);

// Correlation of OLS residuals of x and y on the controls, complete cases.
// With a single control this agrees with partial_correlation on the three
// pairwise correlations of the same sample.
double partial_correlation_data(const dataset&, const var_ref& x, const var_ref& y,
                                const std::vector<var_ref>& controls);

struct regression_model {
    double intercept = 0;
    double intercept_se = 0;
    std::map<std::string, double> coefficients;
    std::map<std::string, double> standard_errors;
    double r_squared = 0;
    double f_statistic = 0;
    std::pair<int, int> df{0, 0};
    std::size_t n = 0;

    bool operator==(const regression_model&) const = default;
};

struct ols_options {
    bool half_sample = false; // fit on a seeded random half of complete cases
    std::uint64_t seed = 0;
};

regression_model ols_fit(const dataset&, const var_ref& target,
                         const std::vector<var_ref>& predictors, const ols_options& = {});

double ols_predict(const regression_model&, const std::map<std::string, double>& features);

// key = value model file; round-trips exactly. '#' lines are comments.
void save_model(const regression_model&, const std::filesystem::path&,
                const std::vector<std::string>& header_comments = {});
regression_model load_model(const std::filesystem::path&);

} // namespace scoreval
