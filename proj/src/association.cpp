#include "scoreval/association.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include <Eigen/Dense>

#include "scoreval/agreement.hpp"
#include "scoreval/util.hpp"

namespace scoreval {

std::string var_ref::label() const {
    switch (k) {
        case kind::score: return score.label();
        case kind::feature: return "feat:" + feature;
        case kind::length: return "length";
    }
    return "";
}

var_ref var_ref::parse(const std::string& text) {
    var_ref v;
    if (text == "length") {
        v.k = kind::length;
        return v;
    }
    if (starts_with(text, "feat:")) {
        v.k = kind::feature;
        v.feature = text.substr(5);
        if (v.feature.empty()) throw error(errc::schema_error, "empty feature name in '" + text + "'");
        return v;
    }
    v.k = kind::score;
    v.score = parse_source_ref(text);
    return v;
}

std::optional<double> var_value(const dataset& ds, const score_record& rec, const var_ref& v) {
    switch (v.k) {
        case var_ref::kind::score: return ds.value(rec, v.score);
        case var_ref::kind::feature: {
            auto it = rec.features.find(v.feature);
            if (it == rec.features.end()) return std::nullopt;
            return it->second;
        }
        case var_ref::kind::length:
            if (!rec.response_text) return std::nullopt;
            return static_cast<double>(word_count(*rec.response_text));
    }
    return std::nullopt;
}

correlation_matrix_result correlation_matrix(const dataset& ds, const std::vector<var_ref>& vars) {
    if (vars.size() < 2)
        throw error(errc::insufficient_n, "correlation matrix needs at least 2 variables");
    const std::size_t p = vars.size();
    correlation_matrix_result out;
    for (const auto& v : vars) out.labels.push_back(v.label());
    out.values.assign(p, std::vector<double>(p, 1.0));
    out.n.assign(p, std::vector<std::size_t>(p, 0));

    for (std::size_t i = 0; i < p; ++i) {
        for (std::size_t j = i + 1; j < p; ++j) {
            std::vector<double> x, y;
            for (const auto& rec : ds.records) {
                auto vi = var_value(ds, rec, vars[i]);
                auto vj = var_value(ds, rec, vars[j]);
                if (vi && vj) {
                    x.push_back(*vi);
                    y.push_back(*vj);
                }
            }
            if (x.size() < 3)
                throw error(errc::insufficient_n,
                            "pairwise-complete n < 3 for " + vars[i].label() + " / " + vars[j].label());
            double r;
            try {
                r = pearson(x, y);
            } catch (const error& e) {
                if (e.kind() == errc::degenerate_variance)
                    throw error(errc::degenerate_variance,
                                "zero variance in " + vars[i].label() + " or " + vars[j].label());
                throw;
            }
            out.values[i][j] = out.values[j][i] = r;
            out.n[i][j] = out.n[j][i] = x.size();
        }
        out.n[i][i] = ds.records.size();
    }
    return out;
}

double partial_correlation(double r_xy, double r_xz, double r_yz) {
    for (double r : {r_xy, r_xz, r_yz})
        if (!(r >= -1.0 && r <= 1.0))
            throw error(errc::degenerate_input, "correlation outside [-1, 1]");
    const double denom = std::sqrt((1.0 - r_xz * r_xz) * (1.0 - r_yz * r_yz));
    if (denom <= 0.0)
        throw error(errc::degenerate_input, "control correlation has magnitude 1");
    return (r_xy - r_xz * r_yz) / denom;
}

namespace {

struct design {
    Eigen::MatrixXd X; // intercept column first
    Eigen::VectorXd y;
    std::vector<std::string> names; // predictor labels, no intercept
};

design complete_cases(const dataset& ds, const var_ref& target,
                      const std::vector<var_ref>& predictors) {
    std::vector<double> yv;
    std::vector<std::vector<double>> cols(predictors.size());
    for (const auto& rec : ds.records) {
        auto t = var_value(ds, rec, target);
        if (!t) continue;
        std::vector<double> row;
        row.reserve(predictors.size());
        bool complete = true;
        for (const auto& p : predictors) {
            auto v = var_value(ds, rec, p);
            if (!v) {
                complete = false;
                break;
            }
            row.push_back(*v);
        }
        if (!complete) continue;
        yv.push_back(*t);
        for (std::size_t j = 0; j < row.size(); ++j) cols[j].push_back(row[j]);
    }
    design d;
    const auto n = static_cast<Eigen::Index>(yv.size());
    d.X.resize(n, static_cast<Eigen::Index>(predictors.size() + 1));
    d.y.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        d.X(i, 0) = 1.0;
        d.y(i) = yv[static_cast<std::size_t>(i)];
        for (std::size_t j = 0; j < predictors.size(); ++j)
            d.X(i, static_cast<Eigen::Index>(j + 1)) = cols[j][static_cast<std::size_t>(i)];
    }
    for (const auto& p : predictors) d.names.push_back(p.label());
    return d;
}

// rank-checked least squares; relative threshold 1e-10
Eigen::VectorXd solve_ls(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, errc rank_error) {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
    qr.setThreshold(1e-10);
    if (qr.rank() < X.cols())
        throw error(rank_error, "design matrix is rank deficient");
    return qr.solve(y);
}

} // namespace

double partial_correlation_data(const dataset& ds, const var_ref& x, const var_ref& y,
                                const std::vector<var_ref>& controls) {
    std::vector<var_ref> all = {x, y};
    all.insert(all.end(), controls.begin(), controls.end());

    std::vector<std::vector<double>> cols(all.size());
    for (const auto& rec : ds.records) {
        std::vector<double> row;
        bool complete = true;
        for (const auto& v : all) {
            auto val = var_value(ds, rec, v);
            if (!val) {
                complete = false;
                break;
            }
            row.push_back(*val);
        }
        if (!complete) continue;
        for (std::size_t j = 0; j < row.size(); ++j) cols[j].push_back(row[j]);
    }
    const std::size_t n = cols[0].size();
    if (n <= controls.size() + 2)
        throw error(errc::insufficient_n, "need n > number of controls + 2");
    if (controls.empty()) return pearson(cols[0], cols[1]);

    Eigen::MatrixXd Z(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(controls.size() + 1));
    Eigen::VectorXd vx(static_cast<Eigen::Index>(n)), vy(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
        Z(static_cast<Eigen::Index>(i), 0) = 1.0;
        for (std::size_t j = 0; j < controls.size(); ++j)
            Z(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j + 1)) = cols[j + 2][i];
        vx(static_cast<Eigen::Index>(i)) = cols[0][i];
        vy(static_cast<Eigen::Index>(i)) = cols[1][i];
    }
    Eigen::VectorXd bx = solve_ls(Z, vx, errc::collinear_controls);
    Eigen::VectorXd by = solve_ls(Z, vy, errc::collinear_controls);
    Eigen::VectorXd rx = vx - Z * bx;
    Eigen::VectorXd ry = vy - Z * by;
    std::vector<double> rxv(rx.data(), rx.data() + rx.size());
    std::vector<double> ryv(ry.data(), ry.data() + ry.size());
    return pearson(rxv, ryv);
}

regression_model ols_fit(const dataset& ds, const var_ref& target,
                         const std::vector<var_ref>& predictors, const ols_options& opts) {
    if (predictors.empty()) throw error(errc::invalid_config, "no predictors given");
    design d = complete_cases(ds, target, predictors);

    if (opts.half_sample) {
        // seeded Fisher-Yates, keep the first half
        std::vector<Eigen::Index> idx(static_cast<std::size_t>(d.y.size()));
        std::iota(idx.begin(), idx.end(), 0);
        rng64 rng(opts.seed);
        for (std::size_t i = idx.size(); i > 1; --i)
            std::swap(idx[i - 1], idx[rng.below(i)]);
        const auto half = static_cast<Eigen::Index>(idx.size() / 2);
        Eigen::MatrixXd X(half, d.X.cols());
        Eigen::VectorXd y(half);
        for (Eigen::Index i = 0; i < half; ++i) {
            X.row(i) = d.X.row(idx[static_cast<std::size_t>(i)]);
            y(i) = d.y(idx[static_cast<std::size_t>(i)]);
        }
        d.X = std::move(X);
        d.y = std::move(y);
    }

    const auto n = d.y.size();
    const auto p = static_cast<Eigen::Index>(predictors.size());
    if (n <= p + 1)
        throw error(errc::insufficient_n,
                    "n = " + std::to_string(n) + " too small for " + std::to_string(p) + " predictors");

    Eigen::VectorXd beta = solve_ls(d.X, d.y, errc::rank_deficient);
    Eigen::VectorXd resid = d.y - d.X * beta;
    const double rss = resid.squaredNorm();
    const double ymean = d.y.mean();
    const double tss = (d.y.array() - ymean).matrix().squaredNorm();
    if (tss == 0.0)
        throw error(errc::degenerate_variance, "target is constant; R^2 undefined");

    const auto dfe = n - p - 1;
    const double resvar = rss / static_cast<double>(dfe);
    Eigen::MatrixXd xtx_inv = (d.X.transpose() * d.X).inverse();

    regression_model m;
    m.n = static_cast<std::size_t>(n);
    m.df = {static_cast<int>(p), static_cast<int>(dfe)};
    m.intercept = beta(0);
    m.intercept_se = std::sqrt(resvar * xtx_inv(0, 0));
    for (Eigen::Index j = 0; j < p; ++j) {
        m.coefficients[d.names[static_cast<std::size_t>(j)]] = beta(j + 1);
        m.standard_errors[d.names[static_cast<std::size_t>(j)]] =
            std::sqrt(resvar * xtx_inv(j + 1, j + 1));
    }
    m.r_squared = 1.0 - rss / tss;
    m.f_statistic = ((tss - rss) / static_cast<double>(p)) / resvar;
    return m;
}

double ols_predict(const regression_model& m, const std::map<std::string, double>& features) {
    double y = m.intercept;
    for (const auto& [name, coef] : m.coefficients) {
        auto it = features.find(name);
        if (it == features.end())
            throw error(errc::missing_feature, "feature '" + name + "' missing from input");
        y += coef * it->second;
    }
    return y;
}

void save_model(const regression_model& m, const std::filesystem::path& path,
                const std::vector<std::string>& header_comments) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw error(errc::io_error, "cannot write " + path.string());
    for (const auto& c : header_comments) out << "# " << c << "\n";
    out << "model_format = scoreval.regression.v1\n";
    out << "n = " << m.n << "\n";
    out << "df_num = " << m.df.first << "\n";
    out << "df_den = " << m.df.second << "\n";
    out << "r_squared = " << num_to_string(m.r_squared) << "\n";
    out << "f_statistic = " << num_to_string(m.f_statistic) << "\n";
    out << "intercept = " << num_to_string(m.intercept) << "\n";
    out << "intercept_se = " << num_to_string(m.intercept_se) << "\n";
    for (const auto& [name, coef] : m.coefficients) out << "coef." << name << " = " << num_to_string(coef) << "\n";
    for (const auto& [name, se] : m.standard_errors) out << "se." << name << " = " << num_to_string(se) << "\n";
}

regression_model load_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw error(errc::io_error, "cannot open " + path.string());
    regression_model m;
    bool saw_format = false;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        auto eq = t.find('=');
        if (eq == std::string::npos)
            throw error(errc::schema_error,
                        path.string() + ":" + std::to_string(line_no) + ": expected key = value");
        std::string key = trim(t.substr(0, eq));
        std::string value = trim(t.substr(eq + 1));
        auto want_num = [&]() -> double {
            auto v = parse_double(value);
            if (!v) throw error(errc::schema_error,
                                path.string() + ":" + std::to_string(line_no) + ": '" + value +
                                    "' is not numeric");
            return *v;
        };
        if (key == "model_format") {
            if (value != "scoreval.regression.v1")
                throw error(errc::schema_error, "unsupported model format '" + value + "'");
            saw_format = true;
        } else if (key == "n") m.n = static_cast<std::size_t>(want_num());
        else if (key == "df_num") m.df.first = static_cast<int>(want_num());
        else if (key == "df_den") m.df.second = static_cast<int>(want_num());
        else if (key == "r_squared") m.r_squared = want_num();
        else if (key == "f_statistic") m.f_statistic = want_num();
        else if (key == "intercept") m.intercept = want_num();
        else if (key == "intercept_se") m.intercept_se = want_num();
        else if (starts_with(key, "coef.")) m.coefficients[key.substr(5)] = want_num();
        else if (starts_with(key, "se.")) m.standard_errors[key.substr(3)] = want_num();
        else throw error(errc::schema_error,
                         path.string() + ":" + std::to_string(line_no) + ": unknown key '" + key + "'");
    }
    if (!saw_format)
        throw error(errc::schema_error, path.string() + ": missing model_format line");
    return m;
}

} // namespace scoreval
