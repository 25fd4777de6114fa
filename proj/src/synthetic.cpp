#include "scoreval/synthetic.hpp"

#include <cmath>
#include <fstream>

#include <json.hpp>

#include "scoreval/csv.hpp"
#include "scoreval/util.hpp"

namespace scoreval {

void sim_config::validate() const {
    scale.validate();
    if (n == 0) throw error(errc::invalid_config, "n must be positive");
    if (n_prompts < 1) throw error(errc::invalid_config, "n_prompts must be >= 1");
    if (!score_distribution.empty()) {
        if (score_distribution.size() != static_cast<std::size_t>(scale.size()))
            throw error(errc::invalid_config, "score_distribution needs one weight per scale point");
        double total = 0;
        for (double w : score_distribution) {
            if (w < 0) throw error(errc::invalid_config, "negative score_distribution weight");
            total += w;
        }
        if (total <= 0) throw error(errc::invalid_config, "score_distribution sums to zero");
    }
    std::set<std::string> ids;
    for (const auto& s : sources) {
        if (s.id.empty() || s.id == "human")
            throw error(errc::invalid_config, "source id empty or reserved");
        if (!ids.insert(s.id).second)
            throw error(errc::invalid_config, "duplicate source id '" + s.id + "'");
        if (s.runs < 1) throw error(errc::invalid_config, "source '" + s.id + "' runs must be >= 1");
        if (s.noise_sd < 0) throw error(errc::invalid_config, "negative noise_sd for '" + s.id + "'");
        if (s.continuous && s.kind != source_kind::feature_engine)
            throw error(errc::invalid_config, "continuous source '" + s.id + "' must be feature_engine");
    }
    for (const auto& g : subgroups) {
        if (g.dimension.empty()) throw error(errc::invalid_config, "subgroup dimension empty");
        if (g.levels.empty()) throw error(errc::invalid_config, "subgroup '" + g.dimension + "' has no levels");
        for (const auto& lvl : g.levels) {
            if (lvl.weight <= 0) throw error(errc::invalid_config, "subgroup level weight must be positive");
            if (lvl.extra_noise_sd < 0) throw error(errc::invalid_config, "negative extra_noise_sd");
        }
    }
    for (const auto& [level, _] : rationale_templates)
        if (!scale.contains(level))
            throw error(errc::invalid_config, "rationale template level outside scale");
    for (const auto& f : features)
        if (f.noise_sd < 0) throw error(errc::invalid_config, "negative feature noise_sd");
    for (const auto& a : advisories)
        if (a.probability < 0 || a.probability > 1)
            throw error(errc::invalid_config, "advisory probability outside [0, 1]");
    if (base_tokens < 0 || tokens_per_point < 0)
        throw error(errc::invalid_config, "negative text length settings");
}

namespace {

const char* k_filler[] = {"the", "writer", "argues", "clearly", "with", "evidence",
                          "and", "examples", "while", "developing", "each", "point",
                          "in", "order", "to", "support", "a", "position"};

std::string filler_text(std::size_t record_index, int tokens) {
    constexpr std::size_t vocab = sizeof(k_filler) / sizeof(k_filler[0]);
    std::string text;
    for (int t = 0; t < tokens; ++t) {
        if (t) text += ' ';
        text += k_filler[(record_index + static_cast<std::size_t>(t)) % vocab];
    }
    return text;
}

} // namespace

sim_result generate_synthetic(const sim_config& cfg, std::uint64_t seed) {
    cfg.validate();
    rng64 rng(seed);

    std::vector<double> dist = cfg.score_distribution;
    if (dist.empty()) dist.assign(static_cast<std::size_t>(cfg.scale.size()), 1.0);

    sim_result out;
    out.data.scale = cfg.scale;
    for (const auto& s : cfg.sources)
        out.data.source_catalog.push_back({s.id, s.kind, s.continuous, false});

    for (std::size_t i = 0; i < cfg.n; ++i) {
        score_record rec;
        rec.response_id = "r" + std::to_string(i + 1);
        const std::size_t prompt =
            cfg.n_prompts > 1 ? static_cast<std::size_t>(rng.uniform01() * cfg.n_prompts)
                              : 0;
        rec.prompt_id = "p" + std::to_string(std::min<std::size_t>(prompt, cfg.n_prompts - 1) + 1);

        const int true_score = cfg.scale.min + static_cast<int>(rng.pick(dist));
        out.true_scores.push_back(true_score);
        rec.human_final = true_score;

        double subgroup_noise = 0.0;
        std::map<std::string, double> subgroup_bias;
        for (const auto& g : cfg.subgroups) {
            std::vector<double> weights;
            for (const auto& lvl : g.levels) weights.push_back(lvl.weight);
            const auto& lvl = g.levels[rng.pick(weights)];
            rec.subgroups[g.dimension] = lvl.label;
            subgroup_noise += lvl.extra_noise_sd;
            for (const auto& [src, b] : lvl.source_bias) subgroup_bias[src] += b;
        }

        for (const auto& f : cfg.features)
            rec.features[f.name] = f.loading * true_score + rng.normal(0.0, f.noise_sd);

        if (cfg.emit_response_text) {
            const int tokens = cfg.base_tokens + cfg.tokens_per_point * (true_score - cfg.scale.min);
            rec.response_text = filler_text(i, tokens);
        }

        for (const auto& a : cfg.advisories)
            if (rng.uniform01() < a.probability) rec.advisories.insert(a.name);

        for (const auto& s : cfg.sources) {
            const double bias = [&] {
                auto it = subgroup_bias.find(s.id);
                return s.bias + (it != subgroup_bias.end() ? it->second : 0.0);
            }();
            for (int run = 1; run <= s.runs; ++run) {
                const double sd = s.noise_sd + subgroup_noise;
                const double raw = true_score + bias + (sd > 0 ? rng.normal(0.0, sd) : 0.0);
                double value = raw;
                if (!s.continuous)
                    value = clamp_score(round_half_away(raw), cfg.scale.min, cfg.scale.max);
                rec.ai_scores[{s.id, run}] = value;
                if (s.kind == source_kind::llm && !cfg.rationale_templates.empty()) {
                    auto it = cfg.rationale_templates.find(static_cast<int>(value));
                    if (it != cfg.rationale_templates.end())
                        rec.rationales[{s.id, run}] = it->second;
                }
            }
        }
        out.data.records.push_back(std::move(rec));
    }
    return out;
}

namespace {

using nlohmann::json;

template <typename T>
T get_or(const json& obj, const char* key, T fallback) {
    auto it = obj.find(key);
    if (it == obj.end() || it->is_null()) return fallback;
    return it->get<T>();
}

} // namespace

sim_config sim_config_from_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw error(errc::io_error, "cannot open " + path.string());
    json obj = json::parse(in, nullptr, false);
    if (obj.is_discarded() || !obj.is_object())
        throw error(errc::invalid_config, path.string() + ": not a JSON object");

    sim_config cfg = default_sim_config();
    cfg.sources.clear();
    cfg.subgroups.clear();
    cfg.rationale_templates.clear();
    cfg.features.clear();
    cfg.advisories.clear();

    cfg.n = get_or<std::size_t>(obj, "n", 100);
    if (obj.contains("scale")) {
        const auto& sc = obj.at("scale");
        cfg.scale.min = get_or<int>(sc, "min", 1);
        cfg.scale.max = get_or<int>(sc, "max", 6);
        cfg.scale.zero_reserved = get_or<bool>(sc, "zero_reserved", false);
    }
    cfg.n_prompts = get_or<int>(obj, "n_prompts", 1);
    if (obj.contains("score_distribution"))
        cfg.score_distribution = obj.at("score_distribution").get<std::vector<double>>();
    else
        cfg.score_distribution.clear();
    for (const auto& s : obj.value("sources", json::array())) {
        sim_source src;
        src.id = s.at("id").get<std::string>();
        src.kind = parse_source_kind(get_or<std::string>(s, "kind", "llm"));
        src.continuous = get_or<bool>(s, "continuous", false);
        src.runs = get_or<int>(s, "runs", 1);
        src.bias = get_or<double>(s, "bias", 0.0);
        src.noise_sd = get_or<double>(s, "noise_sd", 0.0);
        src.fixture_only = get_or<bool>(s, "fixture_only", false);
        cfg.sources.push_back(std::move(src));
    }
    for (const auto& g : obj.value("subgroups", json::array())) {
        sim_subgroup grp;
        grp.dimension = g.at("dimension").get<std::string>();
        for (const auto& l : g.value("levels", json::array())) {
            sim_subgroup_level lvl;
            lvl.label = l.at("label").get<std::string>();
            lvl.weight = get_or<double>(l, "weight", 1.0);
            lvl.extra_noise_sd = get_or<double>(l, "extra_noise_sd", 0.0);
            const json bias = l.value("source_bias", json::object());
            for (const auto& [src, b] : bias.items()) lvl.source_bias[src] = b.get<double>();
            grp.levels.push_back(std::move(lvl));
        }
        cfg.subgroups.push_back(std::move(grp));
    }
    const json templates = obj.value("rationale_templates", json::object());
    for (const auto& [level, text] : templates.items()) {
        auto lv = parse_int(level);
        if (!lv) throw error(errc::invalid_config, "rationale template level '" + level + "'");
        cfg.rationale_templates[static_cast<int>(*lv)] = text.get<std::string>();
    }
    for (const auto& f : obj.value("features", json::array()))
        cfg.features.push_back({f.at("name").get<std::string>(), get_or<double>(f, "loading", 1.0),
                                get_or<double>(f, "noise_sd", 0.0)});
    for (const auto& a : obj.value("advisories", json::array()))
        cfg.advisories.push_back(
            {a.at("name").get<std::string>(), get_or<double>(a, "probability", 0.0)});
    cfg.emit_response_text = get_or<bool>(obj, "emit_response_text", true);
    cfg.base_tokens = get_or<int>(obj, "base_tokens", 20);
    cfg.tokens_per_point = get_or<int>(obj, "tokens_per_point", 15);
    cfg.validate();
    return cfg;
}

sim_config default_sim_config() {
    sim_config cfg;
    cfg.n = 1000;
    cfg.scale = {1, 6, false};
    cfg.n_prompts = 4;
    cfg.score_distribution = {1, 16, 29, 31, 18, 5};
    cfg.sources = {
        {"engine", source_kind::feature_engine, true, 1, 0.0, 0.45, false},
        {"llm_a", source_kind::llm, false, 2, -0.55, 0.6, false},
    };
    cfg.subgroups = {{"group",
                      {{"alpha", 0.5, {}, 0.0},
                       {"beta", 0.3, {{"llm_a", -0.5}}, 0.0},
                       {"gamma", 0.2, {}, 0.0}}}};
    cfg.rationale_templates = {
        {1, "minimal control of language with pervasive errors and no clear position"},
        {2, "weak organization with frequent errors and little development of ideas"},
        {3, "adequate structure though development stays thin and wording is plain"},
        {4, "competent argument with generally sound organization and some depth"},
        {5, "strong coherent reasoning supported by varied sentences and apt vocabulary"},
        {6, "outstanding insight, precise language, and fully developed persuasive argument"},
    };
    cfg.features = {
        {"Grammar", 0.8, 0.35},
        {"Organization", 1.1, 0.5},
        {"Development", 0.9, 0.5},
        {"WordChoice", 0.6, 0.4},
    };
    cfg.advisories = {{"excessive_length", 0.04}, {"reuse_of_language", 0.08}};
    return cfg;
}

void save_true_scores(const sim_result& sim, const std::filesystem::path& path,
                      const std::vector<std::string>& header_comments) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw error(errc::io_error, "cannot write " + path.string());
    for (const auto& c : header_comments) out << "# " << c << "\n";
    write_csv_row(out, {"response_id", "true_score"});
    for (std::size_t i = 0; i < sim.data.records.size(); ++i)
        write_csv_row(out, {sim.data.records[i].response_id, std::to_string(sim.true_scores[i])});
}

} // namespace scoreval
