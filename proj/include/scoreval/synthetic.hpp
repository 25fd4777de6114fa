#pragma once

#include <cstdint>
#include <filesystem>

#include "scoreval/types.hpp"

namespace scoreval {

struct sim_source {
    std::string id;
    source_kind kind = source_kind::llm;
    bool continuous = false;
    int runs = 1;
    double bias = 0.0;     // additive shift applied to the true score
    double noise_sd = 0.0; // gaussian noise per (record, run)
    // When set, scores are withheld from the emitted dataset and only appear
    // in a scoring fixture (see cmd_simulate); lets a replay run fill them in.
    bool fixture_only = false;
};

struct sim_subgroup_level {
    std::string label;
    double weight = 1.0;
    std::map<std::string, double> source_bias; // extra bias per source id
    double extra_noise_sd = 0.0;
};

struct sim_subgroup {
    std::string dimension;
    std::vector<sim_subgroup_level> levels;
};

struct sim_feature {
    std::string name;
    double loading = 1.0;  // value = loading * true_score + noise
    double noise_sd = 0.0;
};

struct sim_advisory {
    std::string name;
    double probability = 0.0;
};

struct sim_config {
    std::size_t n = 100;
    score_scale scale;
    int n_prompts = 1;
    // Weights over scale points, min..max. Empty means uniform.
    std::vector<double> score_distribution;
    std::vector<sim_source> sources;
    std::vector<sim_subgroup> subgroups;
    std::map<int, std::string> rationale_templates; // by assigned score level
    std::vector<sim_feature> features;
    std::vector<sim_advisory> advisories;
    // Response text length grows with the true score so word count correlates
    // with quality; 0 tokens_per_point gives constant-length texts.
    bool emit_response_text = true;
    int base_tokens = 20;
    int tokens_per_point = 15;

    void validate() const; // throws invalid_config
};

struct sim_result {
    dataset data;
    std::vector<int> true_scores; // aligned with data.records
};

sim_result generate_synthetic(const sim_config&, std::uint64_t seed);

sim_config sim_config_from_json_file(const std::filesystem::path&);
sim_config default_sim_config(); // 1-6 scale, an engine + a two-run llm, subgroups

void save_true_scores(const sim_result&, const std::filesystem::path&,
                      const std::vector<std::string>& header_comments = {});

} // namespace scoreval
