#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <mutex>

#include "scoreval/types.hpp"

namespace scoreval {

// Default tag names and wording follow the scoring prompt this toolkit
// standardizes on; all fields are operator-configurable.
struct prompt_template {
    std::string role_preamble =
        "You are a seasoned English teacher who has been trained to be a professional rater "
        "of high school essays. Use the instructions in the provided rubric to evaluate and "
        "score the response to the assigned question.";
    std::string instructions =
        "First start with reading the response text and then consider how the response aligns "
        "with the rubric indicators. Note that the rubric details a holistic scoring process. "
        "Don't be too analytical or detailed when assessing the responses. We want an overall "
        "score.\n\n"
        "In addition to the score, please also provide your reasoning or your thought process "
        "for the score you assigned. Please describe it in no more than 2 sentences so that "
        "another rater could use it to understand your score.";
    std::string question_tag = "D5A60FF8F3AF47619BC1CE00CA21D938";
    std::string rubric_tag = "27152C7AC19445FA87D5FC4A7313FF68";
    std::string answer_tag = "CACE4B6E785148BDAD20A93818F662B8";
    std::string output_format_block =
        "Return your answer in this exact JSON format:\n\n"
        "{\n  \"score\": <number>,\n  \"reasoning\": \"<brief explanation>\"\n}";
    // Derives per-request tags from the request identity instead of the fixed
    // ones, so answer text cannot be pre-seeded with the tag strings.
    bool fresh_tags_per_request = false;

    void validate() const;
};

prompt_template template_from_json_file(const std::filesystem::path&);

struct scoring_request {
    std::string response_id;
    std::string question_text;
    std::string rubric_text;
    std::string answer_text;
    double temperature = 0.0;
    std::string model_id;
    int run_index = 1;
};

std::string build_prompt(const prompt_template&, const scoring_request&);

// Stable digest over (model_id, rendered prompt bytes, temperature, run).
std::string request_hash(const scoring_request&, const std::string& rendered_prompt);

enum class result_status { ok, malformed, failed };
const char* result_status_name(result_status);

struct scoring_result {
    std::string response_id;
    std::string model_id;
    int run_index = 1;
    std::optional<int> score;
    std::optional<std::string> rationale;
    result_status status = result_status::failed;
    std::string raw_completion;
    int attempts = 0; // 0 means served from cache
    std::string error_message;
    // The prompt asks for at most two sentences; longer rationales are
    // accepted but noted here.
    bool rationale_over_length = false;
};

std::size_t sentence_count(const std::string& text);

struct parsed_completion {
    int score = 0;
    std::string rationale;
};

// Extracts the first JSON object carrying a "score" field, tolerating
// surrounding prose and code fences. Non-integer or out-of-scale scores are
// malformed_completion errors, never coerced.
parsed_completion parse_completion(const std::string& raw, const score_scale&);

struct completion_outcome {
    enum class status { ok, transient_error, auth_error } st = status::ok;
    std::string text;          // completion on ok
    std::string error_message; // otherwise
};

class provider_client {
public:
    virtual ~provider_client() = default;
    // hash identifies the request for keyed stores; live adapters ignore it.
    virtual completion_outcome complete(const scoring_request&, const std::string& prompt,
                                        const std::string& hash) = 0;
};

enum class rr_mode { record, replay };

// Fixture file: JSON lines {"request_hash": ..., "raw_completion": ...}.
// record wraps a live client and appends every completion; replay serves by
// hash and raises fixture_miss on absent entries.
std::unique_ptr<provider_client> record_replay_client(const std::filesystem::path& fixture,
                                                      rr_mode mode,
                                                      std::unique_ptr<provider_client> inner = {});

void append_fixture_entry(std::ostream&, const std::string& hash, const std::string& raw);

// Chat-completions HTTP adapter (OpenAI-style wire format). Reads the API key
// from SCORING_PROVIDER_API_KEY unless another variable name is given.
struct http_client_options {
    std::string base_url = "https://api.openai.com";
    std::string path = "/v1/chat/completions";
    std::string api_key_env = "SCORING_PROVIDER_API_KEY";
    int timeout_seconds = 120;
};

std::unique_ptr<provider_client> make_http_client(const http_client_options&);

// Append-only per-model completion store, same line format as fixtures.
// Writes are buffered per request index so file order is deterministic.
class result_cache {
public:
    explicit result_cache(std::filesystem::path dir);
    ~result_cache();
    std::optional<std::string> lookup(const std::string& model_id, const std::string& hash);
    void put(const std::string& model_id, std::size_t request_index, const std::string& hash,
             const std::string& raw);
    void flush(); // drains any still-pending out-of-order entries

private:
    struct model_file;
    model_file& file_for(const std::string& model_id);
    std::filesystem::path dir_;
    std::mutex mutex_;
    std::map<std::string, std::unique_ptr<model_file>> files_;
};

struct batch_limits {
    int max_in_flight = 4;
    int max_retries = 3;
    int initial_backoff_ms = 1000;
};

struct scoring_inputs {
    std::string rubric_text;
    std::map<std::string, std::string> question_texts; // by prompt_id
};

struct batch_result {
    std::vector<scoring_result> results; // record order, runs innermost
    dataset data;                        // input dataset plus successful scores/rationales
    std::size_t cache_hits = 0;
    std::size_t submissions = 0;
    std::size_t n_skipped = 0; // records without response text
};

batch_result score_batch(const dataset&, const prompt_template&, provider_client&,
                         const std::string& model_id, int runs, double temperature,
                         const scoring_inputs&, const batch_limits& = {},
                         result_cache* cache = nullptr);

} // namespace scoreval
