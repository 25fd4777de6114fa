#include "scoreval/harness.hpp"

#include <atomic>
#include <cctype>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <thread>

#include <json.hpp>

#include "scoreval/util.hpp"

namespace scoreval {

using nlohmann::json;

void prompt_template::validate() const {
    if (question_tag.empty() || rubric_tag.empty() || answer_tag.empty())
        throw error(errc::invalid_config, "tag names must be nonempty");
    if (question_tag == rubric_tag || question_tag == answer_tag || rubric_tag == answer_tag)
        throw error(errc::invalid_config, "tag names must be pairwise distinct");
    if (output_format_block.find("\"score\"") == std::string::npos ||
        output_format_block.find("\"reasoning\"") == std::string::npos)
        throw error(errc::invalid_config,
                    "output format block must request \"score\" and \"reasoning\" fields");
}

prompt_template template_from_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw error(errc::io_error, "cannot open " + path.string());
    json obj = json::parse(in, nullptr, false);
    if (obj.is_discarded() || !obj.is_object())
        throw error(errc::invalid_config, path.string() + ": not a JSON object");
    prompt_template t;
    if (obj.contains("role_preamble")) t.role_preamble = obj.at("role_preamble").get<std::string>();
    if (obj.contains("instructions")) t.instructions = obj.at("instructions").get<std::string>();
    if (obj.contains("question_tag")) t.question_tag = obj.at("question_tag").get<std::string>();
    if (obj.contains("rubric_tag")) t.rubric_tag = obj.at("rubric_tag").get<std::string>();
    if (obj.contains("answer_tag")) t.answer_tag = obj.at("answer_tag").get<std::string>();
    if (obj.contains("output_format_block"))
        t.output_format_block = obj.at("output_format_block").get<std::string>();
    if (obj.contains("fresh_tags_per_request"))
        t.fresh_tags_per_request = obj.at("fresh_tags_per_request").get<bool>();
    t.validate();
    return t;
}

namespace {

std::string fresh_tag(const scoring_request& req, const char* which) {
    return hex64(fnv1a64(std::string(which) + "\x1f" + req.model_id + "\x1f" + req.response_id +
                         "\x1f" + std::to_string(req.run_index))) +
           hex64(fnv1a64(std::string(which) + "\x1e" + req.answer_text));
}

} // namespace

std::string build_prompt(const prompt_template& tmpl, const scoring_request& req) {
    tmpl.validate();
    if (req.question_text.empty()) throw error(errc::empty_content, "question text is empty");
    if (req.rubric_text.empty()) throw error(errc::empty_content, "rubric text is empty");
    if (req.answer_text.empty()) throw error(errc::empty_content, "answer text is empty");

    std::string qtag = tmpl.question_tag, rtag = tmpl.rubric_tag, atag = tmpl.answer_tag;
    if (tmpl.fresh_tags_per_request) {
        qtag = "Q" + fresh_tag(req, "question");
        rtag = "R" + fresh_tag(req, "rubric");
        atag = "A" + fresh_tag(req, "answer");
    }
    for (const auto& [name, content] :
         {std::pair<const std::string&, const std::string&>{qtag, req.question_text},
          {rtag, req.rubric_text},
          {atag, req.answer_text}}) {
        for (const std::string& tag : {qtag, rtag, atag}) {
            if (content.find("<" + tag + ">") != std::string::npos ||
                content.find("</" + tag + ">") != std::string::npos)
                throw error(errc::tag_collision,
                            "content for tag '" + name + "' contains tag string '" + tag + "'");
        }
    }

    std::string p;
    p += tmpl.role_preamble;
    p += "\n\n";
    p += tmpl.instructions;
    p += "\n\nThe question or task, rubric, and answer will each be surrounded with XML-style "
         "tags below. The tags will be " +
         qtag + ", " + rtag + ", and " + atag + ", respectively.\n\n";
    p += tmpl.output_format_block;
    p += "\n\n<" + qtag + ">\n" + req.question_text + "\n</" + qtag + ">\n\n";
    p += "<" + rtag + ">\n" + req.rubric_text + "\n</" + rtag + ">\n\n";
    p += "<" + atag + ">\n" + req.answer_text + "\n</" + atag + ">\n";
    return p;
}

std::string request_hash(const scoring_request& req, const std::string& rendered_prompt) {
    std::string material = "model\x1f" + req.model_id + "\x1ftemperature\x1f" +
                           num_to_string(req.temperature) + "\x1frun\x1f" +
                           std::to_string(req.run_index) + "\x1fprompt\x1f" + rendered_prompt;
    return hex64(fnv1a64(material));
}

const char* result_status_name(result_status s) {
    switch (s) {
        case result_status::ok: return "ok";
        case result_status::malformed: return "malformed";
        case result_status::failed: return "failed";
    }
    return "failed";
}

std::size_t sentence_count(const std::string& text) {
    std::size_t count = 0;
    bool in_terminator = false;
    bool any_content = false;
    for (char c : text) {
        const bool terminator = c == '.' || c == '!' || c == '?';
        if (terminator && !in_terminator && any_content) ++count;
        if (!terminator && !std::isspace(static_cast<unsigned char>(c))) any_content = true;
        in_terminator = terminator;
    }
    // trailing words without a terminator still form a sentence
    std::size_t i = text.size();
    while (i > 0 && std::isspace(static_cast<unsigned char>(text[i - 1]))) --i;
    if (i > 0 && text[i - 1] != '.' && text[i - 1] != '!' && text[i - 1] != '?') ++count;
    return count;
}

namespace {

// balanced-brace candidate starting at pos, respecting JSON strings
std::optional<std::string> object_candidate(const std::string& text, std::size_t pos) {
    int depth = 0;
    bool in_string = false;
    for (std::size_t i = pos; i < text.size(); ++i) {
        const char c = text[i];
        if (in_string) {
            if (c == '\\') ++i;
            else if (c == '"') in_string = false;
            continue;
        }
        if (c == '"') in_string = true;
        else if (c == '{') ++depth;
        else if (c == '}') {
            if (--depth == 0) return text.substr(pos, i - pos + 1);
        }
    }
    return std::nullopt;
}

} // namespace

parsed_completion parse_completion(const std::string& raw, const score_scale& scale) {
    for (std::size_t pos = raw.find('{'); pos != std::string::npos;
         pos = raw.find('{', pos + 1)) {
        auto candidate = object_candidate(raw, pos);
        if (!candidate) continue;
        json obj = json::parse(*candidate, nullptr, false);
        if (obj.is_discarded() || !obj.is_object() || !obj.contains("score")) continue;

        const auto& score = obj.at("score");
        if (!score.is_number_integer())
            throw error(errc::malformed_completion, "\"score\" is not an integer");
        const long long v = score.get<long long>();
        if (v < scale.min || v > scale.max)
            throw error(errc::malformed_completion,
                        "score " + std::to_string(v) + " outside scale [" +
                            std::to_string(scale.min) + "," + std::to_string(scale.max) + "]");
        parsed_completion out;
        out.score = static_cast<int>(v);
        if (obj.contains("reasoning") && obj.at("reasoning").is_string())
            out.rationale = obj.at("reasoning").get<std::string>();
        return out;
    }
    throw error(errc::malformed_completion, "no JSON object with a \"score\" field found");
}

void append_fixture_entry(std::ostream& out, const std::string& hash, const std::string& raw) {
    json line;
    line["request_hash"] = hash;
    line["raw_completion"] = raw;
    out << line.dump() << "\n";
}

namespace {

std::map<std::string, std::string> load_fixture_map(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw error(errc::io_error, "cannot open fixture " + path.string());
    std::map<std::string, std::string> map;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty() || line[0] == '#') continue;
        json obj = json::parse(line, nullptr, false);
        if (obj.is_discarded() || !obj.is_object() || !obj.contains("request_hash") ||
            !obj.contains("raw_completion"))
            throw error(errc::cache_corruption,
                        path.string() + ":" + std::to_string(line_no) + ": bad fixture line");
        map[obj.at("request_hash").get<std::string>()] =
            obj.at("raw_completion").get<std::string>();
    }
    return map;
}

class replay_client final : public provider_client {
public:
    explicit replay_client(const std::filesystem::path& fixture)
        : path_(fixture), map_(load_fixture_map(fixture)) {}

    completion_outcome complete(const scoring_request&, const std::string&,
                                const std::string& hash) override {
        auto it = map_.find(hash);
        if (it == map_.end())
            throw error(errc::fixture_miss,
                        "no fixture entry for request " + hash + " in " + path_.string());
        return {completion_outcome::status::ok, it->second, ""};
    }

private:
    std::filesystem::path path_;
    std::map<std::string, std::string> map_;
};

class recording_client final : public provider_client {
public:
    recording_client(const std::filesystem::path& fixture, std::unique_ptr<provider_client> inner)
        : inner_(std::move(inner)), out_(fixture, std::ios::binary | std::ios::app) {
        if (!out_) throw error(errc::io_error, "cannot write fixture " + fixture.string());
    }

    completion_outcome complete(const scoring_request& req, const std::string& prompt,
                                const std::string& hash) override {
        completion_outcome outcome = inner_->complete(req, prompt, hash);
        if (outcome.st == completion_outcome::status::ok) {
            std::lock_guard lock(mutex_);
            append_fixture_entry(out_, hash, outcome.text);
            out_.flush();
        }
        return outcome;
    }

private:
    std::unique_ptr<provider_client> inner_;
    std::ofstream out_;
    std::mutex mutex_;
};

} // namespace

std::unique_ptr<provider_client> record_replay_client(const std::filesystem::path& fixture,
                                                      rr_mode mode,
                                                      std::unique_ptr<provider_client> inner) {
    if (mode == rr_mode::replay) {
        if (inner) throw error(errc::invalid_config, "replay mode takes no inner client");
        return std::make_unique<replay_client>(fixture);
    }
    if (!inner) throw error(errc::invalid_config, "record mode wraps a live client");
    return std::make_unique<recording_client>(fixture, std::move(inner));
}

// ---------------------------------------------------------------------------
// cache

struct result_cache::model_file {
    std::filesystem::path path;
    std::map<std::string, std::string> entries;
    std::map<std::size_t, std::pair<std::string, std::string>> pending; // by request index
    std::size_t next_index = 0;
    std::ofstream out;
};

result_cache::result_cache(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::filesystem::create_directories(dir_);
}

result_cache::~result_cache() { flush(); }

result_cache::model_file& result_cache::file_for(const std::string& model_id) {
    auto it = files_.find(model_id);
    if (it != files_.end()) return *it->second;

    auto mf = std::make_unique<model_file>();
    std::string name;
    for (char c : model_id)
        name += (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.')
                    ? c
                    : '_';
    mf->path = dir_ / (name + ".jsonl");
    if (std::filesystem::exists(mf->path)) mf->entries = load_fixture_map(mf->path);
    mf->out.open(mf->path, std::ios::binary | std::ios::app);
    if (!mf->out) throw error(errc::io_error, "cannot write cache " + mf->path.string());
    return *files_.emplace(model_id, std::move(mf)).first->second;
}

std::optional<std::string> result_cache::lookup(const std::string& model_id,
                                                const std::string& hash) {
    std::lock_guard lock(mutex_);
    auto& mf = file_for(model_id);
    auto it = mf.entries.find(hash);
    if (it == mf.entries.end()) return std::nullopt;
    return it->second;
}

void result_cache::put(const std::string& model_id, std::size_t request_index,
                       const std::string& hash, const std::string& raw) {
    std::lock_guard lock(mutex_);
    auto& mf = file_for(model_id);
    if (mf.entries.count(hash)) return;
    mf.entries[hash] = raw;
    mf.pending[request_index] = {hash, raw};
    while (!mf.pending.empty() && mf.pending.begin()->first <= mf.next_index) {
        const auto& [hash2, raw2] = mf.pending.begin()->second;
        append_fixture_entry(mf.out, hash2, raw2);
        mf.next_index = mf.pending.begin()->first + 1;
        mf.pending.erase(mf.pending.begin());
    }
    mf.out.flush();
}

void result_cache::flush() {
    std::lock_guard lock(mutex_);
    for (auto& [_, mf] : files_) {
        for (const auto& [index, entry] : mf->pending) {
            append_fixture_entry(mf->out, entry.first, entry.second);
            mf->next_index = index + 1;
        }
        mf->pending.clear();
        mf->out.flush();
    }
}

// ---------------------------------------------------------------------------
// batch orchestration

namespace {

struct work_item {
    std::size_t index; // position in the request list
    std::size_t record_index;
    scoring_request request;
    std::string prompt;
    std::string hash;
};

} // namespace

batch_result score_batch(const dataset& ds, const prompt_template& tmpl, provider_client& client,
                         const std::string& model_id, int runs, double temperature,
                         const scoring_inputs& inputs, const batch_limits& limits,
                         result_cache* cache) {
    if (runs < 1) throw error(errc::invalid_config, "runs must be >= 1");
    if (limits.max_in_flight < 1) throw error(errc::invalid_config, "max_in_flight must be >= 1");
    if (inputs.rubric_text.empty()) throw error(errc::empty_content, "rubric text is empty");
    tmpl.validate();

    batch_result out;
    out.data = ds;

    std::vector<work_item> work;
    for (std::size_t i = 0; i < ds.records.size(); ++i) {
        const auto& rec = ds.records[i];
        if (!rec.response_text || rec.response_text->empty()) {
            ++out.n_skipped;
            continue;
        }
        auto qit = inputs.question_texts.find(rec.prompt_id);
        if (qit == inputs.question_texts.end())
            throw error(errc::empty_content,
                        "no question text for prompt '" + rec.prompt_id + "'");
        for (int run = 1; run <= runs; ++run) {
            work_item item;
            item.index = work.size();
            item.record_index = i;
            item.request = {rec.response_id, qit->second, inputs.rubric_text,
                            *rec.response_text,  temperature, model_id,
                            run};
            item.prompt = build_prompt(tmpl, item.request);
            item.hash = request_hash(item.request, item.prompt);
            work.push_back(std::move(item));
        }
    }

    std::vector<scoring_result> results(work.size());
    std::atomic<std::size_t> next{0};
    std::atomic<std::size_t> cache_hits{0};
    std::atomic<std::size_t> submissions{0};
    std::mutex error_mutex;
    std::exception_ptr first_error;
    std::atomic<bool> abort{false};

    auto fail_batch = [&](std::exception_ptr e) {
        std::lock_guard lock(error_mutex);
        if (!first_error) first_error = e;
        abort.store(true);
    };

    auto run_item = [&](const work_item& item) {
        scoring_result res;
        res.response_id = item.request.response_id;
        res.model_id = model_id;
        res.run_index = item.request.run_index;

        std::string raw;
        bool from_cache = false;
        if (cache) {
            if (auto hit = cache->lookup(model_id, item.hash)) {
                raw = *hit;
                from_cache = true;
                cache_hits.fetch_add(1);
                res.attempts = 0;
            }
        }
        if (!from_cache) {
            rng64 jitter(fnv1a64(item.hash));
            int attempt = 0;
            while (true) {
                ++attempt;
                submissions.fetch_add(1);
                completion_outcome outcome = client.complete(item.request, item.prompt, item.hash);
                if (outcome.st == completion_outcome::status::ok) {
                    raw = outcome.text;
                    res.attempts = attempt;
                    if (cache) cache->put(model_id, item.index, item.hash, raw);
                    break;
                }
                if (outcome.st == completion_outcome::status::auth_error)
                    throw error(errc::provider_auth_error, outcome.error_message);
                if (attempt > limits.max_retries) {
                    res.status = result_status::failed;
                    res.attempts = attempt;
                    res.error_message = outcome.error_message;
                    results[item.index] = std::move(res);
                    return;
                }
                if (limits.initial_backoff_ms > 0) {
                    const double factor = static_cast<double>(1ll << (attempt - 1));
                    const double ms =
                        limits.initial_backoff_ms * factor * (0.5 + jitter.uniform01());
                    std::this_thread::sleep_for(
                        std::chrono::milliseconds(static_cast<long long>(ms)));
                }
            }
        }

        res.raw_completion = raw;
        try {
            parsed_completion parsed = parse_completion(raw, ds.scale);
            res.score = parsed.score;
            res.rationale = parsed.rationale;
            res.rationale_over_length = sentence_count(parsed.rationale) > 2;
            res.status = result_status::ok;
        } catch (const error& e) {
            res.status = result_status::malformed;
            res.error_message = e.what();
        }
        results[item.index] = std::move(res);
    };

    auto worker = [&] {
        while (!abort.load()) {
            const std::size_t i = next.fetch_add(1);
            if (i >= work.size()) return;
            try {
                run_item(work[i]);
            } catch (...) {
                fail_batch(std::current_exception());
                return;
            }
        }
    };

    const std::size_t n_threads =
        std::min<std::size_t>(static_cast<std::size_t>(limits.max_in_flight), work.size());
    if (n_threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> threads;
        for (std::size_t t = 0; t < n_threads; ++t) threads.emplace_back(worker);
        for (auto& t : threads) t.join();
    }
    if (cache) cache->flush();
    if (first_error) std::rethrow_exception(first_error);

    out.cache_hits = cache_hits.load();
    out.submissions = submissions.load();
    out.results = std::move(results);

    out.data.add_source({model_id, source_kind::llm, false, false});
    for (std::size_t w = 0; w < work.size(); ++w) {
        const auto& res = out.results[w];
        if (res.status != result_status::ok) continue;
        auto& rec = out.data.records[work[w].record_index];
        rec.ai_scores[{model_id, res.run_index}] = static_cast<double>(*res.score);
        if (res.rationale) rec.rationales[{model_id, res.run_index}] = *res.rationale;
    }
    return out;
}

} // namespace scoreval
