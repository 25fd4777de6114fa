#include "scoreval/types.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "scoreval/util.hpp"

namespace scoreval {

bool score_scale::contains(double v) const {
    return v >= min && v <= max;
}

void score_scale::validate() const {
    if (min > max)
        throw error(errc::invalid_config, "scale min exceeds max");
    if (size() < 2)
        throw error(errc::invalid_config, "scale needs at least two score points");
    if (zero_reserved && min != 0)
        throw error(errc::invalid_config, "zero_reserved requires min = 0");
}

const char* source_kind_name(source_kind k) {
    switch (k) {
        case source_kind::human: return "human";
        case source_kind::feature_engine: return "feature_engine";
        case source_kind::llm: return "llm";
    }
    return "llm";
}

source_kind parse_source_kind(const std::string& s) {
    if (s == "human") return source_kind::human;
    if (s == "feature_engine") return source_kind::feature_engine;
    if (s == "llm") return source_kind::llm;
    throw error(errc::schema_error, "unknown source kind '" + s + "'");
}

source_ref parse_source_ref(const std::string& text) {
    auto pos = text.rfind(':');
    if (pos == std::string::npos) return source_ref{text, 1};
    auto run = parse_int(text.substr(pos + 1));
    if (!run || *run < 1)
        throw error(errc::schema_error, "bad run index in source ref '" + text + "'");
    return source_ref{text.substr(0, pos), static_cast<int>(*run)};
}

const source_info* dataset::find_source(const std::string& id) const {
    for (const auto& s : source_catalog)
        if (s.id == id) return &s;
    return nullptr;
}

bool dataset::is_continuous(const source_ref& ref) const {
    if (ref.is_human()) return false;
    const source_info* s = find_source(ref.id);
    return s && s->continuous;
}

std::optional<double> dataset::value(const score_record& rec, const source_ref& ref) const {
    if (ref.is_human()) {
        if (rec.human_final) return static_cast<double>(*rec.human_final);
        return std::nullopt;
    }
    auto it = rec.ai_scores.find(source_run_key{ref.id, ref.run});
    if (it == rec.ai_scores.end()) return std::nullopt;
    return it->second;
}

void dataset::add_source(const source_info& info) {
    if (!find_source(info.id)) source_catalog.push_back(info);
}

void dataset::validate_catalog() const {
    for (const auto& s : source_catalog) {
        if (s.continuous && s.kind != source_kind::feature_engine && !s.derived)
            throw error(errc::schema_error,
                        "continuous scores only permitted for feature_engine sources: '" + s.id + "'");
    }
    for (const auto& rec : records) {
        for (const auto& [key, _] : rec.ai_scores) {
            if (!find_source(key.source_id))
                throw error(errc::schema_error,
                            "score source '" + key.source_id + "' missing from catalog (response " +
                                rec.response_id + ")");
        }
    }
}

score_pairs paired_scores(const dataset& ds, const source_ref& a, const source_ref& b) {
    score_pairs out;
    for (std::size_t i = 0; i < ds.records.size(); ++i) {
        auto va = ds.value(ds.records[i], a);
        auto vb = ds.value(ds.records[i], b);
        if (va && vb) {
            out.a.push_back(*va);
            out.b.push_back(*vb);
            out.record_index.push_back(i);
        } else if (va || vb) {
            ++out.n_excluded;
        }
    }
    return out;
}

std::size_t word_count(const std::string& text) {
    std::size_t n = 0;
    bool in_token = false;
    for (unsigned char c : text) {
        bool ws = std::isspace(c) != 0;
        if (!ws && !in_token) ++n;
        in_token = !ws;
    }
    return n;
}

} // namespace scoreval
