#pragma once

#include <atomic>
#include <filesystem>
#include <fstream>
#include <string>

#include <unistd.h>

#include "scoreval/types.hpp"

namespace helpers {

// Unique scratch directory, removed on destruction.
struct temp_dir {
    std::filesystem::path path;

    explicit temp_dir(const std::string& tag) {
        static std::atomic<int> counter{0};
        path = std::filesystem::temp_directory_path() /
               ("scoreval_test_" + tag + "_" + std::to_string(::getpid()) + "_" +
                std::to_string(counter.fetch_add(1)));
        std::filesystem::create_directories(path);
    }
    ~temp_dir() {
        std::error_code ec;
        std::filesystem::remove_all(path, ec);
    }
    std::filesystem::path file(const std::string& name) const { return path / name; }
};

inline void write_file(const std::filesystem::path& p, const std::string& content) {
    std::ofstream out(p, std::ios::binary);
    out << content;
}

inline std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::string s((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return s;
}

// Minimal in-memory dataset builder for unit tests.
struct dataset_builder {
    scoreval::dataset ds;

    explicit dataset_builder(scoreval::score_scale scale = {1, 6, false}) { ds.scale = scale; }

    dataset_builder& source(const std::string& id,
                            scoreval::source_kind kind = scoreval::source_kind::llm,
                            bool continuous = false) {
        ds.add_source({id, kind, continuous, false});
        return *this;
    }

    scoreval::score_record& add(const std::string& id, std::optional<int> human = std::nullopt) {
        scoreval::score_record rec;
        rec.response_id = id;
        rec.prompt_id = "p1";
        rec.human_final = human;
        ds.records.push_back(std::move(rec));
        return ds.records.back();
    }
};

} // namespace helpers
