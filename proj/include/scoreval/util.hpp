#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace scoreval {

// Shortest exact decimal form, locale-independent.
std::string num_to_string(double v);
std::string num_to_string(long long v);

std::optional<double> parse_double(std::string_view);
std::optional<long long> parse_int(std::string_view);

// Rounding convention used everywhere a continuous score becomes discrete:
// halves round away from zero, then the result is clamped by callers as needed.
inline long long round_half_away(double v) { return std::llround(v); }

int clamp_score(long long v, int lo, int hi);

std::vector<std::string> split(std::string_view text, char sep);
std::string join(const std::vector<std::string>& parts, std::string_view sep);
std::string_view trim_view(std::string_view);
std::string trim(std::string_view);
bool starts_with(std::string_view s, std::string_view prefix);

// FNV-1a, used for request hashes and config digests.
std::uint64_t fnv1a64(std::string_view data);
std::string hex64(std::uint64_t);

// splitmix64-based generator: identical streams on every platform.
class rng64 {
public:
    explicit rng64(std::uint64_t seed) : state_(seed) {}
    std::uint64_t next_u64();
    double uniform01();                    // [0, 1)
    double normal(double mean, double sd); // Box-Muller; sd = 0 draws nothing
    std::size_t pick(const std::vector<double>& weights);
    std::size_t below(std::size_t bound); // uniform in [0, bound)

private:
    std::uint64_t state_;
    bool have_spare_ = false;
    double spare_ = 0;
};

} // namespace scoreval
