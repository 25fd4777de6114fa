#pragma once

#include <stdexcept>
#include <string>

namespace scoreval {

enum class errc {
    io_error,
    schema_error,
    range_error,
    empty_overlap,
    inconsistent_row,
    unknown_source,
    unknown_dimension,
    invalid_config,
    degenerate_variance,
    degenerate_marginals,
    degenerate_input,
    collinear_controls,
    rank_deficient,
    insufficient_n,
    missing_run,
    trend_set_mismatch,
    no_rationales,
    missing_rubric_level,
    missing_feature,
    empty_content,
    tag_collision,
    malformed_completion,
    provider_auth_error,
    cache_corruption,
    fixture_miss,
    unsupported_format,
};

const char* errc_name(errc);

class error : public std::runtime_error {
public:
    error(errc kind, const std::string& message)
        : std::runtime_error(std::string(errc_name(kind)) + ": " + message), kind_(kind) {}

    errc kind() const { return kind_; }

private:
    errc kind_;
};

} // namespace scoreval
