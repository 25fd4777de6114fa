#include "scoreval/error.hpp"

namespace scoreval {

const char* errc_name(errc k) {
    switch (k) {
        case errc::io_error: return "io_error";
        case errc::schema_error: return "schema_error";
        case errc::range_error: return "range_error";
        case errc::empty_overlap: return "empty_overlap";
        case errc::inconsistent_row: return "inconsistent_row";
        case errc::unknown_source: return "unknown_source";
        case errc::unknown_dimension: return "unknown_dimension";
        case errc::invalid_config: return "invalid_config";
        case errc::degenerate_variance: return "degenerate_variance";
        case errc::degenerate_marginals: return "degenerate_marginals";
        case errc::degenerate_input: return "degenerate_input";
        case errc::collinear_controls: return "collinear_controls";
        case errc::rank_deficient: return "rank_deficient";
        case errc::insufficient_n: return "insufficient_n";
        case errc::missing_run: return "missing_run";
        case errc::trend_set_mismatch: return "trend_set_mismatch";
        case errc::no_rationales: return "no_rationales";
        case errc::missing_rubric_level: return "missing_rubric_level";
        case errc::missing_feature: return "missing_feature";
        case errc::empty_content: return "empty_content";
        case errc::tag_collision: return "tag_collision";
        case errc::malformed_completion: return "malformed_completion";
        case errc::provider_auth_error: return "provider_auth_error";
        case errc::cache_corruption: return "cache_corruption";
        case errc::fixture_miss: return "fixture_miss";
        case errc::unsupported_format: return "unsupported_format";
    }
    return "error";
}

} // namespace scoreval
