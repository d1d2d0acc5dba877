#pragma once

#include <stdexcept>
#include <string>

namespace exprag {

/// All library failures carry a stable machine-readable code alongside the
/// human-readable message. CLI exit codes are derived from the code.
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& what)
        : std::runtime_error(what), code_(std::move(code)) {}

    const std::string& code() const noexcept { return code_; }

private:
    std::string code_;
};

namespace errc {
inline constexpr const char* missing_column = "missing-column";
inline constexpr const char* malformed_row = "malformed-row";
inline constexpr const char* malformed_line = "malformed-line";
inline constexpr const char* conflicting_subject = "conflicting-subject";
inline constexpr const char* unknown_admission = "unknown-admission";
inline constexpr const char* empty_background = "empty-background";
inline constexpr const char* missing_gold_section = "missing-gold-section";
inline constexpr const char* too_few_key_points = "too-few-key-points";
inline constexpr const char* insufficient_distractors = "insufficient-distractors";
inline constexpr const char* duplicate_options = "duplicate-options";
inline constexpr const char* dimension_mismatch = "dimension-mismatch";
inline constexpr const char* provider_failure = "provider-failure";
inline constexpr const char* unknown_method = "unknown-method";
inline constexpr const char* unfilled_placeholder = "unfilled-placeholder";
inline constexpr const char* transport = "transport";
inline constexpr const char* auth_rejected = "auth-rejected";
inline constexpr const char* context_too_long = "context-too-long";
inline constexpr const char* empty_input = "empty-input";
inline constexpr const char* zero_baseline = "zero-baseline";
inline constexpr const char* bad_param = "bad-param";
inline constexpr const char* missing_input = "missing-input";
inline constexpr const char* config_invalid = "config-invalid";
inline constexpr const char* io = "io";
} // namespace errc

} // namespace exprag
