#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace sketchdesc {

enum class ErrorCode {
    InvalidInput,
    InvalidShape,
    InvalidConfig,
    InvalidSmoothness,
    DegenerateMetric,
    UnsupportedEnumeration,
    Domain,
    Schedule,
    Infeasible,
    InvalidGraph,
    UnsupportedLoss,
    Divergence,
    Io,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Every failure raised by the library carries one of the codes above so the
/// CLI can map it onto an exit status without string matching.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
    throw Error(code, message);
}

}  // namespace sketchdesc
