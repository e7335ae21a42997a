#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace armst {

enum class ErrorCode {
    // data
    MalformedRow,
    NonPositiveTime,
    InvalidArm,
    InvalidEvent,
    ArmMissing,
    EmptyArm,
    // estimation
    BeyondFollowUp,
    NotEstimable,
    DegenerateRiskSet,
    NoEstimablePoint,
    TooFewSubjects,
    FoldTooSmall,
    TooManyDegenerateResamples,
    NoEvents,
    QuadratureFailure,
    NonUniqueMaximizer,
    TooManyReplicateFailures,
    // plumbing
    InvalidArgument,
    EmptyInput,
    UnknownScenario,
    Io,
};

std::string_view to_string(ErrorCode code);

// True for errors caused by the input data or arguments rather than by a
// numerical failure on otherwise valid input.
bool is_data_error(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message, std::optional<std::size_t> line = std::nullopt);

    ErrorCode code() const noexcept { return code_; }
    // 1-based line number in the source CSV, when the error came from parsing.
    std::optional<std::size_t> line() const noexcept { return line_; }

private:
    ErrorCode code_;
    std::optional<std::size_t> line_;
};

}  // namespace armst
