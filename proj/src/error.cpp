#include "armst/error.hpp"

namespace armst {

std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::MalformedRow: return "MalformedRow";
        case ErrorCode::NonPositiveTime: return "NonPositiveTime";
        case ErrorCode::InvalidArm: return "InvalidArm";
        case ErrorCode::InvalidEvent: return "InvalidEvent";
        case ErrorCode::ArmMissing: return "ArmMissing";
        case ErrorCode::EmptyArm: return "EmptyArm";
        case ErrorCode::BeyondFollowUp: return "BeyondFollowUp";
        case ErrorCode::NotEstimable: return "NotEstimable";
        case ErrorCode::DegenerateRiskSet: return "DegenerateRiskSet";
        case ErrorCode::NoEstimablePoint: return "NoEstimablePoint";
        case ErrorCode::TooFewSubjects: return "TooFewSubjects";
        case ErrorCode::FoldTooSmall: return "FoldTooSmall";
        case ErrorCode::TooManyDegenerateResamples: return "TooManyDegenerateResamples";
        case ErrorCode::NoEvents: return "NoEvents";
        case ErrorCode::QuadratureFailure: return "QuadratureFailure";
        case ErrorCode::NonUniqueMaximizer: return "NonUniqueMaximizer";
        case ErrorCode::TooManyReplicateFailures: return "TooManyReplicateFailures";
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::EmptyInput: return "EmptyInput";
        case ErrorCode::UnknownScenario: return "UnknownScenario";
        case ErrorCode::Io: return "Io";
    }
    return "Unknown";
}

bool is_data_error(ErrorCode code) {
    switch (code) {
        case ErrorCode::MalformedRow:
        case ErrorCode::NonPositiveTime:
        case ErrorCode::InvalidArm:
        case ErrorCode::InvalidEvent:
        case ErrorCode::ArmMissing:
        case ErrorCode::EmptyArm:
        case ErrorCode::TooFewSubjects:
        case ErrorCode::InvalidArgument:
        case ErrorCode::EmptyInput:
        case ErrorCode::UnknownScenario:
        case ErrorCode::Io:
            return true;
        default:
            return false;
    }
}

Error::Error(ErrorCode code, const std::string& message, std::optional<std::size_t> line)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code), line_(line) {}

}  // namespace armst
