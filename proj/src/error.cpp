#include "psr/error.hpp"

#include <utility>

namespace psr {

std::string_view to_string(ErrorCode code) {
    switch (code) {
    case ErrorCode::UnknownLabel: return "UnknownLabel";
    case ErrorCode::EmptySet: return "EmptySet";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::TooFewPoints: return "TooFewPoints";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::MalformedLine: return "MalformedLine";
    case ErrorCode::DuplicateId: return "DuplicateId";
    case ErrorCode::Io: return "Io";
    case ErrorCode::MixedConfig: return "MixedConfig";
    }
    return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message, std::string file, std::size_t line)
    : std::runtime_error(message), code_(code), file_(std::move(file)), line_(line) {}

} // namespace psr
