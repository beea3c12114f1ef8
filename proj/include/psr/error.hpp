#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace psr {

enum class ErrorCode {
    UnknownLabel,
    EmptySet,
    LengthMismatch,
    TooFewPoints,
    InvalidArgument,
    MalformedLine,
    DuplicateId,
    Io,
    MixedConfig,
};

std::string_view to_string(ErrorCode code);

// Single exception type for the library. `line` is 1-based and only
// meaningful for record-file errors (0 otherwise).
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message, std::string file = {}, std::size_t line = 0);

    ErrorCode code() const noexcept { return code_; }
    const std::string& file() const noexcept { return file_; }
    std::size_t line() const noexcept { return line_; }

private:
    ErrorCode code_;
    std::string file_;
    std::size_t line_;
};

} // namespace psr
