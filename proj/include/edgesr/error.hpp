#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace edgesr {

enum class ErrorCode {
    IndivisibleResolution,
    WeightOutOfRange,
    InvalidArgument,
    FileNotFound,
    ParseError,
    DegenerateSamples,
    NoFeasibleConfiguration,
    DimensionMismatch,
    OverlapTooLarge,
    UncoveredPixel,
    PlacementOutOfBounds,
    IoError,
};

std::string_view to_string(ErrorCode code) noexcept;

// Every failure raised by the library carries a machine-readable code.
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

}  // namespace edgesr
