#include "edgesr/error.hpp"

namespace edgesr {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::IndivisibleResolution: return "IndivisibleResolution";
        case ErrorCode::WeightOutOfRange: return "WeightOutOfRange";
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::FileNotFound: return "FileNotFound";
        case ErrorCode::ParseError: return "ParseError";
        case ErrorCode::DegenerateSamples: return "DegenerateSamples";
        case ErrorCode::NoFeasibleConfiguration: return "NoFeasibleConfiguration";
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::OverlapTooLarge: return "OverlapTooLarge";
        case ErrorCode::UncoveredPixel: return "UncoveredPixel";
        case ErrorCode::PlacementOutOfBounds: return "PlacementOutOfBounds";
        case ErrorCode::IoError: return "IoError";
    }
    return "Unknown";
}

}  // namespace edgesr
