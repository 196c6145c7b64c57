#include "vstain/errors.hpp"

namespace vstain {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::ConstantImage: return "ConstantImage";
        case ErrorCode::TooSmall: return "TooSmall";
        case ErrorCode::IoError: return "IoError";
        case ErrorCode::UnsupportedFormat: return "UnsupportedFormat";
        case ErrorCode::CorruptFile: return "CorruptFile";
        case ErrorCode::SingularBasis: return "SingularBasis";
        case ErrorCode::TooFewSamples: return "TooFewSamples";
        case ErrorCode::NumericalFailure: return "NumericalFailure";
        case ErrorCode::KTooLarge: return "KTooLarge";
        case ErrorCode::BadMagic: return "BadMagic";
        case ErrorCode::TruncatedFile: return "TruncatedFile";
        case ErrorCode::VersionUnsupported: return "VersionUnsupported";
        case ErrorCode::EncoderTagMismatch: return "EncoderTagMismatch";
        case ErrorCode::InsufficientArea: return "InsufficientArea";
        case ErrorCode::ImageSmallerThanTile: return "ImageSmallerThanTile";
        case ErrorCode::MissingTile: return "MissingTile";
        case ErrorCode::SizeMismatch: return "SizeMismatch";
        case ErrorCode::ZeroVariance: return "ZeroVariance";
        case ErrorCode::DegenerateVariance: return "DegenerateVariance";
        case ErrorCode::Empty: return "Empty";
        case ErrorCode::ConfigError: return "ConfigError";
    }
    return "Unknown";
}

}  // namespace vstain
