#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace vstain {

enum class ErrorCode {
    InvalidArgument,
    DimensionMismatch,
    ConstantImage,
    TooSmall,
    IoError,
    UnsupportedFormat,
    CorruptFile,
    SingularBasis,
    TooFewSamples,
    NumericalFailure,
    KTooLarge,
    BadMagic,
    TruncatedFile,
    VersionUnsupported,
    EncoderTagMismatch,
    InsufficientArea,
    ImageSmallerThanTile,
    MissingTile,
    SizeMismatch,
    ZeroVariance,
    DegenerateVariance,
    Empty,
    ConfigError,
};

std::string_view to_string(ErrorCode code) noexcept;

// All library failures are reported through this type; `code()` is the
// machine-checkable part, `what()` carries the detail.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace vstain
