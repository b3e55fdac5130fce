#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace vbsynth {

enum class ErrorCode {
    InvalidArgument,
    DegenerateRegion,
    DegenerateTransform,
    InvalidWeights,
    DimensionMismatch,
    MissingInput,
    IndexGap,
    CountMismatch,
    BadImage,
    BadLandmarks,
    BadConfig,
    DigestMismatch,
    NoDonor,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

// Raised by clip synthesis; wraps the first failing frame.
class SynthesisError : public Error {
public:
    SynthesisError(std::size_t frame, ErrorCode cause, const std::string& what)
        : Error(cause, "frame " + std::to_string(frame) + ": " + what), frame_(frame) {}

    std::size_t frame() const noexcept { return frame_; }

private:
    std::size_t frame_;
};

} // namespace vbsynth
