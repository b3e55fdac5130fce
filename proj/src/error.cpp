#include "vbsynth/error.hpp"

namespace vbsynth {

const char* to_string(ErrorCode code)
{
    switch (code) {
    case ErrorCode::InvalidArgument: return "invalid_argument";
    case ErrorCode::DegenerateRegion: return "degenerate_region";
    case ErrorCode::DegenerateTransform: return "degenerate_transform";
    case ErrorCode::InvalidWeights: return "invalid_weights";
    case ErrorCode::DimensionMismatch: return "dimension_mismatch";
    case ErrorCode::MissingInput: return "missing_input";
    case ErrorCode::IndexGap: return "index_gap";
    case ErrorCode::CountMismatch: return "count_mismatch";
    case ErrorCode::BadImage: return "bad_image";
    case ErrorCode::BadLandmarks: return "bad_landmarks";
    case ErrorCode::BadConfig: return "bad_config";
    case ErrorCode::DigestMismatch: return "digest_mismatch";
    case ErrorCode::NoDonor: return "no_donor";
    }
    return "unknown";
}

} // namespace vbsynth
