#include "homocon/error.hpp"

namespace homocon {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::SingularFollowerBlock: return "SingularFollowerBlock";
        case ErrorCode::NoConvergence: return "NoConvergence";
        case ErrorCode::OriginNotDifferentiable: return "OriginNotDifferentiable";
        case ErrorCode::NotSymmetric: return "NotSymmetric";
        case ErrorCode::SingularX: return "SingularX";
        case ErrorCode::Infeasible: return "Infeasible";
        case ErrorCode::NonPositiveRho: return "NonPositiveRho";
        case ErrorCode::NonConvergentStep: return "NonConvergentStep";
        case ErrorCode::CertificateMissing: return "CertificateMissing";
        case ErrorCode::ConfigError: return "ConfigError";
    }
    return "Unknown";
}

}  // namespace homocon
