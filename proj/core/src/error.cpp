#include "sketchdesc/error.hpp"

namespace sketchdesc {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::InvalidInput: return "invalid-input";
        case ErrorCode::InvalidShape: return "invalid-shape";
        case ErrorCode::InvalidConfig: return "invalid-config";
        case ErrorCode::InvalidSmoothness: return "invalid-smoothness";
        case ErrorCode::DegenerateMetric: return "degenerate-metric";
        case ErrorCode::UnsupportedEnumeration: return "unsupported-enumeration";
        case ErrorCode::Domain: return "domain";
        case ErrorCode::Schedule: return "schedule";
        case ErrorCode::Infeasible: return "infeasible";
        case ErrorCode::InvalidGraph: return "invalid-graph";
        case ErrorCode::UnsupportedLoss: return "unsupported-loss";
        case ErrorCode::Divergence: return "divergence";
        case ErrorCode::Io: return "io";
    }
    return "unknown";
}

}  // namespace sketchdesc
