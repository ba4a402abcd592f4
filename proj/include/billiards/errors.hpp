#pragma once

#include <stdexcept>
#include <string>

namespace billiards {

enum class ErrorKind {
    IntegrationFailure,
    NoConvergence,
    AmbiguousMinimizer,
    NotConvex,
    NotSimple,
    ConjugateRisk,
    GrazingHit,
    NoHit,
    OrderViolation,
    TwistDegenerate,
    NotElliptic,
    NotHyperbolic,
    DefectNonzero,
    SupportOverlap,
    TargetUnreachable,
    ConfigError,
};

inline const char* error_kind_name(ErrorKind k) {
    switch (k) {
        case ErrorKind::IntegrationFailure: return "IntegrationFailure";
        case ErrorKind::NoConvergence: return "NoConvergence";
        case ErrorKind::AmbiguousMinimizer: return "AmbiguousMinimizer";
        case ErrorKind::NotConvex: return "NotConvex";
        case ErrorKind::NotSimple: return "NotSimple";
        case ErrorKind::ConjugateRisk: return "ConjugateRisk";
        case ErrorKind::GrazingHit: return "GrazingHit";
        case ErrorKind::NoHit: return "NoHit";
        case ErrorKind::OrderViolation: return "OrderViolation";
        case ErrorKind::TwistDegenerate: return "TwistDegenerate";
        case ErrorKind::NotElliptic: return "NotElliptic";
        case ErrorKind::NotHyperbolic: return "NotHyperbolic";
        case ErrorKind::DefectNonzero: return "DefectNonzero";
        case ErrorKind::SupportOverlap: return "SupportOverlap";
        case ErrorKind::TargetUnreachable: return "TargetUnreachable";
        case ErrorKind::ConfigError: return "ConfigError";
    }
    return "Unknown";
}

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(error_kind_name(kind)) + ": " + what), kind_(kind) {}
    ErrorKind kind() const { return kind_; }

private:
    ErrorKind kind_;
};

}  // namespace billiards
