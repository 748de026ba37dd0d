#include "proxcon/model_core.hpp"

#include <algorithm>
#include <cmath>

namespace proxcon {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::TooFewReplicas: return "TooFewReplicas";
        case ErrorCode::LivenessRisk: return "LivenessRisk";
        case ErrorCode::BadFraction: return "BadFraction";
        case ErrorCode::BadConfig: return "BadConfig";
        case ErrorCode::NonFiniteInput: return "NonFiniteInput";
        case ErrorCode::DegenerateQuorum: return "DegenerateQuorum";
        case ErrorCode::EmptySearchDomain: return "EmptySearchDomain";
        case ErrorCode::InsufficientMessages: return "InsufficientMessages";
        case ErrorCode::DuplicateReplica: return "DuplicateReplica";
        case ErrorCode::NoConvergence: return "NoConvergence";
        case ErrorCode::ZeroMeanEpsilonBounds: return "ZeroMeanEpsilonBounds";
        case ErrorCode::ParseError: return "ParseError";
    }
    return "Unknown";
}

bool ConfigReport::ok() const noexcept {
    return std::none_of(issues.begin(), issues.end(),
                        [](const ConfigIssue& i) { return i.severity == Severity::Error; });
}

bool ConfigReport::has(ErrorCode code) const noexcept {
    return std::any_of(issues.begin(), issues.end(),
                       [code](const ConfigIssue& i) { return i.code == code; });
}

namespace {

bool open_unit(double v) { return v > 0.0 && v < 1.0; }

}  // namespace

ConfigReport validate_config(const SystemConfig& cfg) {
    ConfigReport report;
    auto add = [&](ErrorCode c, Severity s, std::string msg) {
        report.issues.push_back({c, s, std::move(msg)});
    };

    if (cfg.f < 0) {
        add(ErrorCode::BadConfig, Severity::Error, "f must be non-negative");
    }
    if (cfg.n < 1) {
        add(ErrorCode::BadConfig, Severity::Error, "n must be positive");
    }
    if (cfg.f >= 0 && cfg.n < 3 * cfg.f + 1) {
        add(ErrorCode::TooFewReplicas, Severity::Error,
            "n=" + std::to_string(cfg.n) + " < 3f+1=" + std::to_string(3 * cfg.f + 1));
    } else if (cfg.f >= 0 && cfg.n < 4 * cfg.f + 1) {
        add(ErrorCode::LivenessRisk, Severity::Warning,
            "n=" + std::to_string(cfg.n) + " < 4f+1=" + std::to_string(4 * cfg.f + 1) +
                "; liveness needs a synchronous network");
    }
    if (!open_unit(cfg.confidence_level)) {
        add(ErrorCode::BadFraction, Severity::Error, "confidence_level must lie in (0,1)");
    }
    if (!(cfg.min_confidence > 0.0 && cfg.min_confidence <= 1.0)) {
        add(ErrorCode::BadFraction, Severity::Error, "min_confidence must lie in (0,1]");
    }
    if (cfg.aiw && !(*cfg.aiw > 0.0 && std::isfinite(*cfg.aiw))) {
        add(ErrorCode::BadConfig, Severity::Error, "aiw must be a positive real");
    }
    return report;
}

void require_valid(const SystemConfig& cfg) {
    for (const auto& issue : validate_config(cfg).issues) {
        if (issue.severity == Severity::Error) throw Error(issue.code, issue.message);
    }
}

void require_finite(std::span<const double> values, const char* what) {
    for (double v : values) {
        if (!std::isfinite(v)) throw Error(ErrorCode::NonFiniteInput, what);
    }
}

}  // namespace proxcon
