#pragma once
// Shared domain types for the proximal consensus library.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "proxcon/error.hpp"

namespace proxcon {

using ReplicaId = std::uint32_t;

struct SystemConfig {
    int f = 1;                          // maximum number of faulty replicas
    int n = 5;                          // replica count
    double confidence_level = 0.997;    // interval-guarantee confidence c
    std::optional<double> aiw;          // acceptable interval width; nullopt = disabled
    double min_confidence = 0.5;        // one-shot acceptance threshold on cond. probability

    int quorum_size() const noexcept { return 2 * f + 1; }
    int early_accept_count() const noexcept { return 3 * f + 1; }
    int max_wait_count() const noexcept { return n - f; }

    bool operator==(const SystemConfig&) const = default;
};

// Ground-truth generating process: outputs are x * y with x ~ N(mu, sigma)
// and y ~ N(mu_eps, sigma_eps).
struct TrueProcess {
    double mu = 294.0;
    double sigma = 10.0;
    double sigma_eps = 0.06;
    double mu_eps = 1.0;

    bool operator==(const TrueProcess&) const = default;
};

struct Observation {
    ReplicaId replica_id = 0;
    double value = 0.0;

    bool operator==(const Observation&) const = default;
};

struct RoundObservations {
    std::int64_t round_id = 0;
    std::vector<Observation> values;   // in arrival order
    std::optional<double> true_output; // simulation ground truth only

    bool operator==(const RoundObservations&) const = default;
};

struct Interval {
    double low = 0.0;
    double high = 0.0;

    double width() const noexcept { return high - low; }
    bool contains(double v) const noexcept { return low <= v && v <= high; }

    bool operator==(const Interval&) const = default;
};

struct ConsensusResult {
    double value = 0.0;
    std::vector<ReplicaId> quorum;     // sorted ascending
    double cond_prob = 0.0;
    Interval ig;
    bool confident = false;
    int messages_used = 0;
    double quorum_prob = 0.0;          // joint probability of the selected quorum

    bool operator==(const ConsensusResult&) const = default;
};

enum class Severity { Warning, Error };

struct ConfigIssue {
    ErrorCode code;
    Severity severity;
    std::string message;
};

struct ConfigReport {
    std::vector<ConfigIssue> issues;

    bool ok() const noexcept;
    bool has(ErrorCode code) const noexcept;
};

// Checks the replica-count and fraction constraints. 3f+1 <= n < 4f+1 is only
// a LivenessRisk warning: synchronous deployments need just 3f+1 replicas.
ConfigReport validate_config(const SystemConfig& cfg);

// Throws Error with the first error-severity issue, if any.
void require_valid(const SystemConfig& cfg);

// Throws NonFiniteInput if any value is NaN or infinite.
void require_finite(std::span<const double> values, const char* what);

}  // namespace proxcon
