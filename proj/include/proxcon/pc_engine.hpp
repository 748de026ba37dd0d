#pragma once
// Proximal consensus: quorum enumeration, argmax search over candidate
// outputs, interval guarantees, and the one-shot / coordinated round logic.

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "proxcon/bayes.hpp"
#include "proxcon/model_core.hpp"
#include "proxcon/similarity.hpp"

namespace proxcon {

struct SearchSettings {
    double step = 0.0;              // search resolution p; <= 0 selects scale / 1000
    double credible_mass = 0.997;   // mass of the predictive credible interval searched
    int profile_samples = 9;        // samples per smooth piece for the unimodality check
    BaseProbability base = BaseProbability::StandardizedDensity;

    double resolve_step(const PredictiveModel& model) const noexcept;
};

// Two-sided equal-tailed credible interval of the predictive.
Interval credible_interval(const PredictiveModel& model, double mass);

// Credible interval extended to cover the quorum's value range.
Interval search_domain(std::span<const double> quorum, const PredictiveModel& model,
                       const SearchSettings& s);

// [center*(1 - k*sigma_eps), center*(1 + k*sigma_eps)], endpoints ordered.
Interval interval_guarantee(double center, double sigma_eps_hat, double k = 3.0);
// Interval guarantee around the predictive location.
Interval interval_guarantee(const PredictiveModel& model);

struct FixedQuorumResult {
    double value = 0.0;
    double cond_prob = 0.0;
    double quorum_prob = 0.0;
};

// Most likely output for one fixed quorum. The domain is split where the
// objective has kinks; each piece is profiled and refined by golden-section
// search, falling back to a step-p grid pass over any piece whose profile is
// not unimodal.
FixedQuorumResult pc_fixed_quorum(std::span<const double> quorum, const PredictiveModel& model,
                                  const SearchSettings& s = {});

// Argmax over every (2f+1)-subset of `obs` and every candidate output. Ties
// go to the higher quorum probability, then the lexicographically smallest
// replica-id set. The interval guarantee is centered on the decided value.
ConsensusResult pc_consensus(std::span<const Observation> obs, const PredictiveModel& model,
                             const SystemConfig& cfg, const SearchSettings& s = {});

// Orders candidate results the way pc_consensus does; true if `a` wins.
bool better_result(const ConsensusResult& a, const ConsensusResult& b) noexcept;

// One-shot client --------------------------------------------------------------

struct OneShotOptions {
    // Also fold low-confidence acceptances into the prior.
    bool update_on_low_confidence = false;
};

struct OneShotState {
    SystemConfig cfg;
    NigParams prior;
    ErrorStdEstimator error_est;
    RoundObservations received;

    PredictiveModel model() const { return posterior_predictive(prior, error_est.sigma_eps()); }
};

enum class OneShotStatus { NeedMore, Accepted, AcceptedLowConfidence };

struct OneShotOutcome {
    OneShotStatus status = OneShotStatus::NeedMore;
    std::optional<ConsensusResult> result;
};

// Adds `new_msgs` to the round. Consensus is attempted once 2f+1 messages are
// present. A confident result is accepted early with 3f+1 messages, or with
// fewer when its interval width is within the AIW. At n-f messages the result
// is accepted unconditionally and flagged if below min_confidence. On
// acceptance the prior absorbs the selected quorum and a new round starts.
OneShotOutcome one_shot_step(OneShotState& state, std::span<const Observation> new_msgs,
                             const SearchSettings& s = {}, const OneShotOptions& opts = {});

// Replaces the client's prior with parameters distributed by a coordinated
// replica set.
void adopt_checkpoint(OneShotState& state, const NigParams& params);

// Coordinated replica set --------------------------------------------------------

struct Proposal {
    ReplicaId proposer = 0;
    bool faulty = false;
    std::vector<Observation> observations;
};

using AgreementOracle = std::function<std::vector<Observation>(std::span<const Proposal>)>;

struct CoordinatedReplica {
    ReplicaId id = 0;
    NigParams params;
    ErrorStdEstimator error_est;
};

struct CoordinatedState {
    SystemConfig cfg;
    std::vector<CoordinatedReplica> replicas;   // non-faulty replicas only
    int checkpoint_interval = 10;               // rounds between checkpoints (t')
    int rounds_since_checkpoint = 0;
    std::int64_t round_id = 0;
};

CoordinatedState make_coordinated_state(const SystemConfig& cfg, std::span<const ReplicaId> honest,
                                        const NigParams& prior, int checkpoint_interval);

struct CoordinatedOutcome {
    std::vector<Observation> agreed;
    std::vector<std::pair<ReplicaId, ConsensusResult>> results;
    std::optional<NigParams> checkpoint;
};

// Agrees on one observation set, lets every replica decide on it with its own
// (identical) model, then updates each replica's prior with the selected
// quorum. Every `checkpoint_interval` rounds the agreed posterior is emitted.
CoordinatedOutcome coordinated_round(CoordinatedState& state, std::span<const Proposal> proposals,
                                     const AgreementOracle& ba, const SearchSettings& s = {});

}  // namespace proxcon
