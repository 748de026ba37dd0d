#pragma once
// Seeded simulation of producers, replicas and message delivery, plus the
// two-replica coin-flip delivery vignette.

#include <array>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "proxcon/adversary.hpp"

namespace proxcon {

using Rng = std::mt19937_64;

std::uint64_t splitmix64(std::uint64_t x) noexcept;
double uniform01(Rng& rng);          // [0, 1), 53 random bits
double standard_normal(Rng& rng);    // Box-Muller

// Stream seed for (seed, stream) pairs, e.g. (plan seed, trial id).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept;

// Messages from `replicas` that would arrive inside [start, end) are lost.
// Times are deadline-relative (the deadline is 1).
struct Partition {
    std::vector<ReplicaId> replicas;
    double start = 0.0;
    double end = 0.0;

    bool operator==(const Partition&) const = default;
};

struct NetModel {
    double drop_prob = 0.0;
    // Mean of the exponential delivery delay relative to the deadline;
    // nullopt delivers instantly.
    std::optional<double> latency_mean = 0.3;
    std::vector<Partition> partitions;
    std::uint64_t seed = 0;

    // Every message arrives instantly.
    static NetModel reliable() {
        NetModel m;
        m.latency_mean.reset();
        return m;
    }

    bool operator==(const NetModel&) const = default;
};

// Throws BadFraction / BadConfig for out-of-range fields.
void validate_net(const NetModel& net);

struct DeliveryEvent {
    ReplicaId replica = 0;
    double value = 0.0;
    double arrival = 0.0;     // deadline-relative; infinity when dropped
    bool delivered = false;

    bool operator==(const DeliveryEvent&) const = default;
};

// Samples one message's fate.
DeliveryEvent deliver(const NetModel& net, ReplicaId replica, double value, Rng& rng);

// Byzantine outputs appended to a round, computed against the client's model.
struct RoundAttack {
    AttackSpec spec;
    PredictiveModel victim;
    SearchSettings search;
};

struct RoundOptions {
    std::int64_t round_id = 0;
    std::optional<double> true_output;          // drawn from N(mu, sigma) when absent
    std::optional<RoundAttack> attack;
    std::vector<DeliveryEvent>* trace = nullptr; // honest deliveries, in replica order
};

// Honest replicas have ids 0 .. n-f-1 and output x * y_i with
// y_i ~ N(mu_eps, sigma_eps). Delivered honest outputs are listed in arrival
// order; with an attack, f Byzantine outputs (ids n-f .. n-1) chosen with full
// knowledge of the delivered honest outputs follow them.
RoundObservations generate_round(const TrueProcess& proc, const SystemConfig& cfg, const NetModel& net,
                                 Rng& rng, const RoundOptions& opts = {});

inline bool is_byzantine(ReplicaId id, const SystemConfig& cfg) noexcept {
    return static_cast<int>(id) >= cfg.n - cfg.f;
}

enum class Protocol { PC, VC };
std::string_view to_string(Protocol p) noexcept;
Protocol parse_protocol(std::string_view s);

struct TrialRecord {
    std::int64_t trial_id = 0;
    Protocol protocol = Protocol::PC;
    double true_output = 0.0;
    double decided = 0.0;
    std::optional<double> pct_error;   // absent when the true output is 0
    double ig_low = 0.0;
    double ig_high = 0.0;
    bool covered = false;
    bool confident = false;
    std::string attack_direction = "none";
    int messages_used = 0;
    // Cell coordinates.
    int f = 0;
    double sigma_eps = 0.0;

    bool operator==(const TrialRecord&) const = default;
};

std::optional<double> pct_error(double decided, double truth) noexcept;

// Probabilities of observing zero, one or two tails when two replicas each
// flip a fair coin and their results are delivered with p1 and p2.
struct CoinflipProbabilities {
    double p0 = 0.0;
    double p1 = 0.0;
    double p2 = 0.0;

    bool operator==(const CoinflipProbabilities&) const = default;
};

CoinflipProbabilities coinflip_probabilities(double p_deliver1, double p_deliver2);

// Monte-Carlo estimate through the delivery model (drop probability 1 - p).
CoinflipProbabilities coinflip_simulate(double p_deliver, long trials, std::uint64_t seed);

// Agreement oracle: union of the non-faulty proposals. When several
// proposals carry the same replica id, the one from the lowest proposer id
// wins. Result sorted by replica id.
std::vector<Observation> ideal_ba(std::span<const Proposal> proposals);

}  // namespace proxcon
