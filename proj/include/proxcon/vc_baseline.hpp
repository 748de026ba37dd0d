#pragma once
// One-dimensional approximate vector consensus. In one dimension the
// Tverberg points of a quorum are its median.

#include <functional>
#include <span>
#include <vector>

#include "proxcon/model_core.hpp"

namespace proxcon {

// Median; even-length input returns the midpoint of the two central values.
double tverberg_1d(std::span<const double> values);

enum class VcAggregate {
    MeanOfQuorumMedians,   // mean of the Tverberg points of every (2f+1)-subset
    MedianOfAll,           // Tverberg point of the whole received set
};

// Aggregate of the Tverberg points over all (2f+1)-subsets of `values`.
double vc_aggregate(std::span<const double> values, int f,
                    VcAggregate rule = VcAggregate::MeanOfQuorumMedians);

struct VcState {
    std::vector<double> values;   // current value per replica, indexed by replica id
    std::vector<bool> faulty;     // same indexing
    int round = 0;
    double epsilon = 1e-6;

    double honest_spread() const;
    Interval honest_hull() const;
};

// received[i] is what replica i collected this round (own value included).
// Faulty replicas keep whatever value they had.
VcState vc_round(const VcState& state, const std::vector<std::vector<double>>& received, int f,
                 VcAggregate rule = VcAggregate::MeanOfQuorumMedians);

// Values Byzantine replicas send to `recipient` in `round`, given the honest
// values of that round. Equivocation is allowed.
using VcByzantineStrategy =
    std::function<std::vector<double>(int round, std::size_t recipient, std::span<const double> honest)>;

struct VcDecision {
    double value = 0.0;
    int rounds = 0;
    VcState final_state;
};

// Synchronous full-mesh rounds until the honest spread is within epsilon.
// Throws NoConvergence after `max_rounds`.
VcDecision vc_decide(VcState state, int f, const VcByzantineStrategy& byzantine = {},
                     int max_rounds = 100, VcAggregate rule = VcAggregate::MeanOfQuorumMedians);

}  // namespace proxcon
