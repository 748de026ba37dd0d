#pragma once
// Brute-force reference implementations. They share only the domain types
// and the probability kernel with the engine; every search here is a plain
// grid scan.

#include <span>
#include <vector>

#include "proxcon/adversary.hpp"

namespace proxcon::oracle {

struct GridResult {
    double value = 0.0;
    double cond_prob = 0.0;
    double quorum_prob = 0.0;
};

// Grid maximum of the conditional probability for one quorum over the
// credible interval joined with the quorum's range, followed by a local grid
// 100x finer around the best grid point.
GridResult fixed_quorum_exhaustive(std::span<const double> quorum, const PredictiveModel& model,
                                   double grid_step, double credible_mass = 0.997,
                                   BaseProbability kind = BaseProbability::StandardizedDensity);

// Every (2f+1)-quorum, grid-searched. Same ordering of candidates as the
// engine: conditional probability, then quorum probability, then the
// smallest sorted id vector.
ConsensusResult pc_exhaustive(std::span<const Observation> obs, const PredictiveModel& model,
                              const SystemConfig& cfg, double grid_step,
                              BaseProbability kind = BaseProbability::StandardizedDensity);

struct AttackOracleSettings {
    double attack_step = 0.0;   // spacing of candidate attack values
    double search_step = 0.0;   // grid step of the inner consensus search
    double min_shift = 0.0;     // output shifts up to this size do not count; 0 = scale / 1000
};

// Extreme common attack value (smallest for suppress, largest for inflate)
// on a uniform grid for which the attacked quorum moves the output in the
// attack direction by more than `min_shift` without losing conditional
// probability. `honest` must
// have at most 2f+1 values. Returns f copies of the value, or nothing when no
// grid value is effective or f == 0.
std::vector<double> attack_exhaustive(std::span<const double> honest, const PredictiveModel& model, int f,
                                      AttackDirection direction, const AttackOracleSettings& s);

// Seeded random consensus instance: n - f honest outputs of one ideal output
// plus f arbitrary values, with the predictive fitted on five training rounds.
struct Instance {
    std::vector<Observation> obs;
    PredictiveModel model;
    SystemConfig cfg;
};

Instance random_instance(std::uint64_t seed, int f, int n);

struct Agreement {
    bool same_quorum = false;
    double value_gap = 0.0;
    double step = 0.0;

    bool ok() const noexcept { return same_quorum && value_gap <= step; }
};

// Engine result against pc_exhaustive at grid step = the engine's step.
Agreement compare_pc(const Instance& inst, const SearchSettings& s = {});

}  // namespace proxcon::oracle
