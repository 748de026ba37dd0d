#pragma once
// Optimal Byzantine attacks against proximal consensus and vector consensus,
// and the analytic worst-case impact bounds.

#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "proxcon/pc_engine.hpp"

namespace proxcon {

enum class AttackDirection { Suppress, Inflate, WorstOfBoth };

std::string_view to_string(AttackDirection d) noexcept;
AttackDirection parse_attack_direction(std::string_view s);

struct AttackSpec {
    AttackDirection direction = AttackDirection::WorstOfBoth;
    int f = 1;

    bool operator==(const AttackSpec&) const = default;
};

struct BoundReport {
    double omega = 0.0;
    double a_low = 0.0;
    double a_high = 0.0;
    double delta_s = 0.0;
    double delta_i = 0.0;
    std::optional<double> eps_low;    // undefined when mu == 0
    std::optional<double> eps_high;
    double c_eps = 0.0;
    double sigma_xy_sq = 0.0;
    std::optional<ErrorCode> warning; // ZeroMeanEpsilonBounds when mu == 0

    bool operator==(const BoundReport&) const = default;
};

// 1 - (1 - c_obs)^(n - 3f)
double confidence_bound(double c_obs, int n, int f);

// Worst-case honest quorum: 2f+1 outputs split between the endpoints
// mu*(mu_eps -/+ 3 sigma_eps). Suppress puts f+1 low and f high; inflate the
// reverse.
std::vector<double> worst_case_quorum(const TrueProcess& proc, int f, AttackDirection direction);

// Closed-form worst-case impact bounds. `n` defaults to 4f+1.
BoundReport security_bounds(const TrueProcess& proc, int f, std::optional<int> n = std::nullopt,
                            double c_obs = 0.997);

// Long-run predictive of the process outputs: Student-t centered on mu*mu_eps
// with scale sigma_XY.
PredictiveModel process_predictive(const TrueProcess& proc, double dof = 1000.0);

// Result of checking one candidate attack value against both effectiveness
// clauses: the attacked output moves in the attack direction by more than the
// search step, and the attacked pair is at least as probable as the honest
// pair.
struct AttackCheck {
    double honest_value = 0.0;
    double honest_prob = 0.0;
    double attacked_value = 0.0;
    double attacked_prob = 0.0;
    bool effective = false;
};

// Honest quorum the attack displaces: `honest` itself when it has at most
// 2f+1 values, otherwise the quorum PC selects from the honest outputs.
std::vector<double> attack_target_quorum(std::span<const double> honest, const PredictiveModel& model,
                                         int f, const SearchSettings& s);

// Q_L (suppress) or Q_H (inflate) of a sorted quorum joined with f copies of a.
std::vector<double> attacked_quorum(std::span<const double> sorted_quorum, double a, int f,
                                    AttackDirection direction);

AttackCheck check_attack(std::span<const double> sorted_quorum, double a, const PredictiveModel& model,
                         int f, AttackDirection direction, const SearchSettings& s);

// Interval over which attack values are searched.
Interval attack_domain(std::span<const double> quorum, const PredictiveModel& model);

struct AttackResult {
    std::vector<double> values;          // f Byzantine outputs
    AttackDirection direction = AttackDirection::Suppress;
    bool effective = false;              // false when the honest fallback was used
    double honest_value = 0.0;           // PC of the honest quorum
    double attacked_value = 0.0;         // PC of the attacked quorum
};

// Maximally suppressing (lowest effective value) or inflating (highest)
// common attack value, bracketed by a coarse scan and refined by bisection
// down to the search step. Falls back to the displaced honest values, which
// always satisfy the probability clause. WorstOfBoth returns whichever
// attack moves the PC output further from `true_output` (or from the honest
// output when no truth is supplied).
AttackResult optimal_attack(std::span<const double> honest, const PredictiveModel& model, int f,
                            AttackDirection direction, const SearchSettings& s = {},
                            std::optional<double> true_output = std::nullopt);

// f values at the honest extreme in the attack direction, chosen by a grid
// search that maximises the shift of the VC output.
std::vector<double> vc_optimal_attack(std::span<const double> honest, int f, AttackDirection direction,
                                      std::optional<double> true_output = std::nullopt);

}  // namespace proxcon
