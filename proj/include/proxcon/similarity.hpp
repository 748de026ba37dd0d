#pragma once
// Similarity scoring and the conditional-probability kernel.
//
// Each value v is embedded as the point (v, f(z, dof)) where z is v
// standardized under the predictive model and f is the Student-t density.
// Every coordinate is min-max scaled independently; the similarity of a point
// set is 1 / (1 + d) with d the square root of the summed squared coordinate
// differences over all unordered pairs.

#include <span>
#include <vector>

#include "proxcon/bayes.hpp"

namespace proxcon {

// Student-t density in standard form.
double student_t_pdf(double x, double dof);

// Student-t density with the normalising constant evaluated once.
class StudentT {
public:
    explicit StudentT(double dof);
    double pdf(double z) const noexcept;
    double log_pdf(double z) const noexcept;
    double dof() const noexcept { return dof_; }

private:
    double dof_;
    double log_norm_;
};

// How a single value's probability P(v) is derived from the predictive.
enum class BaseProbability {
    // f(z, dof): the standard-form density at the standardized value.
    StandardizedDensity,
    // f(z, dof) / f(0, dof): density relative to the mode, equal to 1 there.
    RelativeLikelihood,
};

double base_probability(double value, const PredictiveModel& model,
                        BaseProbability kind = BaseProbability::StandardizedDensity);

struct EmbeddedPoint {
    double value = 0.0;
    double density = 0.0;
};

struct EmbeddedPoints {
    std::vector<EmbeddedPoint> points;
    std::vector<EmbeddedPoint> normalized;  // each coordinate scaled to [0,1]
};

// Embeds `values` in order. A coordinate with zero range normalizes to 0.
EmbeddedPoints embed_and_normalize(std::span<const double> values, const PredictiveModel& model);
// Embeds [candidate, quorum...].
EmbeddedPoints embed_and_normalize(double candidate, std::span<const double> quorum,
                                   const PredictiveModel& model);

double pair_distance(const EmbeddedPoints& e);
double similarity(const EmbeddedPoints& e);
double similarity_from_distance(double distance) noexcept;
// (1 - sim) / (1 + sim)
double similarity_ratio(double sim) noexcept;

// P(h1 ∩ ... ∩ hk) for base probabilities listed in ascending value order:
// P(h_i ∩ ... ∩ h_k) = P(h_i)^(psi^(1 - P(h_{i+1} ∩ ... ∩ h_k))) * P(h_{i+1} ∩ ... ∩ h_k).
double chain_probability(std::span<const double> ascending_base_probs, double psi);

// Joint probability of a quorum; the quorum is canonicalized to ascending
// order and psi is the similarity ratio of the whole quorum.
double joint_quorum_probability(std::span<const double> quorum, const PredictiveModel& model,
                                BaseProbability kind = BaseProbability::StandardizedDensity);

// P(X = x | q) = P(x)^alpha with alpha = ((1 - sim([x,q])) / (1 + sim([x,q])))^(1 - P(q)).
double conditional_probability(double candidate, std::span<const double> quorum,
                               const PredictiveModel& model,
                               BaseProbability kind = BaseProbability::StandardizedDensity);

// Conditional-probability evaluator for one fixed quorum. Quorum-dependent
// terms are computed once so each candidate costs O(1).
class QuorumKernel {
public:
    QuorumKernel(std::span<const double> quorum, const PredictiveModel& model,
                 BaseProbability kind = BaseProbability::StandardizedDensity);

    double conditional_probability(double candidate) const noexcept;
    double quorum_probability() const noexcept { return quorum_prob_; }
    const std::vector<double>& sorted_values() const noexcept { return values_; }
    const PredictiveModel& model() const noexcept { return model_; }

private:
    double density(double v) const noexcept;

    PredictiveModel model_;
    BaseProbability kind_;
    StudentT dist_;
    double mode_density_;
    std::vector<double> values_;
    // Per coordinate: min, max, mean, and the centered sum of squares.
    double vmin_, vmax_, vmean_, vss_;
    double dmin_, dmax_, dmean_, dss_;
    double quorum_prob_;
};

}  // namespace proxcon
