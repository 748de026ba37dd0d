#pragma once
// Normal-inverse-gamma conjugate inference for a univariate Gaussian stream
// with unknown mean and variance, plus the running error-scale estimator.

#include <span>

#include "proxcon/model_core.hpp"

namespace proxcon {

struct NigParams {
    double mu0 = 294.0;   // location
    double nu = 1.0;      // pseudo-observation count
    double alpha = 1.0;   // shape
    double beta = 1.0;    // scale

    bool valid() const noexcept;
    bool operator==(const NigParams&) const = default;
};

// Student-t posterior predictive of the next output, together with the
// inferred multiplicative-noise scale.
struct PredictiveModel {
    double loc = 0.0;
    double scale = 1.0;
    double dof = 2.0;
    double sigma_xy = 1.0;        // std of the predictive (== scale when dof <= 2)
    double sigma_eps_hat = 0.0;   // inferred std of the noise factor Y
    bool sigma_xy_approximate = false;

    bool operator==(const PredictiveModel&) const = default;
};

// Returns the posterior after observing `obs`. An empty batch is the identity.
NigParams conjugate_update(const NigParams& prior, std::span<const double> obs);

// Student-t(2*alpha, mu0, sqrt(beta*(nu+1)/(alpha*nu))).
PredictiveModel posterior_predictive(const NigParams& p, double sigma_eps_hat = 0.0);

double sample_mean(std::span<const double> xs);
// Unbiased (n-1) sample standard deviation; 0 for fewer than two samples.
double sample_std(std::span<const double> xs);

// Running estimate of sigma_eps. Each round contributes the squared
// coefficient of variation of its quorum; the prior acts as `pseudo_count`
// rounds that each measured `prior_estimate`.
struct ErrorStdEstimator {
    double pseudo_count = 1.0;
    double prior_estimate = 0.05;
    double sum_sq = 0.0;
    long rounds = 0;

    double sigma_eps() const noexcept;
    bool operator==(const ErrorStdEstimator&) const = default;
};

struct ErrorStdUpdate {
    double round_estimate = 0.0;
    ErrorStdEstimator estimator;
};

// All replicas in a round scale one sample of X, so the within-round spread
// over the mean estimates sigma_eps. Throws DegenerateQuorum when the quorum
// has fewer than two values or a zero mean.
ErrorStdUpdate infer_error_std(std::span<const double> quorum_values,
                               const ErrorStdEstimator& history);

}  // namespace proxcon
