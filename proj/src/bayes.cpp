#include "proxcon/bayes.hpp"

#include <cmath>
#include <numeric>

namespace proxcon {

bool NigParams::valid() const noexcept {
    return std::isfinite(mu0) && nu > 0.0 && alpha > 0.0 && beta > 0.0 && std::isfinite(nu) &&
           std::isfinite(alpha) && std::isfinite(beta);
}

double sample_mean(std::span<const double> xs) {
    if (xs.empty()) return 0.0;
    return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

double sample_std(std::span<const double> xs) {
    if (xs.size() < 2) return 0.0;
    const double m = sample_mean(xs);
    double ss = 0.0;
    for (double x : xs) ss += (x - m) * (x - m);
    return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

NigParams conjugate_update(const NigParams& prior, std::span<const double> obs) {
    require_finite(obs, "conjugate_update observation");
    if (obs.empty()) return prior;

    const double n = static_cast<double>(obs.size());
    const double xbar = sample_mean(obs);
    double ss = 0.0;
    for (double x : obs) ss += (x - xbar) * (x - xbar);

    NigParams post;
    post.mu0 = (prior.nu * prior.mu0 + n * xbar) / (prior.nu + n);
    post.nu = prior.nu + n;
    post.alpha = prior.alpha + n / 2.0;
    post.beta = prior.beta + 0.5 * ss +
                (n * prior.nu / (prior.nu + n)) * (xbar - prior.mu0) * (xbar - prior.mu0) / 2.0;
    return post;
}

PredictiveModel posterior_predictive(const NigParams& p, double sigma_eps_hat) {
    PredictiveModel m;
    m.loc = p.mu0;
    m.dof = 2.0 * p.alpha;
    m.scale = std::sqrt(p.beta * (p.nu + 1.0) / (p.alpha * p.nu));
    if (m.dof > 2.0) {
        m.sigma_xy = m.scale * std::sqrt(m.dof / (m.dof - 2.0));
    } else {
        m.sigma_xy = m.scale;
        m.sigma_xy_approximate = true;
    }
    m.sigma_eps_hat = sigma_eps_hat;
    return m;
}

double ErrorStdEstimator::sigma_eps() const noexcept {
    const double weight = pseudo_count + static_cast<double>(rounds);
    if (weight <= 0.0) return 0.0;
    return std::sqrt((pseudo_count * prior_estimate * prior_estimate + sum_sq) / weight);
}

ErrorStdUpdate infer_error_std(std::span<const double> quorum_values,
                               const ErrorStdEstimator& history) {
    require_finite(quorum_values, "infer_error_std value");
    if (quorum_values.size() < 2) {
        throw Error(ErrorCode::DegenerateQuorum, "need at least two values to estimate spread");
    }
    const double mean = sample_mean(quorum_values);
    if (mean == 0.0) throw Error(ErrorCode::DegenerateQuorum, "quorum mean is zero");

    ErrorStdUpdate out;
    out.round_estimate = sample_std(quorum_values) / std::abs(mean);
    out.estimator = history;
    out.estimator.sum_sq += out.round_estimate * out.round_estimate;
    out.estimator.rounds += 1;
    return out;
}

}  // namespace proxcon
