#include "proxcon/similarity.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace proxcon {

StudentT::StudentT(double dof)
    : dof_(dof),
      log_norm_(std::lgamma((dof + 1.0) / 2.0) - std::lgamma(dof / 2.0) -
                0.5 * std::log(std::numbers::pi * dof)) {}

double StudentT::log_pdf(double z) const noexcept {
    return log_norm_ - (dof_ + 1.0) / 2.0 * std::log1p(z * z / dof_);
}

double StudentT::pdf(double z) const noexcept { return std::exp(log_pdf(z)); }

double student_t_pdf(double x, double dof) {
    if (!(dof > 0.0)) throw Error(ErrorCode::BadConfig, "student_t_pdf needs dof > 0");
    return StudentT(dof).pdf(x);
}

namespace {

double standardize(double v, const PredictiveModel& m) { return (v - m.loc) / m.scale; }

void normalize_coordinate(std::vector<EmbeddedPoint>& pts, double EmbeddedPoint::*coord) {
    double lo = pts.front().*coord;
    double hi = lo;
    for (const auto& p : pts) {
        lo = std::min(lo, p.*coord);
        hi = std::max(hi, p.*coord);
    }
    const double range = hi - lo;
    for (auto& p : pts) p.*coord = range > 0.0 ? (p.*coord - lo) / range : 0.0;
}

}  // namespace

double base_probability(double value, const PredictiveModel& model, BaseProbability kind) {
    const StudentT t(model.dof);
    const double z = standardize(value, model);
    if (kind == BaseProbability::RelativeLikelihood) return std::exp(t.log_pdf(z) - t.log_pdf(0.0));
    return t.pdf(z);
}

EmbeddedPoints embed_and_normalize(std::span<const double> values, const PredictiveModel& model) {
    EmbeddedPoints e;
    if (values.empty()) return e;
    const StudentT t(model.dof);
    e.points.reserve(values.size());
    for (double v : values) e.points.push_back({v, t.pdf(standardize(v, model))});
    e.normalized = e.points;
    normalize_coordinate(e.normalized, &EmbeddedPoint::value);
    normalize_coordinate(e.normalized, &EmbeddedPoint::density);
    return e;
}

EmbeddedPoints embed_and_normalize(double candidate, std::span<const double> quorum,
                                   const PredictiveModel& model) {
    std::vector<double> all;
    all.reserve(quorum.size() + 1);
    all.push_back(candidate);
    all.insert(all.end(), quorum.begin(), quorum.end());
    return embed_and_normalize(all, model);
}

double pair_distance(const EmbeddedPoints& e) {
    const auto& p = e.normalized;
    double sum = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        for (std::size_t j = i + 1; j < p.size(); ++j) {
            const double dv = p[i].value - p[j].value;
            const double dd = p[i].density - p[j].density;
            sum += dv * dv + dd * dd;
        }
    }
    return std::sqrt(sum);
}

double similarity_from_distance(double distance) noexcept { return 1.0 / (1.0 + distance); }

double similarity(const EmbeddedPoints& e) { return similarity_from_distance(pair_distance(e)); }

double similarity_ratio(double sim) noexcept { return (1.0 - sim) / (1.0 + sim); }

double chain_probability(std::span<const double> ascending_base_probs, double psi) {
    if (ascending_base_probs.empty()) return 1.0;
    double acc = ascending_base_probs.back();
    for (std::size_t i = ascending_base_probs.size() - 1; i-- > 0;) {
        acc = std::pow(ascending_base_probs[i], std::pow(psi, 1.0 - acc)) * acc;
    }
    return acc;
}

double joint_quorum_probability(std::span<const double> quorum, const PredictiveModel& model,
                                BaseProbability kind) {
    std::vector<double> sorted(quorum.begin(), quorum.end());
    std::sort(sorted.begin(), sorted.end());
    std::vector<double> probs;
    probs.reserve(sorted.size());
    for (double v : sorted) probs.push_back(base_probability(v, model, kind));
    const double psi =
        sorted.size() > 1 ? similarity_ratio(similarity(embed_and_normalize(sorted, model))) : 0.0;
    return chain_probability(probs, psi);
}

double conditional_probability(double candidate, std::span<const double> quorum,
                               const PredictiveModel& model, BaseProbability kind) {
    std::vector<double> sorted(quorum.begin(), quorum.end());
    std::sort(sorted.begin(), sorted.end());
    const double pq = joint_quorum_probability(sorted, model, kind);
    const double sim = similarity(embed_and_normalize(candidate, sorted, model));
    const double alpha = std::pow(similarity_ratio(sim), 1.0 - pq);
    return std::pow(base_probability(candidate, model, kind), alpha);
}

// QuorumKernel ---------------------------------------------------------------

namespace {

struct Moments {
    double min, max, mean, ss;
};

Moments moments(std::span<const double> xs) {
    Moments m{xs.front(), xs.front(), 0.0, 0.0};
    for (double x : xs) {
        m.min = std::min(m.min, x);
        m.max = std::max(m.max, x);
        m.mean += x;
    }
    m.mean /= static_cast<double>(xs.size());
    for (double x : xs) m.ss += (x - m.mean) * (x - m.mean);
    return m;
}

// Sum over unordered pairs of squared differences of {x} ∪ quorum, divided by
// the squared range, using sum_pairs = k*ss_with_x identity in centered form.
double scaled_pair_sum(double x, double qmin, double qmax, double qmean, double qss, double k) {
    const double lo = std::min(qmin, x);
    const double hi = std::max(qmax, x);
    const double range = hi - lo;
    if (!(range > 0.0)) return 0.0;
    // Pairs within the quorum contribute k*qss; pairs (x, q_i) contribute
    // k*(x - qmean)^2 + qss.
    const double dx = x - qmean;
    const double sum = k * qss + k * dx * dx + qss;
    return sum / (range * range);
}

}  // namespace

QuorumKernel::QuorumKernel(std::span<const double> quorum, const PredictiveModel& model,
                           BaseProbability kind)
    : model_(model),
      kind_(kind),
      dist_(model.dof),
      mode_density_(dist_.pdf(0.0)),
      values_(quorum.begin(), quorum.end()) {
    if (values_.empty()) throw Error(ErrorCode::DegenerateQuorum, "empty quorum");
    require_finite(values_, "quorum value");
    std::sort(values_.begin(), values_.end());

    std::vector<double> dens;
    dens.reserve(values_.size());
    for (double v : values_) dens.push_back(density(v));
    const Moments mv = moments(values_);
    const Moments md = moments(dens);
    vmin_ = mv.min, vmax_ = mv.max, vmean_ = mv.mean, vss_ = mv.ss;
    dmin_ = md.min, dmax_ = md.max, dmean_ = md.mean, dss_ = md.ss;

    std::vector<double> probs;
    probs.reserve(dens.size());
    for (double d : dens) probs.push_back(kind_ == BaseProbability::RelativeLikelihood ? d / mode_density_ : d);
    double psi = 0.0;
    if (values_.size() > 1) {
        const double k = static_cast<double>(values_.size());
        double d2 = 0.0;
        if (vmax_ > vmin_) d2 += k * vss_ / ((vmax_ - vmin_) * (vmax_ - vmin_));
        if (dmax_ > dmin_) d2 += k * dss_ / ((dmax_ - dmin_) * (dmax_ - dmin_));
        psi = similarity_ratio(similarity_from_distance(std::sqrt(d2)));
    }
    quorum_prob_ = chain_probability(probs, psi);
}

double QuorumKernel::density(double v) const noexcept { return dist_.pdf((v - model_.loc) / model_.scale); }

double QuorumKernel::conditional_probability(double candidate) const noexcept {
    const double k = static_cast<double>(values_.size());
    const double dx = density(candidate);
    const double d2 = scaled_pair_sum(candidate, vmin_, vmax_, vmean_, vss_, k) +
                      scaled_pair_sum(dx, dmin_, dmax_, dmean_, dss_, k);
    const double ratio = similarity_ratio(similarity_from_distance(std::sqrt(d2)));
    const double alpha = std::pow(ratio, 1.0 - quorum_prob_);
    const double p = kind_ == BaseProbability::RelativeLikelihood ? dx / mode_density_ : dx;
    return std::pow(p, alpha);
}

}  // namespace proxcon
