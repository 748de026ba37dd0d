#include "proxcon/oracle.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/distributions/students_t.hpp>

#include "proxcon/simnet.hpp"

namespace proxcon::oracle {

namespace {

struct Scan {
    double x;
    double g;
};

// P(x)^alpha by direct pairwise summation over the embedded points. Only
// the candidate's density changes between calls, so the quorum densities are
// taken once.
class DirectEvaluator {
public:
    DirectEvaluator(std::span<const double> sorted_quorum, const PredictiveModel& model, BaseProbability kind)
        : model_(model), kind_(kind), dist_(model.dof), mode_(dist_.pdf(0.0)),
          values_(sorted_quorum.begin(), sorted_quorum.end()) {
        values_.insert(values_.begin(), 0.0);   // slot for the candidate
        for (double v : values_) dens_.push_back(density(v));
        quorum_prob_ = joint_quorum_probability(sorted_quorum, model, kind);
        nv_.resize(values_.size());
        nd_.resize(values_.size());
    }

    double quorum_probability() const { return quorum_prob_; }

    double operator()(double x) {
        values_[0] = x;
        dens_[0] = density(x);
        normalize(values_, nv_);
        normalize(dens_, nd_);
        double sum = 0.0;
        for (std::size_t i = 0; i < nv_.size(); ++i) {
            for (std::size_t j = i + 1; j < nv_.size(); ++j) {
                sum += (nv_[i] - nv_[j]) * (nv_[i] - nv_[j]) + (nd_[i] - nd_[j]) * (nd_[i] - nd_[j]);
            }
        }
        const double sim = similarity_from_distance(std::sqrt(sum));
        const double alpha = std::pow(similarity_ratio(sim), 1.0 - quorum_prob_);
        const double p = kind_ == BaseProbability::RelativeLikelihood ? dens_[0] / mode_ : dens_[0];
        return std::pow(p, alpha);
    }

private:
    double density(double v) const { return dist_.pdf((v - model_.loc) / model_.scale); }

    static void normalize(const std::vector<double>& in, std::vector<double>& out) {
        const auto [lo, hi] = std::minmax_element(in.begin(), in.end());
        const double range = *hi - *lo;
        for (std::size_t i = 0; i < in.size(); ++i) out[i] = range > 0.0 ? (in[i] - *lo) / range : 0.0;
    }

    PredictiveModel model_;
    BaseProbability kind_;
    StudentT dist_;
    double mode_;
    std::vector<double> values_, dens_, nv_, nd_;
    double quorum_prob_ = 0.0;
};

template <typename G>
Scan grid_max(const G& g, double lo, double hi, double step) {
    Scan best{lo, g(lo)};
    const auto cells = static_cast<long>(std::ceil((hi - lo) / step));
    for (long i = 1; i <= cells; ++i) {
        const double x = std::min(lo + static_cast<double>(i) * step, hi);
        const double y = g(x);
        if (y > best.g) best = {x, y};
    }
    return best;
}

}  // namespace

GridResult fixed_quorum_exhaustive(std::span<const double> quorum, const PredictiveModel& model,
                                   double grid_step, double credible_mass, BaseProbability kind) {
    std::vector<double> q(quorum.begin(), quorum.end());
    std::sort(q.begin(), q.end());
    DirectEvaluator eval(q, model, kind);
    const double pq = eval.quorum_probability();
    const auto g = [&](double x) { return eval(x); };

    const boost::math::students_t_distribution<double> t(model.dof);
    const double half = boost::math::quantile(t, 0.5 + credible_mass / 2.0) * model.scale;
    const double lo = std::min(model.loc - half, q.front());
    const double hi = std::max(model.loc + half, q.back());

    Scan best = grid_max(g, lo, hi, grid_step);
    const Scan fine = grid_max(g, std::max(lo, best.x - grid_step), std::min(hi, best.x + grid_step),
                               grid_step / 100.0);
    if (fine.g > best.g) best = fine;
    // Isolated peaks sit on quorum members and at the mode.
    for (double v : q) {
        const double y = g(v);
        if (y > best.g) best = {v, y};
    }
    if (lo <= model.loc && model.loc <= hi) {
        const double y = g(model.loc);
        if (y > best.g) best = {model.loc, y};
    }
    return {best.x, best.g, pq};
}

ConsensusResult pc_exhaustive(std::span<const Observation> obs, const PredictiveModel& model,
                              const SystemConfig& cfg, double grid_step, BaseProbability kind) {
    const auto n = obs.size();
    const auto k = static_cast<std::size_t>(2 * cfg.f + 1);
    if (n < k) throw Error(ErrorCode::InsufficientMessages, "oracle needs 2f+1 messages");

    ConsensusResult best;
    bool have = false;
    // Enumerate subsets by bitmask so the enumeration shares nothing with the
    // engine's combination walker.
    for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
        if (static_cast<std::size_t>(__builtin_popcount(mask)) != k) continue;
        std::vector<double> values;
        ConsensusResult r;
        for (std::size_t i = 0; i < n; ++i) {
            if (mask & (1u << i)) {
                values.push_back(obs[i].value);
                r.quorum.push_back(obs[i].replica_id);
            }
        }
        std::sort(r.quorum.begin(), r.quorum.end());
        const GridResult g = fixed_quorum_exhaustive(values, model, grid_step, 0.997, kind);
        r.value = g.value;
        r.cond_prob = g.cond_prob;
        r.quorum_prob = g.quorum_prob;
        const bool wins = !have || r.cond_prob > best.cond_prob ||
                          (r.cond_prob == best.cond_prob &&
                           (r.quorum_prob > best.quorum_prob ||
                            (r.quorum_prob == best.quorum_prob && r.quorum < best.quorum)));
        if (wins) best = std::move(r), have = true;
    }
    const double lo = best.value * (1.0 - 3.0 * model.sigma_eps_hat);
    const double hi = best.value * (1.0 + 3.0 * model.sigma_eps_hat);
    best.ig = {std::min(lo, hi), std::max(lo, hi)};
    best.confident = best.cond_prob >= cfg.min_confidence;
    best.messages_used = static_cast<int>(n);
    return best;
}

std::vector<double> attack_exhaustive(std::span<const double> honest, const PredictiveModel& model, int f,
                                      AttackDirection direction, const AttackOracleSettings& s) {
    if (f <= 0 || honest.empty()) return {};
    if (direction == AttackDirection::WorstOfBoth) {
        throw Error(ErrorCode::BadConfig, "the attack oracle takes a single direction");
    }
    std::vector<double> q(honest.begin(), honest.end());
    std::sort(q.begin(), q.end());
    const double search_step = s.search_step > 0.0 ? s.search_step : model.scale / 200.0;
    const double attack_step = s.attack_step > 0.0 ? s.attack_step : model.scale / 50.0;
    const double min_shift = s.min_shift > 0.0 ? s.min_shift : model.scale / 1000.0;
    const bool up = direction == AttackDirection::Inflate;

    const GridResult h = fixed_quorum_exhaustive(q, model, search_step);
    const auto keep = std::min<std::size_t>(q.size(), static_cast<std::size_t>(f + 1));

    const double lo = std::min(q.front(), model.loc - 12.0 * model.scale);
    const double hi = std::max(q.back(), model.loc + 12.0 * model.scale);
    const auto cells = static_cast<long>(std::ceil((hi - lo) / attack_step));
    for (long i = 0; i <= cells; ++i) {
        const double a = up ? std::max(hi - static_cast<double>(i) * attack_step, lo)
                            : std::min(lo + static_cast<double>(i) * attack_step, hi);
        std::vector<double> phi = up ? std::vector<double>(q.end() - static_cast<long>(keep), q.end())
                                     : std::vector<double>(q.begin(), q.begin() + static_cast<long>(keep));
        for (int j = 0; j < f; ++j) phi.push_back(a);
        const GridResult r = fixed_quorum_exhaustive(phi, model, search_step);
        const bool moved = up ? r.value - h.value > min_shift : h.value - r.value > min_shift;
        if (moved && h.cond_prob <= r.cond_prob) return std::vector<double>(static_cast<std::size_t>(f), a);
    }
    return {};
}

Instance random_instance(std::uint64_t seed, int f, int n) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(f * 64 + n)));
    constexpr double kSigmaEps[] = {0.02, 0.06, 0.12};
    TrueProcess proc;
    proc.sigma_eps = kSigmaEps[rng() % 3];

    Instance inst;
    inst.cfg.f = f;
    inst.cfg.n = n;
    const double x = proc.mu + proc.sigma * standard_normal(rng);
    SystemConfig honest_only;
    honest_only.f = 0;
    honest_only.n = std::max(n - f, 1);
    NigParams prior;
    ErrorStdEstimator est;
    for (int r = 0; r < 5; ++r) {
        RoundOptions opts;
        opts.true_output = x;
        const RoundObservations round = generate_round(proc, honest_only, NetModel::reliable(), rng, opts);
        std::vector<double> v;
        for (const auto& o : round.values) v.push_back(o.value);
        prior = conjugate_update(prior, v);
        if (v.size() >= 2) est = infer_error_std(v, est).estimator;
    }
    inst.model = posterior_predictive(prior, est.sigma_eps());

    RoundOptions opts;
    opts.true_output = x;
    inst.obs = generate_round(proc, honest_only, NetModel::reliable(), rng, opts).values;
    for (int j = 0; j < f; ++j) {
        const double v = inst.model.loc + inst.model.scale * (16.0 * uniform01(rng) - 8.0);
        inst.obs.push_back({static_cast<ReplicaId>(n - f + j), v});
    }
    return inst;
}

Agreement compare_pc(const Instance& inst, const SearchSettings& s) {
    const ConsensusResult engine = pc_consensus(inst.obs, inst.model, inst.cfg, s);
    const double step = s.resolve_step(inst.model);
    const ConsensusResult ref = pc_exhaustive(inst.obs, inst.model, inst.cfg, step, s.base);
    return {engine.quorum == ref.quorum, std::abs(engine.value - ref.value), step};
}

}  // namespace proxcon::oracle
