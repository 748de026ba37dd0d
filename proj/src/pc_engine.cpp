#include "proxcon/pc_engine.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include <boost/math/distributions/students_t.hpp>

#include "proxcon/combinations.hpp"

namespace proxcon {

double SearchSettings::resolve_step(const PredictiveModel& model) const noexcept {
    return step > 0.0 ? step : model.scale / 1000.0;
}

Interval credible_interval(const PredictiveModel& model, double mass) {
    const boost::math::students_t_distribution<double> t(model.dof);
    const double half = boost::math::quantile(t, 0.5 + mass / 2.0) * model.scale;
    return {model.loc - half, model.loc + half};
}

Interval search_domain(std::span<const double> quorum, const PredictiveModel& model,
                       const SearchSettings& s) {
    Interval d = credible_interval(model, s.credible_mass);
    for (double v : quorum) {
        d.low = std::min(d.low, v);
        d.high = std::max(d.high, v);
    }
    return d;
}

Interval interval_guarantee(double center, double sigma_eps_hat, double k) {
    double a = center * (1.0 - k * sigma_eps_hat);
    double b = center * (1.0 + k * sigma_eps_hat);
    if (a > b) std::swap(a, b);
    return {a, b};
}

Interval interval_guarantee(const PredictiveModel& model) {
    return interval_guarantee(model.loc, model.sigma_eps_hat);
}

namespace {

constexpr double kInvPhi = 0.6180339887498948482;

struct Best {
    double x;
    double g;
};

template <typename F>
Best golden_section_max(const F& g, double a, double b, double tol) {
    double c = b - kInvPhi * (b - a);
    double d = a + kInvPhi * (b - a);
    double gc = g(c);
    double gd = g(d);
    while (b - a > tol) {
        if (gc >= gd) {
            b = d;
            d = c;
            gd = gc;
            c = b - kInvPhi * (b - a);
            gc = g(c);
        } else {
            a = c;
            c = d;
            gc = gd;
            d = a + kInvPhi * (b - a);
            gd = g(d);
        }
    }
    return gc >= gd ? Best{c, gc} : Best{d, gd};
}

bool unimodal(const std::vector<double>& ys, std::size_t peak) {
    for (std::size_t i = 0; i < peak; ++i) {
        if (ys[i] > ys[i + 1]) return false;
    }
    for (std::size_t i = peak; i + 1 < ys.size(); ++i) {
        if (ys[i] < ys[i + 1]) return false;
    }
    return true;
}

void consider(Best& best, double x, double g) {
    if (g > best.g) best = {x, g};
}

}  // namespace

FixedQuorumResult pc_fixed_quorum(std::span<const double> quorum, const PredictiveModel& model,
                                  const SearchSettings& s) {
    const QuorumKernel kernel(quorum, model, s.base);
    const auto g = [&kernel](double x) { return kernel.conditional_probability(x); };

    const Interval dom = search_domain(kernel.sorted_values(), model, s);
    if (!(std::isfinite(dom.low) && std::isfinite(dom.high)) || dom.low > dom.high) {
        throw Error(ErrorCode::EmptySearchDomain, "search domain is empty or not finite");
    }
    const double step = s.resolve_step(model);

    // The objective is smooth between the points where the candidate becomes
    // a new extreme of either embedding coordinate: the quorum members, their
    // mirror images about the mode, and the mode itself.
    std::vector<double> cuts{dom.low, dom.high, model.loc};
    for (double v : kernel.sorted_values()) {
        cuts.push_back(v);
        cuts.push_back(2.0 * model.loc - v);
    }
    std::erase_if(cuts, [&](double c) { return !dom.contains(c); });
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

    Best best{cuts.front(), g(cuts.front())};
    const std::size_t n = static_cast<std::size_t>(std::max(s.profile_samples, 3));
    std::vector<double> xs(n), ys(n);
    for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
        const double a = cuts[c];
        const double b = cuts[c + 1];
        for (std::size_t i = 0; i < n; ++i) {
            xs[i] = i + 1 == n ? b : a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
            ys[i] = g(xs[i]);
        }
        const auto peak = static_cast<std::size_t>(std::max_element(ys.begin(), ys.end()) - ys.begin());
        consider(best, xs[peak], ys[peak]);

        double lo = xs[peak == 0 ? 0 : peak - 1];
        double hi = xs[std::min(peak + 1, n - 1)];
        if (!unimodal(ys, peak)) {
            const auto cells = static_cast<std::size_t>(std::ceil((b - a) / step));
            std::size_t arg = 0;
            double top = -1.0;
            for (std::size_t j = 0; j <= cells; ++j) {
                const double y = g(std::min(a + static_cast<double>(j) * step, b));
                if (y > top) top = y, arg = j;
            }
            const double xb = std::min(a + static_cast<double>(arg) * step, b);
            consider(best, xb, top);
            lo = std::max(a, xb - step);
            hi = std::min(b, xb + step);
        }
        if (hi > lo) {
            const Best refined = golden_section_max(g, lo, hi, step / 4.0);
            consider(best, refined.x, refined.g);
        }
    }

    // All-equal quorums peak at a single point; the mean is cheap insurance.
    const double mean = sample_mean(kernel.sorted_values());
    if (dom.contains(mean)) consider(best, mean, g(mean));

    return {best.x, best.g, kernel.quorum_probability()};
}

bool better_result(const ConsensusResult& a, const ConsensusResult& b) noexcept {
    if (a.cond_prob != b.cond_prob) return a.cond_prob > b.cond_prob;
    if (a.quorum_prob != b.quorum_prob) return a.quorum_prob > b.quorum_prob;
    return a.quorum < b.quorum;
}

namespace {

void require_unique_ids(std::span<const Observation> obs) {
    std::unordered_set<ReplicaId> seen;
    for (const auto& o : obs) {
        if (!seen.insert(o.replica_id).second) {
            throw Error(ErrorCode::DuplicateReplica, "replica " + std::to_string(o.replica_id) + " appears twice");
        }
    }
}

}  // namespace

ConsensusResult pc_consensus(std::span<const Observation> obs, const PredictiveModel& model,
                             const SystemConfig& cfg, const SearchSettings& s) {
    const auto k = static_cast<std::size_t>(cfg.quorum_size());
    if (obs.size() < k) {
        throw Error(ErrorCode::InsufficientMessages,
                    "have " + std::to_string(obs.size()) + " messages, need " + std::to_string(k));
    }
    require_unique_ids(obs);
    for (const auto& o : obs) require_finite(std::span<const double>(&o.value, 1), "observation value");

    std::optional<ConsensusResult> best;
    std::vector<double> values(k);
    for_each_combination(obs.size(), k, [&](std::span<const std::size_t> idx) {
        ConsensusResult r;
        r.quorum.reserve(k);
        for (std::size_t i = 0; i < k; ++i) {
            values[i] = obs[idx[i]].value;
            r.quorum.push_back(obs[idx[i]].replica_id);
        }
        std::sort(r.quorum.begin(), r.quorum.end());
        const FixedQuorumResult fq = pc_fixed_quorum(values, model, s);
        r.value = fq.value;
        r.cond_prob = fq.cond_prob;
        r.quorum_prob = fq.quorum_prob;
        if (!best || better_result(r, *best)) best = std::move(r);
    });

    best->ig = interval_guarantee(best->value, model.sigma_eps_hat);
    best->confident = best->cond_prob >= cfg.min_confidence;
    best->messages_used = static_cast<int>(obs.size());
    return *best;
}

// One-shot ----------------------------------------------------------------------

namespace {

std::vector<double> quorum_values(const ConsensusResult& r, std::span<const Observation> obs) {
    std::vector<double> out;
    out.reserve(r.quorum.size());
    for (ReplicaId id : r.quorum) {
        for (const auto& o : obs) {
            if (o.replica_id == id) {
                out.push_back(o.value);
                break;
            }
        }
    }
    return out;
}

void absorb_quorum(NigParams& prior, ErrorStdEstimator& est, std::span<const double> q) {
    prior = conjugate_update(prior, q);
    if (q.size() >= 2 && sample_mean(q) != 0.0) est = infer_error_std(q, est).estimator;
}

}  // namespace

OneShotOutcome one_shot_step(OneShotState& state, std::span<const Observation> new_msgs,
                             const SearchSettings& s, const OneShotOptions& opts) {
    const SystemConfig& cfg = state.cfg;
    auto& received = state.received.values;
    {
        std::vector<Observation> merged = received;
        merged.insert(merged.end(), new_msgs.begin(), new_msgs.end());
        require_unique_ids(merged);
        if (merged.size() > static_cast<std::size_t>(cfg.n)) {
            throw Error(ErrorCode::BadConfig, "more messages than replicas");
        }
        received = std::move(merged);
    }

    const auto count = static_cast<int>(received.size());
    if (count < cfg.quorum_size()) return {};

    ConsensusResult r = pc_consensus(received, state.model(), cfg, s);
    OneShotStatus status = OneShotStatus::NeedMore;
    if (count >= cfg.max_wait_count()) {
        status = r.confident ? OneShotStatus::Accepted : OneShotStatus::AcceptedLowConfidence;
    } else if (r.confident &&
               (count >= cfg.early_accept_count() || (cfg.aiw && r.ig.width() <= *cfg.aiw))) {
        status = OneShotStatus::Accepted;
    }
    if (status == OneShotStatus::NeedMore) return {};

    if (status == OneShotStatus::Accepted || opts.update_on_low_confidence) {
        const auto q = quorum_values(r, received);
        absorb_quorum(state.prior, state.error_est, q);
    }
    state.received.values.clear();
    state.received.round_id += 1;
    return {status, std::move(r)};
}

void adopt_checkpoint(OneShotState& state, const NigParams& params) { state.prior = params; }

// Coordinated ----------------------------------------------------------------------

CoordinatedState make_coordinated_state(const SystemConfig& cfg, std::span<const ReplicaId> honest,
                                        const NigParams& prior, int checkpoint_interval) {
    CoordinatedState st;
    st.cfg = cfg;
    st.checkpoint_interval = std::max(1, checkpoint_interval);
    for (ReplicaId id : honest) st.replicas.push_back({id, prior, {}});
    return st;
}

CoordinatedOutcome coordinated_round(CoordinatedState& state, std::span<const Proposal> proposals,
                                     const AgreementOracle& ba, const SearchSettings& s) {
    CoordinatedOutcome out;
    out.agreed = ba(proposals);
    for (auto& rep : state.replicas) {
        const PredictiveModel model = posterior_predictive(rep.params, rep.error_est.sigma_eps());
        ConsensusResult r = pc_consensus(out.agreed, model, state.cfg, s);
        const auto q = quorum_values(r, out.agreed);
        absorb_quorum(rep.params, rep.error_est, q);
        out.results.emplace_back(rep.id, std::move(r));
    }
    state.round_id += 1;
    state.rounds_since_checkpoint += 1;
    if (state.rounds_since_checkpoint >= state.checkpoint_interval && !state.replicas.empty()) {
        // Agreement on identical posteriors is the identity; take the first.
        out.checkpoint = state.replicas.front().params;
        state.rounds_since_checkpoint = 0;
    }
    return out;
}

}  // namespace proxcon
