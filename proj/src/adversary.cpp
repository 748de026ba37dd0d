#include "proxcon/adversary.hpp"

#include <algorithm>
#include <cmath>

#include "proxcon/vc_baseline.hpp"

namespace proxcon {

std::string_view to_string(AttackDirection d) noexcept {
    switch (d) {
        case AttackDirection::Suppress: return "suppress";
        case AttackDirection::Inflate: return "inflate";
        case AttackDirection::WorstOfBoth: return "worst";
    }
    return "unknown";
}

AttackDirection parse_attack_direction(std::string_view s) {
    if (s == "suppress") return AttackDirection::Suppress;
    if (s == "inflate") return AttackDirection::Inflate;
    if (s == "worst" || s == "worst-of-both") return AttackDirection::WorstOfBoth;
    throw Error(ErrorCode::ParseError, "unknown attack direction '" + std::string(s) + "'");
}

double confidence_bound(double c_obs, int n, int f) {
    if (n < 3 * f + 1) throw Error(ErrorCode::TooFewReplicas, "confidence_bound needs n >= 3f+1");
    return 1.0 - std::pow(1.0 - c_obs, n - 3 * f);
}

std::vector<double> worst_case_quorum(const TrueProcess& proc, int f, AttackDirection direction) {
    const double low = proc.mu * (proc.mu_eps - 3.0 * proc.sigma_eps);
    const double high = proc.mu * (proc.mu_eps + 3.0 * proc.sigma_eps);
    const int n_low = direction == AttackDirection::Inflate ? f : f + 1;
    std::vector<double> q(static_cast<std::size_t>(2 * f + 1), high);
    std::fill_n(q.begin(), n_low, low);
    return q;
}

BoundReport security_bounds(const TrueProcess& proc, int f, std::optional<int> n, double c_obs) {
    if (!(proc.sigma > 0.0)) throw Error(ErrorCode::BadConfig, "security_bounds needs sigma > 0");
    const double mu = proc.mu;
    const double me = proc.mu_eps;
    const double root_f = std::sqrt(static_cast<double>(f) * (f + 1));

    BoundReport r;
    r.sigma_xy_sq = (proc.sigma * proc.sigma + mu * mu) * (proc.sigma_eps * proc.sigma_eps + me * me) -
                    mu * mu * me * me;
    r.omega = mu != 0.0 ? 6.0 * mu * proc.sigma_eps * root_f / proc.sigma
                        : 6.0 * std::sqrt(r.sigma_xy_sq) * root_f / proc.sigma;
    r.a_low = mu * (me - 3.0 * proc.sigma_eps) - r.omega / 2.0;
    r.a_high = mu * (me + 3.0 * proc.sigma_eps) + r.omega / 2.0;
    r.delta_s = std::abs(mu * me - r.a_low);
    r.delta_i = std::abs(mu * me - r.a_high);
    if (mu != 0.0) {
        r.eps_low = std::abs(me - r.a_low / mu);
        r.eps_high = std::abs(me - r.a_high / mu);
    } else {
        r.warning = ErrorCode::ZeroMeanEpsilonBounds;
    }
    r.c_eps = confidence_bound(c_obs, n.value_or(4 * f + 1), f);
    return r;
}

PredictiveModel process_predictive(const TrueProcess& proc, double dof) {
    PredictiveModel m;
    m.loc = proc.mu * proc.mu_eps;
    m.dof = dof;
    const double var_xy = (proc.sigma * proc.sigma + proc.mu * proc.mu) *
                              (proc.sigma_eps * proc.sigma_eps + proc.mu_eps * proc.mu_eps) -
                          proc.mu * proc.mu * proc.mu_eps * proc.mu_eps;
    m.sigma_xy = std::sqrt(var_xy);
    m.scale = dof > 2.0 ? m.sigma_xy * std::sqrt((dof - 2.0) / dof) : m.sigma_xy;
    m.sigma_eps_hat = proc.sigma_eps;
    return m;
}

std::vector<double> attack_target_quorum(std::span<const double> honest, const PredictiveModel& model,
                                         int f, const SearchSettings& s) {
    std::vector<double> q;
    const auto k = static_cast<std::size_t>(2 * f + 1);
    if (honest.size() <= k) {
        q.assign(honest.begin(), honest.end());
    } else {
        std::vector<Observation> obs;
        for (std::size_t i = 0; i < honest.size(); ++i) obs.push_back({static_cast<ReplicaId>(i), honest[i]});
        SystemConfig cfg;
        cfg.f = f;
        cfg.n = static_cast<int>(honest.size());
        const ConsensusResult r = pc_consensus(obs, model, cfg, s);
        for (ReplicaId id : r.quorum) q.push_back(honest[id]);
    }
    std::sort(q.begin(), q.end());
    return q;
}

std::vector<double> attacked_quorum(std::span<const double> sorted_quorum, double a, int f,
                                    AttackDirection direction) {
    const auto keep = std::min(sorted_quorum.size(), static_cast<std::size_t>(f + 1));
    std::vector<double> phi;
    if (direction == AttackDirection::Inflate) {
        phi.assign(sorted_quorum.end() - static_cast<long>(keep), sorted_quorum.end());
    } else {
        phi.assign(sorted_quorum.begin(), sorted_quorum.begin() + static_cast<long>(keep));
    }
    phi.insert(phi.end(), static_cast<std::size_t>(f), a);
    std::sort(phi.begin(), phi.end());
    return phi;
}

namespace {

// Shifts within the search resolution are indistinguishable from search
// error and do not count as moving the output.
bool clauses_hold(const FixedQuorumResult& honest, const FixedQuorumResult& attacked,
                  AttackDirection direction, double min_shift) {
    const double shift = attacked.value - honest.value;
    const bool moved = direction == AttackDirection::Inflate ? shift > min_shift : shift < -min_shift;
    return moved && honest.cond_prob <= attacked.cond_prob;
}

}  // namespace

AttackCheck check_attack(std::span<const double> sorted_quorum, double a, const PredictiveModel& model,
                         int f, AttackDirection direction, const SearchSettings& s) {
    const FixedQuorumResult honest = pc_fixed_quorum(sorted_quorum, model, s);
    const auto phi = attacked_quorum(sorted_quorum, a, f, direction);
    const FixedQuorumResult attacked = pc_fixed_quorum(phi, model, s);
    return {honest.value, honest.cond_prob, attacked.value, attacked.cond_prob,
            clauses_hold(honest, attacked, direction, s.resolve_step(model))};
}

Interval attack_domain(std::span<const double> quorum, const PredictiveModel& model) {
    constexpr double kScales = 12.0;
    Interval d{model.loc - kScales * model.scale, model.loc + kScales * model.scale};
    for (double v : quorum) {
        d.low = std::min(d.low, v);
        d.high = std::max(d.high, v);
    }
    return d;
}

namespace {

// Effective attack values can form narrow islands near the quorum, so the
// scan is fine there and coarse towards the domain ends.
std::vector<double> scan_points(const Interval& dom, std::span<const double> q, double scale, bool up) {
    const double near_lo = std::max(dom.low, q.front() - 3.0 * scale);
    const double near_hi = std::min(dom.high, q.back() + 3.0 * scale);
    std::vector<double> pts;
    const auto fill = [&pts](double a, double b, double h) {
        const auto cells = static_cast<long>(std::ceil((b - a) / h));
        for (long i = 0; i <= cells; ++i) pts.push_back(std::min(a + static_cast<double>(i) * h, b));
    };
    fill(dom.low, near_lo, scale / 4.0);
    fill(near_lo, near_hi, scale / 50.0);
    fill(near_hi, dom.high, scale / 4.0);
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    if (up) std::reverse(pts.begin(), pts.end());
    return pts;
}

AttackResult directed_attack(std::span<const double> q, const PredictiveModel& model, int f,
                             AttackDirection direction, const SearchSettings& s) {
    const FixedQuorumResult honest = pc_fixed_quorum(q, model, s);
    const double step = s.resolve_step(model);
    const auto effective = [&](double a, double* attacked_value) {
        const FixedQuorumResult r = pc_fixed_quorum(attacked_quorum(q, a, f, direction), model, s);
        if (attacked_value) *attacked_value = r.value;
        return clauses_hold(honest, r, direction, step);
    };

    const bool up = direction == AttackDirection::Inflate;
    const double outward = up ? step : -step;
    // Scan from the extreme end towards the quorum for the first effective value.
    const Interval dom = attack_domain(q, model);
    const auto pts = scan_points(dom, q, model.scale, up);

    AttackResult out;
    out.direction = direction;
    out.honest_value = honest.value;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        double moved = 0.0;
        if (!effective(pts[i], &moved)) continue;
        double good = pts[i];
        out.attacked_value = moved;
        if (i > 0) {
            double bad = pts[i - 1];
            while (std::abs(good - bad) > step) {
                const double mid = 0.5 * (good + bad);
                if (effective(mid, &moved)) {
                    good = mid;
                    out.attacked_value = moved;
                } else {
                    bad = mid;
                }
            }
        }
        // Make the result extreme at resolution p: one step further out must
        // fail or leave the domain.
        while (dom.contains(good + outward) && effective(good + outward, &moved)) {
            good += outward;
            out.attacked_value = moved;
        }
        out.values.assign(static_cast<std::size_t>(f), good);
        out.effective = true;
        return out;
    }

    // Fallback: the displaced honest values, which reproduce Q exactly.
    const auto fu = static_cast<std::size_t>(f);
    if (up) {
        out.values.assign(q.begin(), q.begin() + static_cast<long>(std::min(fu, q.size())));
    } else {
        out.values.assign(q.end() - static_cast<long>(std::min(fu, q.size())), q.end());
    }
    out.attacked_value = honest.value;
    return out;
}

}  // namespace

AttackResult optimal_attack(std::span<const double> honest, const PredictiveModel& model, int f,
                            AttackDirection direction, const SearchSettings& s,
                            std::optional<double> true_output) {
    if (f <= 0) return {};
    const auto q = attack_target_quorum(honest, model, f, s);
    if (direction != AttackDirection::WorstOfBoth) return directed_attack(q, model, f, direction, s);

    AttackResult low = directed_attack(q, model, f, AttackDirection::Suppress, s);
    AttackResult high = directed_attack(q, model, f, AttackDirection::Inflate, s);
    const double ref = true_output.value_or(low.honest_value);
    return std::abs(high.attacked_value - ref) > std::abs(low.attacked_value - ref) ? high : low;
}

std::vector<double> vc_optimal_attack(std::span<const double> honest, int f, AttackDirection direction,
                                      std::optional<double> true_output) {
    if (f <= 0 || honest.empty()) return {};
    const auto [mn_it, mx_it] = std::minmax_element(honest.begin(), honest.end());
    const double mn = *mn_it, mx = *mx_it;
    const double span = mx > mn ? mx - mn : std::max(1.0, std::abs(mn));

    std::vector<double> candidates(honest.begin(), honest.end());
    constexpr int kGrid = 201;
    for (int i = 0; i < kGrid; ++i) {
        candidates.push_back(mn - span + 3.0 * span * static_cast<double>(i) / (kGrid - 1));
    }
    std::vector<double> all(honest.begin(), honest.end());
    all.resize(honest.size() + static_cast<std::size_t>(f));
    const auto output = [&](double a) {
        std::fill(all.begin() + static_cast<long>(honest.size()), all.end(), a);
        return vc_aggregate(all, f);
    };

    // Suppress: lowest output, ties to the largest a (closest to the hull).
    // Inflate: highest output, ties to the smallest a.
    const auto best_for = [&](bool up) {
        double best_a = up ? mx : mn;
        double best_out = output(best_a);
        for (double a : candidates) {
            const double o = output(a);
            const bool better = up ? (o > best_out || (o == best_out && a < best_a))
                                   : (o < best_out || (o == best_out && a > best_a));
            if (better) best_a = a, best_out = o;
        }
        return std::pair{best_a, best_out};
    };

    double a = 0.0;
    if (direction == AttackDirection::WorstOfBoth) {
        const auto [lo_a, lo_out] = best_for(false);
        const auto [hi_a, hi_out] = best_for(true);
        const double ref = true_output.value_or(vc_aggregate(honest, std::min<int>(f, (static_cast<int>(honest.size()) - 1) / 2)));
        a = std::abs(hi_out - ref) > std::abs(lo_out - ref) ? hi_a : lo_a;
    } else {
        a = best_for(direction == AttackDirection::Inflate).first;
    }
    return std::vector<double>(static_cast<std::size_t>(f), a);
}

}  // namespace proxcon
