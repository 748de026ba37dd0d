#include "proxcon/vc_baseline.hpp"

#include <algorithm>
#include <cmath>

#include "proxcon/combinations.hpp"

namespace proxcon {

double tverberg_1d(std::span<const double> values) {
    if (values.empty()) throw Error(ErrorCode::InsufficientMessages, "median of an empty set");
    std::vector<double> v(values.begin(), values.end());
    std::sort(v.begin(), v.end());
    const std::size_t m = v.size();
    return m % 2 == 1 ? v[m / 2] : 0.5 * (v[m / 2 - 1] + v[m / 2]);
}

double vc_aggregate(std::span<const double> values, int f, VcAggregate rule) {
    const auto k = static_cast<std::size_t>(2 * f + 1);
    if (values.size() < k) {
        throw Error(ErrorCode::InsufficientMessages,
                    "VC needs " + std::to_string(k) + " values, got " + std::to_string(values.size()));
    }
    if (rule == VcAggregate::MedianOfAll) return tverberg_1d(values);

    // The i-th order statistic (1-based) is the median of exactly
    // C(i-1, f) * C(m-i, f) of the C(m, 2f+1) quorums.
    std::vector<double> v(values.begin(), values.end());
    std::sort(v.begin(), v.end());
    const std::size_t m = v.size();
    const auto fu = static_cast<std::size_t>(f);
    double sum = 0.0;
    for (std::size_t i = fu; i + fu < m; ++i) {
        sum += v[i] * binomial(i, fu) * binomial(m - 1 - i, fu);
    }
    return sum / binomial(m, k);
}

double VcState::honest_spread() const {
    const Interval h = honest_hull();
    return h.width();
}

Interval VcState::honest_hull() const {
    Interval h{INFINITY, -INFINITY};
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i < faulty.size() && faulty[i]) continue;
        h.low = std::min(h.low, values[i]);
        h.high = std::max(h.high, values[i]);
    }
    return h;
}

VcState vc_round(const VcState& state, const std::vector<std::vector<double>>& received, int f,
                 VcAggregate rule) {
    VcState next = state;
    for (std::size_t i = 0; i < state.values.size(); ++i) {
        if (i < state.faulty.size() && state.faulty[i]) continue;
        next.values[i] = vc_aggregate(received.at(i), f, rule);
    }
    next.round = state.round + 1;
    return next;
}

VcDecision vc_decide(VcState state, int f, const VcByzantineStrategy& byzantine, int max_rounds,
                     VcAggregate rule) {
    const std::size_t n = state.values.size();
    state.faulty.resize(n, false);
    int rounds = 0;
    while (!(state.honest_spread() <= state.epsilon)) {
        if (rounds >= max_rounds) {
            throw Error(ErrorCode::NoConvergence,
                        "honest spread still " + std::to_string(state.honest_spread()) + " after " +
                            std::to_string(rounds) + " rounds");
        }
        std::vector<double> honest;
        for (std::size_t i = 0; i < n; ++i) {
            if (!state.faulty[i]) honest.push_back(state.values[i]);
        }
        std::vector<std::vector<double>> received(n);
        for (std::size_t r = 0; r < n; ++r) {
            if (state.faulty[r]) continue;
            received[r] = honest;
            if (byzantine) {
                const auto extra = byzantine(state.round, r, honest);
                const auto budget = std::min<std::size_t>(extra.size(), static_cast<std::size_t>(f));
                received[r].insert(received[r].end(), extra.begin(), extra.begin() + static_cast<long>(budget));
            }
        }
        state = vc_round(state, received, f, rule);
        ++rounds;
    }
    const auto it = std::find(state.faulty.begin(), state.faulty.end(), false);
    const auto first_honest = static_cast<std::size_t>(it - state.faulty.begin());
    return {state.values.at(first_honest), rounds, state};
}

}  // namespace proxcon
