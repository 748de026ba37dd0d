#include "proxcon/simnet.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>

namespace proxcon {

std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept {
    return splitmix64(splitmix64(seed) ^ (stream * 0xd1b54a32d192ed03ULL + 1));
}

void validate_net(const NetModel& net) {
    if (!(net.drop_prob >= 0.0 && net.drop_prob <= 1.0)) {
        throw Error(ErrorCode::BadFraction, "drop_prob must lie in [0,1]");
    }
    if (net.latency_mean && !(*net.latency_mean > 0.0 && std::isfinite(*net.latency_mean))) {
        throw Error(ErrorCode::BadConfig, "latency mean must be positive");
    }
    for (const auto& p : net.partitions) {
        if (!(p.start <= p.end)) throw Error(ErrorCode::BadConfig, "partition interval is reversed");
    }
}

// Fixed, portable algorithms so traces do not depend on the standard
// library's distribution objects.
double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

double standard_normal(Rng& rng) {
    double u1 = uniform01(rng);
    while (u1 <= 0.0) u1 = uniform01(rng);
    const double u2 = uniform01(rng);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

namespace {

bool partitioned(const NetModel& net, ReplicaId id, double arrival) {
    for (const auto& p : net.partitions) {
        if (arrival >= p.start && arrival < p.end &&
            std::find(p.replicas.begin(), p.replicas.end(), id) != p.replicas.end()) {
            return true;
        }
    }
    return false;
}

}  // namespace

DeliveryEvent deliver(const NetModel& net, ReplicaId replica, double value, Rng& rng) {
    DeliveryEvent e{replica, value, std::numeric_limits<double>::infinity(), false};
    const bool dropped = uniform01(rng) < net.drop_prob;
    const double arrival = net.latency_mean ? -*net.latency_mean * std::log1p(-uniform01(rng)) : 0.0;
    if (dropped || arrival > 1.0 || partitioned(net, replica, arrival)) return e;
    e.arrival = arrival;
    e.delivered = true;
    return e;
}

RoundObservations generate_round(const TrueProcess& proc, const SystemConfig& cfg, const NetModel& net,
                                 Rng& rng, const RoundOptions& opts) {
    RoundObservations round;
    round.round_id = opts.round_id;
    const double x = opts.true_output ? *opts.true_output : proc.mu + proc.sigma * standard_normal(rng);
    round.true_output = x;

    const int honest = cfg.n - cfg.f;
    std::vector<DeliveryEvent> events;
    events.reserve(static_cast<std::size_t>(std::max(honest, 0)));
    for (int i = 0; i < honest; ++i) {
        const double y = proc.mu_eps + proc.sigma_eps * standard_normal(rng);
        events.push_back(deliver(net, static_cast<ReplicaId>(i), x * y, rng));
    }
    if (opts.trace) *opts.trace = events;

    std::vector<DeliveryEvent> arrived;
    for (const auto& e : events) {
        if (e.delivered) arrived.push_back(e);
    }
    std::stable_sort(arrived.begin(), arrived.end(),
                     [](const DeliveryEvent& a, const DeliveryEvent& b) { return a.arrival < b.arrival; });
    for (const auto& e : arrived) round.values.push_back({e.replica, e.value});

    if (opts.attack && opts.attack->spec.f > 0 && round.values.size() > static_cast<std::size_t>(cfg.f)) {
        std::vector<double> honest_values;
        for (const auto& o : round.values) honest_values.push_back(o.value);
        const AttackResult a = optimal_attack(honest_values, opts.attack->victim,
                                              std::min(cfg.f, opts.attack->spec.f),
                                              opts.attack->spec.direction, opts.attack->search, x);
        for (std::size_t j = 0; j < a.values.size(); ++j) {
            round.values.push_back({static_cast<ReplicaId>(honest + static_cast<int>(j)), a.values[j]});
        }
    }
    return round;
}

std::string_view to_string(Protocol p) noexcept { return p == Protocol::PC ? "pc" : "vc"; }

Protocol parse_protocol(std::string_view s) {
    if (s == "pc") return Protocol::PC;
    if (s == "vc") return Protocol::VC;
    throw Error(ErrorCode::ParseError, "unknown protocol '" + std::string(s) + "'");
}

std::optional<double> pct_error(double decided, double truth) noexcept {
    if (truth == 0.0) return std::nullopt;
    return std::abs(decided - truth) / std::abs(truth) * 100.0;
}

CoinflipProbabilities coinflip_probabilities(double p1, double p2) {
    for (double p : {p1, p2}) {
        if (!(p >= 0.0 && p <= 1.0)) throw Error(ErrorCode::BadFraction, "delivery probability outside [0,1]");
    }
    CoinflipProbabilities r;
    r.p2 = 0.25 * p1 * p2;
    r.p1 = 0.25 * p1 + 0.25 * p2 + 0.25 * ((1.0 - p1) * p2 + p1 * (1.0 - p2));
    r.p0 = 0.25 + 0.25 * (1.0 - p1) * (1.0 - p2) + 0.25 * (1.0 - p1) + 0.25 * (1.0 - p2);
    return r;
}

CoinflipProbabilities coinflip_simulate(double p_deliver, long trials, std::uint64_t seed) {
    if (trials < 1) throw Error(ErrorCode::BadConfig, "coin-flip simulation needs at least one trial");
    NetModel net = NetModel::reliable();
    net.drop_prob = 1.0 - p_deliver;
    net.seed = seed;
    validate_net(net);
    Rng rng(derive_seed(seed, 0));
    std::array<long, 3> counts{};
    for (long t = 0; t < trials; ++t) {
        int tails = 0;
        for (ReplicaId r = 0; r < 2; ++r) {
            const double flip = (rng() >> 63) ? 1.0 : 0.0;   // 1 = tails
            if (deliver(net, r, flip, rng).delivered && flip == 1.0) ++tails;
        }
        ++counts[static_cast<std::size_t>(tails)];
    }
    const auto n = static_cast<double>(trials);
    return {static_cast<double>(counts[0]) / n, static_cast<double>(counts[1]) / n,
            static_cast<double>(counts[2]) / n};
}

std::vector<Observation> ideal_ba(std::span<const Proposal> proposals) {
    std::vector<const Proposal*> honest;
    for (const auto& p : proposals) {
        if (!p.faulty) honest.push_back(&p);
    }
    std::sort(honest.begin(), honest.end(),
              [](const Proposal* a, const Proposal* b) { return a->proposer < b->proposer; });
    std::map<ReplicaId, double> merged;
    for (const Proposal* p : honest) {
        for (const auto& o : p->observations) merged.emplace(o.replica_id, o.value);
    }
    std::vector<Observation> out;
    out.reserve(merged.size());
    for (const auto& [id, v] : merged) out.push_back({id, v});
    return out;
}

}  // namespace proxcon
