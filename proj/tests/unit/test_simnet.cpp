#include <doctest.h>

#include <cmath>

#include "proxcon/simnet.hpp"
#include "support/reference.hpp"

using namespace proxcon;

namespace {

SystemConfig cfg_of(int f, int n) {
    SystemConfig c;
    c.f = f;
    c.n = n;
    return c;
}

// Enumerates the four coin outcomes and the four delivery outcomes.
CoinflipProbabilities enumerate_coinflip(double p1, double p2) {
    CoinflipProbabilities r;
    for (int c1 = 0; c1 < 2; ++c1)
        for (int c2 = 0; c2 < 2; ++c2)
            for (int d1 = 0; d1 < 2; ++d1)
                for (int d2 = 0; d2 < 2; ++d2) {
                    const double w = 0.25 * (d1 ? p1 : 1 - p1) * (d2 ? p2 : 1 - p2);
                    const int tails = (c1 && d1) + (c2 && d2);
                    (tails == 0 ? r.p0 : tails == 1 ? r.p1 : r.p2) += w;
                }
    return r;
}

}  // namespace

TEST_CASE("noise-free round outputs the mean") {
    TrueProcess p;
    p.sigma = 0.0;
    p.sigma_eps = 0.0;
    Rng rng(1);
    const auto r = generate_round(p, cfg_of(1, 5), NetModel::reliable(), rng);
    REQUIRE(r.values.size() == 4);
    for (const auto& o : r.values) CHECK(o.value == 294.0);
    CHECK(r.true_output == 294.0);
}

TEST_CASE("rounds are deterministic per seed") {
    const TrueProcess p;
    NetModel net;
    net.drop_prob = 0.1;
    for (std::uint64_t s = 0; s < 20; ++s) {
        Rng a(derive_seed(s, 3)), b(derive_seed(s, 3));
        std::vector<DeliveryEvent> ta, tb;
        RoundOptions oa, ob;
        oa.trace = &ta;
        ob.trace = &tb;
        CHECK(generate_round(p, cfg_of(2, 9), net, a, oa) == generate_round(p, cfg_of(2, 9), net, b, ob));
        CHECK(ta == tb);
    }
}

TEST_CASE("everything dropped leaves consensus without a quorum") {
    const TrueProcess p;
    NetModel net;
    net.drop_prob = 1.0;
    Rng rng(4);
    const auto r = generate_round(p, cfg_of(1, 5), net, rng);
    CHECK(r.values.empty());
    try {
        pc_consensus(r.values, process_predictive(p), cfg_of(1, 5));
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::InsufficientMessages);
    }
}

TEST_CASE("arrival order, byzantine ids and attacks") {
    const TrueProcess p;
    Rng rng(9);
    RoundOptions opts;
    opts.true_output = 300.0;
    opts.attack = RoundAttack{{AttackDirection::Suppress, 1}, process_predictive(p), {}};
    std::vector<DeliveryEvent> trace;
    opts.trace = &trace;
    NetModel net;   // exponential latency
    const auto cfg = cfg_of(1, 5);
    const auto r = generate_round(p, cfg, net, rng, opts);
    CHECK(r.true_output == 300.0);
    REQUIRE(trace.size() == 4);
    std::size_t honest = 0;
    double last = -1.0;
    for (const auto& o : r.values) {
        if (is_byzantine(o.replica_id, cfg)) continue;
        ++honest;
        const double arrival = trace[o.replica_id].arrival;
        CHECK(arrival >= last);
        last = arrival;
    }
    CHECK(r.values.size() == honest + 1);
    CHECK(is_byzantine(r.values.back().replica_id, cfg));
}

TEST_CASE("partitions and latency") {
    NetModel net;
    net.latency_mean = 0.3;
    net.partitions.push_back({{0}, 0.0, 2.0});
    Rng rng(2);
    for (int i = 0; i < 100; ++i) CHECK_FALSE(deliver(net, 0, 1.0, rng).delivered);
    long late = 0, delivered = 0;
    for (int i = 0; i < 20000; ++i) {
        const auto e = deliver(net, 1, 1.0, rng);
        delivered += e.delivered;
        if (!e.delivered) {
            ++late;
            CHECK(std::isinf(e.arrival));
        } else {
            CHECK(e.arrival <= 1.0);
        }
    }
    // Exponential delays past the deadline: exp(-1/0.3).
    CHECK(static_cast<double>(late) / 20000.0 == doctest::Approx(std::exp(-1.0 / 0.3)).epsilon(0.2));
    NetModel bad;
    bad.drop_prob = 1.5;
    CHECK_THROWS_AS(validate_net(bad), Error);
    bad.drop_prob = 0.0;
    bad.latency_mean = -1.0;
    CHECK_THROWS_AS(validate_net(bad), Error);
}

TEST_CASE("coinflip_probabilities") {
    const auto a = coinflip_probabilities(1.0, 1.0);
    CHECK(a.p0 == doctest::Approx(0.25));
    CHECK(a.p1 == doctest::Approx(0.5));
    CHECK(a.p2 == doctest::Approx(0.25));
    const auto b = coinflip_probabilities(0.9, 0.9);
    CHECK(b.p0 == doctest::Approx(0.3025));
    CHECK(b.p1 == doctest::Approx(0.495));
    CHECK(b.p2 == doctest::Approx(0.2025));
    const auto c = coinflip_probabilities(0.0, 0.0);
    CHECK(c.p0 == doctest::Approx(1.0));
    CHECK(c.p1 == 0.0);
    CHECK(c.p2 == 0.0);
    ref::Gen g(6);
    for (int i = 0; i < 100; ++i) {
        const double p1 = g.uniform(), p2 = g.uniform();
        const auto r = coinflip_probabilities(p1, p2);
        const auto e = enumerate_coinflip(p1, p2);
        CHECK(r.p0 == doctest::Approx(e.p0).epsilon(1e-12));
        CHECK(r.p1 == doctest::Approx(e.p1).epsilon(1e-12));
        CHECK(r.p2 == doctest::Approx(e.p2).epsilon(1e-12));
        CHECK(r.p0 + r.p1 + r.p2 == doctest::Approx(1.0));
    }
    CHECK_THROWS_AS(coinflip_probabilities(1.1, 0.5), Error);
}

TEST_CASE("coinflip_simulate") {
    const long n = 100000;
    for (double p : {0.9, 1.0}) {
        const auto e = coinflip_probabilities(p, p);
        const auto m = coinflip_simulate(p, n, 42);
        const double ex[] = {e.p0, e.p1, e.p2}, mx[] = {m.p0, m.p1, m.p2};
        for (int i = 0; i < 3; ++i) CHECK(std::abs(mx[i] - ex[i]) <= 3.0 * std::sqrt(ex[i] * (1 - ex[i]) / n));
    }
    CHECK(coinflip_simulate(0.9, 1000, 5) == coinflip_simulate(0.9, 1000, 5));
}

TEST_CASE("ideal_ba") {
    const std::vector<Observation> set{{0, 1.0}, {2, 3.0}};
    std::vector<Proposal> same{{0, false, set}, {1, false, set}};
    CHECK(ideal_ba(same) == set);

    std::vector<Proposal> disjoint{{0, false, {{3, 7.0}}}, {1, false, {{1, 5.0}}}};
    CHECK(ideal_ba(disjoint) == std::vector<Observation>{{1, 5.0}, {3, 7.0}});

    std::vector<Proposal> equivocating{{0, false, set}, {4, true, {{0, 99.0}, {9, 1.0}}}};
    CHECK(ideal_ba(equivocating) == set);

    std::vector<Proposal> conflicting{{2, false, {{5, 2.0}}}, {1, false, {{5, 1.0}}}};
    CHECK(ideal_ba(conflicting) == std::vector<Observation>{{5, 1.0}});
}

TEST_CASE("noise factors are uncorrelated across replicas") {
    TrueProcess p;
    Rng rng(derive_seed(7, 7));
    const int rounds = 10000;
    double sa = 0, sb = 0, saa = 0, sbb = 0, sab = 0;
    for (int r = 0; r < rounds; ++r) {
        const auto round = generate_round(p, cfg_of(1, 5), NetModel::reliable(), rng);
        const double a = round.values[0].value / *round.true_output;
        const double b = round.values[1].value / *round.true_output;
        sa += a, sb += b, saa += a * a, sbb += b * b, sab += a * b;
    }
    const double n = rounds;
    const double cov = sab / n - sa / n * sb / n;
    const double corr = cov / std::sqrt((saa / n - sa * sa / n / n) * (sbb / n - sb * sb / n / n));
    CHECK(std::abs(corr) < 0.05);
    CHECK(sa / n == doctest::Approx(1.0).epsilon(0.01));
}

TEST_CASE("rng helpers and percent error") {
    CHECK(derive_seed(1, 2) != derive_seed(1, 3));
    CHECK(derive_seed(1, 2) != derive_seed(2, 2));
    CHECK(derive_seed(1, 2) == derive_seed(1, 2));
    Rng rng(1);
    double sum = 0.0;
    for (int i = 0; i < 10000; ++i) {
        const double u = uniform01(rng);
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
        sum += u;
    }
    CHECK(sum / 10000 == doctest::Approx(0.5).epsilon(0.02));
    CHECK(*pct_error(110.0, 100.0) == doctest::Approx(10.0));
    CHECK(*pct_error(-110.0, -100.0) == doctest::Approx(10.0));
    CHECK_FALSE(pct_error(1.0, 0.0));
    CHECK(parse_protocol("vc") == Protocol::VC);
    CHECK_THROWS_AS(parse_protocol("xx"), Error);
}
