#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "proxcon/adversary.hpp"
#include "proxcon/oracle.hpp"
#include "proxcon/pc_engine.hpp"
#include "proxcon/simnet.hpp"
#include "support/reference.hpp"

using namespace proxcon;

namespace {

// Predictive after `rounds` rounds of three outputs around 294.
PredictiveModel converged_model(int rounds, double sigma_eps = 0.06) {
    ref::Gen g(99);
    NigParams p;
    ErrorStdEstimator est;
    for (int r = 0; r < rounds; ++r) {
        const double x = 294.0 + 10.0 * g.normal();
        std::vector<double> v;
        for (int i = 0; i < 3; ++i) v.push_back(x * (1.0 + sigma_eps * g.normal()));
        p = conjugate_update(p, v);
        est = infer_error_std(v, est).estimator;
    }
    return posterior_predictive(p, est.sigma_eps());
}

std::vector<Observation> obs_of(const std::vector<double>& v) {
    std::vector<Observation> o;
    for (std::size_t i = 0; i < v.size(); ++i) o.push_back({static_cast<ReplicaId>(i), v[i]});
    return o;
}

SystemConfig cfg_of(int f, int n) {
    SystemConfig c;
    c.f = f;
    c.n = n;
    return c;
}

}  // namespace

TEST_CASE("interval_guarantee examples") {
    CHECK(interval_guarantee(100.0, 0.0) == Interval{100.0, 100.0});
    const auto a = interval_guarantee(294.0, 0.06);
    CHECK(a.low == doctest::Approx(241.08));
    CHECK(a.high == doctest::Approx(346.92));
    const auto b = interval_guarantee(-100.0, 0.06);
    CHECK(b.low == doctest::Approx(-118.0));
    CHECK(b.high == doctest::Approx(-82.0));
    PredictiveModel m;
    m.loc = 294.0;
    m.sigma_eps_hat = 0.06;
    CHECK(interval_guarantee(m) == a);
    const auto one = interval_guarantee(294.0, 0.06, 1.0);
    const auto two = interval_guarantee(294.0, 0.06, 2.0);
    CHECK(one.low >= two.low);
    CHECK(one.high <= two.high);
    CHECK(two.low >= a.low);
    CHECK(two.high <= a.high);
}

TEST_CASE("search domain covers the credible interval and the quorum") {
    PredictiveModel m;
    m.loc = 0.0;
    m.scale = 1.0;
    m.dof = 1000.0;
    const auto ci = credible_interval(m, 0.997);
    CHECK(ci.high == doctest::Approx(2.97).epsilon(0.01));
    CHECK(ci.low == doctest::Approx(-ci.high));
    const std::vector<double> q{-10.0, 0.5};
    const auto d = search_domain(q, m, {});
    CHECK(d.low == -10.0);
    CHECK(d.high == ci.high);
    CHECK(SearchSettings{}.resolve_step(m) == doctest::Approx(0.001));
}

TEST_CASE("pc_fixed_quorum examples") {
    const auto m = converged_model(200);
    const std::vector<double> at_mode(3, m.loc);
    CHECK(pc_fixed_quorum(at_mode, m).value == doctest::Approx(m.loc).epsilon(1e-9));

    const std::vector<double> q{280.0, 300.0, 310.0};
    const auto r = pc_fixed_quorum(q, m);
    const auto o = oracle::fixed_quorum_exhaustive(q, m, 0.01);
    const double p = SearchSettings{}.resolve_step(m);
    CHECK(std::abs(r.value - o.value) <= p);
    CHECK(r.cond_prob >= o.cond_prob - 1e-9);
}

TEST_CASE("property: fixed-quorum optimum agrees with the grid oracle") {
    ref::Gen g(41);
    const auto m = converged_model(50);
    const double p = SearchSettings{}.resolve_step(m);
    for (int c = 0; c < 40; ++c) {
        std::vector<double> q(static_cast<std::size_t>(2 * g.integer(0, 2) + 1));
        for (double& v : q) v = m.loc + m.scale * g.uniform(-4, 4);
        const auto r = pc_fixed_quorum(q, m);
        const auto o = oracle::fixed_quorum_exhaustive(q, m, p);
        CHECK(r.cond_prob >= o.cond_prob * (1.0 - 1e-9));
        // The optimum sits between the quorum mean and the mode; the density
        // coordinate can carry it slightly past the mode.
        const double slack = 0.05 * m.scale;
        const double lo = std::min(sample_mean(q), m.loc) - slack, hi = std::max(sample_mean(q), m.loc) + slack;
        const bool inside = r.value >= lo && r.value <= hi;
        const bool at_member = std::any_of(q.begin(), q.end(), [&](double v) { return std::abs(v - r.value) <= p; });
        CHECK((inside || at_member));
    }
}

TEST_CASE("worst-case quorums: optimum between the quorum mean and the mode") {
    const TrueProcess proc;
    const auto m = process_predictive(proc);
    const double p = SearchSettings{}.resolve_step(m);
    for (int f = 1; f <= 4; ++f) {
        for (auto d : {AttackDirection::Suppress, AttackDirection::Inflate}) {
            const auto q = worst_case_quorum(proc, f, d);
            const double v = pc_fixed_quorum(q, m).value;
            CHECK(v >= std::min(sample_mean(q), m.loc) - p);
            CHECK(v <= std::max(sample_mean(q), m.loc) + p);
        }
    }
}

TEST_CASE("pc_consensus examples") {
    const auto m = converged_model(200);
    SUBCASE("singleton") {
        const auto obs = obs_of({300.0});
        const auto r = pc_consensus(obs, m, cfg_of(0, 1));
        CHECK(r.quorum == std::vector<ReplicaId>{0});
        CHECK(r.value == doctest::Approx(pc_fixed_quorum(std::vector<double>{300.0}, m).value));
        const auto o = oracle::pc_exhaustive(obs, m, cfg_of(0, 1), SearchSettings{}.resolve_step(m));
        CHECK(std::abs(o.value - r.value) <= SearchSettings{}.resolve_step(m));
    }
    SUBCASE("singleton at the mode is a fixed point") {
        const auto r = pc_consensus(obs_of({m.loc}), m, cfg_of(0, 1));
        CHECK(r.value == doctest::Approx(m.loc).epsilon(1e-12));
    }
    SUBCASE("planted outlier does not drag the output") {
        // Min-max scaling makes the similarity blind to how far the outlier
        // is, so a quorum containing it can still win; the decided value
        // stays with the honest cluster.
        const double outlier = m.loc * (1.0 + 10.0 * m.sigma_eps_hat);
        const auto obs = obs_of({290.0, outlier, 296.0, 299.0, 287.0});
        const auto r = pc_consensus(obs, m, cfg_of(1, 5));
        CHECK(r.value >= 287.0);
        CHECK(r.value <= 299.0);
        const auto o = oracle::pc_exhaustive(obs, m, cfg_of(1, 5), SearchSettings{}.resolve_step(m));
        CHECK(o.quorum == r.quorum);
        CHECK(std::abs(o.value - r.value) <= SearchSettings{}.resolve_step(m));
    }
    SUBCASE("result fields") {
        const auto obs = obs_of({290.0, 293.0, 296.0, 299.0});
        const auto r = pc_consensus(obs, m, cfg_of(1, 5));
        CHECK(r.quorum.size() == 3);
        CHECK(std::is_sorted(r.quorum.begin(), r.quorum.end()));
        CHECK(r.messages_used == 4);
        CHECK(r.ig == interval_guarantee(r.value, m.sigma_eps_hat));
        CHECK(r.ig.contains(r.value));
        CHECK(r.confident == (r.cond_prob >= 0.5));
    }
}

TEST_CASE("pc_consensus errors") {
    const auto m = converged_model(20);
    try {
        pc_consensus(obs_of({1.0, 2.0}), m, cfg_of(1, 5));
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::InsufficientMessages);
    }
    std::vector<Observation> dup{{0, 290.0}, {0, 291.0}, {1, 292.0}};
    try {
        pc_consensus(dup, m, cfg_of(1, 5));
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::DuplicateReplica);
    }
}

TEST_CASE("property: pc_consensus matches the exhaustive oracle on random instances") {
    for (std::uint64_t seed = 0; seed < 8; ++seed) {
        for (const auto& [f, n] : {std::pair{0, 5}, std::pair{1, 5}, std::pair{2, 9}}) {
            const auto inst = oracle::random_instance(seed, f, n);
            CHECK(oracle::compare_pc(inst).ok());
        }
    }
}

TEST_CASE("better_result ordering") {
    ConsensusResult a, b;
    a.cond_prob = 0.6;
    b.cond_prob = 0.5;
    CHECK(better_result(a, b));
    CHECK_FALSE(better_result(b, a));
    b.cond_prob = 0.6;
    a.quorum_prob = 0.2;
    b.quorum_prob = 0.1;
    CHECK(better_result(a, b));
    b.quorum_prob = 0.2;
    a.quorum = {0, 1, 3};
    b.quorum = {0, 2, 3};
    CHECK(better_result(a, b));
    CHECK_FALSE(better_result(b, a));
}

TEST_CASE("one-shot client") {
    OneShotState st;
    st.cfg = cfg_of(1, 5);
    st.prior = conjugate_update(NigParams{}, std::vector<double>(40, 294.0));
    for (int i = 0; i < 20; ++i) {
        st.prior = conjugate_update(st.prior, std::vector<double>{285.0, 294.0, 303.0});
    }
    st.error_est = ErrorStdEstimator{1.0, 0.02, 0.0, 0};

    SUBCASE("below a quorum") {
        const auto out = one_shot_step(st, obs_of({294.0, 295.0}));
        CHECK(out.status == OneShotStatus::NeedMore);
        CHECK_FALSE(out.result);
        CHECK(st.received.values.size() == 2);
    }
    SUBCASE("tight quorum within the aiw is accepted before 3f+1") {
        st.cfg.aiw = 40.0;
        const NigParams before = st.prior;
        const auto out = one_shot_step(st, obs_of({294.0, 294.5, 293.8}));
        REQUIRE(out.status == OneShotStatus::Accepted);
        CHECK(out.result->messages_used == 3);
        CHECK(st.prior == conjugate_update(before, std::vector<double>{294.0, 294.5, 293.8}));
        CHECK(st.received.values.empty());
        CHECK(st.received.round_id == 1);
    }
    SUBCASE("without an aiw a tight quorum waits for 3f+1") {
        auto out = one_shot_step(st, obs_of({294.0, 294.5, 293.8}));
        CHECK(out.status == OneShotStatus::NeedMore);
        out = one_shot_step(st, std::vector<Observation>{{3, 294.2}});
        CHECK(out.status == OneShotStatus::Accepted);
        CHECK(out.result->quorum.size() == 3);
    }
    SUBCASE("a result under the confidence floor is accepted with low confidence") {
        // cp stays near 0.6 for any spread under this kernel
        st.cfg.min_confidence = 0.7;
        const NigParams before = st.prior;
        const auto out = one_shot_step(st, obs_of({330.0, 345.0, 362.0, 380.0}));
        REQUIRE(out.status == OneShotStatus::AcceptedLowConfidence);
        CHECK(out.result->cond_prob < st.cfg.min_confidence);
        CHECK_FALSE(out.result->confident);
        CHECK(st.prior == before);
    }
    SUBCASE("low-confidence acceptances update the prior when asked") {
        st.cfg.min_confidence = 0.7;
        const NigParams before = st.prior;
        const auto out = one_shot_step(st, obs_of({330.0, 345.0, 362.0, 380.0}), {}, {true});
        REQUIRE(out.status == OneShotStatus::AcceptedLowConfidence);
        CHECK(st.prior.nu == before.nu + 3.0);
    }
    SUBCASE("duplicate or excess messages are rejected") {
        one_shot_step(st, obs_of({294.0}));
        CHECK_THROWS_AS(one_shot_step(st, obs_of({295.0})), Error);
    }
    SUBCASE("checkpoint adoption copies the parameters") {
        const NigParams cp{300.0, 10.0, 6.0, 70.0};
        adopt_checkpoint(st, cp);
        CHECK(st.prior == cp);
    }
}

TEST_CASE("one-shot full-set result does not depend on arrival order") {
    const auto values = std::vector<double>{289.0, 301.0, 296.0, 330.0};
    std::vector<double> results;
    std::vector<std::size_t> order{0, 1, 2, 3};
    do {
        OneShotState st;
        st.cfg = cfg_of(1, 5);
        st.prior = conjugate_update(NigParams{}, std::vector<double>{290.0, 294.0, 298.0, 292.0, 296.0});
        OneShotOutcome out;
        for (std::size_t i : order) {
            out = one_shot_step(st, std::vector<Observation>{{static_cast<ReplicaId>(i), values[i]}});
            if (out.status != OneShotStatus::NeedMore) break;
        }
        if (out.result && out.result->messages_used == 4) results.push_back(out.result->value);
    } while (std::next_permutation(order.begin(), order.end()));
    REQUIRE_FALSE(results.empty());
    for (double r : results) CHECK(r == results.front());
}

TEST_CASE("coordinated rounds") {
    const auto cfg = cfg_of(1, 5);
    const std::vector<ReplicaId> honest{0, 1, 2, 3};
    const NigParams prior;
    auto st = make_coordinated_state(cfg, honest, prior, 3);
    const AgreementOracle ba = [](std::span<const Proposal> p) { return ideal_ba(p); };

    ref::Gen g(8);
    NigParams replay = prior;
    std::optional<NigParams> checkpoint;
    for (int round = 0; round < 3; ++round) {
        std::vector<Observation> obs;
        const double x = 294.0 + 10.0 * g.normal();
        for (ReplicaId i = 0; i < 5; ++i) obs.push_back({i, x * (1.0 + 0.06 * g.normal())});
        std::vector<Proposal> props;
        for (ReplicaId r : honest) props.push_back({r, false, obs});
        props.push_back({4, true, {{0, 1e6}}});

        auto shuffled = props;
        std::reverse(shuffled.front().observations.begin(), shuffled.front().observations.end());
        auto twin = st;
        const auto out = coordinated_round(st, props, ba);
        const auto out2 = coordinated_round(twin, shuffled, ba);
        REQUIRE(out.results.size() == 4);
        for (const auto& [id, r] : out.results) {
            CHECK(r == out.results.front().second);
        }
        CHECK(out2.results.front().second.value == out.results.front().second.value);

        std::vector<double> q;
        for (ReplicaId id : out.results.front().second.quorum) {
            for (const auto& o : out.agreed) {
                if (o.replica_id == id) q.push_back(o.value);
            }
        }
        replay = conjugate_update(replay, q);
        if (out.checkpoint) checkpoint = out.checkpoint;
        CHECK(out.checkpoint.has_value() == (round == 2));
    }
    REQUIRE(checkpoint);
    CHECK(checkpoint->mu0 == doctest::Approx(replay.mu0).epsilon(1e-12));
    CHECK(checkpoint->nu == replay.nu);
    CHECK(checkpoint->alpha == replay.alpha);
    CHECK(checkpoint->beta == doctest::Approx(replay.beta).epsilon(1e-12));

    OneShotState client;
    client.cfg = cfg;
    adopt_checkpoint(client, *checkpoint);
    CHECK(client.prior == st.replicas.front().params);
}
