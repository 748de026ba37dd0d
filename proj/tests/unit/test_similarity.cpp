#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "proxcon/similarity.hpp"
#include "support/reference.hpp"

using namespace proxcon;

namespace {

PredictiveModel model(double loc, double scale, double dof) {
    PredictiveModel m;
    m.loc = loc;
    m.scale = scale;
    m.dof = dof;
    return m;
}

EmbeddedPoints normalized(std::vector<EmbeddedPoint> pts) {
    EmbeddedPoints e;
    e.points = pts;
    e.normalized = std::move(pts);
    return e;
}

// Offset from the mode at which the relative likelihood equals r.
double offset_for(double r, double dof) { return std::sqrt(dof * (std::pow(r, -2.0 / (dof + 1.0)) - 1.0)); }

}  // namespace

TEST_CASE("student_t_pdf examples") {
    CHECK(student_t_pdf(0.0, 1.0) == doctest::Approx(1.0 / std::numbers::pi).epsilon(1e-12));
    CHECK(student_t_pdf(0.0, 1e6) == doctest::Approx(1.0 / std::sqrt(2.0 * std::numbers::pi)).epsilon(1e-6));
    CHECK(student_t_pdf(2.0, 5.0) == student_t_pdf(-2.0, 5.0));
    ref::Gen g(3);
    for (int i = 0; i < 200; ++i) {
        const double x = g.uniform(-20, 20), dof = g.uniform(0.5, 200);
        CHECK(ref::close_rel(student_t_pdf(x, dof), ref::t_pdf(x, dof), 1e-11));
        CHECK(ref::close_rel(StudentT(dof).pdf(x), ref::t_pdf(x, dof), 1e-11));
    }
}

TEST_CASE("embed_and_normalize examples") {
    const auto m = model(0.0, 1.0, 5.0);
    const std::vector<double> same{3.0, 3.0, 3.0};
    for (const auto& p : embed_and_normalize(same, m).normalized) {
        CHECK(p.value == 0.0);
        CHECK(p.density == 0.0);
    }
    const std::vector<double> two{1.0, 3.0};
    const auto e = embed_and_normalize(two, m);
    CHECK(e.normalized[0].value == 0.0);
    CHECK(e.normalized[1].value == 1.0);

    const std::vector<double> sym{-1.0, 1.0};
    const auto c = embed_and_normalize(0.0, sym, m);
    CHECK(c.normalized[0].density == 1.0);
    CHECK(c.normalized[0].value == 0.5);
}

TEST_CASE("pair_distance and similarity examples") {
    CHECK(pair_distance(normalized({{0.3, 0.3}, {0.3, 0.3}})) == 0.0);
    CHECK(pair_distance(normalized({{0, 0}, {1, 1}})) == doctest::Approx(std::sqrt(2.0)));
    CHECK(pair_distance(normalized({{0, 0}, {1, 1}, {0, 0}})) == doctest::Approx(2.0));
    CHECK(similarity_from_distance(0.0) == 1.0);
    CHECK(similarity_from_distance(std::sqrt(2.0)) == doctest::Approx(0.4142135624));
    CHECK(similarity_from_distance(2.0) == doctest::Approx(1.0 / 3.0));
    CHECK(similarity_ratio(1.0) == 0.0);
}

TEST_CASE("joint_quorum_probability examples") {
    const auto m = model(10.0, 2.0, 6.0);
    const double h = 10.0 + 2.0 * offset_for(0.8, 6.0);
    const std::vector<double> single{h};
    CHECK(joint_quorum_probability(single, m, BaseProbability::RelativeLikelihood) == doctest::Approx(0.8));
    CHECK(base_probability(h, m, BaseProbability::RelativeLikelihood) == doctest::Approx(0.8));
    CHECK(joint_quorum_probability(single, m) == doctest::Approx(ref::t_pdf(offset_for(0.8, 6.0), 6.0)));

    const std::vector<double> at_mode{10.0, 10.0, 10.0};
    CHECK(joint_quorum_probability(at_mode, m, BaseProbability::RelativeLikelihood) == 1.0);
}

TEST_CASE("property: k=3 joint and conditional probability match the expanded chain") {
    ref::Gen g(17);
    for (int c = 0; c < 500; ++c) {
        const auto m = model(g.uniform(-100, 400), g.uniform(0.5, 30), g.uniform(2, 60));
        std::vector<double> q(3);
        for (double& v : q) v = m.loc + m.scale * g.uniform(-4, 4);
        std::vector<double> asc = q;
        std::sort(asc.begin(), asc.end());
        const auto p = [&](double v) { return ref::t_pdf((v - m.loc) / m.scale, m.dof); };
        const double psi = ref::ratio(ref::similarity(asc, m));
        const double want = ref::joint3(p(asc[0]), p(asc[1]), p(asc[2]), psi);
        CHECK(std::abs(joint_quorum_probability(q, m) - want) <= 1e-12);

        const double x = m.loc + m.scale * g.uniform(-5, 5);
        CHECK(std::abs(conditional_probability(x, q, m) - ref::conditional3(x, q, m)) <= 1e-12);
    }
}

TEST_CASE("conditional_probability special cases") {
    const auto m = model(0.0, 1.0, 8.0);
    const std::vector<double> q{1.5, 1.5, 1.5};
    CHECK(conditional_probability(1.5, q, m) == 1.0);

    // P(q) = 1 collapses the exponent: the result is P(x).
    const std::vector<double> mode{0.0, 0.0, 0.0};
    const double x = 0.7;
    CHECK(conditional_probability(x, mode, m, BaseProbability::RelativeLikelihood) ==
          doctest::Approx(base_probability(x, m, BaseProbability::RelativeLikelihood)).epsilon(1e-14));
}

TEST_CASE("property: similarity bounds, exponent range and permutation invariance") {
    ref::Gen g(23);
    for (int c = 0; c < 300; ++c) {
        const auto m = model(g.uniform(-50, 50), g.uniform(0.1, 10), g.uniform(2, 40));
        std::vector<double> q(static_cast<std::size_t>(g.integer(1, 7)));
        for (double& v : q) v = m.loc + m.scale * g.uniform(-6, 6);
        const double x = m.loc + m.scale * g.uniform(-6, 6);
        const double sim = similarity(embed_and_normalize(x, q, m));
        CHECK(sim > 0.0);
        CHECK(sim <= 1.0);
        const double px = base_probability(x, m);
        const double cp = conditional_probability(x, q, m);
        CHECK(cp >= px * (1.0 - 1e-12));
        CHECK(cp <= 1.0);

        std::vector<double> shuffled = q;
        std::reverse(shuffled.begin(), shuffled.end());
        std::rotate(shuffled.begin(), shuffled.begin() + static_cast<long>(shuffled.size() / 2), shuffled.end());
        CHECK(conditional_probability(x, shuffled, m) == cp);
        CHECK(joint_quorum_probability(shuffled, m) == joint_quorum_probability(q, m));

        const QuorumKernel k(q, m);
        CHECK(ref::close_rel(k.conditional_probability(x), cp, 1e-9));
        CHECK(ref::close_rel(k.quorum_probability(), joint_quorum_probability(q, m), 1e-12));
        const QuorumKernel rk(q, m, BaseProbability::RelativeLikelihood);
        CHECK(ref::close_rel(rk.conditional_probability(x),
                             conditional_probability(x, q, m, BaseProbability::RelativeLikelihood), 1e-9));
    }
}

TEST_CASE("similarity is one only for coincident points") {
    const auto m = model(0.0, 1.0, 5.0);
    const std::vector<double> same{2.0, 2.0};
    CHECK(similarity(embed_and_normalize(same, m)) == 1.0);
    const std::vector<double> diff{2.0, 2.1};
    CHECK(similarity(embed_and_normalize(diff, m)) < 1.0);
}

TEST_CASE("equal P(x): the more similar candidate scores at least as high") {
    ref::Gen g(29);
    for (int c = 0; c < 200; ++c) {
        const auto m = model(0.0, 1.0, g.uniform(3, 30));
        std::vector<double> q(3);
        for (double& v : q) v = g.uniform(-3, 3);
        const double d = g.uniform(0.01, 4);
        const double s1 = ref::similarity({d, q[0], q[1], q[2]}, m);
        const double s2 = ref::similarity({-d, q[0], q[1], q[2]}, m);
        const double c1 = conditional_probability(d, q, m), c2 = conditional_probability(-d, q, m);
        if (s1 > s2) CHECK(c1 >= c2 * (1.0 - 1e-12));
        if (s2 > s1) CHECK(c2 >= c1 * (1.0 - 1e-12));
    }
}

TEST_CASE("chain_probability base cases") {
    CHECK(chain_probability({}, 0.5) == 1.0);
    const std::vector<double> one{0.3};
    CHECK(chain_probability(one, 0.5) == 0.3);
    const std::vector<double> ones{1.0, 1.0, 1.0};
    CHECK(chain_probability(ones, 0.2) == 1.0);
}
