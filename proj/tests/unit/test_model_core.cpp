#include <doctest.h>

#include <cmath>
#include <limits>

#include "proxcon/model_core.hpp"

using namespace proxcon;

namespace {

SystemConfig cfg_of(int f, int n) {
    SystemConfig c;
    c.f = f;
    c.n = n;
    return c;
}

}  // namespace

TEST_CASE("validate_config accepts 4f+1 and the no-fault singleton") {
    CHECK(validate_config(cfg_of(1, 5)).ok());
    CHECK(validate_config(cfg_of(1, 5)).issues.empty());
    const auto single = cfg_of(0, 1);
    CHECK(validate_config(single).ok());
    CHECK(single.quorum_size() == 1);
}

TEST_CASE("validate_config rejects n below 3f+1") {
    const auto r = validate_config(cfg_of(2, 6));
    CHECK_FALSE(r.ok());
    CHECK(r.has(ErrorCode::TooFewReplicas));
    CHECK_THROWS_AS(require_valid(cfg_of(2, 6)), Error);
    try {
        require_valid(cfg_of(2, 6));
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::TooFewReplicas);
    }
}

TEST_CASE("3f+1 <= n < 4f+1 is a warning only") {
    const auto r = validate_config(cfg_of(1, 4));
    CHECK(r.ok());
    CHECK(r.has(ErrorCode::LivenessRisk));
    CHECK_NOTHROW(require_valid(cfg_of(1, 4)));
}

TEST_CASE("fraction and aiw checks") {
    auto c = cfg_of(1, 5);
    c.confidence_level = 1.0;
    CHECK(validate_config(c).has(ErrorCode::BadFraction));
    c.confidence_level = 0.997;
    c.min_confidence = 0.0;
    CHECK(validate_config(c).has(ErrorCode::BadFraction));
    c.min_confidence = 1.0;
    CHECK(validate_config(c).ok());
    c.aiw = -1.0;
    CHECK(validate_config(c).has(ErrorCode::BadConfig));
    c.aiw = 2.0;
    CHECK(validate_config(c).ok());
    c.f = -1;
    CHECK_FALSE(validate_config(c).ok());
}

TEST_CASE("quorum size is 2f+1 and odd") {
    for (int f = 0; f < 20; ++f) {
        const auto c = cfg_of(f, 4 * f + 1);
        CHECK(c.quorum_size() == 2 * f + 1);
        CHECK(c.quorum_size() % 2 == 1);
        CHECK(c.early_accept_count() == 3 * f + 1);
        CHECK(c.max_wait_count() == 3 * f + 1);
    }
}

TEST_CASE("require_finite") {
    const double ok[] = {1.0, -2.0};
    CHECK_NOTHROW(require_finite(ok, "x"));
    const double bad[] = {1.0, std::numeric_limits<double>::quiet_NaN()};
    CHECK_THROWS_AS(require_finite(bad, "x"), Error);
    const double inf[] = {std::numeric_limits<double>::infinity()};
    CHECK_THROWS_AS(require_finite(inf, "x"), Error);
}

TEST_CASE("interval helpers") {
    const Interval i{2.0, 5.0};
    CHECK(i.width() == 3.0);
    CHECK(i.contains(2.0));
    CHECK(i.contains(5.0));
    CHECK_FALSE(i.contains(5.0001));
}

TEST_CASE("error messages carry the code name") {
    const Error e(ErrorCode::DegenerateQuorum, "x");
    CHECK(std::string(e.what()).find("DegenerateQuorum") != std::string::npos);
    CHECK(to_string(ErrorCode::ParseError) == "ParseError");
}
