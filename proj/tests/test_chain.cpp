#include <cmath>
#include <cstring>
#include <vector>

#include "doctest.h"

#include "chainsim/chain.hpp"
#include "chainsim/errors.hpp"

using namespace chainsim;

namespace {

StepInput inputs(const std::vector<double>& u1, const std::vector<double>& u2,
                 const std::vector<double>& d1, const std::vector<double>& d2) {
    return {u1, u2, d1, d2};
}

}  // namespace

TEST_CASE("init_zero produces an all-zero chain") {
    ChainState s = init_zero({2, 0.1, 10});
    CHECK(s.vehicle_count() == 3);
    CHECK(s.chain_n() == 2);
    CHECK(s.step == 0);
    for (double v : s.x) CHECK(v == 0.0);
    for (double v : s.v) CHECK(v == 0.0);

    ChainState two = init_zero({1, 0.1, 1}, 2, 3);
    CHECK(two.vehicle_count() == 2);
    CHECK(two.xi.size() == 4);
    CHECK(two.c_plus.size() == 6);
    for (double v : two.xi) CHECK(v == 0.0);
}

TEST_CASE("init_zero rejects invalid configurations") {
    CHECK_THROWS_AS(init_zero({0, 0.1, 1}), ConfigError);
    CHECK_THROWS_AS(init_zero({5, 0.0, 1}), ConfigError);
    CHECK_THROWS_AS(init_zero({5, -0.1, 1}), ConfigError);
    CHECK_THROWS_AS(init_zero({5, 0.1, 0}), ConfigError);
    CHECK_THROWS_AS(init_zero({5, 0.1, 1}, -1, 0), ConfigError);
}

TEST_CASE("step: free motion uses the pre-step velocity") {
    ChainState s = init_zero({2, 0.1, 1});
    s.v = {1.0, 0.0, 0.0};
    std::vector<double> zero(3, 0.0);
    ChainState next = step(s, inputs(zero, zero, zero, zero), 0.1);
    CHECK(next.v[0] == 1.0);
    CHECK(next.x[0] == 0.1);
    CHECK(next.x[1] == 0.0);
    CHECK(next.step == 1);
    // the input snapshot is untouched
    CHECK(s.x[0] == 0.0);
    CHECK(s.step == 0);
}

TEST_CASE("step: constant actuation integrated once and twice") {
    // constant u = 2 over one step of dt = 0.1: u1 = 0.2, u2 = 0.01
    ChainState s = init_zero({2, 0.1, 1});
    std::vector<double> u1(3, 0.2), u2(3, 0.01), zero(3, 0.0);
    ChainState next = step(s, inputs(u1, u2, zero, zero), 0.1);
    for (int k = 0; k <= 2; ++k) {
        CHECK(next.v[k] == 0.2);
        CHECK(next.x[k] == 0.01);
    }
}

TEST_CASE("step: velocity input does not leak into the same-step position") {
    ChainState s = init_zero({1, 0.1, 1});
    std::vector<double> u1(2, 1.0), zero(2, 0.0);
    ChainState next = step(s, inputs(u1, zero, zero, zero), 0.1);
    CHECK(next.v[0] == 1.0);
    CHECK(next.x[0] == 0.0);
}

TEST_CASE("step: pure disturbance") {
    ChainState s = init_zero({2, 0.1, 1});
    std::vector<double> d1(3, 0.05), d2(3, 0.005), zero(3, 0.0);
    ChainState next = step(s, inputs(zero, zero, d1, d2), 0.1);
    for (int k = 0; k <= 2; ++k) {
        CHECK(next.v[k] == 0.05);
        CHECK(next.x[k] == 0.005);
    }
}

TEST_CASE("step rejects mismatched input lengths") {
    ChainState s = init_zero({2, 0.1, 1});
    std::vector<double> bad(2, 0.0), good(3, 0.0);
    CHECK_THROWS_AS(step(s, inputs(bad, good, good, good), 0.1), DimensionError);
    CHECK_THROWS_AS(step(s, inputs(good, good, good, bad), 0.1), DimensionError);
}

TEST_CASE("spacing errors") {
    ChainState s = init_zero({2, 0.1, 1});
    s.x = {0.0, -1.0, -2.0};
    auto [e1, ed1] = spacing_errors(s);
    CHECK(e1 == std::vector<double>{1.0, 1.0});
    CHECK(ed1 == std::vector<double>{0.0, 0.0});

    s.x = {0.0, 0.0, 0.0};
    s.v = {1.0, 0.5, 0.0};
    auto [e2, ed2] = spacing_errors(s);
    CHECK(e2 == std::vector<double>{0.0, 0.0});
    CHECK(ed2 == std::vector<double>{0.5, 0.5});

    s.x = {2.0, 1.0, -0.5};
    auto [e3, ed3] = spacing_errors(s);
    CHECK(e3 == std::vector<double>{1.0, 1.5});
}

TEST_CASE("exactness: sample-and-hold reproduces the analytic double integrator") {
    // n steps of constant continuous input u: v = u*t, x = u*t^2/2
    const double dt = 0.1;
    const double u = 0.73;
    const long n = 200;
    ChainState s = init_zero({1, dt, n});
    std::vector<double> u1(2, u * dt), u2(2, u * dt * dt / 2.0), zero(2, 0.0);
    for (long i = 0; i < n; ++i) s = step(s, inputs(u1, u2, zero, zero), dt);
    const double t = n * dt;
    CHECK(s.v[0] == doctest::Approx(u * t).epsilon(1e-13));
    CHECK(s.x[0] == doctest::Approx(u * t * t / 2.0).epsilon(1e-13));
}

TEST_CASE("composition: zero-input steps accumulate pure drift") {
    const double dt = 0.1;
    ChainState s = init_zero({2, dt, 1});
    s.x = {1.0, 0.5, -0.25};
    s.v = {0.25, -0.5, 1.0};
    const std::vector<double> x0 = s.x, v0 = s.v;
    std::vector<double> zero(3, 0.0);
    const long n = 1000;
    for (long i = 0; i < n; ++i) s = step(s, inputs(zero, zero, zero, zero), dt);
    for (int k = 0; k <= 2; ++k) {
        CHECK(s.v[k] == v0[k]);
        CHECK(s.x[k] == doctest::Approx(x0[k] + v0[k] * n * dt).epsilon(1e-12));
    }
}

TEST_CASE("step: serial and parallel execution are bit-identical") {
    const double dt = 0.1;
    ChainState s = init_zero({63, dt, 1});
    std::vector<double> u1(64), u2(64), d1(64), d2(64);
    for (int k = 0; k < 64; ++k) {
        s.x[k] = std::sin(0.1 * k);
        s.v[k] = std::cos(0.2 * k);
        u1[k] = 0.01 * k;
        u2[k] = 0.001 * k;
        d1[k] = -0.02 * k;
        d2[k] = 0.003 * k;
    }
    ChainState a = step(s, inputs(u1, u2, d1, d2), dt, Exec::Serial);
    ChainState b = step(s, inputs(u1, u2, d1, d2), dt, Exec::Parallel);
    CHECK(std::memcmp(a.x.data(), b.x.data(), a.x.size() * sizeof(double)) == 0);
    CHECK(std::memcmp(a.v.data(), b.v.data(), a.v.size() * sizeof(double)) == 0);
}
