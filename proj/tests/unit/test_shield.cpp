#include <random>

#include "doctest.h"
#include "energyshield/errors.hpp"
#include "energyshield/shield.hpp"

using namespace energyshield;

TEST_SUITE("shield") {
    TEST_CASE("two-sample travel bound") {
        BarrierConfig c;
        VehicleParams p;
        p.v_max = c.v_max = 12.5;
        p.T = 0.02;
        CHECK(compute_rho(c, p).gamma == doctest::Approx(0.5));
    }

    TEST_CASE("eta term by term") {
        BarrierConfig c;
        c.r_bar = 2.0;
        c.sigma = 0.48;
        VehicleParams p;
        p.l_r = 1.5;
        const auto s = compute_rho(c, p);
        // (2*0.48 / (2*0.04^2)) * 12.5 * (1/1.5 + 1/1.5) * 0.04
        CHECK(s.eta == doctest::Approx(200.0).epsilon(1e-12));
        CHECK(s.rho == doctest::Approx(200.5).epsilon(1e-12));
    }

    TEST_CASE("rho shrinks with the period") {
        BarrierConfig c;
        VehicleParams p;
        double last = compute_rho(c, p).rho;
        for (double T : {0.01, 0.001, 1e-4, 1e-6}) {
            p.T = T;
            const double rho = compute_rho(c, p).rho;
            CHECK(rho < last);
            last = rho;
        }
        CHECK(last < 1e-3);
    }

    TEST_CASE("r_bar must exceed the two-sample travel") {
        BarrierConfig c;
        c.r_bar = 0.4;
        VehicleParams p;
        CHECK_THROWS_AS(compute_rho(c, p), ConfigError);
    }

    TEST_CASE("velocity governor") {
        VehicleParams p;
        CHECK(velocity_governor({0.0, 10.0, p.v_max}, 3.0, p) == doctest::Approx(0.0));
        CHECK(velocity_governor({0.0, 10.0, p.v_max / 2}, 0.5, p) == 0.5);
        CHECK(velocity_governor({0.0, 10.0, kVelocityFloor}, -3.0, p) == doctest::Approx(0.0));
        // spreading over more windows only shrinks |a|
        for (double a : {-3.0, -0.4, 0.2, 3.0})
            CHECK(std::abs(velocity_governor(12.0, a, p, 6)) <= std::abs(velocity_governor(12.0, a, p, 1)) + 1e-15);
    }

    TEST_CASE("governed speed stays in range") {
        VehicleParams p;
        std::mt19937_64 rng(17);
        std::uniform_real_distribution<double> a(-6.0, 6.0);
        Pose pose{0.0, 0.0, 0.0, 5.0};
        for (int i = 0; i < 100000; ++i) {
            const double g = velocity_governor({0.0, 10.0, pose.v}, a(rng), p);
            pose = integrate(pose, {g, 0.0}, p, p.T, 1);
            pose.x = pose.y = pose.psi = 0.0;
            REQUIRE(pose.v >= kVelocityFloor - 1e-9);
            REQUIRE(pose.v <= p.v_max + 1e-9);
        }
    }

    TEST_CASE("projection onto safe intervals") {
        const std::vector<BetaInterval> iv{{-0.8, -0.2}, {0.2, 0.8}};
        CHECK(project_beta(0.5, iv) == 0.5);
        CHECK(project_beta(0.1, iv) == 0.2);
        CHECK(project_beta(-0.15, iv) == -0.2);
        CHECK(project_beta(0.9, iv) == 0.8);
        // equidistant endpoints: smaller |beta| wins
        const std::vector<BetaInterval> skew{{-0.75, -0.5}, {0.25, 0.5}};
        CHECK(project_beta(-0.125, skew) == 0.25);
        const std::vector<BetaInterval> skew2{{-0.5, -0.25}, {0.5, 0.75}};
        CHECK(project_beta(0.125, skew2) == -0.25);
        CHECK_THROWS_AS(project_beta(0.0, {}), EmptySafeSet);
    }

    TEST_CASE("shield_kbm is the identity on safe requests and lands on the boundary otherwise") {
        BarrierConfig c;
        VehicleParams p;
        std::mt19937_64 rng(23);
        std::uniform_real_distribution<double> xi(-kPi, kPi), v(1.0, 12.5), b(-1.0, 1.0), gap(1.0, 1.3);
        int corrected = 0;
        for (int i = 0; i < 2000; ++i) {
            const double x = xi(rng);
            const VehicleState s{x, r_min(x, c) * gap(rng), v(rng)};
            const ControlInput req{0.0, b(rng) * p.beta_max()};
            const ControlInput out = shield_kbm(s, req, c, p);
            CHECK(std::abs(out.beta) <= p.beta_max());
            CHECK(zbf_condition(s, out, c, p) >= -1e-6);
            if (zbf_condition(s, req, c, p) >= 0.0) {
                CHECK(out.beta == req.beta);
            } else {
                ++corrected;
                if (std::abs(std::abs(out.beta) - p.beta_max()) > 1e-9)
                    CHECK(std::abs(zbf_condition(s, out, c, p)) <= 1e-6);
            }
        }
        CHECK(corrected > 0);
    }

    TEST_CASE("shield_rho far away equals shield_kbm at the shifted state") {
        BarrierConfig c;
        VehicleParams p;
        const auto sh = compute_rho(c, p);
        const VehicleState s{2.9, 80.0, 11.0};
        const ControlInput req{1.0, 0.3};
        const ControlInput a = shield_rho(s, req, sh);
        const ControlInput b = shield_kbm({s.xi, s.r - sh.rho, s.v}, req, c, p);
        CHECK(a.beta == b.beta);
        CHECK(a.a == b.a);
    }

    TEST_CASE("shield_rho override case") {
        BarrierConfig c;
        VehicleParams p;
        const auto sh = compute_rho(c, p);
        const double bmax = p.beta_max();
        const double r_close = r_min(0.3, c) + 0.5 * sh.rho;
        CHECK(shield_rho({0.3, r_close, 5.0}, {0.0, -0.4}, sh).beta == bmax);
        CHECK(shield_rho({-0.3, r_close, 5.0}, {0.0, 0.4}, sh).beta == -bmax);
        CHECK(shield_rho({0.0, c.r_bar + 0.5 * sh.rho, 5.0}, {0.0, -0.4}, sh).beta == bmax);
        const auto o = shield_rho({0.3, r_close, 5.0}, {0.0, 0.0}, sh, 0);
        CHECK(o.override_sign == 1);
    }

    TEST_CASE("override direction latches near head-on") {
        BarrierConfig c;
        VehicleParams p;
        const auto sh = compute_rho(c, p);
        const double bmax = p.beta_max();
        const double xi = -(kPi - 0.5 * sh.flip_band);
        const VehicleState s{xi, r_min(xi, c) + 0.5 * sh.rho, 10.0};
        CHECK(shield_rho(s, {0.0, 0.0}, sh, 0).input.beta == -bmax);
        CHECK(shield_rho(s, {0.0, 0.0}, sh, 1).input.beta == bmax);
        // outside the band the geometric sign wins
        const VehicleState t{-2.0, r_min(-2.0, c) + 0.5 * sh.rho, 10.0};
        CHECK(shield_rho(t, {0.0, 0.0}, sh, 1).input.beta == -bmax);
    }

    TEST_CASE("closed-loop forward invariance against a single obstacle") {
        BarrierConfig c;
        VehicleParams p;
        const auto sh = compute_rho(c, p);
        std::mt19937_64 rng(29);
        std::uniform_real_distribution<double> ang(-kPi, kPi), dist(8.0, 30.0), speed(2.0, 12.5), b(-1.0, 1.0),
            a(-3.0, 3.0);
        double worst_h = 1.0, worst_r = 1e9;
        for (int ep = 0; ep < 200; ++ep) {
            const double th = ang(rng), d = dist(rng);
            // aim roughly at the obstacle at the origin
            Pose pose{d * std::cos(th), d * std::sin(th), th + kPi + 0.3 * b(rng), speed(rng)};
            Pose prev = pose;
            int latch = 0;
            for (int n = 0; n < 400; ++n) {
                const VehicleState now = relative_state(pose, {0.0, 0.0});
                worst_h = std::min(worst_h, barrier_h(now, c));
                worst_r = std::min(worst_r, now.r);
                const VehicleState before = relative_state(prev, {0.0, 0.0});
                const ControlInput req{a(rng), b(rng) * p.beta_max()};
                const ShieldOutcome o = shield_rho(before, req, sh, latch);
                latch = o.override_sign;
                ControlInput u = o.input;
                u.a = velocity_governor(pose.v, u.a, p, 1);
                prev = pose;
                pose = step(pose, u, p, 10);
            }
        }
        CHECK(worst_h >= 0.0);
        CHECK(worst_r > c.r_bar);
    }
}
