#include <numbers>
#include <random>

#include "doctest.h"
#include "energyshield/edge.hpp"
#include "energyshield/errors.hpp"

using namespace energyshield;

TEST_SUITE("edge") {
    TEST_CASE("rayleigh inverse cdf at the scale point") {
        CHECK(rayleigh_from_uniform(1.0 - std::exp(-0.5), 20.0) == doctest::Approx(20.0).epsilon(1e-12));
        CHECK(rayleigh_from_uniform(0.0, 20.0) == 0.0);
    }

    TEST_CASE("rayleigh empirical mean") {
        ChannelConfig ch;
        Rng rng(101);
        double sum = 0.0;
        const int n = 1000000;
        for (int i = 0; i < n; ++i) sum += sample_throughput(rng, ch);
        const double expect = 20.0 * std::sqrt(std::numbers::pi / 2.0);
        CHECK(expect == doctest::Approx(25.0663).epsilon(1e-4));
        CHECK(std::abs(sum / n - expect) / expect < 0.02);
    }

    TEST_CASE("throughput floor") {
        ChannelConfig ch;
        ch.sigma_phi = 1e-6;
        Rng rng(3);
        for (int i = 0; i < 1000; ++i) CHECK(sample_throughput(rng, ch) >= ch.phi_min);
    }

    TEST_CASE("identical seeds reproduce identical streams") {
        ChannelConfig ch;
        QueueConfig q;
        const QueueSampler qs(q);
        Rng a(77), b(77);
        for (int i = 0; i < 1000; ++i) {
            const Response x = realize_response_time(a, ch, qs);
            const Response y = realize_response_time(b, ch, qs);
            REQUIRE(x.latency == y.latency);
            REQUIRE(x.sample.throughput == y.sample.throughput);
        }
    }

    TEST_CASE("queue pmf normalization and first term") {
        QueueConfig q;
        const auto pmf = queue_pmf(q);
        REQUIRE(pmf.size() == static_cast<std::size_t>(q.C + 1));
        long double s = 0.0L;
        for (double v : pmf) {
            CHECK(v >= 0.0);
            s += v;
        }
        CHECK(std::abs(static_cast<double>(s) - 1.0) < 1e-12);
        CHECK(pmf[0] == doctest::Approx(0.03).epsilon(1e-12));
    }

    TEST_CASE("light load means no queueing") {
        QueueConfig q;
        q.rho_load = 1e-12;
        CHECK(expected_queue_delay(q) < 1e-12);
        Rng rng(5);
        for (int i = 0; i < 100; ++i) CHECK(sample_queue_delay(rng, q) == 0.0);
    }

    TEST_CASE("queue histogram matches pmf") {
        QueueConfig q;
        const QueueSampler qs(q);
        const auto pmf = queue_pmf(q);
        std::vector<long> hist(pmf.size(), 0);
        Rng rng(9);
        const int n = 1000000;
        for (int i = 0; i < n; ++i) ++hist[static_cast<std::size_t>(qs.sample_position(rng))];
        double worst = 0.0;
        for (std::size_t c = 0; c < pmf.size(); ++c) worst = std::max(worst, std::abs(hist[c] / double(n) - pmf[c]));
        CHECK(worst < 5e-3);
    }

    TEST_CASE("response time arithmetic") {
        ChannelConfig ch;
        CHECK(transmit_time(20.0, ch) == doctest::Approx(0.01536).epsilon(1e-12));
        ch.data_size = 1e6;
        CHECK(transmit_time(20.0, ch) == doctest::Approx(0.05).epsilon(1e-12));
        ch = {};
        QueueConfig q;
        q.rho_load = 1e-12;
        Rng rng(13);
        for (int i = 0; i < 100; ++i) {
            const Response r = realize_response_time(rng, ch, q);
            CHECK(r.latency > 0.0);
            CHECK(r.latency == doctest::Approx(r.tx_time + r.sample.queue_delay));
            CHECK(r.tx_time == doctest::Approx(transmit_time(r.sample.throughput, ch)));
        }
    }

    TEST_CASE("latency to samples") {
        CHECK(latency_to_samples(0.0, 0.02) == 1);
        CHECK(latency_to_samples(0.02, 0.02) == 1);
        CHECK(latency_to_samples(0.021, 0.02) == 2);
        CHECK(latency_to_samples(0.06, 0.02) == 3);
    }

    TEST_CASE("history ring") {
        ResponseHistory h(5);
        for (int i = 1; i <= 5; ++i) h.push({double(i), 0.0});
        CHECK(h.size() == 5);
        CHECK(h.mean_throughput() == doctest::Approx(3.0));
        h.push({6.0, 0.0});
        CHECK(h.size() == 5);
        CHECK(h.items().front().throughput == 2.0);
        CHECK(h.mean_throughput() == doctest::Approx(4.0));
    }

    TEST_CASE("estimator of a constant history equals the realized count") {
        ChannelConfig ch;
        QueueConfig q;
        const double T = 0.02;
        ResponseHistory h(5);
        const ChannelSample s{13.0, 0.031};
        for (int i = 0; i < 5; ++i) h.push(s);
        const double latency = transmit_time(s.throughput, ch) + s.queue_delay;
        CHECK(estimate_delta_hat(h, ch, q, T) == latency_to_samples(latency, T));
    }

    TEST_CASE("estimator prior on empty history") {
        ChannelConfig ch;
        QueueConfig q;
        ResponseHistory h(5);
        const double prior = ch.data_size / (ch.sigma_phi * std::sqrt(std::numbers::pi / 2.0) * 1e6) + expected_queue_delay(q);
        CHECK(estimate_latency(h, ch, q) == doctest::Approx(prior));
        CHECK(estimate_delta_hat(h, ch, q, 0.02) >= 1);
    }

    TEST_CASE("throughput collapse shows up only as the window refills") {
        ChannelConfig ch;
        QueueConfig q;
        ResponseHistory h(5);
        for (int i = 0; i < 5; ++i) h.push({20.0, 0.0});
        std::vector<int> trace;
        for (int i = 0; i < 5; ++i) {
            h.push({2.0, 0.0});
            trace.push_back(estimate_delta_hat(h, ch, q, 0.02));
        }
        for (std::size_t i = 1; i < trace.size(); ++i) CHECK(trace[i] >= trace[i - 1]);
        CHECK(trace.back() == latency_to_samples(transmit_time(2.0, ch), 0.02));
        CHECK(trace.front() < trace.back());
    }

    TEST_CASE("window energy") {
        EnergyConfig e;
        CHECK(window_energy(EnergyMode::LocalInference, e, 0.02) == 113.5);
        CHECK(window_energy(EnergyMode::Idle, e, 0.02) == 0.0);
        e.P_idle = 0.5;
        CHECK(window_energy(EnergyMode::Idle, e, 0.02) == doctest::Approx(10.0));
        e.P_tx = 2.0;
        CHECK(window_energy(EnergyMode::Transmit, e, 0.02, 0.01536) == doctest::Approx(30.72));
    }

    TEST_CASE("config validation") {
        QueueConfig q;
        q.rho_load = 1.0;
        CHECK_THROWS_AS(q.validate(), ConfigError);
        ChannelConfig ch;
        ch.sigma_phi = 0.0;
        CHECK_THROWS_AS(ch.validate(), ConfigError);
    }
}
