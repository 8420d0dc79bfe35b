#include <algorithm>
#include <random>

#include "doctest.h"
#include "energyshield/metrics.hpp"

using namespace energyshield;

namespace {

EpisodeRecord synthetic(Policy p, int episode, std::vector<std::pair<double, WindowKind>> rows, double energy_tx = 20.0) {
    EpisodeRecord rec;
    rec.policy = p;
    rec.episode = episode;
    rec.controller = "synthetic";
    rec.outcome = Outcome::Completed;
    int n = 0;
    for (auto [r, kind] : rows) {
        StepRow row;
        row.n = n++;
        row.r = r;
        row.h = 0.1;
        row.kind = kind;
        row.delta_max = 2;
        row.pose = {double(n), 0.5, 0.0, 11.0};
        switch (kind) {
            case WindowKind::Local:
            case WindowKind::Expiry: row.energy = 113.5; break;
            case WindowKind::Transmit: row.energy = energy_tx; break;
            default: row.energy = 0.0;
        }
        row.decision = kind == WindowKind::Local ? Decision::Local
                       : kind == WindowKind::Transmit ? Decision::Offload
                                                      : Decision::None;
        rec.rows.push_back(row);
    }
    return rec;
}

}  // namespace

TEST_SUITE("metrics") {
    TEST_CASE("all-local run normalizes to one") {
        std::vector<EpisodeRecord> recs;
        for (int e = 0; e < 3; ++e)
            recs.push_back(synthetic(Policy::LocalOnly, e, {{30, WindowKind::Local}, {5, WindowKind::Local}}));
        const auto s = summarize(recs, 113.5, RewardConstants{});
        CHECK(s.normalized_energy == 1.0);
        CHECK(s.tcr == 100.0);
        CHECK(s.extra_transit_pct == 0.0);
        CHECK(s.mean_cd == doctest::Approx(0.5));
    }

    TEST_CASE("single-window offloads have no extra transit") {
        std::vector<EpisodeRecord> recs{synthetic(Policy::Eager, 0,
                                                  {{30, WindowKind::Transmit},
                                                   {30, WindowKind::Receive},
                                                   {29, WindowKind::Transmit},
                                                   {29, WindowKind::Receive}})};
        const auto s = summarize(recs, 113.5, RewardConstants{});
        CHECK(s.extra_transit_pct == 0.0);
        CHECK(s.offloads == 2);
        CHECK(s.offload_rate == 1.0);
        CHECK(s.normalized_energy == doctest::Approx(40.0 / (4 * 113.5)));
    }

    TEST_CASE("extra transit windows and distance bins") {
        std::vector<EpisodeRecord> recs{synthetic(Policy::Uniform, 0,
                                                  {{25, WindowKind::Transmit},
                                                   {24, WindowKind::Transit},
                                                   {23, WindowKind::Receive},
                                                   {3.5, WindowKind::Local},
                                                   {3.2, WindowKind::Local}})};
        const auto s = summarize(recs, 113.5, RewardConstants{}, 20.0);
        CHECK(s.extra_transit_pct == doctest::Approx(20.0));
        REQUIRE(s.bins.size() == 2);
        CHECK(s.bins[0].lo == 3);
        CHECK(s.bins[0].windows == 2);
        CHECK(s.bins[0].normalized == 1.0);
        CHECK(s.bins[1].far);
        CHECK(s.bins[1].windows == 3);
        CHECK(s.bins[1].normalized == doctest::Approx(20.0 / (3 * 113.5)));
    }

    TEST_CASE("reduction is order independent") {
        std::vector<EpisodeRecord> recs;
        std::mt19937_64 rng(3);
        std::uniform_real_distribution<double> r(2.5, 40.0);
        for (int e = 0; e < 20; ++e) {
            std::vector<std::pair<double, WindowKind>> rows;
            for (int i = 0; i < 50; ++i)
                rows.push_back({r(rng), i % 3 == 0 ? WindowKind::Transmit : i % 3 == 1 ? WindowKind::Transit
                                                                                         : WindowKind::Local});
            recs.push_back(synthetic(e % 2 ? Policy::Eager : Policy::Uniform, e, rows, 1.0 + 0.1 * e));
        }
        const auto a = summarize(recs, 113.5, RewardConstants{});
        std::shuffle(recs.begin(), recs.end(), rng);
        const auto b = summarize(recs, 113.5, RewardConstants{});
        CHECK(a.total_energy == b.total_energy);
        CHECK(a.normalized_energy == b.normalized_energy);
        CHECK(a.mean_reward == b.mean_reward);
        CHECK(a.episode_energy.median == b.episode_energy.median);
        REQUIRE(a.bins.size() == b.bins.size());
        for (std::size_t i = 0; i < a.bins.size(); ++i) CHECK(a.bins[i].energy == b.bins[i].energy);
    }

    TEST_CASE("quantiles") {
        const auto q = quantiles({5.0, 1.0, 3.0, 2.0, 4.0});
        CHECK(q.min == 1.0);
        CHECK(q.q1 == 2.0);
        CHECK(q.median == 3.0);
        CHECK(q.q3 == 4.0);
        CHECK(q.max == 5.0);
        CHECK(q.mean == 3.0);
    }

    TEST_CASE("spearman") {
        const std::vector<double> x{1, 2, 3, 4, 5};
        const std::vector<double> up{2, 4, 6, 8, 100};
        const std::vector<double> down{9, 7, 7, 3, 1};
        CHECK(spearman(x, up) == doctest::Approx(1.0));
        CHECK(spearman(x, down) < -0.9);
        const std::vector<double> flat{1, 1, 1, 1, 1};
        CHECK(spearman(x, flat) == 0.0);
    }
}
