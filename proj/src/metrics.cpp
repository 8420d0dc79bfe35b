#include "energyshield/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

namespace energyshield {

Quantiles quantiles(std::vector<double> v) {
    Quantiles q;
    if (v.empty()) return q;
    std::sort(v.begin(), v.end());
    auto at = [&](double p) {
        const double pos = p * (v.size() - 1);
        const auto lo = static_cast<std::size_t>(std::floor(pos));
        const auto hi = std::min(lo + 1, v.size() - 1);
        return v[lo] + (pos - lo) * (v[hi] - v[lo]);
    };
    q.min = v.front();
    q.q1 = at(0.25);
    q.median = at(0.5);
    q.q3 = at(0.75);
    q.max = v.back();
    q.mean = std::accumulate(v.begin(), v.end(), 0.0) / v.size();
    return q;
}

Summary summarize(std::span<const EpisodeRecord> records, double e_local, const RewardConstants& k, double far_r,
                  double lane_center) {
    // records may arrive in any order; reduce in (policy, S, N, controller, episode) order
    std::vector<const EpisodeRecord*> order;
    for (const auto& r : records) order.push_back(&r);
    std::sort(order.begin(), order.end(), [](const EpisodeRecord* a, const EpisodeRecord* b) {
        if (a->policy != b->policy) return a->policy < b->policy;
        if (a->shield != b->shield) return a->shield < b->shield;
        if (a->noisy != b->noisy) return a->noisy < b->noisy;
        if (a->controller != b->controller) return a->controller < b->controller;
        return a->episode < b->episode;
    });

    Summary s;
    s.episodes = order.size();
    s.min_h = std::numeric_limits<double>::infinity();
    s.min_r = std::numeric_limits<double>::infinity();
    std::map<int, DistanceBin> bins;
    DistanceBin far;
    far.lo = static_cast<int>(far_r);
    far.far = true;
    double cd_sum = 0.0, reward_sum = 0.0;
    double dm_near = 0.0, dm_far = 0.0;
    std::size_t n_near = 0, n_far = 0;
    std::vector<double> ep_energy, ep_transit;

    for (const EpisodeRecord* rec : order) {
        switch (rec->outcome) {
            case Outcome::Completed: ++s.completed; break;
            case Outcome::Collision: ++s.collisions; break;
            case Outcome::CenterDevianceAbort: ++s.cd_aborts; break;
            case Outcome::Timeout: ++s.timeouts; break;
            case Outcome::InvariantBreach: ++s.breaches; break;
        }
        cd_sum += center_deviance(*rec, lane_center);
        reward_sum += reward(*rec, k);
        double e = 0.0;
        std::size_t transit = 0;
        for (const auto& row : rec->rows) {
            e += row.energy;
            if (row.kind == WindowKind::Transit) ++transit;
            if (row.kind == WindowKind::Transmit) ++s.offloads;
            if (row.kind == WindowKind::Expiry) ++s.expiries;
            if (row.decision != Decision::None) ++s.period_starts;
            s.min_h = std::min(s.min_h, row.h);
            s.min_r = std::min(s.min_r, row.r);
            if (row.delta_max >= 0) {
                if (row.r < 4.0) {
                    dm_near += row.delta_max;
                    ++n_near;
                } else if (row.r > 13.0) {
                    dm_far += row.delta_max;
                    ++n_far;
                }
            }
            DistanceBin* b = &far;
            if (row.r < far_r) {
                const int lo = static_cast<int>(std::floor(row.r));
                b = &bins[lo];
                b->lo = lo;
            }
            ++b->windows;
            b->energy += row.energy;
        }
        s.windows += rec->rows.size();
        s.transit_windows += transit;
        s.total_energy += e;
        if (!rec->rows.empty()) {
            ep_energy.push_back(e / (rec->rows.size() * e_local));
            ep_transit.push_back(100.0 * transit / rec->rows.size());
        }
    }

    if (s.episodes) {
        s.tcr = 100.0 * s.completed / s.episodes;
        s.mean_cd = cd_sum / s.episodes;
        s.mean_reward = reward_sum / s.episodes;
    }
    if (s.windows) {
        s.normalized_energy = s.total_energy / (s.windows * e_local);
        s.energy_per_window = s.total_energy / s.windows;
        s.extra_transit_pct = 100.0 * s.transit_windows / s.windows;
    }
    if (s.period_starts) s.offload_rate = static_cast<double>(s.offloads) / s.period_starts;
    s.mean_delta_max_near = n_near ? dm_near / n_near : 0.0;
    s.mean_delta_max_far = n_far ? dm_far / n_far : 0.0;
    for (auto& [lo, b] : bins) {
        b.normalized = b.windows ? b.energy / (b.windows * e_local) : 0.0;
        s.bins.push_back(b);
    }
    far.normalized = far.windows ? far.energy / (far.windows * e_local) : 0.0;
    if (far.windows) s.bins.push_back(far);
    s.episode_energy = quantiles(ep_energy);
    s.episode_extra_transit = quantiles(ep_transit);
    return s;
}

namespace {

std::vector<double> ranks(std::span<const double> x) {
    std::vector<std::size_t> idx(x.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
    std::vector<double> r(x.size());
    std::size_t i = 0;
    while (i < idx.size()) {
        std::size_t j = i;
        while (j + 1 < idx.size() && x[idx[j + 1]] == x[idx[i]]) ++j;
        const double avg = 0.5 * (i + j) + 1.0;
        for (std::size_t m = i; m <= j; ++m) r[idx[m]] = avg;
        i = j + 1;
    }
    return r;
}

}  // namespace

double spearman(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2) return 0.0;
    const auto rx = ranks(x);
    const auto ry = ranks(y);
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
    const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < rx.size(); ++i) {
        sxy += (rx[i] - mx) * (ry[i] - my);
        sxx += (rx[i] - mx) * (rx[i] - mx);
        syy += (ry[i] - my) * (ry[i] - my);
    }
    return (sxx > 0.0 && syy > 0.0) ? sxy / std::sqrt(sxx * syy) : 0.0;
}

}  // namespace energyshield
