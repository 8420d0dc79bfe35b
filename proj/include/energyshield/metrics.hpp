#pragma once

#include <span>
#include <string>
#include <vector>

#include "energyshield/orchestrator.hpp"

namespace energyshield {

struct DistanceBin {
    int lo = 0;   // meters; far bin covers [far_r, inf)
    bool far = false;
    std::size_t windows = 0;
    double energy = 0.0;
    double normalized = 0.0;
};

struct Quantiles {
    double min = 0.0, q1 = 0.0, median = 0.0, q3 = 0.0, max = 0.0, mean = 0.0;
};

struct Summary {
    std::size_t episodes = 0;
    std::size_t completed = 0;
    std::size_t collisions = 0;
    std::size_t cd_aborts = 0;
    std::size_t timeouts = 0;
    std::size_t breaches = 0;
    std::size_t windows = 0;
    std::size_t period_starts = 0;
    std::size_t offloads = 0;
    std::size_t transit_windows = 0;
    std::size_t expiries = 0;
    double tcr = 0.0;                 // percent
    double mean_cd = 0.0;
    double total_energy = 0.0;        // mJ
    double normalized_energy = 0.0;
    double energy_per_window = 0.0;   // mJ per inference window
    double extra_transit_pct = 0.0;
    double offload_rate = 0.0;        // offloads per period start
    double mean_reward = 0.0;
    double min_h = 0.0;
    double min_r = 0.0;
    double mean_delta_max_near = 0.0;  // r < 4
    double mean_delta_max_far = 0.0;   // r > 13
    std::vector<DistanceBin> bins;
    Quantiles episode_energy{};        // per-episode normalized energy
    Quantiles episode_extra_transit{}; // per-episode percent
};

Quantiles quantiles(std::vector<double> values);

Summary summarize(std::span<const EpisodeRecord> records, double e_local, const RewardConstants& k,
                  double far_r = 20.0, double lane_center = 0.0);

double spearman(std::span<const double> x, std::span<const double> y);

}  // namespace energyshield
