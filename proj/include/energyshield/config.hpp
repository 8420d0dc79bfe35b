#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "energyshield/orchestrator.hpp"

namespace energyshield {

struct SweepConfig {
    std::vector<double> sigma_phi{20.0, 10.0, 5.0};        // Mbps, at the configured queue
    std::vector<double> queue_delay{0.010, 0.020, 0.050};  // seconds, mean queue delay per cell
    double queue_sigma_phi = 10.0;                         // channel used for the queue cells
};

struct CalibrateConfig {
    double target = 0.33;     // far-bin uniform normalized energy
    double tolerance = 0.02;
    double p_tx_lo = 0.0;     // W
    double p_tx_hi = 20.0;    // W
    int iterations = 30;
    double far_r = 20.0;
};

struct ValidateConfig {
    std::size_t trials = 10000;
    int substeps = 100;
    double lipschitz_scale = 1.0;  // < 1 deliberately weakens L_h for negative controls
};

struct ExperimentConfig {
    SimConfig sim{};
    std::vector<Policy> policies{Policy::LocalOnly, Policy::Eager, Policy::Uniform};
    std::vector<Controller> controllers{AvoidingFollower{}};
    std::vector<bool> shield_grid{false, true};
    std::vector<bool> noise_grid{false, true};
    int episodes = 35;
    std::uint64_t seed_base = 1;
    std::string out_dir = "out";
    int workers = 0;  // 0: hardware concurrency
    bool write_episodes = true;
    double far_r = 20.0;
    SweepConfig sweep{};
    CalibrateConfig calibrate{};
    ValidateConfig validate{};
};

// throws ConfigError carrying "<source>:<line>:<column>: message"
ExperimentConfig parse_config(const std::string& text, const std::string& source = "<string>");
ExperimentConfig load_config(const std::string& path);

// canonical serialization; parse_config(dump_config(c)) reproduces c
std::string dump_config(const ExperimentConfig& cfg);
std::uint64_t config_hash(const ExperimentConfig& cfg);
std::string hash_hex(std::uint64_t h);

// full validation of everything a run depends on; throws ConfigError
SimContext validate_config(const ExperimentConfig& cfg);

Controller parse_controller(const std::string& spec);

}  // namespace energyshield
