#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "energyshield/config.hpp"
#include "energyshield/metrics.hpp"
#include "energyshield/monitor.hpp"

namespace energyshield {

struct Cell {
    Policy policy = Policy::LocalOnly;
    bool shield = true;
    bool noisy = false;
    std::size_t controller = 0;  // index into ExperimentConfig::controllers
};

std::string cell_label(const Cell& c, const ExperimentConfig& cfg);
std::vector<Cell> make_cells(const ExperimentConfig& cfg);

// all cells share the per-episode seeds derived from seed_base
std::vector<EpisodeRecord> run_cells(const SimContext& ctx, const ExperimentConfig& cfg, const std::vector<Cell>& cells,
                                     int workers);

// runs fn(i) for i in [0, n) on a bounded pool; 0 workers means hardware concurrency
void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn);

struct CellSummary {
    Cell cell{};
    std::string label;
    std::string controller;
    Summary summary{};
};

struct RunReport {
    std::uint64_t config_hash = 0;
    std::uint64_t seed_base = 0;
    std::vector<CellSummary> cells;
    std::vector<EpisodeRecord> records;  // same order as cells x episodes
    bool safety_breach = false;          // any S=1 episode with a collision or h < 0
};

RunReport run_experiment(const SimContext& ctx, const ExperimentConfig& cfg);

struct SweepCell {
    std::string axis;  // "sigma_phi" or "queue_delay"
    double value = 0.0;
    std::string label;
    ExperimentConfig config{};
};

std::vector<SweepCell> make_sweep(const ExperimentConfig& cfg);

struct CalibrationResult {
    bool converged = false;
    double p_tx = 0.0;
    double far_energy = 0.0;  // far-bin uniform normalized energy at p_tx
    double floor = 0.0;       // at p_tx_lo
    double ceiling = 0.0;     // at p_tx_hi
    std::size_t far_windows = 0;
    std::size_t far_offload_windows = 0;
    int iterations = 0;
    std::string message;
};

// far-bin normalized energy of uniform-policy, shielded episodes at the given P_tx
double far_bin_energy(const SimContext& ctx, const ExperimentConfig& cfg, double p_tx, std::size_t* windows = nullptr,
                      std::size_t* offload_windows = nullptr);
CalibrationResult calibrate(const ExperimentConfig& cfg);

struct MonitorValidation {
    LipschitzBounds bounds{};
    SoundnessReport report{};
};

MonitorValidation run_validate_monitor(const ExperimentConfig& cfg, std::size_t trials);

// file emission; the caller owns the only writer
void write_run_outputs(const RunReport& report, const ExperimentConfig& cfg, const SimContext& ctx,
                       const std::string& dir);
std::string summary_json(const RunReport& report, const ExperimentConfig& cfg, const SimContext& ctx);
std::string energy_distance_csv(const RunReport& report);
std::string quantiles_csv(const RunReport& report);
std::string calibration_yaml(const CalibrationResult& res, const ExperimentConfig& cfg);
std::string validation_json(const MonitorValidation& v, const ExperimentConfig& cfg, std::size_t trials);

}  // namespace energyshield
