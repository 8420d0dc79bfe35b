#pragma once

#include <cstddef>
#include <vector>

#include "energyshield/kbm.hpp"

namespace energyshield {

struct BarrierConfig {
    double r_bar = 2.0;
    double sigma = 0.37;
    double K = 1.0;
    double v_max = 12.5;

    void validate() const;
};

struct BarrierGradient {
    double d_xi = 0.0;
    double d_r = 0.0;
    double d_v = 0.0;
};

struct BetaInterval {
    double lo = 0.0;
    double hi = 0.0;
};

struct FeasibilityReport {
    bool feasible = true;
    std::size_t points_checked = 0;
    std::size_t failure_count = 0;
    double worst_margin = 0.0;  // min over states of max over beta of the condition
    VehicleState worst_state{};
    std::vector<VehicleState> failures;  // first few failing points
};

double barrier_h(const VehicleState& state, const BarrierConfig& cfg);
double r_min(double xi, const BarrierConfig& cfg);
double alpha(double x, const BarrierConfig& cfg);
BarrierGradient barrier_gradient(const VehicleState& state, const BarrierConfig& cfg);

double zbf_condition(const VehicleState& state, const ControlInput& input, const BarrierConfig& cfg,
                     const VehicleParams& params);

// union of closed beta intervals where the condition holds; throws EmptySafeSet
std::vector<BetaInterval> safe_beta_interval(const VehicleState& state, double a, const BarrierConfig& cfg,
                                             const VehicleParams& params, int grid = 257, double tol = 1e-9);

FeasibilityReport sigma_feasibility_check(const BarrierConfig& cfg, const VehicleParams& params, int grid_density,
                                          double r_domain_max = 100.0);

}  // namespace energyshield
