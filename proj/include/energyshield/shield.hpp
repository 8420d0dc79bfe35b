#pragma once

#include <vector>

#include "energyshield/barrier.hpp"
#include "energyshield/kbm.hpp"

namespace energyshield {

constexpr double kVelocityFloor = 0.1;

struct ShieldConfig {
    BarrierConfig barrier{};
    VehicleParams vehicle{};
    double gamma = 0.0;  // two-sample travel bound
    double eta = 0.0;    // r_min Lipschitz term
    double rho = 0.0;    // state-delay margin, eta + gamma
    double flip_band = 0.0;  // max change of xi over two samples
};

struct ShieldOutcome {
    ControlInput input{};
    int override_sign = 0;  // +1 / -1 when the full-lock branch fired, else 0
};

ShieldConfig compute_rho(const BarrierConfig& cfg, const VehicleParams& params);

// clamp so that one zero-order-hold step keeps v in [v_floor, v_max]
double velocity_governor(const VehicleState& state, double a, const VehicleParams& params);
// same clamp, spread over a hold of `windows` periods
double velocity_governor(double v, double a, const VehicleParams& params, int windows);

// nearest point of the union to want; ties go to the smaller |beta|
double project_beta(double want, const std::vector<BetaInterval>& intervals);

ControlInput shield_kbm(const VehicleState& state, const ControlInput& requested, const BarrierConfig& cfg,
                        const VehicleParams& params);

ControlInput shield_rho(const VehicleState& state_prev, const ControlInput& requested, const ShieldConfig& shield);
// latched_sign keeps the previous full-lock direction while xi sits within flip_band of +-pi
ShieldOutcome shield_rho(const VehicleState& state_prev, const ControlInput& requested, const ShieldConfig& shield,
                         int latched_sign);

}  // namespace energyshield
