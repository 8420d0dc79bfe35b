#pragma once

#include <cmath>
#include <numbers>

namespace energyshield {

constexpr double kPi = std::numbers::pi;

// obstacle-relative polar state
struct VehicleState {
    double xi = 0.0;  // heading relative to the obstacle ray, [-pi, pi]
    double r = 1.0;   // distance to obstacle
    double v = 0.0;
};

struct ControlInput {
    double a = 0.0;     // longitudinal acceleration
    double beta = 0.0;  // slip angle
};

struct VehicleParams {
    double l_f = 1.5;
    double l_r = 1.5;
    double delta_f_max = 1.2;
    double v_max = 12.5;
    double T = 0.02;

    double beta_max() const;
    void validate() const;
};

struct Pose {
    double x = 0.0;
    double y = 0.0;
    double psi = 0.0;
    double v = 0.0;
};

struct Point2 {
    double x = 0.0;
    double y = 0.0;
};

struct PolarRates {
    double dr = 0.0;
    double dxi = 0.0;
    double dv = 0.0;
};

struct PoseRates {
    double dx = 0.0;
    double dy = 0.0;
    double dpsi = 0.0;
    double dv = 0.0;
};

double wrap_angle(double angle);

double beta_from_steering(double delta_f, const VehicleParams& params);
double steering_from_beta(double beta, const VehicleParams& params);

PolarRates polar_derivative(const VehicleState& state, const ControlInput& input, const VehicleParams& params);
PoseRates global_derivative(const Pose& pose, const ControlInput& input, const VehicleParams& params);

// RK4 over duration with constant input
Pose integrate(const Pose& pose, const ControlInput& input, const VehicleParams& params, double duration, int substeps);
// one zero-order-hold period T
Pose step(const Pose& pose, const ControlInput& input, const VehicleParams& params, int substeps = 10);

VehicleState relative_state(const Pose& pose, const Point2& obstacle);
// inverse of relative_state for an obstacle at the origin, vehicle placed on the +x axis
Pose pose_from_state(const VehicleState& state);

}  // namespace energyshield
