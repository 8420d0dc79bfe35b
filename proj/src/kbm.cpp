#include "energyshield/kbm.hpp"

#include "energyshield/errors.hpp"

namespace energyshield {

double VehicleParams::beta_max() const {
    return std::atan(l_r / (l_f + l_r) * std::tan(delta_f_max));
}

void VehicleParams::validate() const {
    if (!(l_f > 0.0) || !(l_r > 0.0)) throw ConfigError("vehicle: axle distances must be positive");
    if (!(delta_f_max > 0.0) || !(delta_f_max < kPi / 2)) throw ConfigError("vehicle: delta_f_max must lie in (0, pi/2)");
    if (!(v_max > 0.0)) throw ConfigError("vehicle: v_max must be positive");
    if (!(T > 0.0)) throw ConfigError("vehicle: T must be positive");
}

double wrap_angle(double angle) {
    if (angle >= -kPi && angle <= kPi) return angle;
    double w = std::remainder(angle, 2.0 * kPi);
    if (w < -kPi) w += 2.0 * kPi;
    if (w > kPi) w -= 2.0 * kPi;
    return w;
}

double beta_from_steering(double delta_f, const VehicleParams& params) {
    if (std::abs(delta_f) >= kPi / 2) throw DomainError("steering angle must satisfy |delta_f| < pi/2");
    return std::atan(params.l_r / (params.l_f + params.l_r) * std::tan(delta_f));
}

double steering_from_beta(double beta, const VehicleParams& params) {
    if (std::abs(beta) >= kPi / 2) throw DomainError("slip angle must satisfy |beta| < pi/2");
    return std::atan((params.l_f + params.l_r) / params.l_r * std::tan(beta));
}

PolarRates polar_derivative(const VehicleState& s, const ControlInput& u, const VehicleParams& params) {
    const double d = s.xi - u.beta;
    return {s.v * std::cos(d),
            -(s.v / s.r) * std::sin(d) - (s.v / params.l_r) * std::sin(u.beta),
            u.a};
}

PoseRates global_derivative(const Pose& p, const ControlInput& u, const VehicleParams& params) {
    return {p.v * std::cos(p.psi + u.beta),
            p.v * std::sin(p.psi + u.beta),
            (p.v / params.l_r) * std::sin(u.beta),
            u.a};
}

namespace {

Pose offset(const Pose& p, const PoseRates& k, double h) {
    return {p.x + h * k.dx, p.y + h * k.dy, p.psi + h * k.dpsi, p.v + h * k.dv};
}

}  // namespace

Pose integrate(const Pose& pose, const ControlInput& input, const VehicleParams& params, double duration, int substeps) {
    if (substeps < 1) substeps = 1;
    const double h = duration / substeps;
    Pose p = pose;
    for (int i = 0; i < substeps; ++i) {
        const PoseRates k1 = global_derivative(p, input, params);
        const PoseRates k2 = global_derivative(offset(p, k1, h / 2), input, params);
        const PoseRates k3 = global_derivative(offset(p, k2, h / 2), input, params);
        const PoseRates k4 = global_derivative(offset(p, k3, h), input, params);
        p.x += h / 6 * (k1.dx + 2 * k2.dx + 2 * k3.dx + k4.dx);
        p.y += h / 6 * (k1.dy + 2 * k2.dy + 2 * k3.dy + k4.dy);
        p.psi += h / 6 * (k1.dpsi + 2 * k2.dpsi + 2 * k3.dpsi + k4.dpsi);
        p.v += h / 6 * (k1.dv + 2 * k2.dv + 2 * k3.dv + k4.dv);
    }
    p.psi = wrap_angle(p.psi);
    return p;
}

Pose step(const Pose& pose, const ControlInput& input, const VehicleParams& params, int substeps) {
    return integrate(pose, input, params, params.T, substeps);
}

VehicleState relative_state(const Pose& pose, const Point2& obstacle) {
    const double dx = pose.x - obstacle.x;
    const double dy = pose.y - obstacle.y;
    return {wrap_angle(std::atan2(dy, dx) - pose.psi), std::hypot(dx, dy), pose.v};
}

Pose pose_from_state(const VehicleState& s) {
    return {s.r, 0.0, wrap_angle(-s.xi), s.v};
}

}  // namespace energyshield
