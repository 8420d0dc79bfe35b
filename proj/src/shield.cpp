#include "energyshield/shield.hpp"

#include <algorithm>
#include <cmath>

#include "energyshield/errors.hpp"

namespace energyshield {

ShieldConfig compute_rho(const BarrierConfig& cfg, const VehicleParams& params) {
    cfg.validate();
    params.validate();
    ShieldConfig s;
    s.barrier = cfg;
    s.vehicle = params;
    s.gamma = 2.0 * params.v_max * params.T;
    if (cfg.r_bar <= s.gamma) throw ConfigError("barrier: r_bar must exceed the two-sample travel 2*v_max*T");
    const double lip = cfg.r_bar * cfg.sigma / (2.0 * (1.0 - 2.0 * cfg.sigma) * (1.0 - 2.0 * cfg.sigma));
    s.eta = lip * params.v_max * (1.0 / (cfg.r_bar - s.gamma) + 1.0 / params.l_r) * 2.0 * params.T;
    s.rho = s.eta + s.gamma;
    const double xi_rate = params.v_max / cfg.r_bar + params.v_max * std::sin(params.beta_max()) / params.l_r;
    s.flip_band = 2.0 * params.T * xi_rate;
    return s;
}

double velocity_governor(const VehicleState& state, double a, const VehicleParams& params) {
    return velocity_governor(state.v, a, params, 1);
}

double velocity_governor(double v, double a, const VehicleParams& params, int windows) {
    const double span = params.T * std::max(windows, 1);
    const double lo = (kVelocityFloor - v) / span;
    const double hi = (params.v_max - v) / span;
    return std::clamp(a, std::min(lo, hi), hi);
}

double project_beta(double want, const std::vector<BetaInterval>& intervals) {
    if (intervals.empty()) throw EmptySafeSet("no safe slip angle to project onto");
    double best = intervals.front().lo;
    double best_dist = std::abs(best - want);
    auto consider = [&](double b) {
        const double d = std::abs(b - want);
        if (d < best_dist || (d == best_dist && std::abs(b) < std::abs(best))) {
            best = b;
            best_dist = d;
        }
    };
    for (const auto& iv : intervals) {
        if (want >= iv.lo && want <= iv.hi) return want;
        consider(iv.lo);
        consider(iv.hi);
    }
    return best;
}

ControlInput shield_kbm(const VehicleState& state, const ControlInput& requested, const BarrierConfig& cfg,
                        const VehicleParams& params) {
    const double bmax = params.beta_max();
    const double a = velocity_governor(state, requested.a, params);
    const double want = std::clamp(requested.beta, -bmax, bmax);
    if (zbf_condition(state, {a, want}, cfg, params) >= 0.0) return {a, want};
    return {a, project_beta(want, safe_beta_interval(state, a, cfg, params))};
}

ShieldOutcome shield_rho(const VehicleState& prev, const ControlInput& requested, const ShieldConfig& sh,
                         int latched_sign) {
    const double bmax = sh.vehicle.beta_max();
    const double a = velocity_governor(prev, requested.a, sh.vehicle);
    const double shrunk = prev.r - sh.rho;
    if (shrunk >= r_min(prev.xi, sh.barrier)) {
        const ControlInput out = shield_kbm({prev.xi, shrunk, prev.v}, requested, sh.barrier, sh.vehicle);
        return {{a, out.beta}, 0};
    }
    int sign = prev.xi >= 0.0 ? 1 : -1;
    // head-on, the delayed xi can flip across +-pi every sample; hold the turn already started
    if (latched_sign != 0 && std::abs(prev.xi) > kPi - sh.flip_band) sign = latched_sign > 0 ? 1 : -1;
    return {{a, sign * bmax}, sign};
}

ControlInput shield_rho(const VehicleState& prev, const ControlInput& requested, const ShieldConfig& sh) {
    return shield_rho(prev, requested, sh, 0).input;
}

}  // namespace energyshield
