#include "energyshield/monitor.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "energyshield/errors.hpp"

namespace energyshield {

namespace {
constexpr double kSafetyFactor = 1.05;
}

LipschitzDomain default_domain(const BarrierConfig& cfg, const VehicleParams& params, double a_max) {
    LipschitzDomain d;
    d.r_lo = cfg.r_bar;  // h > 0 during the hold implies r > r_min >= r_bar
    d.r_hi = 100.0;
    d.v_lo = 0.1;
    d.v_hi = params.v_max;
    d.beta_max = params.beta_max();
    d.a_max = a_max;
    return d;
}

LipschitzBounds lipschitz_bounds(const BarrierConfig& cfg, const VehicleParams& params, const LipschitzDomain& d) {
    LipschitzBounds b;
    b.domain = d;
    // |dh/dr| = 1/r^2 <= 1/r_lo^2, |dh/dxi| <= sigma/(2 r_bar), dh/dv = 0
    const double hr = 1.0 / (d.r_lo * d.r_lo);
    const double hxi = cfg.sigma / (2.0 * cfg.r_bar);
    b.L_h = kSafetyFactor * std::sqrt(hr * hr + hxi * hxi);

    // entrywise sups of the Jacobian of (dr, dxi, dv) wrt (xi, r, v); Frobenius bounds the induced 2-norm
    const double j_r_xi = d.v_hi;
    const double j_r_v = 1.0;
    const double j_xi_xi = d.v_hi / d.r_lo;
    const double j_xi_r = d.v_hi / (d.r_lo * d.r_lo);
    const double j_xi_v = 1.0 / d.r_lo + std::sin(std::min(d.beta_max, kPi / 2)) / params.l_r;
    b.L_f = kSafetyFactor * std::sqrt(j_r_xi * j_r_xi + j_r_v * j_r_v + j_xi_xi * j_xi_xi + j_xi_r * j_xi_r +
                                      j_xi_v * j_xi_v);
    return b;
}

double flow_norm(const VehicleState& s, const ControlInput& u, const VehicleParams& params) {
    const PolarRates f = polar_derivative(s, u, params);
    return std::sqrt(f.dr * f.dr + f.dxi * f.dxi + f.dv * f.dv);
}

double solve_nu(double h_val, double f_norm, const LipschitzBounds& b, int* iterations) {
    if (!(h_val > 0.0)) throw DomainError("solve_nu requires h > 0");
    if (iterations) *iterations = 0;
    if (f_norm <= 0.0) return std::numeric_limits<double>::infinity();
    const double c = std::sqrt(2.0) * b.L_h * f_norm;
    auto lhs = [&](double nu) { return c * nu * std::exp(b.L_f * nu); };

    double lo = 0.0;
    double hi = 1e-3;
    int it = 0;
    while (lhs(hi) <= h_val && it < 200) {
        lo = hi;
        hi *= 2.0;
        ++it;
    }
    double mid = hi;
    for (int k = 0; k < 200; ++k) {
        mid = 0.5 * (lo + hi);
        const double g = lhs(mid);
        ++it;
        if (std::abs(g - h_val) < 1e-10 * h_val) break;
        if (g < h_val) lo = mid;
        else hi = mid;
        if (hi - lo <= 4 * std::numeric_limits<double>::epsilon() * hi) break;
    }
    if (iterations) *iterations = it;
    return mid;
}

int delta_max_from(double h_val, double f_norm, const LipschitzBounds& bounds, double T) {
    if (!(h_val > 0.0)) throw DomainError("delta_max requires h > 0");
    const double nu = solve_nu(h_val, f_norm, bounds);
    if (!std::isfinite(nu) || nu / T > kUnboundedDeltaMax) return kUnboundedDeltaMax;
    return std::max(static_cast<int>(std::floor(nu / T)) - 1, 0);
}

int delta_max(const VehicleState& prev, const ControlInput& u, const LipschitzBounds& bounds, const BarrierConfig& cfg,
              const VehicleParams& params) {
    return delta_max_from(barrier_h(prev, cfg), flow_norm(prev, u, params), bounds, params.T);
}

DeltaMaxTable::DeltaMaxTable(const LipschitzBounds& bounds, double T, double h_lo, double h_hi, double f_lo,
                             double f_hi, int resolution)
    : _h_lo(h_lo), _h_hi(h_hi), _f_lo(f_lo), _f_hi(f_hi), _n(std::max(resolution, 2)) {
    // cell (i, j) spans [h_i, h_{i+1}] x [f_j, f_{j+1}]; the minimum over its corners sits at (h_i, f_{j+1})
    _cells.resize(static_cast<std::size_t>(_n) * _n);
    for (int i = 0; i < _n; ++i) {
        const double h = _h_lo + (_h_hi - _h_lo) * i / _n;
        for (int j = 0; j < _n; ++j) {
            const double f = _f_lo + (_f_hi - _f_lo) * (j + 1) / _n;
            _cells[static_cast<std::size_t>(i) * _n + j] = h > 0.0 ? delta_max_from(h, f, bounds, T) : 0;
        }
    }
}

int DeltaMaxTable::lookup(double h_val, double f_norm) const {
    if (_n == 0 || h_val < _h_lo || f_norm > _f_hi) return 0;
    auto cell = [&](double x, double lo, double hi) {
        const int k = static_cast<int>(std::floor((x - lo) / (hi - lo) * _n));
        return std::clamp(k, 0, _n - 1);
    };
    const int i = cell(h_val, _h_lo, _h_hi);
    const int j = cell(f_norm, _f_lo, _f_hi);
    return _cells[static_cast<std::size_t>(i) * _n + j];
}

DeltaMaxTable build_lut(const LipschitzBounds& bounds, const BarrierConfig& cfg, const VehicleParams& params,
                        int resolution) {
    const LipschitzDomain& d = bounds.domain;
    const double h_hi = 1.0 / cfg.r_bar - 1.0 / d.r_hi;
    const double f_hi = std::sqrt(d.v_hi * d.v_hi + std::pow(d.v_hi / d.r_lo + d.v_hi / params.l_r, 2) +
                                  d.a_max * d.a_max);
    return DeltaMaxTable(bounds, params.T, 0.0, h_hi, 0.0, f_hi, resolution);
}

SoundnessReport validate_monitor(const BarrierConfig& cfg, const VehicleParams& params, const LipschitzBounds& bounds,
                                 std::size_t trials, std::uint64_t seed, int substeps) {
    SoundnessReport rep;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const LipschitzDomain& d = bounds.domain;
    double dm_sum = 0.0;

    for (std::size_t t = 0; t < trials; ++t) {
        const double xi = -kPi + 2.0 * kPi * unit(rng);
        const double r0 = r_min(xi, cfg);
        // squared exponent concentrates draws near the barrier boundary
        const double u = unit(rng);
        double r = r0 * std::pow(d.r_hi / r0, u * u);
        if (!(r > r0)) r = std::nextafter(r0, d.r_hi);
        const double v = d.v_lo + (d.v_hi - d.v_lo) * unit(rng);
        const ControlInput in{-d.a_max + 2.0 * d.a_max * unit(rng), -d.beta_max + 2.0 * d.beta_max * unit(rng)};
        const VehicleState s{xi, r, v};
        if (!(barrier_h(s, cfg) > 0.0)) continue;

        const int dm = delta_max(s, in, bounds, cfg, params);
        const int horizon = std::min(dm, 100000);
        Pose p = pose_from_state(s);
        double min_h = barrier_h(s, cfg);
        bool ok = min_h > 0.0;
        const double h = params.T / substeps;
        for (int n = 0; n < horizon && ok; ++n) {
            for (int k = 0; k < substeps; ++k) {
                p = integrate(p, in, params, h, 1);
                const double hv = barrier_h(relative_state(p, {0.0, 0.0}), cfg);
                min_h = std::min(min_h, hv);
                if (!(hv > 0.0)) ok = false;
            }
        }
        ++rep.trials;
        dm_sum += dm;
        rep.max_delta_max = std::max(rep.max_delta_max, dm);
        rep.worst_margin = std::min(rep.worst_margin, min_h);
        if (!ok) {
            ++rep.failures;
            if (rep.failing.size() < 16) rep.failing.push_back({s, in, dm, min_h});
        }
    }
    rep.mean_delta_max = rep.trials ? dm_sum / rep.trials : 0.0;
    return rep;
}

}  // namespace energyshield
