#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "energyshield/barrier.hpp"
#include "energyshield/kbm.hpp"

namespace energyshield {

constexpr int kUnboundedDeltaMax = 1 << 20;

struct LipschitzDomain {
    double r_lo = 2.0;
    double r_hi = 100.0;
    double v_lo = 0.1;
    double v_hi = 12.5;
    double beta_max = 0.9;
    double a_max = 3.0;
};

struct LipschitzBounds {
    double L_h = 0.0;
    double L_f = 0.0;
    LipschitzDomain domain{};
};

LipschitzDomain default_domain(const BarrierConfig& cfg, const VehicleParams& params, double a_max = 3.0);
LipschitzBounds lipschitz_bounds(const BarrierConfig& cfg, const VehicleParams& params, const LipschitzDomain& domain);

double flow_norm(const VehicleState& state, const ControlInput& input, const VehicleParams& params);

// root of sqrt(2) L_h f nu exp(L_f nu) = h; +inf when f_norm == 0
double solve_nu(double h_val, double f_norm, const LipschitzBounds& bounds, int* iterations = nullptr);

int delta_max_from(double h_val, double f_norm, const LipschitzBounds& bounds, double T);
int delta_max(const VehicleState& state_prev, const ControlInput& input, const LipschitzBounds& bounds,
              const BarrierConfig& cfg, const VehicleParams& params);

class DeltaMaxTable {
public:
    DeltaMaxTable() = default;
    DeltaMaxTable(const LipschitzBounds& bounds, double T, double h_lo, double h_hi, double f_lo, double f_hi,
                  int resolution);

    int lookup(double h_val, double f_norm) const;
    int resolution() const { return _n; }

private:
    double _h_lo = 0.0, _h_hi = 0.0, _f_lo = 0.0, _f_hi = 0.0;
    int _n = 0;
    std::vector<int> _cells;  // row-major over (h cell, f cell)
};

DeltaMaxTable build_lut(const LipschitzBounds& bounds, const BarrierConfig& cfg, const VehicleParams& params,
                        int resolution);

struct SoundnessTrial {
    VehicleState state{};
    ControlInput input{};
    int delta_max = 0;
    double min_h = 0.0;
};

struct SoundnessReport {
    std::size_t trials = 0;
    std::size_t failures = 0;
    double worst_margin = std::numeric_limits<double>::infinity();  // min h over all checked samples
    double mean_delta_max = 0.0;
    int max_delta_max = 0;
    std::vector<SoundnessTrial> failing;  // first few
};

// brute-force check: hold the input for delta_max samples under fine RK4 and require h > 0 at every sample
SoundnessReport validate_monitor(const BarrierConfig& cfg, const VehicleParams& params, const LipschitzBounds& bounds,
                                 std::size_t trials, std::uint64_t seed, int substeps = 100);

}  // namespace energyshield
