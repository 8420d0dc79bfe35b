#include "energyshield/barrier.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "energyshield/errors.hpp"

namespace energyshield {

void BarrierConfig::validate() const {
    if (!(r_bar > 0.0)) throw ConfigError("barrier: r_bar must be positive");
    if (!(sigma > 0.0 && sigma < 0.5)) throw ConfigError("barrier: sigma must lie in (0, 0.5)");
    if (!(K > 0.0)) throw ConfigError("barrier: K must be positive");
    if (!(v_max > 0.0)) throw ConfigError("barrier: v_max must be positive");
}

double barrier_h(const VehicleState& s, const BarrierConfig& cfg) {
    return (cfg.sigma * std::cos(s.xi / 2) + 1.0 - cfg.sigma) / cfg.r_bar - 1.0 / s.r;
}

double r_min(double xi, const BarrierConfig& cfg) {
    return cfg.r_bar / (cfg.sigma * std::cos(xi / 2) + 1.0 - cfg.sigma);
}

double alpha(double x, const BarrierConfig& cfg) { return cfg.K * cfg.v_max * x; }

BarrierGradient barrier_gradient(const VehicleState& s, const BarrierConfig& cfg) {
    return {-cfg.sigma * std::sin(s.xi / 2) / (2.0 * cfg.r_bar), 1.0 / (s.r * s.r), 0.0};
}

double zbf_condition(const VehicleState& s, const ControlInput& u, const BarrierConfig& cfg,
                     const VehicleParams& params) {
    const BarrierGradient g = barrier_gradient(s, cfg);
    const PolarRates f = polar_derivative(s, u, params);
    return g.d_r * f.dr + g.d_xi * f.dxi + g.d_v * f.dv + alpha(barrier_h(s, cfg), cfg);
}

std::vector<BetaInterval> safe_beta_interval(const VehicleState& s, double a, const BarrierConfig& cfg,
                                             const VehicleParams& params, int grid, double tol) {
    const double bmax = params.beta_max();
    grid = std::max(grid, 2);
    auto cond = [&](double beta) { return zbf_condition(s, {a, beta}, cfg, params); };
    auto at = [&](int i) { return -bmax + 2.0 * bmax * i / (grid - 1); };

    // bisect between a safe and an unsafe beta, returning the safe end
    auto refine = [&](double safe, double unsafe) {
        while (std::abs(safe - unsafe) > tol) {
            const double mid = 0.5 * (safe + unsafe);
            if (cond(mid) >= 0.0) safe = mid;
            else unsafe = mid;
        }
        return safe;
    };

    std::vector<char> ok(grid);
    for (int i = 0; i < grid; ++i) ok[i] = cond(at(i)) >= 0.0;

    std::vector<BetaInterval> out;
    int i = 0;
    while (i < grid) {
        if (!ok[i]) {
            ++i;
            continue;
        }
        int j = i;
        while (j + 1 < grid && ok[j + 1]) ++j;
        const double lo = i == 0 ? -bmax : refine(at(i), at(i - 1));
        const double hi = j == grid - 1 ? bmax : refine(at(j), at(j + 1));
        out.push_back({lo, hi});
        i = j + 1;
    }
    if (out.empty()) throw EmptySafeSet("no admissible slip angle satisfies the barrier condition");
    return out;
}

FeasibilityReport sigma_feasibility_check(const BarrierConfig& cfg, const VehicleParams& params, int grid_density,
                                          double r_domain_max) {
    FeasibilityReport rep;
    rep.worst_margin = std::numeric_limits<double>::infinity();
    const int n = std::max(grid_density, 4);
    const int nv = std::max(2, n / 4);
    const int nb = 257;
    const double bmax = params.beta_max();

    for (int ix = 0; ix < n; ++ix) {
        const double xi = -kPi + 2.0 * kPi * ix / (n - 1);
        const double r0 = r_min(xi, cfg);
        const double ratio = r_domain_max / r0;
        for (int ir = 0; ir < n; ++ir) {
            const double r = ratio > 1.0 ? r0 * std::pow(ratio, static_cast<double>(ir) / (n - 1)) : r0;
            for (int iv = 1; iv <= nv; ++iv) {
                const VehicleState s{xi, r, cfg.v_max * iv / nv};
                double best = -std::numeric_limits<double>::infinity();
                for (int ib = 0; ib < nb; ++ib) {
                    const double beta = -bmax + 2.0 * bmax * ib / (nb - 1);
                    best = std::max(best, zbf_condition(s, {0.0, beta}, cfg, params));
                }
                ++rep.points_checked;
                if (best < rep.worst_margin) {
                    rep.worst_margin = best;
                    rep.worst_state = s;
                }
                if (best < 0.0) {
                    rep.feasible = false;
                    ++rep.failure_count;
                    if (rep.failures.size() < 64) rep.failures.push_back(s);
                }
            }
        }
    }
    return rep;
}

}  // namespace energyshield
