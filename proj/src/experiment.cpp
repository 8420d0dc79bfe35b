#include "energyshield/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <thread>

#include "energyshield/errors.hpp"
#include "energyshield/record_io.hpp"
#include "json.hpp"

namespace energyshield {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

std::string cell_label(const Cell& c, const ExperimentConfig& cfg) {
    return std::string(policy_name(c.policy)) + "_S" + (c.shield ? "1" : "0") + "_N" + (c.noisy ? "1" : "0") + "_" +
           controller_name(cfg.controllers.at(c.controller));
}

std::vector<Cell> make_cells(const ExperimentConfig& cfg) {
    std::vector<Cell> cells;
    for (Policy p : cfg.policies)
        for (bool s : cfg.shield_grid)
            for (bool n : cfg.noise_grid)
                for (std::size_t c = 0; c < cfg.controllers.size(); ++c) cells.push_back({p, s, n, c});
    return cells;
}

void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn) {
    std::size_t threads = workers > 0 ? static_cast<std::size_t>(workers) : std::max(1u, std::thread::hardware_concurrency());
    threads = std::min(threads, n);
    if (threads <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!error) error = std::current_exception();
                    next = n;
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

std::vector<EpisodeRecord> run_cells(const SimContext& ctx, const ExperimentConfig& cfg, const std::vector<Cell>& cells,
                                     int workers) {
    const std::size_t per = static_cast<std::size_t>(cfg.episodes);
    std::vector<EpisodeRecord> out(cells.size() * per);
    parallel_for(out.size(), workers, [&](std::size_t i) {
        const Cell& c = cells[i / per];
        const int ep = static_cast<int>(i % per);
        ScenarioConfig sc = ctx.cfg.scenario;
        sc.shield = c.shield;
        sc.noisy = c.noisy;
        out[i] = run_episode(ctx, sc, c.policy, cfg.controllers.at(c.controller), episode_seed(cfg.seed_base, ep), ep);
    });
    return out;
}

namespace {

bool breached(const EpisodeRecord& rec, double r_bar) {
    if (!rec.shield) return false;
    if (rec.outcome == Outcome::Collision || rec.outcome == Outcome::InvariantBreach) return true;
    for (const auto& row : rec.rows)
        if (row.h < 0.0 || row.r <= r_bar) return true;
    return false;
}

ojson quantiles_json(const Quantiles& q) {
    return ojson{{"min", q.min}, {"q1", q.q1}, {"median", q.median}, {"q3", q.q3}, {"max", q.max}, {"mean", q.mean}};
}

std::string shortest(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_file(const fs::path& p, const std::string& content) {
    std::ofstream f(p, std::ios::binary | std::ios::trunc);
    if (!f) throw ConfigError("cannot write " + p.string());
    f << content;
    if (!f) throw ConfigError("cannot write " + p.string());
}

}  // namespace

RunReport run_experiment(const SimContext& ctx, const ExperimentConfig& cfg) {
    RunReport rep;
    rep.config_hash = config_hash(cfg);
    rep.seed_base = cfg.seed_base;
    const auto cells = make_cells(cfg);
    rep.records = run_cells(ctx, cfg, cells, cfg.workers);
    const std::size_t per = static_cast<std::size_t>(cfg.episodes);
    for (std::size_t i = 0; i < cells.size(); ++i) {
        CellSummary cs;
        cs.cell = cells[i];
        cs.label = cell_label(cells[i], cfg);
        cs.controller = controller_name(cfg.controllers[cells[i].controller]);
        const std::span<const EpisodeRecord> slice(rep.records.data() + i * per, per);
        cs.summary = summarize(slice, cfg.sim.energy.E_local_inference, cfg.sim.reward, cfg.far_r,
                               cfg.sim.scenario.lane_center);
        rep.cells.push_back(std::move(cs));
    }
    for (const auto& rec : rep.records)
        if (breached(rec, cfg.sim.barrier.r_bar)) rep.safety_breach = true;
    return rep;
}

std::vector<SweepCell> make_sweep(const ExperimentConfig& cfg) {
    std::vector<SweepCell> out;
    for (double s : cfg.sweep.sigma_phi) {
        SweepCell c;
        c.axis = "sigma_phi";
        c.value = s;
        c.label = "sigma_phi_" + shortest(s);
        c.config = cfg;
        c.config.sim.channel.sigma_phi = s;
        out.push_back(std::move(c));
    }
    for (double q : cfg.sweep.queue_delay) {
        SweepCell c;
        c.axis = "queue_delay";
        c.value = q;
        c.label = "queue_delay_" + shortest(q);
        c.config = cfg;
        c.config.sim.channel.sigma_phi = cfg.sweep.queue_sigma_phi;
        // scale the per-task delay so the mean queueing delay equals q
        QueueConfig unit = cfg.sim.queue;
        unit.per_task_delay = 1.0;
        const double per_task = expected_queue_delay(unit);
        c.config.sim.queue.per_task_delay = per_task > 0.0 ? q / per_task : 0.0;
        out.push_back(std::move(c));
    }
    return out;
}

double far_bin_energy(const SimContext& ctx, const ExperimentConfig& cfg, double p_tx, std::size_t* windows,
                      std::size_t* offload_windows) {
    SimContext c = ctx;
    c.cfg.energy.P_tx = p_tx;
    std::vector<Cell> cells;
    for (bool n : cfg.noise_grid)
        for (std::size_t k = 0; k < cfg.controllers.size(); ++k) cells.push_back({Policy::Uniform, true, n, k});
    const auto recs = run_cells(c, cfg, cells, cfg.workers);
    double energy = 0.0;
    std::size_t count = 0, offl = 0;
    for (const auto& rec : recs)
        for (const auto& row : rec.rows) {
            if (row.r < cfg.calibrate.far_r) continue;
            energy += row.energy;
            ++count;
            if (row.kind != WindowKind::Local && row.kind != WindowKind::Expiry) ++offl;
        }
    if (windows) *windows = count;
    if (offload_windows) *offload_windows = offl;
    if (count == 0) return 0.0;
    return energy / (count * cfg.sim.energy.E_local_inference);
}

CalibrationResult calibrate(const ExperimentConfig& cfg) {
    const SimContext ctx = validate_config(cfg);
    const CalibrateConfig& k = cfg.calibrate;
    CalibrationResult res;
    res.floor = far_bin_energy(ctx, cfg, k.p_tx_lo, &res.far_windows, &res.far_offload_windows);
    res.ceiling = far_bin_energy(ctx, cfg, k.p_tx_hi);
    if (res.far_windows == 0) {
        res.message = "no windows beyond far_r; target unreachable";
        return res;
    }
    if (res.floor > k.target + k.tolerance) {
        res.p_tx = k.p_tx_lo;
        res.far_energy = res.floor;
        res.message = "target unreachable: far-bin energy at p_tx_lo is " + fmt(res.floor) + " (" +
                      std::to_string(res.far_offload_windows) + " of " + std::to_string(res.far_windows) +
                      " far windows offloaded)";
        return res;
    }
    if (res.ceiling < k.target - k.tolerance) {
        res.p_tx = k.p_tx_hi;
        res.far_energy = res.ceiling;
        res.message = "target unreachable: far-bin energy at p_tx_hi is " + fmt(res.ceiling);
        return res;
    }
    double lo = k.p_tx_lo, hi = k.p_tx_hi;
    double best_p = lo, best_e = res.floor;
    for (int i = 0; i < k.iterations; ++i) {
        const double mid = 0.5 * (lo + hi);
        const double e = far_bin_energy(ctx, cfg, mid);
        res.iterations = i + 1;
        if (std::abs(e - k.target) < std::abs(best_e - k.target)) {
            best_p = mid;
            best_e = e;
        }
        if (std::abs(e - k.target) <= 0.25 * k.tolerance) break;
        if (e < k.target) lo = mid;
        else hi = mid;
    }
    res.p_tx = best_p;
    res.far_energy = best_e;
    res.converged = std::abs(best_e - k.target) <= k.tolerance;
    res.message = res.converged ? "converged" : "bisection did not reach the tolerance";
    return res;
}

MonitorValidation run_validate_monitor(const ExperimentConfig& cfg, std::size_t trials) {
    if (trials < 1) throw ConfigError("validate-monitor: trials must be at least 1");
    const SimContext ctx = validate_config(cfg);
    MonitorValidation v;
    v.bounds = ctx.bounds;
    v.bounds.L_h *= cfg.validate.lipschitz_scale;
    v.report = validate_monitor(cfg.sim.barrier, cfg.sim.vehicle, v.bounds, trials, cfg.seed_base, cfg.validate.substeps);
    return v;
}

std::string summary_json(const RunReport& report, const ExperimentConfig& cfg, const SimContext& ctx) {
    ojson j;
    j["config_hash"] = hash_hex(report.config_hash);
    j["seed_base"] = report.seed_base;
    j["episodes_per_cell"] = cfg.episodes;
    j["safety_breach"] = report.safety_breach;
    j["derived"] = ojson{{"gamma", ctx.shield.gamma},
                         {"eta", ctx.shield.eta},
                         {"rho", ctx.shield.rho},
                         {"flip_band", ctx.shield.flip_band},
                         {"L_h", ctx.bounds.L_h},
                         {"L_f", ctx.bounds.L_f},
                         {"feasibility_worst_margin", ctx.feasibility.worst_margin},
                         {"prior_queue_delay", ctx.prior_queue_delay}};
    ojson cells = ojson::array();
    for (const auto& c : report.cells) {
        const Summary& s = c.summary;
        ojson e;
        e["cell"] = c.label;
        e["policy"] = policy_name(c.cell.policy);
        e["shield"] = c.cell.shield;
        e["noisy"] = c.cell.noisy;
        e["controller"] = c.controller;
        e["episodes"] = s.episodes;
        e["completed"] = s.completed;
        e["collisions"] = s.collisions;
        e["cd_aborts"] = s.cd_aborts;
        e["timeouts"] = s.timeouts;
        e["breaches"] = s.breaches;
        e["tcr"] = s.tcr;
        e["mean_cd"] = s.mean_cd;
        e["windows"] = s.windows;
        e["total_energy_mj"] = s.total_energy;
        e["normalized_energy"] = s.normalized_energy;
        e["energy_per_window_mj"] = s.energy_per_window;
        e["extra_transit_pct"] = s.extra_transit_pct;
        e["period_starts"] = s.period_starts;
        e["offloads"] = s.offloads;
        e["expiries"] = s.expiries;
        e["offload_rate"] = s.offload_rate;
        e["mean_reward"] = s.mean_reward;
        e["min_h"] = s.min_h;
        e["min_r"] = s.min_r;
        e["mean_delta_max_near"] = s.mean_delta_max_near;
        e["mean_delta_max_far"] = s.mean_delta_max_far;
        e["episode_normalized_energy"] = quantiles_json(s.episode_energy);
        e["episode_extra_transit_pct"] = quantiles_json(s.episode_extra_transit);
        cells.push_back(std::move(e));
    }
    j["cells"] = std::move(cells);
    return j.dump(2) + "\n";
}

std::string energy_distance_csv(const RunReport& report) {
    std::string s = "cell,policy,shield,noisy,controller,r_lo,r_hi,windows,energy_mj,normalized\n";
    for (const auto& c : report.cells) {
        const std::string prefix = c.label + "," + policy_name(c.cell.policy) + "," + (c.cell.shield ? "1" : "0") + "," +
                                   (c.cell.noisy ? "1" : "0") + "," + c.controller + ",";
        for (const auto& b : c.summary.bins) {
            s += prefix + std::to_string(b.lo) + "," + (b.far ? "inf" : std::to_string(b.lo + 1)) + "," +
                 std::to_string(b.windows) + "," + fmt(b.energy) + "," + fmt(b.normalized) + "\n";
        }
    }
    return s;
}

std::string quantiles_csv(const RunReport& report) {
    std::string s = "cell,policy,shield,noisy,controller,metric,min,q1,median,q3,max,mean\n";
    for (const auto& c : report.cells) {
        const std::string prefix = c.label + "," + policy_name(c.cell.policy) + "," + (c.cell.shield ? "1" : "0") + "," +
                                   (c.cell.noisy ? "1" : "0") + "," + c.controller + ",";
        auto row = [&](const char* metric, const Quantiles& q) {
            s += prefix + metric + "," + fmt(q.min) + "," + fmt(q.q1) + "," + fmt(q.median) + "," + fmt(q.q3) + "," +
                 fmt(q.max) + "," + fmt(q.mean) + "\n";
        };
        row("normalized_energy", c.summary.episode_energy);
        row("extra_transit_pct", c.summary.episode_extra_transit);
    }
    return s;
}

void write_run_outputs(const RunReport& report, const ExperimentConfig& cfg, const SimContext& ctx,
                       const std::string& dir) {
    const fs::path root(dir);
    fs::create_directories(root);
    ExperimentConfig canonical = cfg;
    canonical.out_dir = ".";
    canonical.workers = 0;
    write_file(root / "config.yaml", "# config_hash=" + hash_hex(report.config_hash) + "\n" + dump_config(canonical));
    write_file(root / "summary.json", summary_json(report, cfg, ctx));
    write_file(root / "energy_vs_distance.csv", energy_distance_csv(report));
    write_file(root / "quantiles.csv", quantiles_csv(report));
    if (!cfg.write_episodes) return;
    const fs::path eps = root / "episodes";
    fs::create_directories(eps);
    const Provenance prov{report.config_hash, report.seed_base};
    for (const auto& rec : report.records) write_file(eps / episode_file_name(rec), episode_csv(rec, prov));
}

std::string calibration_yaml(const CalibrationResult& res, const ExperimentConfig& cfg) {
    std::string s;
    s += "# config_hash=" + hash_hex(config_hash(cfg)) + "\n";
    s += "# seed_base=" + std::to_string(cfg.seed_base) + "\n";
    s += "# converged=" + std::string(res.converged ? "true" : "false") + "\n";
    s += "# far_bin_energy=" + fmt(res.far_energy) + "\n";
    s += "# floor=" + fmt(res.floor) + " ceiling=" + fmt(res.ceiling) + "\n";
    s += "# far_windows=" + std::to_string(res.far_windows) +
         " far_offload_windows=" + std::to_string(res.far_offload_windows) + "\n";
    s += "# iterations=" + std::to_string(res.iterations) + "\n";
    s += "# " + res.message + "\n";
    s += "energy:\n  P_tx: " + fmt(res.p_tx) + "\n";
    return s;
}

std::string validation_json(const MonitorValidation& v, const ExperimentConfig& cfg, std::size_t trials) {
    const SoundnessReport& r = v.report;
    ojson j;
    j["config_hash"] = hash_hex(config_hash(cfg));
    j["seed_base"] = cfg.seed_base;
    j["trials"] = trials;
    j["substeps"] = cfg.validate.substeps;
    j["L_h"] = v.bounds.L_h;
    j["L_f"] = v.bounds.L_f;
    j["failures"] = r.failures;
    j["pass_rate"] = r.trials ? 1.0 - static_cast<double>(r.failures) / r.trials : 0.0;
    j["worst_margin"] = r.worst_margin;
    j["mean_delta_max"] = r.mean_delta_max;
    j["max_delta_max"] = r.max_delta_max;
    ojson fails = ojson::array();
    for (const auto& t : r.failing)
        fails.push_back(ojson{{"xi", t.state.xi}, {"r", t.state.r}, {"v", t.state.v}, {"a", t.input.a},
                              {"beta", t.input.beta}, {"delta_max", t.delta_max}, {"min_h", t.min_h}});
    j["failing"] = std::move(fails);
    return j.dump(2) + "\n";
}

}  // namespace energyshield
