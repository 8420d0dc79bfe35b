#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "energyshield/config.hpp"
#include "energyshield/errors.hpp"
#include "energyshield/experiment.hpp"

using namespace energyshield;
namespace fs = std::filesystem;

namespace {

constexpr int kExitBreach = 1;
constexpr int kExitConfig = 2;
constexpr int kExitNoConvergence = 3;

struct Overrides {
    std::string config;
    std::uint64_t seed = 0;
    int episodes = 0;
    std::vector<std::string> policies;
    std::vector<std::string> controllers;
    std::string out;
    int workers = -1;
    bool no_episodes = false;
};

void add_common(CLI::App* app, Overrides& o) {
    app->add_option("--config", o.config, "YAML configuration file")->required();
    app->add_option("--seed", o.seed, "seed base");
    app->add_option("--episodes", o.episodes, "episodes per cell");
    app->add_option("--policy", o.policies, "policies to run (local, eager, uniform)")->delimiter(',');
    app->add_option("--out", o.out, "output directory");
    app->add_option("--workers", o.workers, "worker threads, 0 for all cores");
}

ExperimentConfig load(const Overrides& o, const CLI::App& app) {
    ExperimentConfig cfg = load_config(o.config);
    if (app.count("--seed")) cfg.seed_base = o.seed;
    if (app.count("--episodes")) cfg.episodes = o.episodes;
    if (!o.policies.empty()) {
        cfg.policies.clear();
        for (const auto& p : o.policies) cfg.policies.push_back(parse_policy(p));
    }
    if (!o.controllers.empty()) {
        cfg.controllers.clear();
        for (const auto& c : o.controllers) cfg.controllers.push_back(parse_controller(c));
    }
    if (!o.out.empty()) cfg.out_dir = o.out;
    if (app.count("--workers")) cfg.workers = o.workers;
    if (o.no_episodes) cfg.write_episodes = false;
    return cfg;
}

void write_text(const fs::path& p, const std::string& s) {
    fs::create_directories(p.parent_path());
    std::ofstream f(p, std::ios::binary | std::ios::trunc);
    if (!f) throw ConfigError("cannot write " + p.string());
    f << s;
}

void print_cells(const RunReport& rep) {
    std::printf("%-44s %7s %6s %9s %8s %8s %8s\n", "cell", "tcr%", "cd", "E_norm", "transit%", "offload", "min_h");
    for (const auto& c : rep.cells) {
        const Summary& s = c.summary;
        std::printf("%-44s %7.1f %6.2f %9.4f %8.2f %8.3f %8.4f\n", c.label.c_str(), s.tcr, s.mean_cd,
                    s.normalized_energy, s.extra_transit_pct, s.offload_rate, s.min_h);
    }
}

int cmd_run(const ExperimentConfig& cfg) {
    const SimContext ctx = validate_config(cfg);
    const RunReport rep = run_experiment(ctx, cfg);
    write_run_outputs(rep, cfg, ctx, cfg.out_dir);
    std::printf("config_hash %s seed_base %llu\n", hash_hex(rep.config_hash).c_str(),
                static_cast<unsigned long long>(cfg.seed_base));
    print_cells(rep);
    if (rep.safety_breach) {
        std::fprintf(stderr, "error: safety invariant breached in a shielded episode\n");
        return kExitBreach;
    }
    return 0;
}

int cmd_sweep(const ExperimentConfig& cfg) {
    const auto cells = make_sweep(cfg);
    if (cells.empty()) throw ConfigError("sweep: no cells (sigma_phi and queue_delay both empty)");
    std::vector<SimContext> ctxs;
    for (const auto& c : cells) ctxs.push_back(validate_config(c.config));

    std::string table =
        "sweep_cell,axis,value,cell,policy,shield,noisy,controller,episodes,tcr,normalized_energy,"
        "energy_q1,energy_median,energy_q3,extra_transit_pct,transit_q1,transit_median,transit_q3,offload_rate\n";
    bool breach = false;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        const auto& sc = cells[i];
        ExperimentConfig c = sc.config;
        c.out_dir = (fs::path(cfg.out_dir) / sc.label).string();
        const RunReport rep = run_experiment(ctxs[i], c);
        write_run_outputs(rep, c, ctxs[i], c.out_dir);
        breach = breach || rep.safety_breach;
        std::printf("[%s]\n", sc.label.c_str());
        print_cells(rep);
        char buf[64];
        for (const auto& cs : rep.cells) {
            const Summary& s = cs.summary;
            std::snprintf(buf, sizeof buf, "%.17g", sc.value);
            std::ostringstream row;
            row.precision(17);
            row << sc.label << ',' << sc.axis << ',' << buf << ',' << cs.label << ',' << policy_name(cs.cell.policy)
                << ',' << (cs.cell.shield ? 1 : 0) << ',' << (cs.cell.noisy ? 1 : 0) << ',' << cs.controller << ','
                << s.episodes << ',' << s.tcr << ',' << s.normalized_energy << ',' << s.episode_energy.q1 << ','
                << s.episode_energy.median << ',' << s.episode_energy.q3 << ',' << s.extra_transit_pct << ','
                << s.episode_extra_transit.q1 << ',' << s.episode_extra_transit.median << ','
                << s.episode_extra_transit.q3 << ',' << s.offload_rate << '\n';
            table += row.str();
        }
    }
    write_text(fs::path(cfg.out_dir) / "sweep_summary.csv",
               "# config_hash=" + hash_hex(config_hash(cfg)) + " seed_base=" + std::to_string(cfg.seed_base) + "\n" +
                   table);
    if (breach) {
        std::fprintf(stderr, "error: safety invariant breached in a shielded episode\n");
        return kExitBreach;
    }
    return 0;
}

int cmd_validate(const ExperimentConfig& cfg, std::size_t trials) {
    const MonitorValidation v = run_validate_monitor(cfg, trials);
    write_text(fs::path(cfg.out_dir) / "validate_monitor.json", validation_json(v, cfg, trials));
    const SoundnessReport& r = v.report;
    std::printf("trials %zu failures %zu pass_rate %.6f worst_margin %.9g mean_delta_max %.4f max_delta_max %d\n",
                r.trials, r.failures, r.trials ? 1.0 - static_cast<double>(r.failures) / r.trials : 0.0,
                r.worst_margin, r.mean_delta_max, r.max_delta_max);
    std::printf("%s\n", r.failures == 0 ? "PASS" : "FAIL");
    return r.failures == 0 ? 0 : kExitBreach;
}

int cmd_calibrate(const ExperimentConfig& cfg) {
    const CalibrationResult res = calibrate(cfg);
    const std::string frag = calibration_yaml(res, cfg);
    write_text(fs::path(cfg.out_dir) / "calibration.yaml", frag);
    std::fputs(frag.c_str(), stdout);
    if (!res.converged) {
        std::fprintf(stderr, "calibration did not converge: %s\n", res.message.c_str());
        return kExitNoConvergence;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"energy-aware edge offloading simulator with barrier-function shielding"};
    app.require_subcommand(1);

    Overrides run_o, sweep_o, val_o, cal_o;
    std::size_t trials = 0;

    auto* run = app.add_subcommand("run", "run every policy x S x N x controller cell");
    add_common(run, run_o);
    run->add_option("--controller", run_o.controllers, "controller spec lane:<offset> or avoiding:<offset>[:<gain>]");
    run->add_flag("--no-episode-csv", run_o.no_episodes, "skip per-episode CSV files");

    auto* sweep = app.add_subcommand("sweep", "channel and queue variation grid");
    add_common(sweep, sweep_o);
    sweep->add_option("--controller", sweep_o.controllers, "controller spec");
    sweep->add_flag("--no-episode-csv", sweep_o.no_episodes, "skip per-episode CSV files");

    auto* val = app.add_subcommand("validate-monitor", "brute-force soundness check of the runtime monitor");
    add_common(val, val_o);
    val->add_option("--trials", trials, "random (state, control) trials");

    auto* cal = app.add_subcommand("calibrate", "fit P_tx to the far-field energy target");
    add_common(cal, cal_o);
    cal->add_option("--controller", cal_o.controllers, "controller spec");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) return cmd_run(load(run_o, *run));
        if (*sweep) return cmd_sweep(load(sweep_o, *sweep));
        if (*val) {
            const ExperimentConfig cfg = load(val_o, *val);
            const std::size_t n = val->count("--trials") ? trials : cfg.validate.trials;
            if (n < 1) throw ConfigError("validate-monitor: trials must be at least 1");
            return cmd_validate(cfg, n);
        }
        if (*cal) return cmd_calibrate(load(cal_o, *cal));
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitConfig;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitConfig;
    }
    return 0;
}
