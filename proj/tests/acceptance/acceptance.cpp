#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "energyshield/config.hpp"
#include "energyshield/edge.hpp"
#include "energyshield/experiment.hpp"
#include "energyshield/metrics.hpp"
#include "energyshield/monitor.hpp"

using namespace energyshield;
namespace fs = std::filesystem;

namespace {

int g_failed = 0;

void report(int id, bool pass, const std::string& what, const std::string& detail) {
    std::printf("CRITERION %2d %s: %s | %s\n", id, pass ? "PASS" : "FAIL", what.c_str(), detail.c_str());
    std::fflush(stdout);
    if (!pass) ++g_failed;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

ExperimentConfig base_config() {
    ExperimentConfig cfg = load_config(ENERGYSHIELD_SOURCE_DIR "/configs/default.yaml");
    cfg.write_episodes = false;
    return cfg;
}

std::vector<EpisodeRecord> run_grid(const ExperimentConfig& cfg, const SimContext& ctx, std::vector<Policy> policies,
                                    std::vector<bool> shields, std::vector<bool> noises, std::vector<Controller> ctls) {
    ExperimentConfig c = cfg;
    c.policies = std::move(policies);
    c.shield_grid = std::move(shields);
    c.noise_grid = std::move(noises);
    c.controllers = std::move(ctls);
    return run_cells(ctx, c, make_cells(c), c.workers);
}

void criterion_1(const ExperimentConfig& base) {
    const auto t0 = std::chrono::steady_clock::now();
    ExperimentConfig cfg = base;
    cfg.episodes = 200;
    const SimContext ctx = validate_config(cfg);
    LaneFollower lane;
    lane.lane_offset = 0.5;
    const auto recs = run_grid(cfg, ctx, {Policy::LocalOnly, Policy::Eager, Policy::Uniform}, {true}, {false, true},
                               {cfg.controllers.front(), lane});
    std::size_t collisions = 0, bad_steps = 0, breaches = 0, steps = 0;
    double min_h = 1e9;
    for (const auto& r : recs) {
        if (r.outcome == Outcome::Collision) ++collisions;
        if (r.outcome == Outcome::InvariantBreach) ++breaches;
        for (const auto& row : r.rows) {
            ++steps;
            min_h = std::min(min_h, row.h);
            if (row.h < 0.0 || row.r <= cfg.sim.barrier.r_bar) ++bad_steps;
        }
    }
    const double dt = seconds_since(t0);
    const bool pass = collisions == 0 && bad_steps == 0 && breaches == 0 && dt < 120.0;
    report(1, pass, "shield safety, S=1, 200 episodes x N x policy x 2 controllers",
           std::to_string(recs.size()) + " episodes, " + std::to_string(steps) + " steps, collisions " +
               std::to_string(collisions) + ", h<0 steps " + std::to_string(bad_steps) + ", breaches " +
               std::to_string(breaches) + ", min h " + fmt("%.4f", min_h) + ", " + fmt("%.1f s", dt));
}

void criterion_2(const ExperimentConfig& base) {
    ExperimentConfig cfg = base;
    cfg.episodes = 200;
    const SimContext ctx = validate_config(cfg);
    LaneFollower lane;
    lane.lane_offset = 0.5;
    double tcr[2];
    for (int n = 0; n < 2; ++n) {
        const auto recs = run_grid(cfg, ctx, {Policy::LocalOnly}, {false}, {n == 1}, {lane});
        tcr[n] = summarize(recs, cfg.sim.energy.E_local_inference, cfg.sim.reward).tcr;
    }
    const bool pass = tcr[0] < 100.0 && tcr[1] < 100.0 && tcr[1] <= tcr[0];
    report(2, pass, "unsafe baseline, S=0 lane follower at offset 0.5",
           "TCR(N=0) " + fmt("%.1f%%", tcr[0]) + ", TCR(N=1) " + fmt("%.1f%%", tcr[1]));
}

void criterion_3(const ExperimentConfig& base) {
    const auto t0 = std::chrono::steady_clock::now();
    const MonitorValidation v = run_validate_monitor(base, 10000);
    const double dt = seconds_since(t0);
    const auto& r = v.report;
    report(3, r.trials == 10000 && r.failures == 0 && dt < 60.0, "monitor soundness, 1e4 trials, 100 RK4 substeps",
           "failures " + std::to_string(r.failures) + ", worst margin " + fmt("%.3g", r.worst_margin) +
               ", mean delta_max " + fmt("%.3f", r.mean_delta_max) + ", " + fmt("%.2f s", dt));
}

double lambert_w(double x) {
    double w = x < 1.0 ? x : std::log(x);
    for (int i = 0; i < 100; ++i) {
        const double e = std::exp(w);
        const double step = (w * e - x) / (e * (w + 1.0));
        w -= step;
        if (std::abs(step) < 1e-16 * std::max(1.0, std::abs(w))) break;
    }
    return w;
}

void criterion_4() {
    Rng rng(2024);
    std::uniform_real_distribution<double> h(1e-4, 0.5), f(1e-3, 20.0);
    LipschitzBounds b;
    b.L_h = 0.28;
    b.L_f = 1.0;
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const double hv = h(rng), fv = f(rng);
        const double exact = lambert_w(hv / (std::sqrt(2.0) * b.L_h * fv));
        worst = std::max(worst, std::abs(solve_nu(hv, fv, b) - exact) / exact);
    }
    report(4, worst < 1e-9, "Gronwall solver against Lambert W, 1e3 pairs", "max relative error " + fmt("%.3g", worst));
}

void criterion_5(const ExperimentConfig& base) {
    const auto t0 = std::chrono::steady_clock::now();
    ExperimentConfig cfg = base;
    const CalibrationResult cal = calibrate(cfg);
    if (cal.converged) cfg.sim.energy.P_tx = cal.p_tx;
    cfg.episodes = 200;
    const SimContext ctx = validate_config(cfg);
    bool pass = cal.converged;
    std::string detail = std::string("calibration ") + (cal.converged ? "converged" : "did not converge") + " (" +
                         cal.message + ")";
    for (Policy p : {Policy::Eager, Policy::Uniform}) {
        const auto recs = run_grid(cfg, ctx, {p}, {true}, {false, true}, {cfg.controllers.front()});
        const Summary s = summarize(recs, cfg.sim.energy.E_local_inference, cfg.sim.reward, 20.0);
        std::vector<double> r, e;
        double near_min = 1.0, far = -1.0;
        std::size_t near_bins = 0;
        for (const auto& bin : s.bins) {
            if (bin.far) {
                far = bin.normalized;
                continue;
            }
            r.push_back(bin.lo + 0.5);
            e.push_back(bin.normalized);
            if (bin.lo < 4) {
                near_min = std::min(near_min, bin.normalized);
                ++near_bins;
            }
        }
        const double rho = spearman(r, e);
        const double target = p == Policy::Eager ? 0.67 : 0.33;
        const bool ok = rho <= -0.8 && near_min >= 0.95 && std::abs(far - target) <= 0.10;
        pass = pass && ok;
        detail += std::string("; ") + policy_name(p) + ": spearman " + fmt("%.3f", rho) + ", near bins " +
                  (near_bins ? "min " + fmt("%.3f", near_min) : std::string("empty (no windows at r<4 m)")) +
                  ", far bin " + fmt("%.3f", far) + " (target " + fmt("%.2f", target) + ")";
    }
    detail += ", " + fmt("%.1f s", seconds_since(t0));
    report(5, pass, "energy-vs-distance shape after calibration", detail);
}

void criterion_6(const ExperimentConfig& base) {
    const SimContext ctx = validate_config(base);
    const RunReport rep = run_experiment(ctx, base);
    std::map<std::pair<bool, bool>, std::map<Policy, double>> totals;
    for (const auto& c : rep.cells) totals[{c.cell.shield, c.cell.noisy}][c.cell.policy] += c.summary.total_energy;
    bool pass = true;
    std::string detail;
    for (const auto& [key, m] : totals) {
        const double l = m.at(Policy::LocalOnly), e = m.at(Policy::Eager), u = m.at(Policy::Uniform);
        pass = pass && u < e && e < l;
        if (!detail.empty()) detail += "; ";
        detail += "S" + std::to_string(key.first) + "N" + std::to_string(key.second) + " uniform/eager/local " +
                  fmt("%.4f", u / l) + "/" + fmt("%.4f", e / l) + "/1";
    }
    report(6, pass, "policy ordering uniform < eager < local in every (S, N) cell", detail);
}

void criterion_7(const ExperimentConfig& base) {
    bool pass = true;
    std::string detail;
    // (policy, noisy) -> medians over sigma cells; q cells -> offload rates
    std::map<std::pair<Policy, bool>, std::vector<double>> medians;
    std::map<std::pair<Policy, bool>, std::vector<std::pair<double, double>>> q_rates;
    for (const auto& sc : make_sweep(base)) {
        ExperimentConfig c = sc.config;
        c.policies = {Policy::Eager, Policy::Uniform};
        c.shield_grid = {true};
        const SimContext ctx = validate_config(c);
        const RunReport rep = run_experiment(ctx, c);
        for (const auto& cs : rep.cells) {
            const auto key = std::make_pair(cs.cell.policy, cs.cell.noisy);
            if (sc.axis == "sigma_phi") medians[key].push_back(cs.summary.episode_energy.median);
            else q_rates[key].push_back({sc.value, cs.summary.offload_rate});
        }
    }
    for (const auto& [key, v] : medians) {
        bool inc = true;
        for (std::size_t i = 1; i < v.size(); ++i) inc = inc && v[i] > v[i - 1];
        pass = pass && inc && v.size() == 3;
        detail += std::string(policy_name(key.first)) + " N" + std::to_string(key.second) + " medians";
        for (double m : v) detail += " " + fmt("%.4f", m);
        detail += "; ";
    }
    for (const auto& [key, v] : q_rates) {
        double at50 = -1.0, lowest = 1e9;
        for (auto [q, rate] : v) {
            lowest = std::min(lowest, rate);
            if (std::abs(q - 0.05) < 1e-12) at50 = rate;
        }
        pass = pass && at50 >= 0.0 && at50 <= lowest;
        detail += std::string(policy_name(key.first)) + " N" + std::to_string(key.second) + " offload rate q=50ms " +
                  fmt("%.4f", at50) + " (min " + fmt("%.4f", lowest) + "); ";
    }
    report(7, pass, "channel sweep direction, S=1", detail);
}

void criterion_8() {
    ChannelConfig ch;
    Rng rng(8);
    double sum = 0.0;
    const int n = 1000000;
    for (int i = 0; i < n; ++i) sum += sample_throughput(rng, ch);
    const double expect = ch.sigma_phi * std::sqrt(std::numbers::pi / 2.0);
    const double mean_err = std::abs(sum / n - expect) / expect;

    QueueConfig q;
    const auto pmf = queue_pmf(q);
    long double total = 0.0L;
    for (double p : pmf) total += p;
    const QueueSampler qs(q);
    std::vector<long> hist(pmf.size(), 0);
    for (int i = 0; i < n; ++i) ++hist[static_cast<std::size_t>(qs.sample_position(rng))];
    double dev = 0.0;
    for (std::size_t c = 0; c < pmf.size(); ++c) dev = std::max(dev, std::abs(hist[c] / double(n) - pmf[c]));
    const double sum_err = std::abs(static_cast<double>(total) - 1.0);
    report(8, mean_err < 0.02 && sum_err <= 1e-12 && dev < 5e-3, "Rayleigh mean and M/M/1/k pmf",
           "Rayleigh mean rel err " + fmt("%.2e", mean_err) + ", pmf sum err " + fmt("%.2e", sum_err) +
               ", histogram max dev " + fmt("%.2e", dev));
}

void criterion_9(const ExperimentConfig& base) {
    ExperimentConfig cfg = base;
    cfg.episodes = 100;
    const SimContext ctx = validate_config(cfg);
    std::vector<double> cd, epw;
    std::string detail;
    for (double off : {0.5, 1.5, 3.0, 5.0}) {
        LaneFollower lane;
        lane.lane_offset = off;
        const auto recs = run_grid(cfg, ctx, {Policy::Uniform}, {true}, {false, true}, {lane});
        const Summary s = summarize(recs, cfg.sim.energy.E_local_inference, cfg.sim.reward);
        cd.push_back(s.mean_cd);
        epw.push_back(s.energy_per_window);
        detail += "offset " + fmt("%.1f", off) + ": CD " + fmt("%.3f", s.mean_cd) + " E/window " +
                  fmt("%.2f mJ", s.energy_per_window) + "; ";
    }
    bool cd_inc = true, e_dec = true;
    for (std::size_t i = 1; i < cd.size(); ++i) {
        cd_inc = cd_inc && cd[i] > cd[i - 1];
        e_dec = e_dec && epw[i] < epw[i - 1];
    }
    report(9, cd_inc && e_dec, "energy per inference decreases with center deviance, uniform, S=1", detail);
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

bool same_tree(const fs::path& a, const fs::path& b, std::size_t& files) {
    bool same = true;
    std::size_t count_b = 0;
    for (const auto& e : fs::recursive_directory_iterator(b))
        if (e.is_regular_file()) ++count_b;
    files = 0;
    for (const auto& e : fs::recursive_directory_iterator(a)) {
        if (!e.is_regular_file()) continue;
        ++files;
        const fs::path other = b / fs::relative(e.path(), a);
        same = same && fs::exists(other) && slurp(e.path()) == slurp(other);
    }
    return same && files == count_b && files > 0;
}

void criterion_10(const std::string& cli) {
    const fs::path root = fs::temp_directory_path() / "energyshield_acceptance_determinism";
    fs::remove_all(root);
    const std::string cfg = ENERGYSHIELD_SOURCE_DIR "/configs/default.yaml";
    struct Cmd {
        std::string name, args;
    };
    const std::vector<Cmd> cmds{{"run", "run --episodes 6"},
                                {"sweep", "sweep --episodes 4 --no-episode-csv"},
                                {"validate-monitor", "validate-monitor --trials 2000"},
                                {"calibrate", "calibrate --episodes 6"}};
    bool pass = true;
    std::string detail;
    for (const auto& c : cmds) {
        int codes[2];
        for (int k = 0; k < 2; ++k) {
            const fs::path out = root / c.name / std::to_string(k);
            const std::string line = "\"" + cli + "\" " + c.args + " --config \"" + cfg + "\" --seed 11 --workers " +
                                     std::to_string(k == 0 ? 1 : 3) + " --out \"" + out.string() + "\" > \"" +
                                     (root / (c.name + std::to_string(k) + ".stdout")).string() + "\" 2>&1";
            fs::create_directories(root);
            codes[k] = std::system(line.c_str());
        }
        std::size_t files = 0;
        const bool same = same_tree(root / c.name / "0", root / c.name / "1", files) &&
                          slurp(root / (c.name + "0.stdout")) == slurp(root / (c.name + "1.stdout")) &&
                          codes[0] == codes[1];
        pass = pass && same;
        detail += c.name + " " + (same ? "identical" : "DIFFERENT") + " (" + std::to_string(files) + " files); ";
    }
    fs::remove_all(root);
    report(10, pass, "byte-identical outputs on re-run (1 vs 3 workers)", detail);
}

}  // namespace

int main(int argc, char** argv) {
    if (argc < 2) {
        std::fprintf(stderr, "usage: acceptance <path-to-cli>\n");
        return 2;
    }
    const ExperimentConfig base = base_config();
    criterion_1(base);
    criterion_2(base);
    criterion_3(base);
    criterion_4();
    criterion_5(base);
    criterion_6(base);
    criterion_7(base);
    criterion_8();
    criterion_9(base);
    criterion_10(argv[1]);
    std::printf("%d of 10 criteria failed\n", g_failed);
    return g_failed == 0 ? 0 : 1;
}
