#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "energyshield/barrier.hpp"
#include "energyshield/config.hpp"
#include "energyshield/errors.hpp"
#include "energyshield/experiment.hpp"
#include "energyshield/monitor.hpp"
#include "energyshield/record_io.hpp"
#include "energyshield/shield.hpp"

namespace py = pybind11;
using namespace energyshield;

namespace {

py::dict summary_dict(const Summary& s) {
    py::dict d;
    d["episodes"] = s.episodes;
    d["completed"] = s.completed;
    d["collisions"] = s.collisions;
    d["tcr"] = s.tcr;
    d["mean_cd"] = s.mean_cd;
    d["total_energy"] = s.total_energy;
    d["normalized_energy"] = s.normalized_energy;
    d["energy_per_window"] = s.energy_per_window;
    d["extra_transit_pct"] = s.extra_transit_pct;
    d["offload_rate"] = s.offload_rate;
    d["min_h"] = s.min_h;
    d["min_r"] = s.min_r;
    d["median_normalized_energy"] = s.episode_energy.median;
    return d;
}

py::dict run_dict(const RunReport& rep) {
    py::dict d;
    d["config_hash"] = hash_hex(rep.config_hash);
    d["seed_base"] = rep.seed_base;
    d["safety_breach"] = rep.safety_breach;
    py::list cells;
    for (const auto& c : rep.cells) {
        py::dict cd = summary_dict(c.summary);
        cd["label"] = c.label;
        cd["policy"] = policy_name(c.cell.policy);
        cd["shield"] = c.cell.shield;
        cd["noisy"] = c.cell.noisy;
        cd["controller"] = c.controller;
        cells.append(cd);
    }
    d["cells"] = cells;
    return d;
}

py::dict episode_dict(const EpisodeRecord& rec, const ExperimentConfig& cfg) {
    py::dict d;
    d["seed"] = rec.seed;
    d["episode"] = rec.episode;
    d["outcome"] = outcome_name(rec.outcome);
    d["controller"] = rec.controller;
    std::vector<double> r, h, energy;
    std::vector<int> dmax;
    std::vector<std::string> kind;
    for (const auto& row : rec.rows) {
        r.push_back(row.r);
        h.push_back(row.h);
        energy.push_back(row.energy);
        dmax.push_back(row.delta_max);
        kind.push_back(window_kind_name(row.kind));
    }
    d["r"] = r;
    d["h"] = h;
    d["energy_mj"] = energy;
    d["delta_max"] = dmax;
    d["kind"] = kind;
    d["csv"] = episode_csv(rec, {config_hash(cfg), cfg.seed_base});
    return d;
}

}  // namespace

PYBIND11_MODULE(_energyshield, m) {
    m.doc() = "energy-aware edge offloading simulator with barrier-function shielding";

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<EmptySafeSet>(m, "EmptySafeSet", PyExc_RuntimeError);

    py::class_<VehicleState>(m, "VehicleState")
        .def(py::init([](double xi, double r, double v) { return VehicleState{xi, r, v}; }), py::arg("xi") = 0.0,
             py::arg("r") = 1.0, py::arg("v") = 0.0)
        .def_readwrite("xi", &VehicleState::xi)
        .def_readwrite("r", &VehicleState::r)
        .def_readwrite("v", &VehicleState::v);

    py::class_<ControlInput>(m, "ControlInput")
        .def(py::init([](double a, double beta) { return ControlInput{a, beta}; }), py::arg("a") = 0.0,
             py::arg("beta") = 0.0)
        .def_readwrite("a", &ControlInput::a)
        .def_readwrite("beta", &ControlInput::beta);

    py::class_<VehicleParams>(m, "VehicleParams")
        .def(py::init<>())
        .def_readwrite("l_f", &VehicleParams::l_f)
        .def_readwrite("l_r", &VehicleParams::l_r)
        .def_readwrite("delta_f_max", &VehicleParams::delta_f_max)
        .def_readwrite("v_max", &VehicleParams::v_max)
        .def_readwrite("T", &VehicleParams::T)
        .def("beta_max", &VehicleParams::beta_max);

    py::class_<BarrierConfig>(m, "BarrierConfig")
        .def(py::init<>())
        .def_readwrite("r_bar", &BarrierConfig::r_bar)
        .def_readwrite("sigma", &BarrierConfig::sigma)
        .def_readwrite("K", &BarrierConfig::K)
        .def_readwrite("v_max", &BarrierConfig::v_max);

    m.def("barrier_h", &barrier_h, py::arg("state"), py::arg("barrier") = BarrierConfig{});
    m.def("r_min", &r_min, py::arg("xi"), py::arg("barrier") = BarrierConfig{});
    m.def("shield", &shield_kbm, py::arg("state"), py::arg("requested"), py::arg("barrier") = BarrierConfig{},
          py::arg("vehicle") = VehicleParams{});
    m.def(
        "delta_max",
        [](const VehicleState& s, const ControlInput& u, const BarrierConfig& b, const VehicleParams& p) {
            return delta_max(s, u, lipschitz_bounds(b, p, default_domain(b, p)), b, p);
        },
        py::arg("state"), py::arg("input"), py::arg("barrier") = BarrierConfig{}, py::arg("vehicle") = VehicleParams{});
    m.def(
        "solve_nu",
        [](double h, double f, double L_h, double L_f) {
            LipschitzBounds b;
            b.L_h = L_h;
            b.L_f = L_f;
            return solve_nu(h, f, b);
        },
        py::arg("h"), py::arg("f_norm"), py::arg("L_h"), py::arg("L_f"));

    py::class_<ExperimentConfig>(m, "Config")
        .def(py::init<>())
        .def_static("load", &load_config, py::arg("path"))
        .def_static("parse", &parse_config, py::arg("text"), py::arg("source") = "<string>")
        .def("dump", &dump_config)
        .def_property_readonly("hash", [](const ExperimentConfig& c) { return hash_hex(config_hash(c)); })
        .def_readwrite("episodes", &ExperimentConfig::episodes)
        .def_readwrite("seed_base", &ExperimentConfig::seed_base)
        .def_readwrite("workers", &ExperimentConfig::workers)
        .def_readwrite("out_dir", &ExperimentConfig::out_dir)
        .def_property(
            "policies",
            [](const ExperimentConfig& c) {
                std::vector<std::string> out;
                for (Policy p : c.policies) out.push_back(policy_name(p));
                return out;
            },
            [](ExperimentConfig& c, const std::vector<std::string>& names) {
                c.policies.clear();
                for (const auto& n : names) c.policies.push_back(parse_policy(n));
            })
        .def_property(
            "controllers",
            [](const ExperimentConfig& c) {
                std::vector<std::string> out;
                for (const auto& k : c.controllers) out.push_back(controller_name(k));
                return out;
            },
            [](ExperimentConfig& c, const std::vector<std::string>& specs) {
                c.controllers.clear();
                for (const auto& s : specs) c.controllers.push_back(parse_controller(s));
            })
        .def_property(
            "shield_grid", [](const ExperimentConfig& c) { return c.shield_grid; },
            [](ExperimentConfig& c, const std::vector<bool>& v) { c.shield_grid = v; })
        .def_property(
            "noise_grid", [](const ExperimentConfig& c) { return c.noise_grid; },
            [](ExperimentConfig& c, const std::vector<bool>& v) { c.noise_grid = v; })
        .def_property(
            "p_tx", [](const ExperimentConfig& c) { return c.sim.energy.P_tx; },
            [](ExperimentConfig& c, double v) { c.sim.energy.P_tx = v; })
        .def_property(
            "sigma_phi", [](const ExperimentConfig& c) { return c.sim.channel.sigma_phi; },
            [](ExperimentConfig& c, double v) { c.sim.channel.sigma_phi = v; });

    m.def(
        "run",
        [](const ExperimentConfig& cfg) {
            const SimContext ctx = validate_config(cfg);
            RunReport rep;
            {
                py::gil_scoped_release release;
                rep = run_experiment(ctx, cfg);
            }
            py::dict d = run_dict(rep);
            d["summary_json"] = summary_json(rep, cfg, ctx);
            return d;
        },
        py::arg("config"));

    m.def(
        "run_episode",
        [](const ExperimentConfig& cfg, const std::string& policy, bool shield, bool noisy, int episode,
           const std::string& controller) {
            const SimContext ctx = validate_config(cfg);
            ScenarioConfig sc = ctx.cfg.scenario;
            sc.shield = shield;
            sc.noisy = noisy;
            const Controller c = controller.empty() ? cfg.controllers.front() : parse_controller(controller);
            const EpisodeRecord rec =
                run_episode(ctx, sc, parse_policy(policy), c, episode_seed(cfg.seed_base, episode), episode);
            return episode_dict(rec, cfg);
        },
        py::arg("config"), py::arg("policy") = "uniform", py::arg("shield") = true, py::arg("noisy") = false,
        py::arg("episode") = 0, py::arg("controller") = "");

    m.def(
        "validate_monitor",
        [](const ExperimentConfig& cfg, std::size_t trials) {
            MonitorValidation v;
            {
                py::gil_scoped_release release;
                v = run_validate_monitor(cfg, trials ? trials : cfg.validate.trials);
            }
            py::dict d;
            d["trials"] = v.report.trials;
            d["failures"] = v.report.failures;
            d["worst_margin"] = v.report.worst_margin;
            d["mean_delta_max"] = v.report.mean_delta_max;
            d["L_h"] = v.bounds.L_h;
            d["L_f"] = v.bounds.L_f;
            return d;
        },
        py::arg("config"), py::arg("trials") = 0);

    m.def(
        "calibrate",
        [](const ExperimentConfig& cfg) {
            CalibrationResult r;
            {
                py::gil_scoped_release release;
                r = calibrate(cfg);
            }
            py::dict d;
            d["converged"] = r.converged;
            d["p_tx"] = r.p_tx;
            d["far_energy"] = r.far_energy;
            d["floor"] = r.floor;
            d["ceiling"] = r.ceiling;
            d["far_windows"] = r.far_windows;
            d["far_offload_windows"] = r.far_offload_windows;
            d["message"] = r.message;
            d["yaml"] = calibration_yaml(r, cfg);
            return d;
        },
        py::arg("config"));
}
