#include "energyshield/config.hpp"

#include <yaml-cpp/yaml.h>

#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "energyshield/errors.hpp"

namespace energyshield {

namespace {

std::string where(const std::string& source, const YAML::Mark& m) {
    return source + ":" + std::to_string(m.line + 1) + ":" + std::to_string(m.column + 1) + ": ";
}

// map reader that remembers which keys were consumed so leftovers can be rejected
class Section {
public:
    Section(const YAML::Node& node, std::string path, const std::string& source) : _node(node), _path(std::move(path)), _source(source) {
        if (!_node.IsMap()) throw ConfigError(where(_source, _node.Mark()) + _path + " must be a mapping");
    }

    template <class T>
    void get(const char* key, T& out) {
        _seen.insert(key);
        const YAML::Node v = _node[key];
        if (!v) return;
        try {
            out = v.as<T>();
        } catch (const YAML::Exception&) {
            throw ConfigError(where(_source, v.Mark()) + name(key) + " has the wrong type");
        }
    }

    void get(const char* key, bool& out) {
        _seen.insert(key);
        const YAML::Node v = _node[key];
        if (!v) return;
        if (!v.IsScalar()) throw ConfigError(where(_source, v.Mark()) + name(key) + " must be true or false");
        const std::string s = v.Scalar();
        if (s == "true") out = true;
        else if (s == "false") out = false;
        else throw ConfigError(where(_source, v.Mark()) + name(key) + " must be true or false");
    }

    YAML::Node child(const char* key) {
        _seen.insert(key);
        return _node[key];
    }

    std::string name(const char* key) const { return _path.empty() ? key : _path + "." + key; }

    void finish() const {
        for (const auto& kv : _node) {
            const std::string k = kv.first.as<std::string>();
            if (!_seen.count(k))
                throw ConfigError(where(_source, kv.first.Mark()) + "unknown key '" + (_path.empty() ? k : _path + "." + k) + "'");
        }
    }

private:
    YAML::Node _node;
    std::string _path;
    const std::string& _source;
    std::set<std::string> _seen;
};

template <class T>
std::vector<T> list_of(const YAML::Node& n, const std::string& what, const std::string& source) {
    if (!n.IsSequence()) throw ConfigError(where(source, n.Mark()) + what + " must be a list");
    std::vector<T> out;
    for (const auto& item : n) {
        try {
            out.push_back(item.as<T>());
        } catch (const YAML::Exception&) {
            throw ConfigError(where(source, item.Mark()) + what + " has an entry of the wrong type");
        }
    }
    return out;
}

std::vector<bool> bool_list(const YAML::Node& n, const std::string& what, const std::string& source) {
    std::vector<bool> out;
    for (const auto& s : list_of<std::string>(n, what, source)) {
        if (s == "true") out.push_back(true);
        else if (s == "false") out.push_back(false);
        else throw ConfigError(where(source, n.Mark()) + what + " entries must be true or false");
    }
    if (out.empty()) throw ConfigError(where(source, n.Mark()) + what + " must not be empty");
    return out;
}

void read_lane(Section& s, LaneFollower& lf) {
    s.get("lane_offset", lf.lane_offset);
    s.get("target_speed", lf.target_speed);
    s.get("lookahead", lf.lookahead);
    s.get("heading_gain", lf.heading_gain);
    s.get("speed_gain", lf.speed_gain);
    s.get("a_max", lf.a_max);
}

Controller read_controller(const YAML::Node& n, const std::string& path, const std::string& source) {
    Section s(n, path, source);
    std::string type;
    s.get("type", type);
    if (type == "lane") {
        LaneFollower lf;
        read_lane(s, lf);
        s.finish();
        return lf;
    }
    if (type == "avoiding") {
        AvoidingFollower af;
        read_lane(s, af.base);
        s.get("avoid_gain", af.avoid_gain);
        s.get("avoid_range", af.avoid_range);
        s.finish();
        return af;
    }
    throw ConfigError(where(source, n.Mark()) + path + ".type must be 'lane' or 'avoiding'");
}

struct Marks {
    std::map<std::string, YAML::Mark> sections;
};

ExperimentConfig read_root(const YAML::Node& root, const std::string& source, Marks& marks) {
    ExperimentConfig cfg;
    if (!root || root.IsNull()) return cfg;
    Section top(root, "", source);
    for (const auto& kv : root) marks.sections[kv.first.as<std::string>()] = kv.first.Mark();

    top.get("seed_base", cfg.seed_base);
    top.get("episodes", cfg.episodes);
    top.get("out", cfg.out_dir);
    top.get("workers", cfg.workers);
    top.get("write_episodes", cfg.write_episodes);
    top.get("far_r", cfg.far_r);

    if (auto n = top.child("policies")) {
        cfg.policies.clear();
        for (const auto& item : n.IsSequence() ? n : YAML::Node()) {
            try {
                cfg.policies.push_back(parse_policy(item.as<std::string>()));
            } catch (const std::exception&) {
                throw ConfigError(where(source, item.Mark()) + "policies: expected local, eager or uniform");
            }
        }
        if (!n.IsSequence() || cfg.policies.empty())
            throw ConfigError(where(source, n.Mark()) + "policies must be a nonempty list");
    }
    if (auto n = top.child("controllers")) {
        if (!n.IsSequence() || n.size() == 0) throw ConfigError(where(source, n.Mark()) + "controllers must be a nonempty list");
        cfg.controllers.clear();
        for (std::size_t i = 0; i < n.size(); ++i)
            cfg.controllers.push_back(read_controller(n[i], "controllers[" + std::to_string(i) + "]", source));
    }
    if (auto n = top.child("grid")) {
        Section g(n, "grid", source);
        if (auto s = g.child("shield")) cfg.shield_grid = bool_list(s, "grid.shield", source);
        if (auto s = g.child("noisy")) cfg.noise_grid = bool_list(s, "grid.noisy", source);
        g.finish();
    }

    SimConfig& sim = cfg.sim;
    if (auto n = top.child("vehicle")) {
        Section s(n, "vehicle", source);
        s.get("l_f", sim.vehicle.l_f);
        s.get("l_r", sim.vehicle.l_r);
        s.get("delta_f_max", sim.vehicle.delta_f_max);
        s.get("v_max", sim.vehicle.v_max);
        s.get("T", sim.vehicle.T);
        s.finish();
    }
    sim.barrier.v_max = sim.vehicle.v_max;
    if (auto n = top.child("barrier")) {
        Section s(n, "barrier", source);
        s.get("r_bar", sim.barrier.r_bar);
        s.get("sigma", sim.barrier.sigma);
        s.get("K", sim.barrier.K);
        s.finish();
    }
    if (auto n = top.child("channel")) {
        Section s(n, "channel", source);
        s.get("sigma_phi", sim.channel.sigma_phi);
        s.get("data_size", sim.channel.data_size);
        s.get("server_compute", sim.channel.server_compute);
        s.get("phi_min", sim.channel.phi_min);
        s.finish();
    }
    if (auto n = top.child("queue")) {
        Section s(n, "queue", source);
        s.get("C", sim.queue.C);
        s.get("rho_load", sim.queue.rho_load);
        s.get("per_task_delay", sim.queue.per_task_delay);
        s.finish();
    }
    if (auto n = top.child("energy")) {
        Section s(n, "energy", source);
        s.get("E_local_inference", sim.energy.E_local_inference);
        s.get("P_tx", sim.energy.P_tx);
        s.get("P_idle", sim.energy.P_idle);
        s.finish();
    }
    if (auto n = top.child("scenario")) {
        Section s(n, "scenario", source);
        ScenarioConfig& sc = sim.scenario;
        s.get("track_length", sc.track_length);
        s.get("obstacle_count", sc.obstacle_count);
        s.get("first_obstacle_at", sc.first_obstacle_at);
        s.get("longitudinal_jitter", sc.longitudinal_jitter);
        s.get("min_separation", sc.min_separation);
        s.get("noise_std", sc.noise_std);
        s.get("lane_center", sc.lane_center);
        s.get("cd_threshold", sc.cd_threshold);
        s.get("max_steps", sc.max_steps);
        s.finish();
    }
    if (auto n = top.child("reward")) {
        Section s(n, "reward", source);
        RewardConstants& k = sim.reward;
        s.get("v_min", k.v_min);
        s.get("v_target", k.v_target);
        s.get("v_max", k.v_max);
        s.get("r_max", k.r_max);
        s.get("l_max", k.l_max);
        s.get("P", k.P);
        s.get("w1", k.w1);
        s.get("w2", k.w2);
        s.get("w3", k.w3);
        s.get("w4", k.w4);
        s.finish();
    }
    if (auto n = top.child("simulation")) {
        Section s(n, "simulation", source);
        s.get("estimator_window", sim.estimator_window);
        s.get("substeps", sim.substeps);
        s.get("a_max", sim.a_max);
        s.get("use_lut", sim.use_lut);
        s.get("lut_resolution", sim.lut_resolution);
        s.get("feasibility_density", sim.feasibility_density);
        s.finish();
    }
    if (auto n = top.child("sweep")) {
        Section s(n, "sweep", source);
        if (auto l = s.child("sigma_phi")) cfg.sweep.sigma_phi = list_of<double>(l, "sweep.sigma_phi", source);
        if (auto l = s.child("queue_delay")) cfg.sweep.queue_delay = list_of<double>(l, "sweep.queue_delay", source);
        s.get("queue_sigma_phi", cfg.sweep.queue_sigma_phi);
        s.finish();
    }
    if (auto n = top.child("calibrate")) {
        Section s(n, "calibrate", source);
        s.get("target", cfg.calibrate.target);
        s.get("tolerance", cfg.calibrate.tolerance);
        s.get("p_tx_lo", cfg.calibrate.p_tx_lo);
        s.get("p_tx_hi", cfg.calibrate.p_tx_hi);
        s.get("iterations", cfg.calibrate.iterations);
        s.get("far_r", cfg.calibrate.far_r);
        s.finish();
    }
    if (auto n = top.child("validate_monitor")) {
        Section s(n, "validate_monitor", source);
        s.get("trials", cfg.validate.trials);
        s.get("substeps", cfg.validate.substeps);
        s.get("lipschitz_scale", cfg.validate.lipschitz_scale);
        s.finish();
    }
    top.finish();
    return cfg;
}

void check_plumbing(const ExperimentConfig& cfg) {
    if (cfg.episodes < 1) throw ConfigError("episodes must be at least 1");
    if (cfg.workers < 0) throw ConfigError("workers must be nonnegative");
    if (cfg.policies.empty()) throw ConfigError("policies must not be empty");
    if (cfg.controllers.empty()) throw ConfigError("controllers must not be empty");
    if (cfg.shield_grid.empty() || cfg.noise_grid.empty()) throw ConfigError("grid: shield and noisy must not be empty");
    if (!(cfg.far_r > 0.0)) throw ConfigError("far_r must be positive");
    for (double s : cfg.sweep.sigma_phi)
        if (!(s > 0.0)) throw ConfigError("sweep: sigma_phi entries must be positive");
    for (double q : cfg.sweep.queue_delay)
        if (!(q >= 0.0)) throw ConfigError("sweep: queue_delay entries must be nonnegative");
    if (!(cfg.sweep.queue_sigma_phi > 0.0)) throw ConfigError("sweep: queue_sigma_phi must be positive");
    const auto& c = cfg.calibrate;
    if (!(c.tolerance > 0.0) || !(c.p_tx_lo >= 0.0) || !(c.p_tx_hi > c.p_tx_lo) || c.iterations < 1 || !(c.far_r > 0.0))
        throw ConfigError("calibrate: need tolerance > 0, 0 <= p_tx_lo < p_tx_hi, iterations >= 1, far_r > 0");
    if (cfg.validate.trials < 1) throw ConfigError("validate_monitor: trials must be at least 1");
    if (cfg.validate.substeps < 1) throw ConfigError("validate_monitor: substeps must be at least 1");
    if (!(cfg.validate.lipschitz_scale > 0.0)) throw ConfigError("validate_monitor: lipschitz_scale must be positive");
    for (const auto& ctl : cfg.controllers) {
        const LaneFollower& lf = std::holds_alternative<LaneFollower>(ctl) ? std::get<LaneFollower>(ctl)
                                                                           : std::get<AvoidingFollower>(ctl).base;
        if (!(lf.target_speed > 0.0) || !(lf.lookahead > 0.0) || !(lf.a_max > 0.0))
            throw ConfigError("controllers: target_speed, lookahead and a_max must be positive");
        if (const auto* af = std::get_if<AvoidingFollower>(&ctl); af && !(af->avoid_range > 0.0))
            throw ConfigError("controllers: avoid_range must be positive");
    }
}

void emit_lane(YAML::Emitter& e, const LaneFollower& lf) {
    e << YAML::Key << "lane_offset" << YAML::Value << lf.lane_offset;
    e << YAML::Key << "target_speed" << YAML::Value << lf.target_speed;
    e << YAML::Key << "lookahead" << YAML::Value << lf.lookahead;
    e << YAML::Key << "heading_gain" << YAML::Value << lf.heading_gain;
    e << YAML::Key << "speed_gain" << YAML::Value << lf.speed_gain;
    e << YAML::Key << "a_max" << YAML::Value << lf.a_max;
}

template <class F>
void section(YAML::Emitter& e, const char* name, F&& body) {
    e << YAML::Key << name << YAML::Value << YAML::BeginMap;
    body();
    e << YAML::EndMap;
}

template <class T>
void kv(YAML::Emitter& e, const char* k, const T& v) {
    e << YAML::Key << k << YAML::Value << v;
}

}  // namespace

ExperimentConfig parse_config(const std::string& text, const std::string& source) {
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::ParserException& e) {
        throw ConfigError(where(source, e.mark) + e.msg);
    }
    Marks marks;
    ExperimentConfig cfg = read_root(root, source, marks);
    try {
        check_plumbing(cfg);
    } catch (const ConfigError& e) {
        // point at the offending top-level section when it can be identified
        std::string msg = e.what();
        const std::string key = msg.substr(0, msg.find_first_of(":. "));
        const auto it = marks.sections.find(key);
        if (it != marks.sections.end()) throw ConfigError(where(source, it->second) + msg);
        throw ConfigError(source + ": " + msg);
    }
    cfg.sim.barrier.v_max = cfg.sim.vehicle.v_max;
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path + ": cannot open config file");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), path);
}

std::string dump_config(const ExperimentConfig& cfg) {
    YAML::Emitter e;
    e.SetDoublePrecision(17);
    e << YAML::BeginMap;
    kv(e, "seed_base", cfg.seed_base);
    kv(e, "episodes", cfg.episodes);
    kv(e, "out", cfg.out_dir);
    kv(e, "workers", cfg.workers);
    kv(e, "write_episodes", cfg.write_episodes);
    kv(e, "far_r", cfg.far_r);
    e << YAML::Key << "policies" << YAML::Value << YAML::Flow << YAML::BeginSeq;
    for (Policy p : cfg.policies) e << policy_name(p);
    e << YAML::EndSeq;
    section(e, "grid", [&] {
        e << YAML::Key << "shield" << YAML::Value << YAML::Flow << YAML::BeginSeq;
        for (bool b : cfg.shield_grid) e << b;
        e << YAML::EndSeq;
        e << YAML::Key << "noisy" << YAML::Value << YAML::Flow << YAML::BeginSeq;
        for (bool b : cfg.noise_grid) e << b;
        e << YAML::EndSeq;
    });
    e << YAML::Key << "controllers" << YAML::Value << YAML::BeginSeq;
    for (const auto& c : cfg.controllers) {
        e << YAML::BeginMap;
        if (const auto* lf = std::get_if<LaneFollower>(&c)) {
            kv(e, "type", "lane");
            emit_lane(e, *lf);
        } else {
            const auto& af = std::get<AvoidingFollower>(c);
            kv(e, "type", "avoiding");
            emit_lane(e, af.base);
            kv(e, "avoid_gain", af.avoid_gain);
            kv(e, "avoid_range", af.avoid_range);
        }
        e << YAML::EndMap;
    }
    e << YAML::EndSeq;
    const SimConfig& sim = cfg.sim;
    section(e, "vehicle", [&] {
        kv(e, "l_f", sim.vehicle.l_f);
        kv(e, "l_r", sim.vehicle.l_r);
        kv(e, "delta_f_max", sim.vehicle.delta_f_max);
        kv(e, "v_max", sim.vehicle.v_max);
        kv(e, "T", sim.vehicle.T);
    });
    section(e, "barrier", [&] {
        kv(e, "r_bar", sim.barrier.r_bar);
        kv(e, "sigma", sim.barrier.sigma);
        kv(e, "K", sim.barrier.K);
    });
    section(e, "channel", [&] {
        kv(e, "sigma_phi", sim.channel.sigma_phi);
        kv(e, "data_size", sim.channel.data_size);
        kv(e, "server_compute", sim.channel.server_compute);
        kv(e, "phi_min", sim.channel.phi_min);
    });
    section(e, "queue", [&] {
        kv(e, "C", sim.queue.C);
        kv(e, "rho_load", sim.queue.rho_load);
        kv(e, "per_task_delay", sim.queue.per_task_delay);
    });
    section(e, "energy", [&] {
        kv(e, "E_local_inference", sim.energy.E_local_inference);
        kv(e, "P_tx", sim.energy.P_tx);
        kv(e, "P_idle", sim.energy.P_idle);
    });
    section(e, "scenario", [&] {
        const ScenarioConfig& sc = sim.scenario;
        kv(e, "track_length", sc.track_length);
        kv(e, "obstacle_count", sc.obstacle_count);
        kv(e, "first_obstacle_at", sc.first_obstacle_at);
        kv(e, "longitudinal_jitter", sc.longitudinal_jitter);
        kv(e, "min_separation", sc.min_separation);
        kv(e, "noise_std", sc.noise_std);
        kv(e, "lane_center", sc.lane_center);
        kv(e, "cd_threshold", sc.cd_threshold);
        kv(e, "max_steps", sc.max_steps);
    });
    section(e, "reward", [&] {
        const RewardConstants& k = sim.reward;
        kv(e, "v_min", k.v_min);
        kv(e, "v_target", k.v_target);
        kv(e, "v_max", k.v_max);
        kv(e, "r_max", k.r_max);
        kv(e, "l_max", k.l_max);
        kv(e, "P", k.P);
        kv(e, "w1", k.w1);
        kv(e, "w2", k.w2);
        kv(e, "w3", k.w3);
        kv(e, "w4", k.w4);
    });
    section(e, "simulation", [&] {
        kv(e, "estimator_window", sim.estimator_window);
        kv(e, "substeps", sim.substeps);
        kv(e, "a_max", sim.a_max);
        kv(e, "use_lut", sim.use_lut);
        kv(e, "lut_resolution", sim.lut_resolution);
        kv(e, "feasibility_density", sim.feasibility_density);
    });
    section(e, "sweep", [&] {
        e << YAML::Key << "sigma_phi" << YAML::Value << YAML::Flow << cfg.sweep.sigma_phi;
        e << YAML::Key << "queue_delay" << YAML::Value << YAML::Flow << cfg.sweep.queue_delay;
        kv(e, "queue_sigma_phi", cfg.sweep.queue_sigma_phi);
    });
    section(e, "calibrate", [&] {
        kv(e, "target", cfg.calibrate.target);
        kv(e, "tolerance", cfg.calibrate.tolerance);
        kv(e, "p_tx_lo", cfg.calibrate.p_tx_lo);
        kv(e, "p_tx_hi", cfg.calibrate.p_tx_hi);
        kv(e, "iterations", cfg.calibrate.iterations);
        kv(e, "far_r", cfg.calibrate.far_r);
    });
    section(e, "validate_monitor", [&] {
        kv(e, "trials", cfg.validate.trials);
        kv(e, "substeps", cfg.validate.substeps);
        kv(e, "lipschitz_scale", cfg.validate.lipschitz_scale);
    });
    e << YAML::EndMap;
    return std::string(e.c_str()) + "\n";
}

std::uint64_t config_hash(const ExperimentConfig& cfg) {
    // FNV-1a over the canonical dump, excluding where outputs go and how many threads run
    ExperimentConfig c = cfg;
    c.out_dir = ".";
    c.workers = 0;
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : dump_config(c)) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hash_hex(std::uint64_t h) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

SimContext validate_config(const ExperimentConfig& cfg) {
    check_plumbing(cfg);
    return prepare(cfg.sim);
}

Controller parse_controller(const std::string& spec) {
    // "lane:<offset>" or "avoiding:<offset>:<gain>"
    std::vector<std::string> parts;
    std::stringstream ss(spec);
    for (std::string p; std::getline(ss, p, ':');) parts.push_back(p);
    try {
        if (parts.size() == 2 && parts[0] == "lane") {
            LaneFollower lf;
            lf.lane_offset = std::stod(parts[1]);
            return lf;
        }
        if ((parts.size() == 2 || parts.size() == 3) && parts[0] == "avoiding") {
            AvoidingFollower af;
            af.base.lane_offset = std::stod(parts[1]);
            if (parts.size() == 3) af.avoid_gain = std::stod(parts[2]);
            return af;
        }
    } catch (const std::exception&) {
    }
    throw ConfigError("controller spec '" + spec + "': expected lane:<offset> or avoiding:<offset>[:<gain>]");
}

}  // namespace energyshield
