#include "energyshield/orchestrator.hpp"

#include <algorithm>
#include <cmath>

#include "energyshield/errors.hpp"

namespace energyshield {

const char* policy_name(Policy p) {
    switch (p) {
        case Policy::LocalOnly: return "local";
        case Policy::Eager: return "eager";
        case Policy::Uniform: return "uniform";
    }
    return "?";
}

Policy parse_policy(const std::string& name) {
    if (name == "local" || name == "local_only" || name == "LocalOnly") return Policy::LocalOnly;
    if (name == "eager" || name == "Eager") return Policy::Eager;
    if (name == "uniform" || name == "Uniform") return Policy::Uniform;
    throw ConfigError("unknown policy '" + name + "' (expected local, eager or uniform)");
}

const char* window_kind_name(WindowKind k) {
    switch (k) {
        case WindowKind::Local: return "local";
        case WindowKind::Transmit: return "transmit";
        case WindowKind::Transit: return "transit";
        case WindowKind::Receive: return "receive";
        case WindowKind::Idle: return "idle";
        case WindowKind::Expiry: return "expiry";
    }
    return "?";
}

const char* decision_name(Decision d) {
    switch (d) {
        case Decision::None: return "none";
        case Decision::Local: return "local";
        case Decision::Offload: return "offload";
    }
    return "?";
}

const char* outcome_name(Outcome o) {
    switch (o) {
        case Outcome::Completed: return "completed";
        case Outcome::Collision: return "collision";
        case Outcome::CenterDevianceAbort: return "cd_abort";
        case Outcome::Timeout: return "timeout";
        case Outcome::InvariantBreach: return "invariant_breach";
    }
    return "?";
}

const char* phase_name(const OffloadPhase& p) {
    if (std::holds_alternative<StartOfPeriod>(p)) return "start";
    if (std::holds_alternative<Awaiting>(p)) return "awaiting";
    return "idle";
}

WindowKind parse_window_kind(const std::string& s) {
    for (auto k : {WindowKind::Local, WindowKind::Transmit, WindowKind::Transit, WindowKind::Receive, WindowKind::Idle,
                   WindowKind::Expiry})
        if (s == window_kind_name(k)) return k;
    throw ConfigError("unknown window kind '" + s + "'");
}

Decision parse_decision(const std::string& s) {
    for (auto d : {Decision::None, Decision::Local, Decision::Offload})
        if (s == decision_name(d)) return d;
    throw ConfigError("unknown decision '" + s + "'");
}

Outcome parse_outcome(const std::string& s) {
    for (auto o : {Outcome::Completed, Outcome::Collision, Outcome::CenterDevianceAbort, Outcome::Timeout,
                   Outcome::InvariantBreach})
        if (s == outcome_name(o)) return o;
    throw ConfigError("unknown outcome '" + s + "'");
}

SimContext prepare(const SimConfig& cfg) {
    cfg.vehicle.validate();
    cfg.barrier.validate();
    cfg.channel.validate();
    cfg.queue.validate();
    cfg.energy.validate();
    cfg.scenario.validate();
    if (std::abs(cfg.barrier.v_max - cfg.vehicle.v_max) > 1e-12)
        throw ConfigError("barrier.v_max must equal vehicle.v_max");
    if (cfg.estimator_window < 1) throw ConfigError("estimator.window must be at least 1");
    if (cfg.substeps < 1) throw ConfigError("simulation.substeps must be at least 1");
    if (!(cfg.a_max > 0.0)) throw ConfigError("simulation.a_max must be positive");

    SimContext ctx;
    ctx.cfg = cfg;
    ctx.feasibility = sigma_feasibility_check(cfg.barrier, cfg.vehicle, cfg.feasibility_density);
    if (!ctx.feasibility.feasible)
        throw ConfigError("barrier: sigma feasibility check failed at " + std::to_string(ctx.feasibility.failure_count) +
                          " grid points (worst margin " + std::to_string(ctx.feasibility.worst_margin) + ")");
    ctx.shield = compute_rho(cfg.barrier, cfg.vehicle);
    ctx.bounds = lipschitz_bounds(cfg.barrier, cfg.vehicle, default_domain(cfg.barrier, cfg.vehicle, cfg.a_max));
    if (!(ctx.bounds.L_h > 0.0) || !(ctx.bounds.L_f > 0.0)) throw ConfigError("monitor: degenerate Lipschitz bounds");
    ctx.queue = QueueSampler(cfg.queue);
    ctx.prior_queue_delay = expected_queue_delay(cfg.queue);
    if (cfg.use_lut) ctx.lut = build_lut(ctx.bounds, cfg.barrier, cfg.vehicle, cfg.lut_resolution);
    return ctx;
}

bool decide_offload(int delta_hat, int delta_max) { return delta_hat <= delta_max && delta_max >= 1; }

namespace {

int monitor_value(const SimContext& ctx, const VehicleState& prev, const ControlInput& u) {
    const double h = barrier_h(prev, ctx.cfg.barrier);
    if (!(h > 0.0)) return 0;
    const double f = flow_norm(prev, u, ctx.cfg.vehicle);
    if (ctx.lut) return ctx.lut->lookup(h, f);
    return delta_max_from(h, f, ctx.bounds, ctx.cfg.vehicle.T);
}

ControlInput shielded(const ControlInput& u, const WindowInputs& in, const SimContext& ctx, WindowResult& res) {
    if (!in.shield_active) return u;
    if (!(barrier_h(in.prev, ctx.cfg.barrier) > 0.0))
        throw InvariantBreach("shield invoked from a state outside the safe set");
    const ShieldOutcome o = shield_rho(in.prev, u, ctx.shield, in.latched_sign);
    res.override_sign = o.override_sign;
    return o.input;
}

ControlInput correct(const ControlInput& u, const WindowInputs& in, const SimContext& ctx, WindowResult& res) {
    ControlInput out = shielded(u, in, ctx, res);
    out.a = velocity_governor(in.current.v, out.a, ctx.cfg.vehicle, 1);
    return out;
}

}  // namespace

WindowResult step_period(const OffloadPhase& phase, const WindowInputs& in, const SimContext& ctx,
                         const std::function<ControlInput(const Pose&)>& controller, ResponseHistory& history,
                         Rng& channel_rng, const ResponseSource& edge) {
    const SimConfig& cfg = ctx.cfg;
    const double T = cfg.vehicle.T;
    WindowResult res;

    if (std::holds_alternative<StartOfPeriod>(phase)) {
        const ControlInput u = shielded(in.inherited, in, ctx, res);
        res.delta_max = monitor_value(ctx, in.prev, u);
        res.delta_hat = estimate_delta_hat(history, cfg.channel, ctx.prior_queue_delay, T);

        if (in.policy != Policy::LocalOnly && decide_offload(res.delta_hat, res.delta_max)) {
            // hold stays within the speed range for the whole deadline; |a| only shrinks so delta_max still holds
            const ControlInput hold{velocity_governor(in.current.v, u.a, cfg.vehicle, res.delta_max + 1), u.beta};
            const Response resp = edge ? edge(channel_rng) : realize_response_time(channel_rng, cfg.channel, ctx.queue);
            Awaiting w;
            w.delta_cnt = 1;
            w.deadline = res.delta_max;
            w.u_hold = hold;
            w.snapshot = in.current;
            w.realized_response = latency_to_samples(resp.latency, T);
            w.response = resp;
            res.next = w;
            res.applied = hold;
            res.energy = window_energy(EnergyMode::Transmit, cfg.energy, T, resp.tx_time);
            res.kind = WindowKind::Transmit;
            res.decision = Decision::Offload;
            res.realized_response = w.realized_response;
        } else {
            res.applied = {velocity_governor(in.current.v, u.a, cfg.vehicle, 1), u.beta};
            res.energy = window_energy(EnergyMode::LocalInference, cfg.energy, T);
            res.kind = WindowKind::Local;
            res.decision = Decision::Local;
            res.next_control = controller(in.current);
            res.next = StartOfPeriod{};
        }
        return res;
    }

    if (const auto* w = std::get_if<Awaiting>(&phase)) {
        res.realized_response = w->realized_response;
        if (w->delta_cnt == w->realized_response && w->realized_response <= w->deadline) {
            const ControlInput received = controller(w->snapshot);
            history.push(w->response.sample);
            res.applied = correct(received, in, ctx, res);
            res.energy = window_energy(EnergyMode::Idle, cfg.energy, T);
            res.kind = WindowKind::Receive;
            const int remaining = w->deadline - w->delta_cnt;
            if (in.policy == Policy::Uniform && remaining > 0) {
                res.next = UniformIdle{remaining, received};
            } else {
                res.next = StartOfPeriod{};
                res.next_control = received;
            }
        } else if (w->delta_cnt >= w->deadline) {
            history.push(w->response.sample);
            res.applied = w->u_hold;
            res.energy = window_energy(EnergyMode::LocalInference, cfg.energy, T);
            res.kind = WindowKind::Expiry;
            res.next_control = controller(in.current);
            res.next = StartOfPeriod{};
        } else {
            res.applied = w->u_hold;
            res.energy = window_energy(EnergyMode::Idle, cfg.energy, T);
            res.kind = WindowKind::Transit;
            Awaiting next = *w;
            ++next.delta_cnt;
            res.next = next;
        }
        return res;
    }

    const auto& idle = std::get<UniformIdle>(phase);
    res.applied = correct(idle.received_control, in, ctx, res);
    res.energy = window_energy(EnergyMode::Idle, cfg.energy, T);
    res.kind = WindowKind::Idle;
    if (idle.remaining <= 1) {
        res.next = StartOfPeriod{};
        res.next_control = idle.received_control;
    } else {
        res.next = UniformIdle{idle.remaining - 1, idle.received_control};
    }
    return res;
}

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
    // splitmix64 finalizer over the combined words
    std::uint64_t z = a + 0x9e3779b97f4a7c15ULL * (b + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::uint64_t episode_seed(std::uint64_t seed_base, int episode) {
    return mix_seed(seed_base, static_cast<std::uint64_t>(episode));
}

EpisodeRecord run_episode(const SimContext& ctx, const ScenarioConfig& scenario, Policy policy,
                          const Controller& controller, std::uint64_t seed, int episode, const ResponseSource& edge) {
    const SimConfig& cfg = ctx.cfg;
    const VehicleParams& vp = cfg.vehicle;
    EpisodeRecord rec;
    rec.seed = seed;
    rec.episode = episode;
    rec.policy = policy;
    rec.shield = scenario.shield;
    rec.noisy = scenario.noisy;
    rec.controller = controller_name(controller);

    Rng scenario_rng(mix_seed(seed, 1));
    Rng channel_rng(mix_seed(seed, 2));
    rec.obstacles = spawn_obstacles(scenario, scenario_rng);
    const std::span<const Obstacle> obstacles(rec.obstacles);

    auto nn = [&](const Pose& p) { return evaluate_controller(controller, p, scenario, obstacles, vp); };

    double speed = vp.v_max;
    if (const auto* lf = std::get_if<LaneFollower>(&controller)) speed = lf->target_speed;
    else speed = std::get<AvoidingFollower>(controller).base.target_speed;
    Pose pose{0.0, scenario.lane_center + controller_lane_offset(controller), 0.0,
              std::clamp(speed, kVelocityFloor, vp.v_max)};
    Pose prev_pose = pose;
    ControlInput inherited = nn(pose);
    OffloadPhase phase = StartOfPeriod{};
    ResponseHistory history(static_cast<std::size_t>(cfg.estimator_window));
    int latch = 0;
    int latch_obstacle = -1;
    rec.rows.reserve(1024);

    for (int n = 0;; ++n) {
        const NearestObstacle near = nearest_obstacle(pose, obstacles);
        if (near.state.r <= cfg.barrier.r_bar) {
            rec.outcome = Outcome::Collision;
            break;
        }
        if (pose.x >= scenario.track_length) {
            rec.outcome = Outcome::Completed;
            break;
        }
        if (std::abs(pose.y - scenario.lane_center) > scenario.cd_threshold) {
            rec.outcome = Outcome::CenterDevianceAbort;
            break;
        }
        if (n >= scenario.max_steps) {
            rec.outcome = Outcome::Timeout;
            break;
        }
        const double h = barrier_h(near.state, cfg.barrier);
        if (scenario.shield && h < 0.0) {
            rec.outcome = Outcome::InvariantBreach;
            rec.note = "h < 0 at step " + std::to_string(n);
            break;
        }

        WindowInputs in;
        in.policy = policy;
        in.shield_active = scenario.shield;
        in.current = pose;
        const NearestObstacle prev_near = nearest_obstacle(prev_pose, obstacles);
        in.prev = prev_near.state;
        in.prev_obstacle = prev_near.index;
        in.inherited = inherited;
        in.latched_sign = prev_near.index == latch_obstacle ? latch : 0;

        WindowResult res;
        try {
            res = step_period(phase, in, ctx, nn, history, channel_rng, edge);
        } catch (const InvariantBreach& e) {
            rec.outcome = Outcome::InvariantBreach;
            rec.note = e.what();
            break;
        } catch (const EmptySafeSet& e) {
            rec.outcome = Outcome::InvariantBreach;
            rec.note = e.what();
            break;
        }

        StepRow row;
        row.n = n;
        row.pose = pose;
        row.obstacle = near.index;
        row.r = near.state.r;
        row.xi = near.state.xi;
        row.h = h;
        row.delta_max = res.delta_max;
        row.delta_hat = res.delta_hat;
        row.decision = res.decision;
        row.phase = phase_name(phase);
        row.applied = res.applied;
        row.energy = res.energy;
        row.kind = res.kind;
        row.realized_response = res.realized_response;
        rec.rows.push_back(row);

        if (res.next_control) inherited = *res.next_control;
        // held windows never consult the shield and leave the latch alone
        if (res.kind != WindowKind::Transit && res.kind != WindowKind::Expiry) {
            latch = res.override_sign;
            latch_obstacle = prev_near.index;
        }
        phase = res.next;
        prev_pose = pose;
        pose = step(pose, res.applied, vp, cfg.substeps);
    }
    return rec;
}

double step_reward(double v, double l_center, double heading, double r, const RewardConstants& k) {
    double f1 = 1.0;
    if (v < k.v_min) f1 = v / k.v_min;
    else if (v > k.v_target) f1 = 1.0 - (v - k.v_target) / (k.v_max - k.v_target);
    const double f2 = std::max(1.0 - l_center / k.l_max, 0.0);
    const double f3 = std::max(1.0 - std::abs(heading / (kPi / 9.0)), 0.0);
    const double f4 = std::max(std::min(r / k.r_max, 1.0), 0.0);
    return k.w1 * f1 + k.w2 * f2 + k.w3 * f3 + k.w4 * f4;
}

double reward(const EpisodeRecord& rec, const RewardConstants& k) {
    double total = 0.0;
    for (const auto& row : rec.rows)
        total += step_reward(row.pose.v, std::abs(row.pose.y), wrap_angle(row.pose.psi), row.r, k);
    switch (rec.outcome) {
        case Outcome::Completed: total += k.P; break;
        case Outcome::Collision:
        case Outcome::CenterDevianceAbort:
        case Outcome::InvariantBreach: total -= k.P; break;
        case Outcome::Timeout: break;
    }
    return total;
}

double center_deviance(const EpisodeRecord& rec, double lane_center) {
    if (rec.rows.empty()) return 0.0;
    double s = 0.0;
    for (const auto& row : rec.rows) s += std::abs(row.pose.y - lane_center);
    return s / rec.rows.size();
}

}  // namespace energyshield
