#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "energyshield/barrier.hpp"
#include "energyshield/edge.hpp"
#include "energyshield/kbm.hpp"
#include "energyshield/monitor.hpp"
#include "energyshield/scenario.hpp"
#include "energyshield/shield.hpp"

namespace energyshield {

enum class Policy { LocalOnly, Eager, Uniform };

const char* policy_name(Policy p);
Policy parse_policy(const std::string& name);

struct StartOfPeriod {};

struct Awaiting {
    int delta_cnt = 1;
    int deadline = 0;
    ControlInput u_hold{};
    Pose snapshot{};  // period-start pose handed to the edge
    int realized_response = 1;
    Response response{};
};

struct UniformIdle {
    int remaining = 0;
    ControlInput received_control{};
};

using OffloadPhase = std::variant<StartOfPeriod, Awaiting, UniformIdle>;

enum class WindowKind { Local, Transmit, Transit, Receive, Idle, Expiry };
enum class Decision { None, Local, Offload };
enum class Outcome { Completed, Collision, CenterDevianceAbort, Timeout, InvariantBreach };

const char* window_kind_name(WindowKind k);
const char* decision_name(Decision d);
const char* outcome_name(Outcome o);
const char* phase_name(const OffloadPhase& p);
WindowKind parse_window_kind(const std::string& s);
Decision parse_decision(const std::string& s);
Outcome parse_outcome(const std::string& s);

struct RewardConstants {
    double v_min = 35.0 / 3.6;
    double v_target = 40.0 / 3.6;
    double v_max = 45.0 / 3.6;
    double r_max = 20.0;
    double l_max = 10.0;
    double P = 100.0;
    double w1 = 0.25, w2 = 0.25, w3 = 0.25, w4 = 0.25;
};

struct SimConfig {
    VehicleParams vehicle{};
    BarrierConfig barrier{};
    ChannelConfig channel{};
    QueueConfig queue{};
    EnergyConfig energy{};
    ScenarioConfig scenario{};
    RewardConstants reward{};
    int estimator_window = 5;
    int substeps = 10;
    double a_max = 3.0;
    bool use_lut = false;
    int lut_resolution = 256;
    int feasibility_density = 48;
};

// derived, immutable state shared by all episodes of a configuration
struct SimContext {
    SimConfig cfg{};
    ShieldConfig shield{};
    LipschitzBounds bounds{};
    QueueSampler queue{};
    double prior_queue_delay = 0.0;
    std::optional<DeltaMaxTable> lut;
    FeasibilityReport feasibility{};
};

// validates everything a run depends on; throws ConfigError
SimContext prepare(const SimConfig& cfg);

bool decide_offload(int delta_hat, int delta_max);

// source of edge responses; replaceable in tests
using ResponseSource = std::function<Response(Rng&)>;

struct WindowInputs {
    Policy policy = Policy::LocalOnly;
    bool shield_active = true;
    Pose current{};        // x[n]
    VehicleState prev{};   // nearest-obstacle polar state at x[n-1]
    ControlInput inherited{};  // control computed for this window before correction
    int prev_obstacle = -1;
    int latched_sign = 0;      // full-lock direction carried from the previous window
};

struct WindowResult {
    OffloadPhase next{};
    ControlInput applied{};
    double energy = 0.0;
    WindowKind kind = WindowKind::Local;
    Decision decision = Decision::None;
    int delta_max = -1;
    int delta_hat = -1;
    int realized_response = -1;
    int override_sign = 0;
    // control the next StartOfPeriod inherits, when this window produced one
    std::optional<ControlInput> next_control;
};

WindowResult step_period(const OffloadPhase& phase, const WindowInputs& in, const SimContext& ctx,
                         const std::function<ControlInput(const Pose&)>& controller, ResponseHistory& history,
                         Rng& channel_rng, const ResponseSource& edge);

struct StepRow {
    int n = 0;
    Pose pose{};
    int obstacle = -1;
    double r = 0.0;
    double xi = 0.0;
    double h = 0.0;
    int delta_max = -1;
    int delta_hat = -1;
    Decision decision = Decision::None;
    std::string phase;
    ControlInput applied{};
    double energy = 0.0;
    WindowKind kind = WindowKind::Local;
    int realized_response = -1;
};

struct EpisodeRecord {
    std::uint64_t seed = 0;
    int episode = 0;
    Policy policy = Policy::LocalOnly;
    bool shield = true;
    bool noisy = false;
    std::string controller;
    std::vector<Obstacle> obstacles;
    std::vector<StepRow> rows;
    Outcome outcome = Outcome::Timeout;
    std::string note;
};

EpisodeRecord run_episode(const SimContext& ctx, const ScenarioConfig& scenario, Policy policy,
                          const Controller& controller, std::uint64_t seed, int episode = 0,
                          const ResponseSource& edge = {});

double reward(const EpisodeRecord& rec, const RewardConstants& k);
double step_reward(double v, double l_center, double heading, double r, const RewardConstants& k);
double center_deviance(const EpisodeRecord& rec, double lane_center = 0.0);

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b);
std::uint64_t episode_seed(std::uint64_t seed_base, int episode);

}  // namespace energyshield
