#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "energyshield/edge.hpp"
#include "energyshield/kbm.hpp"

namespace energyshield {

struct ScenarioConfig {
    double track_length = 100.0;
    int obstacle_count = 4;
    double first_obstacle_at = 40.0;
    double longitudinal_jitter = 10.0;  // uniform +-
    double min_separation = 10.0;       // between consecutive obstacles, jitter redrawn until met
    double noise_std = 1.5;             // applied on both axes when noisy
    double lane_center = 0.0;
    double cd_threshold = 10.0;
    int max_steps = 3000;
    bool shield = true;  // S
    bool noisy = false;  // N
    void validate() const;
};

using Obstacle = Point2;

std::vector<Obstacle> spawn_obstacles(const ScenarioConfig& sc, Rng& rng);

struct LaneFollower {
    double lane_offset = 0.5;
    double target_speed = 40.0 / 3.6;
    double lookahead = 8.0;
    double heading_gain = 1.0;
    double speed_gain = 1.0;
    double a_max = 3.0;
};

struct AvoidingFollower {
    LaneFollower base{};
    double avoid_gain = 5.0;    // lateral bias at the obstacle, meters
    double avoid_range = 15.0;  // longitudinal reach of the bias
};

using Controller = std::variant<LaneFollower, AvoidingFollower>;

ControlInput evaluate_controller(const Controller& c, const Pose& pose, const ScenarioConfig& sc,
                                 std::span<const Obstacle> obstacles, const VehicleParams& params);

std::string controller_name(const Controller& c);
double controller_lane_offset(const Controller& c);

struct NearestObstacle {
    int index = -1;
    VehicleState state{};
};

NearestObstacle nearest_obstacle(const Pose& pose, std::span<const Obstacle> obstacles);

}  // namespace energyshield
