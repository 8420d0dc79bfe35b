#include "energyshield/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "energyshield/errors.hpp"

namespace energyshield {

void ScenarioConfig::validate() const {
    if (!(track_length > 0.0)) throw ConfigError("scenario: track_length must be positive");
    if (obstacle_count < 0) throw ConfigError("scenario: obstacle_count must be nonnegative");
    if (!(first_obstacle_at >= 0.0 && first_obstacle_at <= track_length))
        throw ConfigError("scenario: first_obstacle_at must lie on the track");
    if (!(longitudinal_jitter >= 0.0)) throw ConfigError("scenario: longitudinal_jitter must be nonnegative");
    if (!(min_separation >= 0.0)) throw ConfigError("scenario: min_separation must be nonnegative");
    if (obstacle_count > 1 && min_separation > (track_length - first_obstacle_at) / obstacle_count + longitudinal_jitter)
        throw ConfigError("scenario: min_separation cannot be met with the given spacing and jitter");
    if (!(noise_std >= 0.0)) throw ConfigError("scenario: noise_std must be nonnegative");
    if (!(cd_threshold > 0.0)) throw ConfigError("scenario: cd_threshold must be positive");
    if (max_steps < 1) throw ConfigError("scenario: max_steps must be positive");
}

std::vector<Obstacle> spawn_obstacles(const ScenarioConfig& sc, Rng& rng) {
    std::uniform_real_distribution<double> jitter(-sc.longitudinal_jitter, sc.longitudinal_jitter);
    std::normal_distribution<double> noise(0.0, sc.noise_std);
    std::vector<Obstacle> out;
    out.reserve(static_cast<std::size_t>(sc.obstacle_count));
    const double spacing = sc.obstacle_count > 0 ? (sc.track_length - sc.first_obstacle_at) / sc.obstacle_count : 0.0;
    for (int i = 0; i < sc.obstacle_count; ++i) {
        const double nominal = sc.first_obstacle_at + spacing * i;
        Obstacle o;
        // redraw until the final position keeps its distance from the previous obstacle
        for (int tries = 0; tries < 64; ++tries) {
            const double dj = jitter(rng);
            const double nx = noise(rng);
            const double ny = noise(rng);
            o = {nominal + (i > 0 ? dj : 0.0), sc.lane_center};
            if (sc.noisy) {
                o.x += nx;
                o.y += ny;
            }
            o.x = std::clamp(o.x, sc.first_obstacle_at, sc.track_length);
            if (out.empty() || o.x - out.back().x >= sc.min_separation) break;
        }
        if (!out.empty() && o.x - out.back().x < sc.min_separation)
            o.x = std::min(out.back().x + sc.min_separation, sc.track_length);
        out.push_back(o);
    }
    return out;
}

namespace {

ControlInput follow(const LaneFollower& c, double target_y, const Pose& pose, const VehicleParams& params) {
    const double bmax = params.beta_max();
    const double course = std::atan2(target_y - pose.y, c.lookahead);
    const double beta = std::clamp(c.heading_gain * wrap_angle(course - pose.psi), -bmax, bmax);
    const double a = std::clamp(c.speed_gain * (c.target_speed - pose.v), -c.a_max, c.a_max);
    return {a, beta};
}

}  // namespace

ControlInput evaluate_controller(const Controller& c, const Pose& pose, const ScenarioConfig& sc,
                                 std::span<const Obstacle> obstacles, const VehicleParams& params) {
    if (const auto* lf = std::get_if<LaneFollower>(&c)) return follow(*lf, sc.lane_center + lf->lane_offset, pose, params);

    const auto& af = std::get<AvoidingFollower>(c);
    double target = sc.lane_center + af.base.lane_offset;
    double best = std::numeric_limits<double>::infinity();
    for (const auto& o : obstacles) {
        const double dx = o.x - pose.x;
        if (dx < -2.0 || dx > af.avoid_range) continue;
        const double d = std::hypot(dx, o.y - pose.y);
        if (d >= best) continue;
        best = d;
        const double side = pose.y >= o.y ? 1.0 : -1.0;
        const double w = 1.0 - std::max(dx, 0.0) / af.avoid_range;
        target = sc.lane_center + af.base.lane_offset + side * af.avoid_gain * w;
    }
    return follow(af.base, target, pose, params);
}

std::string controller_name(const Controller& c) {
    char buf[96];
    if (const auto* lf = std::get_if<LaneFollower>(&c)) {
        std::snprintf(buf, sizeof buf, "lane_follower_%g", lf->lane_offset);
    } else {
        const auto& af = std::get<AvoidingFollower>(c);
        std::snprintf(buf, sizeof buf, "avoiding_follower_%g_%g", af.base.lane_offset, af.avoid_gain);
    }
    return buf;
}

double controller_lane_offset(const Controller& c) {
    if (const auto* lf = std::get_if<LaneFollower>(&c)) return lf->lane_offset;
    return std::get<AvoidingFollower>(c).base.lane_offset;
}

NearestObstacle nearest_obstacle(const Pose& pose, std::span<const Obstacle> obstacles) {
    NearestObstacle out;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < obstacles.size(); ++i) {
        const double d = std::hypot(pose.x - obstacles[i].x, pose.y - obstacles[i].y);
        if (d < best) {
            best = d;
            out.index = static_cast<int>(i);
        }
    }
    if (out.index >= 0) out.state = relative_state(pose, obstacles[static_cast<std::size_t>(out.index)]);
    else out.state = {0.0, std::numeric_limits<double>::infinity(), pose.v};
    return out;
}

}  // namespace energyshield
