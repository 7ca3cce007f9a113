#pragma once

// User movement: a lattice-direction random walk inside the coverage disk
// with specular reflection at the rim, plus Poisson group-size variation.
//
// Every user owns an RNG stream derived from (seed, group, user id), so
// adding users or groups never changes the draws of existing users.

#include "uavnoma/model.hpp"

#include <array>
#include <cstdint>
#include <random>
#include <vector>

namespace uavnoma {

using Rng = std::mt19937_64;

struct MobilityConfig {
    double speed_min = 0.0;  // v1 [m/s]
    double speed_max = 0.0;  // v2 [m/s]
    double coverage_radius = 50.0;
    double lambda = 0.0;  // Poisson mean group size, 0 disables variation
    double slot_duration = 1.0;

    static const std::array<double, 8>& directions();
    static MobilityConfig from(const ScenarioConfig& cfg, double v1, double v2, double lambda);
    void validate() const;
};

// How initial users are drawn. PerGroup: stream (g, u). Pool: all users
// drawn as one pool and split into consecutive blocks, so regrouping the
// same pool keeps positions.
enum class UserLayout { PerGroup, Pool };

Rng user_stream(std::uint64_t seed, int group, int user);
Rng group_size_stream(std::uint64_t seed, int group);

Vec2 uniform_in_disk(double radius, Rng& rng);

// Moves `displacement` from `from`, reflecting specularly off the circle.
Vec2 reflect_in_disk(const Vec2& from, const Vec2& displacement, double radius);

// Displacement speed * slot_duration along `direction` (radians).
Vec2 step_user(const Vec2& position, double direction, double speed, const MobilityConfig& m);
// Draws direction uniformly from the 8-angle set and speed on [v1, v2].
Vec2 step_user(const Vec2& position, const MobilityConfig& m, Rng& rng);

// Draws a Poisson(lambda) target clamped to >= 1.
int draw_group_size(double lambda, Rng& rng);

struct GroupSizeChange {
    std::vector<int> sizes;
    std::vector<int> arrivals;    // per group
    std::vector<int> departures;  // per group
};

GroupSizeChange vary_group_sizes(const std::vector<int>& current, double lambda, std::vector<Rng>& group_rngs);

// positions[s][g][u] for s = 0..N-1. `initial`, when given, fixes slot-0
// positions instead of drawing them.
UserTrace generate_trace(const ScenarioConfig& cfg, const MobilityConfig& m, std::uint64_t seed,
                         UserLayout layout = UserLayout::PerGroup,
                         const std::vector<std::vector<Vec2>>* initial = nullptr);

}  // namespace uavnoma
