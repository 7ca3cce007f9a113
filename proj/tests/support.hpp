#pragma once

#include "uavnoma/model.hpp"

#include <random>
#include <vector>

namespace test {

using uavnoma::ScenarioConfig;
using uavnoma::Vec2;

inline ScenarioConfig make_config(int groups, int users, int slots, double horizon, Vec2 start, Vec2 end,
                                  double c_rsv_bits = 0.0) {
    ScenarioConfig cfg;
    cfg.users_per_group.assign(groups, users);
    cfg.num_slots = slots;
    cfg.horizon = horizon;
    cfg.start_point = start;
    cfg.end_point = end;
    cfg.set_uniform_min_rate(uavnoma::bits_to_nats(c_rsv_bits));
    cfg.coord_offset = 2.0 * cfg.coverage_radius + 1.0;
    return cfg;
}

// Users uniform in a square inscribed in the coverage disk.
inline std::vector<std::vector<Vec2>> random_users(const ScenarioConfig& cfg, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    const double a = cfg.coverage_radius / std::sqrt(2.0);
    std::uniform_real_distribution<double> d(-a, a);
    std::vector<std::vector<Vec2>> users(cfg.num_groups());
    for (int g = 0; g < cfg.num_groups(); ++g)
        for (int u = 0; u < cfg.users_per_group[g]; ++u) users[g].emplace_back(d(rng), d(rng));
    return users;
}

inline double rel_err(double a, double b) { return std::abs(a - b) / std::max(1e-300, std::abs(b)); }

}  // namespace test
