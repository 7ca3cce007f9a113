#pragma once

// Scenario-level orchestration: trace generation for a seed, mode
// dispatch, and parameter sweeps.

#include "uavnoma/mobility.hpp"
#include "uavnoma/model.hpp"
#include "uavnoma/online.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace uavnoma {

enum class RunMode { OfflineFixed, OfflineMobile, Online };

std::string to_string(RunMode mode);
RunMode parse_run_mode(const std::string& text);

struct Scenario {
    ScenarioConfig config;
    double speed_min = 0.0;  // user speed range [m/s]
    double speed_max = 0.0;
    double lambda = 0.0;     // Poisson group size mean, 0 = fixed sizes
    UserLayout layout = UserLayout::PerGroup;
    std::vector<std::vector<Vec2>> users;  // explicit slot-0 positions; empty = random
    RunMode mode = RunMode::OfflineFixed;
    std::string sweep_param;
    std::vector<double> sweep_values;

    MobilityConfig mobility(RunMode mode) const;
};

struct RunOutput {
    RunResult result;
    UserTrace trace;
};

UserTrace scenario_trace(const Scenario& sc, RunMode mode, std::uint64_t seed);

RunOutput run_scenario(const Scenario& sc, RunMode mode, std::uint64_t seed, const OnlineOptions& opt = {});

// Parameter names: T, N, U_g, G, p_max, lambda. N keeps S_max fixed by
// rescaling T; G keeps the total user count and regroups one user pool.
Scenario apply_parameter(const Scenario& sc, const std::string& param, double value);

struct SweepRow {
    double value = 0.0;
    std::uint64_t seed = 0;
    double objective = 0.0;  // nats
    bool converged = false;
    bool qos_relaxed = false;
    int iterations = 0;
    std::string error;  // empty on success
};

std::vector<SweepRow> sweep(const Scenario& sc, const std::string& param, const std::vector<double>& values,
                            const std::vector<std::uint64_t>& seeds, RunMode mode, const OnlineOptions& opt = {});

}  // namespace uavnoma
