#include "uavnoma/runner.hpp"

#include "uavnoma/asm.hpp"

#include <algorithm>
#include <cmath>

namespace uavnoma {

namespace {

// Reshapes C_rsv to the current G x N, repeating the last known row/column.
void resize_min_rate(ScenarioConfig& cfg) {
    const auto old = cfg.min_rate;
    cfg.min_rate.assign(cfg.num_groups(), std::vector<double>(cfg.num_slots, 0.0));
    if (old.empty() || old[0].empty()) return;
    for (int g = 0; g < cfg.num_groups(); ++g) {
        const auto& row = old[std::min<std::size_t>(g, old.size() - 1)];
        for (int s = 0; s < cfg.num_slots; ++s) cfg.min_rate[g][s] = row[std::min<std::size_t>(s, row.size() - 1)];
    }
}

int as_count(const std::string& param, double value) {
    const double r = std::round(value);
    if (r < 1.0 || std::abs(r - value) > 1e-9) throw ScenarioError(param + ": needs a positive integer value");
    return static_cast<int>(r);
}

}  // namespace

std::string to_string(RunMode mode) {
    switch (mode) {
        case RunMode::OfflineFixed: return "offline-fixed";
        case RunMode::OfflineMobile: return "offline-mobile";
        case RunMode::Online: return "online";
    }
    return "unknown";
}

RunMode parse_run_mode(const std::string& text) {
    if (text == "offline-fixed") return RunMode::OfflineFixed;
    if (text == "offline-mobile") return RunMode::OfflineMobile;
    if (text == "online") return RunMode::Online;
    throw ScenarioError("mode: expected offline-fixed, offline-mobile or online, got '" + text + "'");
}

MobilityConfig Scenario::mobility(RunMode mode) const {
    if (mode == RunMode::OfflineFixed) return MobilityConfig::from(config, 0.0, 0.0, 0.0);
    return MobilityConfig::from(config, speed_min, speed_max, lambda);
}

UserTrace scenario_trace(const Scenario& sc, RunMode mode, std::uint64_t seed) {
    if (!sc.users.empty()) {
        if (static_cast<int>(sc.users.size()) != sc.config.num_groups())
            throw ScenarioError("users: needs one list per group");
        for (int g = 0; g < sc.config.num_groups(); ++g)
            if (static_cast<int>(sc.users[g].size()) != sc.config.users_per_group[g])
                throw ScenarioError("users: group " + std::to_string(g + 1) + " size differs from users_per_group");
        MobilityConfig m = sc.mobility(mode);
        m.lambda = 0.0;
        return generate_trace(sc.config, m, seed, sc.layout, &sc.users);
    }
    return generate_trace(sc.config, sc.mobility(mode), seed, sc.layout);
}

RunOutput run_scenario(const Scenario& sc, RunMode mode, std::uint64_t seed, const OnlineOptions& opt) {
    ScenarioConfig cfg = sc.config;
    cfg.rng_seed = seed;
    cfg.validate();
    RunOutput out;
    out.trace = scenario_trace(sc, mode, seed);
    switch (mode) {
        case RunMode::OfflineFixed: out.result = run_offline(cfg, out.trace, OfflineMode::Fixed); break;
        case RunMode::OfflineMobile: out.result = run_offline(cfg, out.trace, OfflineMode::MobilePredictable); break;
        case RunMode::Online: out.result = run_online(cfg, out.trace, opt); break;
    }
    out.result.seed = seed;
    return out;
}

Scenario apply_parameter(const Scenario& sc, const std::string& param, double value) {
    Scenario next = sc;
    ScenarioConfig& cfg = next.config;
    if (param == "T" || param == "horizon") {
        cfg.horizon = value;
    } else if (param == "N" || param == "num_slots") {
        const double s_max = cfg.step_max();
        cfg.num_slots = as_count(param, value);
        cfg.horizon = s_max * cfg.num_slots / cfg.v_max;
        resize_min_rate(cfg);
    } else if (param == "U_g" || param == "users_per_group") {
        if (!sc.users.empty()) throw ScenarioError("U_g sweep needs randomly placed users");
        cfg.users_per_group.assign(cfg.num_groups(), as_count(param, value));
    } else if (param == "G" || param == "num_groups") {
        if (!sc.users.empty()) throw ScenarioError("G sweep needs randomly placed users");
        int total = 0;
        for (int u : cfg.users_per_group) total += u;
        const int G = as_count(param, value);
        if (total % G != 0)
            throw ScenarioError("G: total user count " + std::to_string(total) + " is not divisible by " +
                                std::to_string(G));
        cfg.users_per_group.assign(G, total / G);
        resize_min_rate(cfg);
        next.layout = UserLayout::Pool;
    } else if (param == "p_max") {
        cfg.p_max = value;
    } else if (param == "lambda") {
        next.lambda = value;
    } else {
        throw ScenarioError("sweep parameter '" + param + "' is not one of T, N, U_g, G, p_max, lambda");
    }
    cfg.validate();
    return next;
}

std::vector<SweepRow> sweep(const Scenario& sc, const std::string& param, const std::vector<double>& values,
                            const std::vector<std::uint64_t>& seeds, RunMode mode, const OnlineOptions& opt) {
    std::vector<SweepRow> rows;
    for (double v : values) {
        for (std::uint64_t seed : seeds) {
            SweepRow row;
            row.value = v;
            row.seed = seed;
            try {
                const Scenario s = apply_parameter(sc, param, v);
                const RunOutput out = run_scenario(s, mode, seed, opt);
                row.objective = out.result.objective();
                row.converged = out.result.converged;
                row.qos_relaxed = out.result.qos_relaxed;
                row.iterations = out.result.iterations;
            } catch (const std::exception& e) {
                row.error = e.what();
            }
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

}  // namespace uavnoma
