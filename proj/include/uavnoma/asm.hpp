#pragma once

// Alternating optimization: trajectory step with powers fixed, then power
// step with the trajectory fixed, until both blocks stop moving.

#include "uavnoma/model.hpp"

#include <string>

namespace uavnoma {

enum class OfflineMode { Fixed, MobilePredictable };

// Each relaxation halves every C_rsv.
inline constexpr int kMaxQosRelaxations = 3;

// Runs `step(scale)` and on InfeasibleError halves `scale`, at most
// kMaxQosRelaxations times in total across calls sharing `relaxations`.
// Rethrows with the failing constraint family once the budget is spent.
template <typename Step>
auto with_qos_relaxation(double& scale, int& relaxations, Step&& step) -> decltype(step(scale)) {
    for (;;) {
        try {
            return step(scale);
        } catch (const InfeasibleError& e) {
            if (relaxations >= kMaxQosRelaxations)
                throw InfeasibleError(e.family(), std::string(e.what()) + " (C_rsv already halved " +
                                                      std::to_string(relaxations) + " times)");
            scale *= 0.5;
            ++relaxations;
        }
    }
}

RunResult run_offline(const ScenarioConfig& cfg, const UserTrace& trace, OfflineMode mode);

}  // namespace uavnoma
