#pragma once

#include <cmath>

#include "opsel/model.hpp"

namespace opsel::testing {

inline constexpr OperatorId kOp1{1};
inline constexpr OperatorId kOp2{2};
inline constexpr OperatorId kOp3{3};

// Default scenario shortened for unit tests.
inline ScenarioConfig short_scenario(double horizon = 20000.0, double warmup = 2000.0)
{
    auto cfg = default_scenario();
    cfg.sim.horizon = horizon;
    cfg.sim.warmup = warmup;
    cfg.sim.replications = 2;
    return cfg;
}

// Every operator at the same per-slot offered load.
inline void set_uniform_load(ScenarioConfig& cfg, double load)
{
    for (auto& op : cfg.operators)
        op.arrival_rate = arrival_rate_for_load(load, op.capacity, cfg.session_rate(op), cfg.service.mean_duration);
}

}  // namespace opsel::testing
