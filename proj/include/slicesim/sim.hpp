#pragma once

#include <functional>

#include "slicesim/config.hpp"
#include "slicesim/metrics.hpp"

namespace slicesim::harness {

using WindowCallback = std::function<void(const MetricsWindow&)>;

// Drives the per-slot loop: traffic, plane scheduling, DQN action or greedy
// split, link service, sample transport, learner updates, drift tracking and
// continual-learning policy selection. Bit-reproducible for a fixed config.
RunResult run_simulation(const RunConfig& config, const WindowCallback& on_window = {});

}  // namespace slicesim::harness
