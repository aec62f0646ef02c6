#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "slicesim/sim.hpp"

namespace slicesim::harness {

struct CampaignEntry {
    std::string scheme;
    std::uint64_t seed = 0;
    RunResult result;
};

// Runs the scheme x seed grid, one independent deterministic run per worker.
// When out_root is nonempty each run's metrics land in out_root/<scheme>_s<seed>.
std::vector<CampaignEntry> run_campaign(const RunConfig& base,
                                        const std::vector<std::string>& schemes,
                                        const std::vector<std::uint64_t>& seeds, int workers,
                                        const std::string& out_root = "");

struct StrategySummary {
    InitStrategy strategy = InitStrategy::nearest;
    std::size_t sample_count = 0;
    double q1 = 0.0;
    double median = 0.0;
    double q3 = 0.0;
    int outliers = 0;  // boxplot rule: below q1 - 1.5 IQR
    std::vector<double> rewards;
};

// Matched campaigns differing only in the initialization strategy; collects
// the normalized reward of the windows following each declared drift.
std::vector<StrategySummary> compare_initialization_strategies(
    const RunConfig& base, const std::vector<InitStrategy>& strategies,
    const std::vector<std::uint64_t>& seeds, int post_drift_windows, int workers);

// Mean converged normalized reward per environment index: windows belonging
// to periods running that environment, skipping warmup_windows at each
// period start.
double converged_reward(const RunResult& result, const RunConfig& config, int env_index,
                        int warmup_windows);

}  // namespace slicesim::harness
