#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "slicesim/config.hpp"

namespace slicesim::harness {

inline constexpr int kHistogramBins = 101;  // 1 ms bins up to 100 ms, last bin open-ended

// One second of aggregated counters.
struct MetricsWindow {
    std::int64_t window_index = 0;
    int env_index = 0;
    double norm_reward = 0.0;
    std::array<std::int64_t, 2> generated{0, 0};
    std::array<std::int64_t, 2> served{0, 0};
    std::array<std::int64_t, 2> rejected{0, 0};
    std::array<std::int64_t, 2> dropped{0, 0};
    double utility_sum = 0.0;
    std::int64_t delivered_samples = 0;
    double rho = 0.0;
    double epsilon = 0.0;
    int queue_len1 = 0;
    int queue_len2 = 0;
    std::vector<double> reward_losses;  // learning slots only
};

// Delivered utility over packets generated; a window with no arrivals counts
// as perfect service. Capped at 1 when a backlog drains into the window.
double normalized_reward(double utility_sum, std::int64_t packets_generated);

struct PeriodHistogram {
    int period_index = 0;
    int env_index = 0;
    std::array<std::int64_t, kHistogramBins> bins{};
};

struct SliceConservation {
    std::int64_t arrived = 0;
    std::int64_t served = 0;
    std::int64_t rejected = 0;
    std::int64_t dropped = 0;
    std::int64_t final_queue = 0;
    bool balanced() const { return arrived == served + rejected + dropped + final_queue; }
};

struct SampleConservation {
    std::int64_t offered = 0;
    std::int64_t accepted = 0;
    std::int64_t rejected = 0;
    std::int64_t delivered = 0;
    std::int64_t pending = 0;
    std::int64_t flushed = 0;
    bool balanced() const {
        return offered == accepted + rejected && accepted == delivered + pending + flushed;
    }
};

struct RunResult {
    std::vector<MetricsWindow> windows;
    std::vector<PeriodHistogram> histograms;
    std::array<SliceConservation, 2> conservation;
    SampleConservation samples;
    std::vector<std::int64_t> drift_slots;  // slots where a context change was declared
    std::int64_t gradient_steps = 0;
};

// Writes windows.csv, per-period latency histograms, the reward-loss CDF and
// a manifest record into the directory.
void export_metrics(const RunResult& result, const RunConfig& config,
                    const std::string& directory);

std::string windows_csv_header();

}  // namespace slicesim::harness
