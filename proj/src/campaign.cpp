#include "slicesim/campaign.hpp"

#include <algorithm>
#include <filesystem>
#include <future>
#include <semaphore>
#include <stdexcept>

namespace slicesim::harness {

namespace {

// Bounded-concurrency fan-out; each job owns its config and output directory.
template <typename Job>
std::vector<std::future<void>> launch(std::vector<Job>& jobs, int workers) {
    static_assert(std::is_invocable_v<Job>);
    auto gate = std::make_shared<std::counting_semaphore<256>>(std::max(workers, 1));
    std::vector<std::future<void>> futures;
    futures.reserve(jobs.size());
    for (auto& job : jobs) {
        futures.push_back(std::async(std::launch::async, [&job, gate] {
            gate->acquire();
            try {
                job();
            } catch (...) {
                gate->release();
                throw;
            }
            gate->release();
        }));
    }
    return futures;
}

double quantile(const std::vector<double>& sorted, double q) {
    if (sorted.empty()) return 0.0;
    const double pos = q * (static_cast<double>(sorted.size()) - 1.0);
    const auto lo = static_cast<std::size_t>(pos);
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] * (1.0 - frac) + sorted[hi] * frac;
}

}  // namespace

std::vector<CampaignEntry> run_campaign(const RunConfig& base,
                                        const std::vector<std::string>& schemes,
                                        const std::vector<std::uint64_t>& seeds, int workers,
                                        const std::string& out_root) {
    std::vector<CampaignEntry> entries;
    for (const auto& scheme : schemes) {
        for (const auto seed : seeds) entries.push_back(CampaignEntry{scheme, seed, {}});
    }
    std::vector<std::function<void()>> jobs;
    jobs.reserve(entries.size());
    for (auto& entry : entries) {
        jobs.emplace_back([&entry, &base, &out_root] {
            RunConfig config = base;
            config.scheme = entry.scheme;
            config.seed = entry.seed;
            entry.result = run_simulation(config);
            if (!out_root.empty()) {
                const auto dir = std::filesystem::path(out_root) /
                                 (entry.scheme + "_s" + std::to_string(entry.seed));
                export_metrics(entry.result, config, dir.string());
            }
        });
    }
    for (auto& f : launch(jobs, workers)) f.get();
    return entries;
}

std::vector<StrategySummary> compare_initialization_strategies(
    const RunConfig& base, const std::vector<InitStrategy>& strategies,
    const std::vector<std::uint64_t>& seeds, int post_drift_windows, int workers) {
    struct Job {
        InitStrategy strategy;
        std::uint64_t seed;
        RunResult result;
    };
    std::vector<Job> runs;
    for (const auto strategy : strategies) {
        for (const auto seed : seeds) runs.push_back(Job{strategy, seed, {}});
    }
    std::vector<std::function<void()>> jobs;
    jobs.reserve(runs.size());
    for (auto& run : runs) {
        jobs.emplace_back([&run, &base] {
            RunConfig config = base;
            config.init_strategy = run.strategy;
            config.seed = run.seed;
            run.result = run_simulation(config);
        });
    }
    for (auto& f : launch(jobs, workers)) f.get();

    std::vector<StrategySummary> summaries;
    for (const auto strategy : strategies) {
        StrategySummary s;
        s.strategy = strategy;
        for (const auto& run : runs) {
            if (run.strategy != strategy) continue;
            const auto window_slots = base.window_slots();
            for (const auto drift_slot : run.result.drift_slots) {
                const auto first = drift_slot / window_slots + 1;
                for (auto w = first; w < first + post_drift_windows; ++w) {
                    if (w < static_cast<std::int64_t>(run.result.windows.size())) {
                        s.rewards.push_back(run.result.windows[w].norm_reward);
                    }
                }
            }
        }
        std::sort(s.rewards.begin(), s.rewards.end());
        s.sample_count = s.rewards.size();
        s.q1 = quantile(s.rewards, 0.25);
        s.median = quantile(s.rewards, 0.5);
        s.q3 = quantile(s.rewards, 0.75);
        const double fence = s.q1 - 1.5 * (s.q3 - s.q1);
        s.outliers = static_cast<int>(
            std::count_if(s.rewards.begin(), s.rewards.end(), [&](double r) { return r < fence; }));
        summaries.push_back(std::move(s));
    }
    return summaries;
}

double converged_reward(const RunResult& result, const RunConfig& config, int env_index,
                        int warmup_windows) {
    const auto windows_per_period = config.period_slots / config.window_slots();
    double sum = 0.0;
    std::int64_t count = 0;
    for (const auto& w : result.windows) {
        if (w.env_index != env_index) continue;
        if (w.window_index % windows_per_period < warmup_windows) continue;
        sum += w.norm_reward;
        ++count;
    }
    return count > 0 ? sum / static_cast<double>(count) : 0.0;
}

}  // namespace slicesim::harness
