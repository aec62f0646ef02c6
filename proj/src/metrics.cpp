#include "slicesim/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace slicesim::harness {

namespace fs = std::filesystem;

double normalized_reward(double utility_sum, std::int64_t packets_generated) {
    if (packets_generated <= 0) return 1.0;
    return std::min(1.0, utility_sum / static_cast<double>(packets_generated));
}

std::string windows_csv_header() {
    return "time_s,scheme,env_index,norm_reward,rej1_per_ms,drop2_per_ms,samples_per_s,rho,"
           "epsilon,q1,q2";
}

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

}  // namespace

void export_metrics(const RunResult& result, const RunConfig& config,
                    const std::string& directory) {
    fs::create_directories(directory);
    if (!fs::is_directory(directory)) {
        throw std::runtime_error("unwritable output directory: " + directory);
    }
    const double window_ms = 1000.0;

    {
        std::ofstream out(fs::path(directory) / "windows.csv");
        out << windows_csv_header() << "\n";
        for (const auto& w : result.windows) {
            out << (w.window_index + 1) << "," << config.scheme << "," << w.env_index << ","
                << fmt(w.norm_reward) << "," << fmt(w.rejected[0] / window_ms) << ","
                << fmt(w.dropped[1] / window_ms) << "," << w.delivered_samples << ","
                << fmt(w.rho) << "," << fmt(w.epsilon) << "," << w.queue_len1 << ","
                << w.queue_len2 << "\n";
        }
    }

    for (const auto& h : result.histograms) {
        std::ofstream out(fs::path(directory) /
                          ("latency_hist_p" + std::to_string(h.period_index) + ".csv"));
        out << "latency_ms,count\n";
        for (int b = 0; b < kHistogramBins; ++b) out << b << "," << h.bins[b] << "\n";
    }

    {
        std::vector<double> losses;
        for (const auto& w : result.windows) {
            losses.insert(losses.end(), w.reward_losses.begin(), w.reward_losses.end());
        }
        std::sort(losses.begin(), losses.end());
        std::ofstream out(fs::path(directory) / "reward_loss_cdf.csv");
        out << "loss,cdf\n";
        const double n = static_cast<double>(losses.size());
        for (std::size_t i = 0; i < losses.size(); ++i) {
            out << fmt(losses[i]) << "," << fmt((i + 1) / n) << "\n";
        }
    }

    {
        nlohmann::json manifest;
        manifest["version"] = "slicesim 1.0";
        manifest["seed"] = config.seed;
        manifest["config"] = nlohmann::json::parse(config_to_json(config));
        manifest["windows"] = result.windows.size();
        manifest["drift_slots"] = result.drift_slots;
        manifest["gradient_steps"] = result.gradient_steps;
        std::ofstream out(fs::path(directory) / "manifest.json");
        out << manifest.dump(2) << "\n";
    }
}

}  // namespace slicesim::harness
