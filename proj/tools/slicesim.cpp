#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "slicesim/campaign.hpp"
#include "slicesim/config.hpp"
#include "slicesim/metrics.hpp"
#include "slicesim/sim.hpp"

namespace {

using namespace slicesim;

harness::RunConfig base_config(const std::string& path) {
    return path.empty() ? harness::RunConfig{} : harness::load_config(path);
}

int default_workers() {
    return std::max(1u, std::thread::hardware_concurrency());
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Network-slicing simulator with a cost-aware learning plane"};
    app.require_subcommand(1);

    std::string config_path;
    std::string scheme;
    std::uint64_t seed = 1;
    std::string out_dir;
    std::vector<std::uint64_t> seeds;
    std::vector<std::string> schemes;
    std::vector<std::string> strategies;
    int workers = default_workers();
    int count = 1;
    int post_windows = 30;

    auto* run = app.add_subcommand("run", "Execute one simulation run");
    run->add_option("--config", config_path, "Run configuration file (JSON)");
    run->add_option("--scheme", scheme, "dynamic|oob|fdma|tdma10|tdma100");
    run->add_option("--seed", seed, "Master seed");
    run->add_option("--out", out_dir, "Output directory")->required();

    auto* campaign = app.add_subcommand("campaign", "Run a scheme x seed grid");
    campaign->add_option("--config", config_path, "Base configuration file (JSON)");
    campaign->add_option("--seeds", seeds, "Seed list")->delimiter(',')->required();
    campaign->add_option("--schemes", schemes, "Scheme list")->delimiter(',')->required();
    campaign->add_option("--out", out_dir, "Output root directory")->required();
    campaign->add_option("--workers", workers, "Parallel runs");

    auto* compare = app.add_subcommand("compare-init", "Compare initialization strategies");
    compare->add_option("--strategies", strategies, "nearest|previous|random_memorized")
        ->delimiter(',')
        ->required();
    compare->add_option("--config", config_path, "Base configuration file (JSON)");
    compare->add_option("--seeds", seeds, "Seed list")->delimiter(',');
    compare->add_option("--post-windows", post_windows, "Windows scored after each drift");
    compare->add_option("--out", out_dir, "Summary output directory");
    compare->add_option("--workers", workers, "Parallel runs");

    auto* gen = app.add_subcommand("gen-env", "Sample environments");
    gen->add_option("--seed", seed, "Generator seed");
    gen->add_option("--count", count, "Environments to sample");
    gen->add_option("--out", out_dir, "Directory for env_<i>.json records");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) {
            harness::RunConfig config = base_config(config_path);
            if (!scheme.empty()) config.scheme = scheme;
            if (run->count("--seed") > 0) config.seed = seed;
            config.out_dir = out_dir;
            config.validate();
            const auto result = harness::run_simulation(config);
            harness::export_metrics(result, config, out_dir);
            double mean = 0.0;
            for (const auto& w : result.windows) mean += w.norm_reward;
            if (!result.windows.empty()) mean /= static_cast<double>(result.windows.size());
            std::cout << "run complete: " << result.windows.size() << " windows, mean reward "
                      << mean << ", " << result.drift_slots.size() << " context changes\n";
        } else if (*campaign) {
            const harness::RunConfig config = base_config(config_path);
            const auto entries = harness::run_campaign(config, schemes, seeds, workers, out_dir);
            std::ofstream summary(std::filesystem::path(out_dir) / "summary.csv");
            summary << "scheme,seed,mean_reward,drift_events\n";
            for (const auto& e : entries) {
                double mean = 0.0;
                for (const auto& w : e.result.windows) mean += w.norm_reward;
                if (!e.result.windows.empty()) mean /= static_cast<double>(e.result.windows.size());
                summary << e.scheme << "," << e.seed << "," << mean << ","
                        << e.result.drift_slots.size() << "\n";
            }
            std::cout << "campaign complete: " << entries.size() << " runs\n";
        } else if (*compare) {
            const harness::RunConfig config = base_config(config_path);
            if (seeds.empty()) seeds = {1, 2, 3, 4, 5};
            std::vector<harness::InitStrategy> parsed;
            for (const auto& s : strategies) parsed.push_back(harness::parse_init_strategy(s));
            const auto summaries = harness::compare_initialization_strategies(
                config, parsed, seeds, post_windows, workers);
            std::cout << "strategy,samples,q1,median,q3,outliers\n";
            for (const auto& s : summaries) {
                std::cout << harness::init_strategy_name(s.strategy) << "," << s.sample_count
                          << "," << s.q1 << "," << s.median << "," << s.q3 << "," << s.outliers
                          << "\n";
            }
            if (!out_dir.empty()) {
                std::filesystem::create_directories(out_dir);
                std::ofstream out(std::filesystem::path(out_dir) / "init_comparison.csv");
                out << "strategy,samples,q1,median,q3,outliers\n";
                for (const auto& s : summaries) {
                    out << harness::init_strategy_name(s.strategy) << "," << s.sample_count << ","
                        << s.q1 << "," << s.median << "," << s.q3 << "," << s.outliers << "\n";
                }
            }
        } else if (*gen) {
            auto rng = make_stream(seed, "environment");
            const harness::RunConfig defaults;
            for (int i = 0; i < count; ++i) {
                auto env = traffic::generate_environment(rng, defaults.capacity_bytes_per_s());
                env.env_index = i;
                const std::string text = harness::environment_to_json(env);
                if (out_dir.empty()) {
                    std::cout << text << "\n";
                } else {
                    std::filesystem::create_directories(out_dir);
                    harness::save_environment(
                        env, (std::filesystem::path(out_dir) / ("env_" + std::to_string(i) + ".json"))
                                 .string());
                }
            }
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
