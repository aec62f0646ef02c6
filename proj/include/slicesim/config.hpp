#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "slicesim/continual.hpp"
#include "slicesim/learnplane.hpp"
#include "slicesim/traffic.hpp"

namespace slicesim::harness {

enum class InitStrategy { nearest, previous, random_memorized };

InitStrategy parse_init_strategy(const std::string& name);
std::string init_strategy_name(InitStrategy strategy);

struct AgentConfig {
    double learning_rate = 1e-3;
    int batch_size = 32;
    int target_sync_period = 1000;  // gradient steps between target refreshes
    int replay_capacity = 10000;
    int train_period = 1;  // slots between gradient steps once the buffer fills
    double eps_start = 1.0;
    double eps_end = 0.05;
    std::int64_t eps_decay_slots = 100000;
    double adapt_eps_start = 0.3;
    std::int64_t adapt_eps_decay_slots = 20000;
    double adapt_rho0_scale = 0.5;
};

struct EnvSourceConfig {
    enum class Kind { presets, generated, custom };
    Kind kind = Kind::presets;
    std::vector<int> presets{0, 12, 102, 110};     // cycled across periods
    std::vector<traffic::EnvParams> custom_envs;   // cycled when kind == custom
};

struct RunConfig {
    std::string scheme = "dynamic";
    std::uint64_t seed = 1;

    // Communication system
    double slot_ms = 1.0;        // tau
    int blocks_per_slot = 15;    // N
    int queue_capacity = 1500;   // Q
    double packet_bytes = 512;   // L
    int t_soft_slots = 50;
    int t_max_slots = 70;

    // Learning plane
    double gamma = 0.95;
    int sample_queue_capacity = 1500;  // E
    int packets_per_sample = 3;        // l
    learnplane::RhoSchedule rho;
    int queue_pressure_threshold = 1400;  // chi_1
    learnplane::ObjectiveWeights objective_weights;

    // Campaign structure
    std::int64_t period_slots = 100000;
    int period_count = 8;
    EnvSourceConfig environments;
    InitStrategy init_strategy = InitStrategy::nearest;

    AgentConfig agent;
    continual::DriftConfig drift;
    // Resolve the minority shortcut against the true environment parameters
    // instead of the running estimate (the estimate is the deployable choice).
    bool minority_uses_true_omega = false;

    // Optional warm restart: a flat weight record written by a previous run
    // (final_policy.json) or a policy-memory entry.
    std::string initial_policy_path;

    std::string out_dir;

    double capacity_bytes_per_s() const {
        return blocks_per_slot * packet_bytes * 1000.0 / slot_ms;
    }
    std::int64_t window_slots() const;  // one metrics window per second
    std::int64_t total_slots() const { return period_slots * period_count; }

    void validate() const;
};

RunConfig load_config(const std::string& path);
void save_config(const RunConfig& config, const std::string& path);
std::string config_to_json(const RunConfig& config);
RunConfig config_from_json(const std::string& text);

// Structured environment records mirroring EnvParams, so table presets can be
// stored in and loaded from config files verbatim.
std::string environment_to_json(const traffic::EnvParams& env);
traffic::EnvParams environment_from_json(const std::string& text);
traffic::EnvParams load_environment(const std::string& path);
void save_environment(const traffic::EnvParams& env, const std::string& path);

}  // namespace slicesim::harness
