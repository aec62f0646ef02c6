#include "slicesim/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace slicesim::harness {

using nlohmann::json;

InitStrategy parse_init_strategy(const std::string& name) {
    if (name == "nearest") return InitStrategy::nearest;
    if (name == "previous") return InitStrategy::previous;
    if (name == "random_memorized") return InitStrategy::random_memorized;
    throw std::invalid_argument("unknown initialization strategy: " + name);
}

std::string init_strategy_name(InitStrategy strategy) {
    switch (strategy) {
        case InitStrategy::nearest: return "nearest";
        case InitStrategy::previous: return "previous";
        case InitStrategy::random_memorized: return "random_memorized";
    }
    return "unknown";
}

std::int64_t RunConfig::window_slots() const {
    return static_cast<std::int64_t>(std::llround(1000.0 / slot_ms));
}

void RunConfig::validate() const {
    auto require = [](bool ok, const char* what) {
        if (!ok) throw std::invalid_argument(std::string("invalid config: ") + what);
    };
    require(slot_ms > 0, "slot duration must be positive");
    require(blocks_per_slot > 0, "blocks per slot must be positive");
    require(queue_capacity > 0, "queue capacity must be positive");
    require(packet_bytes > 0, "packet size must be positive");
    require(t_soft_slots >= 0 && t_max_slots > t_soft_slots, "deadline bounds must be ordered");
    require(gamma >= 0 && gamma < 1, "discount factor must be in [0,1)");
    require(sample_queue_capacity > 0, "sample queue capacity must be positive");
    require(packets_per_sample > 0, "packets per sample must be positive");
    require(rho.rhof >= 0 && rho.rhof <= rho.rho0 && rho.rho0 <= 1, "rho schedule out of range");
    require(rho.sigma > 0 && rho.decay_period >= 1, "rho decay out of range");
    require(queue_pressure_threshold >= 0, "queue pressure threshold must be nonnegative");
    require(period_slots > 0 && period_count > 0, "campaign must contain at least one period");
    require(agent.batch_size > 0 && agent.replay_capacity >= agent.batch_size,
            "replay must hold at least one batch");
    require(agent.train_period >= 1 && agent.target_sync_period >= 1, "training cadence");
    require(agent.eps_start >= agent.eps_end && agent.eps_end >= 0 && agent.eps_start <= 1,
            "epsilon schedule out of range");
    require(agent.eps_decay_slots > 0 && agent.adapt_eps_decay_slots > 0, "epsilon decay spans");
    require(drift.alpha > 0 && drift.alpha <= 1, "smoothing factor out of range");
    require(drift.eta_thr > 0, "drift threshold must be positive");
    require(drift.dwell_slots >= 0, "dwell must be nonnegative");
    require(drift.settle_slots >= 0 && drift.settle_slots <= drift.dwell_slots,
            "settle delay must fit inside the dwell period");
    require(environments.kind != EnvSourceConfig::Kind::presets || !environments.presets.empty(),
            "preset list must not be empty");
    require(environments.kind != EnvSourceConfig::Kind::custom ||
                !environments.custom_envs.empty(),
            "custom environment list must not be empty");
}

namespace {

json to_json(const RunConfig& c) {
    json j;
    j["scheme"] = c.scheme;
    j["seed"] = c.seed;
    j["slot_ms"] = c.slot_ms;
    j["blocks_per_slot"] = c.blocks_per_slot;
    j["queue_capacity"] = c.queue_capacity;
    j["packet_bytes"] = c.packet_bytes;
    j["t_soft_slots"] = c.t_soft_slots;
    j["t_max_slots"] = c.t_max_slots;
    j["gamma"] = c.gamma;
    j["sample_queue_capacity"] = c.sample_queue_capacity;
    j["packets_per_sample"] = c.packets_per_sample;
    j["rho"] = {{"rho0", c.rho.rho0},
                {"rhof", c.rho.rhof},
                {"sigma", c.rho.sigma},
                {"decay_period", c.rho.decay_period}};
    j["queue_pressure_threshold"] = c.queue_pressure_threshold;
    j["objective_weights"] = {{"w_r", c.objective_weights.w_r}, {"w_s", c.objective_weights.w_s}};
    j["period_slots"] = c.period_slots;
    j["period_count"] = c.period_count;
    const char* source = "presets";
    if (c.environments.kind == EnvSourceConfig::Kind::generated) source = "generated";
    if (c.environments.kind == EnvSourceConfig::Kind::custom) source = "custom";
    j["environments"] = {{"source", source}, {"presets", c.environments.presets}};
    if (!c.environments.custom_envs.empty()) {
        json custom = json::array();
        for (const auto& env : c.environments.custom_envs) {
            custom.push_back(json::parse(environment_to_json(env)));
        }
        j["environments"]["custom"] = custom;
    }
    j["init_strategy"] = init_strategy_name(c.init_strategy);
    j["agent"] = {{"learning_rate", c.agent.learning_rate},
                  {"batch_size", c.agent.batch_size},
                  {"target_sync_period", c.agent.target_sync_period},
                  {"replay_capacity", c.agent.replay_capacity},
                  {"train_period", c.agent.train_period},
                  {"eps_start", c.agent.eps_start},
                  {"eps_end", c.agent.eps_end},
                  {"eps_decay_slots", c.agent.eps_decay_slots},
                  {"adapt_eps_start", c.agent.adapt_eps_start},
                  {"adapt_eps_decay_slots", c.agent.adapt_eps_decay_slots},
                  {"adapt_rho0_scale", c.agent.adapt_rho0_scale}};
    j["drift"] = {{"alpha", c.drift.alpha},
                  {"eta_thr", c.drift.eta_thr},
                  {"dwell_slots", c.drift.dwell_slots},
                  {"settle_slots", c.drift.settle_slots}};
    j["minority_uses_true_omega"] = c.minority_uses_true_omega;
    j["out_dir"] = c.out_dir;
    return j;
}

RunConfig from_json(const json& j) {
    RunConfig c;
    auto get = [&](const char* key, auto& field) {
        if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
    };
    get("scheme", c.scheme);
    get("seed", c.seed);
    get("slot_ms", c.slot_ms);
    get("blocks_per_slot", c.blocks_per_slot);
    get("queue_capacity", c.queue_capacity);
    get("packet_bytes", c.packet_bytes);
    get("t_soft_slots", c.t_soft_slots);
    get("t_max_slots", c.t_max_slots);
    get("gamma", c.gamma);
    get("sample_queue_capacity", c.sample_queue_capacity);
    get("packets_per_sample", c.packets_per_sample);
    if (j.contains("rho")) {
        const auto& r = j.at("rho");
        c.rho.rho0 = r.value("rho0", c.rho.rho0);
        c.rho.rhof = r.value("rhof", c.rho.rhof);
        c.rho.sigma = r.value("sigma", c.rho.sigma);
        c.rho.decay_period = r.value("decay_period", c.rho.decay_period);
    }
    get("queue_pressure_threshold", c.queue_pressure_threshold);
    if (j.contains("objective_weights")) {
        c.objective_weights.w_r = j.at("objective_weights").value("w_r", 1.0);
        c.objective_weights.w_s = j.at("objective_weights").value("w_s", 1.0);
    }
    get("period_slots", c.period_slots);
    get("period_count", c.period_count);
    if (j.contains("environments")) {
        const auto& e = j.at("environments");
        const std::string source = e.value("source", "presets");
        c.environments.kind = EnvSourceConfig::Kind::presets;
        if (source == "generated") c.environments.kind = EnvSourceConfig::Kind::generated;
        if (source == "custom") c.environments.kind = EnvSourceConfig::Kind::custom;
        if (e.contains("presets")) c.environments.presets = e.at("presets").get<std::vector<int>>();
        if (e.contains("custom")) {
            for (const auto& record : e.at("custom")) {
                c.environments.custom_envs.push_back(environment_from_json(record.dump()));
            }
        }
    }
    if (j.contains("init_strategy")) {
        c.init_strategy = parse_init_strategy(j.at("init_strategy").get<std::string>());
    }
    if (j.contains("agent")) {
        const auto& a = j.at("agent");
        c.agent.learning_rate = a.value("learning_rate", c.agent.learning_rate);
        c.agent.batch_size = a.value("batch_size", c.agent.batch_size);
        c.agent.target_sync_period = a.value("target_sync_period", c.agent.target_sync_period);
        c.agent.replay_capacity = a.value("replay_capacity", c.agent.replay_capacity);
        c.agent.train_period = a.value("train_period", c.agent.train_period);
        c.agent.eps_start = a.value("eps_start", c.agent.eps_start);
        c.agent.eps_end = a.value("eps_end", c.agent.eps_end);
        c.agent.eps_decay_slots = a.value("eps_decay_slots", c.agent.eps_decay_slots);
        c.agent.adapt_eps_start = a.value("adapt_eps_start", c.agent.adapt_eps_start);
        c.agent.adapt_eps_decay_slots =
            a.value("adapt_eps_decay_slots", c.agent.adapt_eps_decay_slots);
        c.agent.adapt_rho0_scale = a.value("adapt_rho0_scale", c.agent.adapt_rho0_scale);
    }
    if (j.contains("drift")) {
        const auto& d = j.at("drift");
        c.drift.alpha = d.value("alpha", c.drift.alpha);
        c.drift.eta_thr = d.value("eta_thr", c.drift.eta_thr);
        c.drift.dwell_slots = d.value("dwell_slots", c.drift.dwell_slots);
        c.drift.settle_slots = d.value("settle_slots", c.drift.settle_slots);
    }
    get("minority_uses_true_omega", c.minority_uses_true_omega);
    get("out_dir", c.out_dir);
    return c;
}

}  // namespace

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    json j;
    in >> j;
    RunConfig c = from_json(j);
    c.validate();
    return c;
}

void save_config(const RunConfig& config, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write config file: " + path);
    out << to_json(config).dump(2) << "\n";
}

std::string config_to_json(const RunConfig& config) { return to_json(config).dump(2); }

RunConfig config_from_json(const std::string& text) {
    RunConfig c = from_json(json::parse(text));
    c.validate();
    return c;
}

std::string environment_to_json(const traffic::EnvParams& env) {
    json j;
    j["env_index"] = env.env_index;
    json slices = json::array();
    for (const auto& s : env.slices) {
        slices.push_back({{"user_count", s.user_count},
                          {"rate_bytes_per_s", s.rate_bytes_per_s},
                          {"chain",
                           {{"o00", s.chain.o00},
                            {"o01", s.chain.o01},
                            {"o10", s.chain.o10},
                            {"o11", s.chain.o11}}},
                          {"expected_active",
                           traffic::expected_active_users(s.user_count, s.chain)}});
    }
    j["slices"] = slices;
    return j.dump(2);
}

traffic::EnvParams environment_from_json(const std::string& text) {
    const json j = json::parse(text);
    traffic::EnvParams env;
    env.env_index = j.value("env_index", 0);
    const auto& slices = j.at("slices");
    if (slices.size() != traffic::kSliceCount) {
        throw std::invalid_argument("environment record must describe two slices");
    }
    for (int m = 0; m < traffic::kSliceCount; ++m) {
        const auto& s = slices.at(m);
        const auto& c = s.at("chain");
        env.slices[m].user_count = s.at("user_count").get<int>();
        env.slices[m].rate_bytes_per_s = s.at("rate_bytes_per_s").get<double>();
        env.slices[m].chain = traffic::GilbertElliott{
            c.at("o00").get<double>(), c.at("o01").get<double>(), c.at("o10").get<double>(),
            c.at("o11").get<double>()};
        env.slices[m].chain.validate();
    }
    return env;
}

traffic::EnvParams load_environment(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open environment file: " + path);
    std::stringstream buffer;
    buffer << in.rdbuf();
    return environment_from_json(buffer.str());
}

void save_environment(const traffic::EnvParams& env, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write environment file: " + path);
    out << environment_to_json(env) << "\n";
}

}  // namespace slicesim::harness
