#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "slicesim/campaign.hpp"
#include "slicesim/metrics.hpp"
#include "slicesim/sim.hpp"

using namespace slicesim;
using harness::RunConfig;

namespace {

RunConfig tiny_config(const std::string& scheme, std::uint64_t seed) {
    RunConfig cfg;
    cfg.scheme = scheme;
    cfg.seed = seed;
    cfg.period_slots = 5000;
    cfg.period_count = 2;
    cfg.environments.presets = {0, 110};
    cfg.agent.eps_decay_slots = 2000;
    cfg.drift.dwell_slots = 2000;
    cfg.drift.settle_slots = 500;
    return cfg;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("normalized reward definition") {
    CHECK(harness::normalized_reward(10.0, 10) == doctest::Approx(1.0));
    CHECK(harness::normalized_reward(0.0, 10) == doctest::Approx(0.0));
    CHECK(harness::normalized_reward(8.5, 10) == doctest::Approx(0.85));
    CHECK(harness::normalized_reward(0.0, 0) == doctest::Approx(1.0));  // vacuous delivery
    CHECK(harness::normalized_reward(12.0, 10) == doctest::Approx(1.0));  // backlog drain caps
}

TEST_CASE("csv header is bit-exact") {
    CHECK(harness::windows_csv_header() ==
          "time_s,scheme,env_index,norm_reward,rej1_per_ms,drop2_per_ms,samples_per_s,rho,"
          "epsilon,q1,q2");
}

TEST_CASE("config validation rejects bad values") {
    RunConfig bad;
    bad.gamma = 1.5;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    RunConfig bad2;
    bad2.rho.rhof = 0.5;
    bad2.rho.rho0 = 0.1;
    CHECK_THROWS_AS(bad2.validate(), std::invalid_argument);
    RunConfig ok;
    CHECK_NOTHROW(ok.validate());
    CHECK(ok.capacity_bytes_per_s() == 7680000.0);
}

TEST_CASE("config json round trip") {
    RunConfig cfg = tiny_config("tdma10", 9);
    cfg.agent.learning_rate = 5e-4;
    cfg.drift.eta_thr = 3.5;
    cfg.init_strategy = harness::InitStrategy::previous;
    const auto back = harness::config_from_json(harness::config_to_json(cfg));
    CHECK(back.scheme == cfg.scheme);
    CHECK(back.seed == cfg.seed);
    CHECK(back.agent.learning_rate == cfg.agent.learning_rate);
    CHECK(back.drift.eta_thr == cfg.drift.eta_thr);
    CHECK(back.init_strategy == cfg.init_strategy);
    CHECK(back.period_slots == cfg.period_slots);
    CHECK(back.environments.presets == cfg.environments.presets);
}

TEST_CASE("environment records round trip") {
    const auto& env = traffic::preset_environment(102);
    const auto back = harness::environment_from_json(harness::environment_to_json(env));
    CHECK(back.env_index == 102);
    CHECK(back.slices[0].user_count == env.slices[0].user_count);
    CHECK(back.slices[1].chain.o01 == env.slices[1].chain.o01);
    CHECK(back.expected_active(1) == doctest::Approx(env.expected_active(1)));
}

TEST_CASE("runs are deterministic and conserve packets") {
    const auto cfg = tiny_config("dynamic", 3);
    const auto a = harness::run_simulation(cfg);
    const auto b = harness::run_simulation(cfg);
    REQUIRE(a.windows.size() == b.windows.size());
    REQUIRE(a.windows.size() == 10);
    for (std::size_t i = 0; i < a.windows.size(); ++i) {
        CHECK(a.windows[i].norm_reward == b.windows[i].norm_reward);
        CHECK(a.windows[i].delivered_samples == b.windows[i].delivered_samples);
        CHECK(a.windows[i].queue_len1 == b.windows[i].queue_len1);
    }
    for (int m = 0; m < 2; ++m) CHECK(a.conservation[m].balanced());
    CHECK(a.samples.balanced());
}

TEST_CASE("exported metrics are byte-identical across matched runs") {
    namespace fs = std::filesystem;
    const auto root = fs::temp_directory_path() / "slicesim_export_test";
    fs::remove_all(root);
    const auto cfg = tiny_config("dynamic", 4);
    for (const char* sub : {"a", "b"}) {
        const auto result = harness::run_simulation(cfg);
        harness::export_metrics(result, cfg, (root / sub).string());
    }
    CHECK(slurp(root / "a" / "windows.csv") == slurp(root / "b" / "windows.csv"));
    CHECK(!slurp(root / "a" / "windows.csv").empty());
    CHECK(slurp(root / "a" / "reward_loss_cdf.csv") == slurp(root / "b" / "reward_loss_cdf.csv"));
    const std::string windows = slurp(root / "a" / "windows.csv");
    CHECK(windows.substr(0, windows.find('\n')) == harness::windows_csv_header());
    CHECK(fs::exists(root / "a" / "manifest.json"));
    CHECK(fs::exists(root / "a" / "latency_hist_p0.csv"));
    CHECK(fs::exists(root / "a" / "latency_hist_p1.csv"));
    // 101 bins plus the header line
    std::istringstream hist(slurp(root / "a" / "latency_hist_p0.csv"));
    int lines = 0;
    std::string line;
    while (std::getline(hist, line)) ++lines;
    CHECK(lines == 102);
    fs::remove_all(root);
}

TEST_CASE("zero-traffic environments report perfect service") {
    RunConfig cfg = tiny_config("dynamic", 5);
    cfg.period_count = 1;
    cfg.environments.kind = harness::EnvSourceConfig::Kind::custom;
    traffic::EnvParams quiet;
    quiet.env_index = 99;
    // off-to-on probability zero keeps every user idle forever
    const auto silent = traffic::GilbertElliott::from_on_off(0.0, 0.3);
    quiet.slices[0] = traffic::SliceParams{5, silent, 512000.0};
    quiet.slices[1] = traffic::SliceParams{5, silent, 512000.0};
    cfg.environments.custom_envs = {quiet};
    const auto result = harness::run_simulation(cfg);
    for (const auto& w : result.windows) {
        CHECK(w.norm_reward == doctest::Approx(1.0));
        CHECK(w.rejected[0] + w.rejected[1] == 0);
        CHECK(w.generated[0] + w.generated[1] == 0);
    }
}

TEST_CASE("windows carry link conservation in every scheme") {
    for (const char* scheme : {"dynamic", "oob", "fdma", "tdma10", "tdma100"}) {
        const auto result = harness::run_simulation(tiny_config(scheme, 6));
        for (int m = 0; m < 2; ++m) CHECK(result.conservation[m].balanced());
        CHECK(result.samples.balanced());
        std::int64_t generated = 0;
        std::int64_t accounted = 0;
        for (const auto& w : result.windows) {
            generated += w.generated[0] + w.generated[1];
            accounted += w.served[0] + w.served[1] + w.rejected[0] + w.rejected[1] + w.dropped[0] +
                         w.dropped[1];
        }
        const auto leftovers = result.conservation[0].final_queue +
                               result.conservation[1].final_queue;
        CHECK(generated == accounted + leftovers);
    }
}

TEST_CASE("out-of-band keeps the sample queue empty and dominates early") {
    RunConfig cfg = tiny_config("oob", 7);
    const auto result = harness::run_simulation(cfg);
    CHECK(result.samples.pending == 0);
    CHECK(result.samples.rejected == 0);
    CHECK(result.samples.offered == result.samples.delivered);
}

TEST_CASE("out-of-band converges on a stationary period") {
    RunConfig cfg;
    cfg.scheme = "oob";
    cfg.seed = 8;
    cfg.period_slots = 200000;  // 200 s
    cfg.period_count = 1;
    cfg.environments.presets = {0};
    cfg.agent.eps_decay_slots = 20000;
    const auto result = harness::run_simulation(cfg);
    REQUIRE(result.windows.size() == 200);
    double tail = 0.0;
    for (std::size_t w = 150; w < 200; ++w) tail += result.windows[w].norm_reward;
    tail /= 50.0;
    CHECK(tail >= 0.95);
}

TEST_CASE("campaign runner produces matched grids") {
    const auto cfg = tiny_config("dynamic", 1);
    const auto entries = harness::run_campaign(cfg, {"oob", "tdma10"}, {1, 2}, 2);
    REQUIRE(entries.size() == 4);
    // matched seeds see identical traffic: generated packet totals align
    std::int64_t gen_oob = 0;
    std::int64_t gen_tdma = 0;
    for (const auto& e : entries) {
        if (e.seed != 1) continue;
        std::int64_t total = 0;
        for (const auto& w : e.result.windows) total += w.generated[0] + w.generated[1];
        (e.scheme == "oob" ? gen_oob : gen_tdma) = total;
    }
    CHECK(gen_oob == gen_tdma);
}

TEST_CASE("converged reward helper respects warmup exclusion") {
    harness::RunResult result;
    harness::RunConfig cfg = tiny_config("dynamic", 1);
    cfg.period_slots = 3000;  // 3 windows per period
    for (int i = 0; i < 6; ++i) {
        harness::MetricsWindow w;
        w.window_index = i;
        w.env_index = i < 3 ? 0 : 110;
        w.norm_reward = i < 3 ? (i == 0 ? 0.0 : 0.9) : (i == 3 ? 0.0 : 0.5);
        result.windows.push_back(w);
    }
    CHECK(harness::converged_reward(result, cfg, 0, 1) == doctest::Approx(0.9));
    CHECK(harness::converged_reward(result, cfg, 110, 1) == doctest::Approx(0.5));
}
