#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "slicesim/continual.hpp"
#include "slicesim/traffic.hpp"

using namespace slicesim;
using continual::ContextEstimate;
using continual::Omega;
using continual::PolicyMemory;
using continual::TrainingRegime;

TEST_CASE("estimate update") {
    SUBCASE("alpha one tracks the last observation") {
        ContextEstimate est{Omega(3.0, 4.0), 1.0};
        est = continual::update_estimate(est, Omega(7.0, 1.0));
        CHECK(est.value == Omega(7.0, 1.0));
    }
    SUBCASE("constant input converges geometrically") {
        ContextEstimate est{Omega::Zero(), 0.01};
        for (int i = 0; i < 500; ++i) est = continual::update_estimate(est, Omega(10.0, 10.0));
        CHECK(std::abs(est.value[0] - 10.0) / 10.0 < 0.01);
    }
    SUBCASE("step change crosses 90 percent after about 2300 slots") {
        ContextEstimate est{Omega(10.0, 0.0), 0.001};
        int crossed_at = -1;
        for (int t = 1; t <= 4000; ++t) {
            est = continual::update_estimate(est, Omega(20.0, 0.0));
            if (crossed_at < 0 && est.value[0] >= 19.0) {
                crossed_at = t;
                break;
            }
        }
        CHECK(crossed_at > 2200);
        CHECK(crossed_at < 2400);
    }
}

TEST_CASE("change detection is a strict threshold") {
    ContextEstimate est{Omega(10.0, 5.0), 0.001};
    CHECK_FALSE(continual::detect_change(est, Omega(10.0, 5.0), 2.0));
    CHECK(continual::detect_change(est, Omega(10.0, 10.0), 2.0));
    CHECK_FALSE(continual::detect_change(est, Omega(10.0, 7.0), 2.0));  // distance == threshold
}

TEST_CASE("strict minority relation") {
    Eigen::VectorXd a(2), b(2);
    a << 1, 2;
    b << 2, 3;
    CHECK(continual::strict_minority(a, b));
    a << 1, 3;
    CHECK_FALSE(continual::strict_minority(a, b));
    a << 2, 1;
    b << 1, 2;
    CHECK_FALSE(continual::strict_minority(a, b));
    Eigen::VectorXd c(3);
    c << 1, 1, 1;
    CHECK_THROWS_AS(continual::strict_minority(a, c), std::invalid_argument);
}

TEST_CASE("nearest stored environment") {
    auto rng = make_stream(31, "cl");
    PolicyMemory memory;
    CHECK_FALSE(memory.nearest(Omega(1.0, 1.0)).has_value());
    memory.store(Omega(10.0, 3.0), agent::init_weights<double>(rng));
    memory.store(Omega(5.0, 8.0), agent::init_weights<double>(rng));
    const auto hit = memory.nearest(Omega(9.0, 4.0));
    REQUIRE(hit.has_value());
    CHECK(hit->first == 0);
    CHECK(hit->second == doctest::Approx(std::sqrt(2.0)));
    const auto exact = memory.nearest(Omega(5.0, 8.0));
    REQUIRE(exact.has_value());
    CHECK(exact->first == 1);
    CHECK(exact->second == doctest::Approx(0.0));
}

TEST_CASE("duplicate contexts keep the earliest entry") {
    auto rng = make_stream(32, "cl");
    PolicyMemory memory;
    memory.store(Omega(4.0, 4.0), agent::init_weights<double>(rng));
    memory.store(Omega(4.0, 4.0), agent::init_weights<double>(rng));
    CHECK(memory.size() == 2);
    const auto hit = memory.nearest(Omega(4.0, 4.0));
    REQUIRE(hit.has_value());
    CHECK(hit->first == 0);
}

TEST_CASE("policy selection branch order") {
    auto rng = make_stream(33, "cl");
    PolicyMemory memory;
    const auto theta_prev = agent::init_weights<double>(rng);
    SUBCASE("minority reuses the incumbent") {
        const auto sel = continual::select_policy(memory, Omega(11.0, 3.0), theta_prev,
                                                  Omega(5.0, 2.0), 2.0, rng);
        CHECK(sel.weights.to_flat() == theta_prev.to_flat());
        CHECK(sel.regime == TrainingRegime::adaptation);
    }
    SUBCASE("near stored context reuses its weights") {
        const auto stored = agent::init_weights<double>(rng);
        memory.store(Omega(8.0, 8.0), stored);
        const auto sel = continual::select_policy(memory, Omega(3.0, 3.0), theta_prev,
                                                  Omega(8.5, 8.0), 2.0, rng);
        CHECK(sel.weights.to_flat() == stored.to_flat());
        CHECK(sel.regime == TrainingRegime::adaptation);
    }
    SUBCASE("minority outranks the distance rule") {
        const auto stored = agent::init_weights<double>(rng);
        memory.store(Omega(4.9, 1.9), stored);
        const auto sel = continual::select_policy(memory, Omega(11.0, 3.0), theta_prev,
                                                  Omega(5.0, 2.0), 2.0, rng);
        CHECK(sel.weights.to_flat() == theta_prev.to_flat());
    }
    SUBCASE("otherwise fresh weights with the init statistics") {
        const auto sel = continual::select_policy(memory, Omega(3.0, 3.0), theta_prev,
                                                  Omega(30.0, 30.0), 2.0, rng);
        CHECK(sel.regime == TrainingRegime::from_scratch);
        const auto flat = sel.weights.to_flat();
        double sum = 0.0;
        double sq = 0.0;
        for (const double w : flat) {
            sum += w;
            sq += w * w;
        }
        const double n = static_cast<double>(flat.size());
        const double mean = sum / n;
        CHECK(std::abs(mean) < 0.02);
        CHECK(std::abs(std::sqrt(sq / n - mean * mean) - 0.1) < 0.02);
    }
    SUBCASE("distance exactly at the threshold starts from scratch") {
        const auto stored = agent::init_weights<double>(rng);
        memory.store(Omega(8.0, 8.0), stored);
        const auto sel = continual::select_policy(memory, Omega(3.0, 3.0), theta_prev,
                                                  Omega(10.0, 8.0), 2.0, rng);
        CHECK(sel.regime == TrainingRegime::from_scratch);
    }
}

TEST_CASE("memory persists to a directory") {
    auto rng = make_stream(34, "cl");
    PolicyMemory memory;
    memory.store(Omega(10.0, 3.0), agent::init_weights<double>(rng));
    memory.store(Omega(5.0, 8.0), agent::init_weights<double>(rng));
    const auto dir = std::filesystem::temp_directory_path() / "slicesim_policy_mem";
    std::filesystem::remove_all(dir);
    memory.save(dir.string());
    const auto loaded = PolicyMemory::load(dir.string());
    REQUIRE(loaded.size() == 2);
    CHECK(loaded.entry(0).omega == memory.entry(0).omega);
    CHECK(loaded.entry(1).weights == memory.entry(1).weights);
    std::filesystem::remove_all(dir);
}

TEST_CASE("no false alarms under stationary traffic") {
    const auto& env = traffic::preset_environment(0);
    for (std::uint64_t seed = 1; seed <= 2; ++seed) {
        auto rng = make_stream(seed, "fa");
        std::array<traffic::SliceTraffic, 2> slices;
        for (int m = 0; m < 2; ++m) {
            slices[m] = traffic::SliceTraffic(env.slices[m], 1.0, 512.0, rng);
        }
        continual::DriftTracker tracker(continual::DriftConfig{});
        tracker.reset(Omega(slices[0].active_users(), slices[1].active_users()));
        for (int t = 0; t < 500000; ++t) {
            slices[0].step(rng);
            slices[1].step(rng);
            tracker.observe(Omega(slices[0].active_users(), slices[1].active_users()));
        }
        CHECK(tracker.alarms() == 0);
    }
}

TEST_CASE("a real jump is detected within the allowed delay") {
    auto rng = make_stream(35, "fa");
    const auto& before = traffic::preset_environment(0);    // (11.56, 2.63)
    const auto& after = traffic::preset_environment(110);   // (5.94, 8.87)
    std::array<traffic::SliceTraffic, 2> slices;
    for (int m = 0; m < 2; ++m) {
        slices[m] = traffic::SliceTraffic(before.slices[m], 1.0, 512.0, rng);
    }
    continual::DriftTracker tracker(continual::DriftConfig{});
    tracker.reset(Omega(slices[0].active_users(), slices[1].active_users()));
    for (int t = 0; t < 100000; ++t) {
        slices[0].step(rng);
        slices[1].step(rng);
        tracker.observe(Omega(slices[0].active_users(), slices[1].active_users()));
    }
    CHECK(tracker.alarms() == 0);
    for (int m = 0; m < 2; ++m) slices[m].reconfigure(after.slices[m], rng);
    int detected_after = -1;
    for (int t = 0; t < 20000; ++t) {
        slices[0].step(rng);
        slices[1].step(rng);
        if (tracker.observe(Omega(slices[0].active_users(), slices[1].active_users()))) {
            detected_after = t;
            break;
        }
    }
    REQUIRE(detected_after >= 0);
    CHECK(detected_after <= 10000);
}
