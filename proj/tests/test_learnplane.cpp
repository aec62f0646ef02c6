#include <doctest.h>

#include <cmath>

#include "slicesim/learnplane.hpp"

using namespace slicesim;
using learnplane::ObjectiveWeights;
using learnplane::RhoSchedule;
using learnplane::SampleQueue;
using learnplane::SplitDecision;

namespace {

// Exhaustive argmax over the whole split space with the declared tie-break:
// prefer z2 up to its need, then z1 up to its need, then learning blocks.
SplitDecision brute_force_split(int q1, int chi1, int need2, int pending, int n,
                                const ObjectiveWeights& w) {
    const int cap1 = std::min(std::max(q1 - chi1, 0), n);
    const int cap2 = std::min(need2, n);
    SplitDecision best;
    double best_obj = -std::numeric_limits<double>::infinity();
    auto better = [&](const SplitDecision& cand, double obj) {
        if (obj > best_obj + 1e-12) return true;
        if (obj < best_obj - 1e-12) return false;
        const auto key = [&](const SplitDecision& d) {
            return std::array<int, 3>{std::min(d.z2, cap2), std::min(d.z1, cap1),
                                      d.learning_blocks};
        };
        return key(cand) > key(best);
    };
    for (int z1 = 0; z1 <= n; ++z1) {
        for (int z2 = 0; z1 + z2 <= n; ++z2) {
            const double obj = learnplane::split_objective(z1, z2, q1, chi1, need2, pending, n, w);
            const SplitDecision cand{z1, z2, n - z1 - z2};
            if (better(cand, obj)) {
                best = cand;
                best_obj = obj;
            }
        }
    }
    return best;
}

agent::Experience dummy_sample() { return agent::Experience{}; }

}  // namespace

TEST_CASE("rho schedule") {
    const RhoSchedule sched;  // table defaults
    CHECK(learnplane::rho(0, sched) == doctest::Approx(0.2).epsilon(1e-15));
    CHECK(learnplane::rho(999, sched) == doctest::Approx(0.2).epsilon(1e-15));
    CHECK(learnplane::rho(1000, sched) == doctest::Approx(0.1992).epsilon(1e-12));
    CHECK(learnplane::rho(238000, sched) == 0.01);
    CHECK(learnplane::rho(237999, sched) > 0.01);
    CHECK(learnplane::rho(10000000, sched) == 0.01);
    double prev = 1.0;
    for (std::int64_t t = 0; t < 300000; t += 250) {
        const double r = learnplane::rho(t, sched);
        CHECK(r <= prev);
        prev = r;
    }
}

TEST_CASE("learning slot draws") {
    auto rng = make_stream(21, "lp");
    SUBCASE("degenerate schedules") {
        RhoSchedule never{0.0, 0.0, 1e-3, 1000};
        RhoSchedule always{1.0, 1.0, 1e-3, 1000};
        for (int t = 0; t < 1000; ++t) {
            CHECK_FALSE(learnplane::is_learning_slot(t, never, rng));
            CHECK(learnplane::is_learning_slot(t, always, rng));
        }
    }
    SUBCASE("steady rate concentrates") {
        RhoSchedule steady{0.01, 0.01, 1e-3, 1000};
        int hits = 0;
        const int n = 1000000;
        for (int t = 0; t < n; ++t) hits += learnplane::is_learning_slot(t, steady, rng) ? 1 : 0;
        CHECK(std::abs(hits / static_cast<double>(n) - 0.01) < 0.001);
    }
}

TEST_CASE("greedy split matches the spec walkthroughs") {
    const ObjectiveWeights w;
    SUBCASE("pressured slice 1 with a small deadline need") {
        const auto d = learnplane::greedy_split(1410, 1400, 3, 5, 15, w);
        CHECK(d.z1 == 10);
        CHECK(d.z2 == 3);
        CHECK(d.learning_blocks == 2);
        const auto oracle = brute_force_split(1410, 1400, 3, 5, 15, w);
        CHECK(learnplane::split_objective(d.z1, d.z2, 1410, 1400, 3, 5, 15, w) ==
              doctest::Approx(
                  learnplane::split_objective(oracle.z1, oracle.z2, 1410, 1400, 3, 5, 15, w)));
    }
    SUBCASE("no needs, everything to the learning plane") {
        const auto d = learnplane::greedy_split(1000, 1400, 0, 0, 15, w);
        CHECK(d.z1 == 0);
        CHECK(d.z2 == 0);
        CHECK(d.learning_blocks == 15);
    }
    SUBCASE("deadline slice saturates") {
        const auto d = learnplane::greedy_split(100, 1400, 20, 5, 15, w);
        CHECK(d.z1 == 0);
        CHECK(d.z2 == 15);
        CHECK(d.learning_blocks == 0);
    }
}

TEST_CASE("greedy split ties the exhaustive oracle on random states") {
    auto rng = make_stream(22, "lp");
    const int n = 15;
    for (int trial = 0; trial < 2000; ++trial) {
        const int q1 = uniform_int(rng, 0, 1500);
        const int need2 = uniform_int(rng, 0, 40);
        const int pending = uniform_int(rng, 0, 1500);
        ObjectiveWeights w;
        if (trial % 3 == 1) w = {0.5, 1.0 / 1500.0};  // the general weighted form
        if (trial % 3 == 2) w = {0.2, 0.7};
        const auto greedy = learnplane::greedy_split(q1, 1400, need2, pending, n, w);
        const auto oracle = brute_force_split(q1, 1400, need2, pending, n, w);
        const double got =
            learnplane::split_objective(greedy.z1, greedy.z2, q1, 1400, need2, pending, n, w);
        const double want =
            learnplane::split_objective(oracle.z1, oracle.z2, q1, 1400, need2, pending, n, w);
        REQUIRE(got == doctest::Approx(want).epsilon(1e-12));
        REQUIRE(greedy.z1 == oracle.z1);
        REQUIRE(greedy.z2 == oracle.z2);
        REQUIRE(greedy.z1 + greedy.z2 + greedy.learning_blocks == n);
    }
}

TEST_CASE("sample queue admission") {
    auto rng = make_stream(23, "lp");
    SUBCASE("empty queue always accepts") {
        SampleQueue q(1500, 3);
        CHECK(q.offer(dummy_sample(), rng));
    }
    SUBCASE("full queue always rejects") {
        SampleQueue q(4, 3);
        // occupancy-based early rejection can refuse admission below the cap
        while (q.size() < 4) q.offer(dummy_sample(), rng);
        for (int i = 0; i < 100; ++i) CHECK_FALSE(q.offer(dummy_sample(), rng));
        CHECK(q.size() == 4);
    }
    SUBCASE("half-full queue rejects about half") {
        SampleQueue q(1500, 3);
        while (q.size() < 750) q.offer(dummy_sample(), rng);
        int hits = 0;
        const int trials = 100000;
        for (int i = 0; i < trials; ++i) {
            if (q.offer(dummy_sample(), rng)) {
                ++hits;
                q.transmit(3);  // shed the accepted sample to hold occupancy
            }
        }
        CHECK(std::abs(hits / static_cast<double>(trials) - 0.5) < 0.01);
    }
}

TEST_CASE("sample transport") {
    auto rng = make_stream(24, "lp");
    SUBCASE("fifteen blocks move five samples") {
        SampleQueue q(1500, 3);
        for (int i = 0; i < 8; ++i) q.offer(dummy_sample(), rng);
        const int pending = q.size();
        const auto r = q.transmit(15);
        CHECK(static_cast<int>(r.delivered.size()) == std::min(5, pending));
    }
    SUBCASE("credit carries partial samples across slots") {
        SampleQueue q(1500, 3);
        while (q.size() < 2) q.offer(dummy_sample(), rng);
        const auto first = q.transmit(2);
        CHECK(first.delivered.empty());
        CHECK(q.credit() == 2);
        const auto second = q.transmit(1);
        CHECK(second.delivered.size() == 1);
    }
    SUBCASE("unused blocks are reported back") {
        SampleQueue q(1500, 3);
        while (q.size() < 1) q.offer(dummy_sample(), rng);
        const auto r = q.transmit(15);
        CHECK(r.delivered.size() == 1);
        CHECK(r.unused_blocks == 12);
        CHECK(q.credit() == 0);
    }
    SUBCASE("conservation across random operations") {
        SampleQueue q(40, 3);
        for (int i = 0; i < 5000; ++i) {
            q.offer(dummy_sample(), rng);
            if (i % 7 == 0) q.transmit(uniform_int(rng, 0, 6));
        }
        CHECK(q.total_offered == q.total_accepted + q.total_rejected);
        CHECK(q.total_accepted == q.total_delivered + q.size());
    }
}

TEST_CASE("reward loss of a learning slot") {
    using link::QosKind;
    using link::QosParams;
    using link::SliceQueue;
    const QosParams deadline{QosKind::deadline, 50, 70};
    SliceQueue q1(QosParams{QosKind::reliability}, 100);
    SliceQueue q2(deadline, 100);
    SUBCASE("empty queues lose nothing") {
        const auto plan = learnplane::full_service_plan(q1, q2, 15, 0);
        CHECK(plan.deadline_served == 0);
        CHECK(learnplane::reward_loss(plan, deadline, 0, 0) == doctest::Approx(0.0));
    }
    SUBCASE("serving what the plan serves costs nothing") {
        q1.enqueue_arrivals(4, 0);
        q2.enqueue_arrivals(2, 0);
        const auto plan = learnplane::full_service_plan(q1, q2, 15, 1);
        CHECK(plan.deadline_served == 2);
        CHECK(plan.reliability_served == 4);
        CHECK(learnplane::reward_loss(plan, deadline, 2, 1) == doctest::Approx(0.0));
    }
    SUBCASE("deferring fresh packets costs nothing") {
        q2.enqueue_arrivals(3, 0);
        const auto plan = learnplane::full_service_plan(q1, q2, 15, 5);
        CHECK(learnplane::reward_loss(plan, deadline, 0, 5) == doctest::Approx(0.0));
    }
    SUBCASE("an expiring packet forfeits its remaining utility") {
        q2.enqueue_arrivals(1, 0);  // age 69 at t=69
        const auto plan = learnplane::full_service_plan(q1, q2, 15, 69);
        CHECK(learnplane::reward_loss(plan, deadline, 0, 69) == doctest::Approx(0.05));
    }
    SUBCASE("decaying packets forfeit the piecewise slope") {
        q2.enqueue_arrivals(1, 0);   // age 60 at t=60: f drops 0.05 next slot
        q2.enqueue_arrivals(1, 11);  // age 49: still flat
        const auto plan = learnplane::full_service_plan(q1, q2, 15, 60);
        CHECK(learnplane::reward_loss(plan, deadline, 0, 60) == doctest::Approx(0.05));
        CHECK(learnplane::reward_loss(plan, deadline, 1, 60) == doctest::Approx(0.0));
    }
}
