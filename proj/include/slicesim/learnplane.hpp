#pragma once

#include <cstdint>
#include <deque>
#include <vector>

#include "slicesim/agent.hpp"
#include "slicesim/link.hpp"
#include "slicesim/rng.hpp"

namespace slicesim::learnplane {

// Linearly decaying learning-slot probability, stepped down every H slots.
struct RhoSchedule {
    double rho0 = 0.2;
    double rhof = 0.01;
    double sigma = 8e-4;
    int decay_period = 1000;  // H
};

double rho(std::int64_t t, const RhoSchedule& sched);

bool is_learning_slot(std::int64_t t, const RhoSchedule& sched, Rng& rng);

struct SplitDecision {
    int z1 = 0;
    int z2 = 0;
    int learning_blocks = 0;
};

struct ObjectiveWeights {
    double w_r = 1.0;
    double w_s = 1.0;
};

// Objective of a candidate split, exactly as combined from the per-slice
// estimated rewards R1 = min(0, z1 - min(q1 - chi1, N)), R2 = min(0, z2 -
// min(deadline_need, N)) and the sample-transfer score
// S = -(min(pending, N) - (N - z1 - z2)).
double split_objective(int z1, int z2, int queue1_len, int chi1, int deadline_need,
                       int pending_samples, int total_blocks, const ObjectiveWeights& w);

// Argmax of the split objective over all z1 + z2 <= N. Ties are broken by
// serving the deadline slice up to its need, then slice 1 up to its need,
// then the learning plane.
SplitDecision greedy_split(int queue1_len, int chi1, int deadline_need, int pending_samples,
                           int total_blocks, const ObjectiveWeights& w = {});

// Edge-side experience queue with early rejection proportional to occupancy
// and packet-credit carry for samples that span learning slots.
class SampleQueue {
  public:
    SampleQueue() = default;
    SampleQueue(int capacity, int packets_per_sample)
        : capacity_(capacity), packets_per_sample_(packets_per_sample) {}

    // Rejects with probability size/capacity; a full queue always rejects.
    bool offer(const agent::Experience& sample, Rng& rng);

    struct TransmitResult {
        std::vector<agent::Experience> delivered;
        int unused_blocks = 0;
    };

    // Spends blocks (plus stored credit) at packets_per_sample packets per
    // sample; whole blocks beyond what the queue can consume are returned.
    TransmitResult transmit(int blocks);

    void clear();
    int size() const { return static_cast<int>(pending_.size()); }
    int capacity() const { return capacity_; }
    int credit() const { return credit_; }

    std::int64_t total_offered = 0;
    std::int64_t total_accepted = 0;
    std::int64_t total_rejected = 0;
    std::int64_t total_delivered = 0;

  private:
    int capacity_ = 1500;
    int packets_per_sample_ = 3;
    int credit_ = 0;
    std::deque<agent::Experience> pending_;
};

// Counterfactual service if every block served the slices this slot,
// deadline queue first, FIFO within each queue. Captured before any service.
struct ServicePlan {
    int deadline_served = 0;
    int reliability_served = 0;
    std::vector<std::int64_t> deadline_births;  // head births the plan reaches
};

ServicePlan full_service_plan(const link::SliceQueue& reliability_q,
                              const link::SliceQueue& deadline_q, int total_blocks,
                              std::int64_t t);

// Reward penalty of a learning slot: utility irrecoverably forfeited by the
// split, i.e. the one-slot decay f(age) - f(age+1) of every packet the
// counterfactual plan would have served but the split left queued. Deferring
// a packet whose utility holds for another slot costs nothing; a reliability
// queue never decays.
double reward_loss(const ServicePlan& plan, const link::QosParams& deadline_qos,
                   int deadline_served_actual, std::int64_t t);

}  // namespace slicesim::learnplane
