#include "slicesim/learnplane.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace slicesim::learnplane {

double rho(std::int64_t t, const RhoSchedule& sched) {
    if (t < 0) throw std::invalid_argument("negative slot index");
    const auto steps = static_cast<double>(t / sched.decay_period);
    return std::max(sched.rhof, sched.rho0 - steps * sched.sigma);
}

bool is_learning_slot(std::int64_t t, const RhoSchedule& sched, Rng& rng) {
    return bernoulli(rng, rho(t, sched));
}

double split_objective(int z1, int z2, int queue1_len, int chi1, int deadline_need,
                       int pending_samples, int total_blocks, const ObjectiveWeights& w) {
    const int need1 = std::min(std::max(queue1_len - chi1, 0), total_blocks);
    const int need2 = std::min(deadline_need, total_blocks);
    const double r1 = std::min(0, z1 - need1);
    const double r2 = std::min(0, z2 - need2);
    const double s = -(std::min(pending_samples, total_blocks) - (total_blocks - z1 - z2));
    return w.w_r * (r1 + r2) + w.w_s * s;
}

SplitDecision greedy_split(int queue1_len, int chi1, int deadline_need, int pending_samples,
                           int total_blocks, const ObjectiveWeights& w) {
    const int need1 = std::min(std::max(queue1_len - chi1, 0), total_blocks);
    const int need2 = std::min(deadline_need, total_blocks);

    SplitDecision d;
    if (w.w_r >= w.w_s) {
        // Each block granted to an unmet slice need gains w_r - w_s over
        // leaving it to the learning plane, so needs are filled first; the
        // declared tie-break resolves the w_r == w_s plateau the same way.
        d.z2 = std::min(need2, total_blocks);
        d.z1 = std::min(need1, total_blocks - d.z2);
    }
    d.learning_blocks = total_blocks - d.z1 - d.z2;
    return d;
}

bool SampleQueue::offer(const agent::Experience& sample, Rng& rng) {
    ++total_offered;
    const double rejection = capacity_ > 0 ? static_cast<double>(size()) / capacity_ : 1.0;
    if (size() >= capacity_ || bernoulli(rng, rejection)) {
        ++total_rejected;
        return false;
    }
    pending_.push_back(sample);
    ++total_accepted;
    return true;
}

SampleQueue::TransmitResult SampleQueue::transmit(int blocks) {
    TransmitResult result;
    if (blocks < 0) throw std::invalid_argument("negative block budget");
    const int budget = blocks + credit_;
    const int want = budget / packets_per_sample_;
    const int deliver = std::min(want, size());
    for (int i = 0; i < deliver; ++i) {
        result.delivered.push_back(pending_.front());
        pending_.pop_front();
    }
    total_delivered += deliver;
    if (!pending_.empty()) {
        credit_ = budget % packets_per_sample_;
        result.unused_blocks = 0;
    } else {
        credit_ = 0;
        result.unused_blocks = budget - deliver * packets_per_sample_;
    }
    return result;
}

void SampleQueue::clear() {
    pending_.clear();
    credit_ = 0;
}

ServicePlan full_service_plan(const link::SliceQueue& reliability_q,
                              const link::SliceQueue& deadline_q, int total_blocks,
                              std::int64_t t) {
    ServicePlan plan;
    plan.deadline_served = std::min(deadline_q.size(), total_blocks);
    plan.reliability_served = std::min(reliability_q.size(), total_blocks - plan.deadline_served);
    plan.deadline_births.reserve(plan.deadline_served);
    for (int i = 0; i < plan.deadline_served; ++i) {
        plan.deadline_births.push_back(deadline_q.birth_at(i));
    }
    (void)t;
    return plan;
}

double reward_loss(const ServicePlan& plan, const link::QosParams& deadline_qos,
                   int deadline_served_actual, std::int64_t t) {
    // Both the plan and the actual split serve the deadline queue oldest
    // first, so the deferred packets are the positions the plan reaches
    // beyond the actual service count.
    double loss = 0.0;
    for (int i = std::max(deadline_served_actual, 0); i < plan.deadline_served; ++i) {
        const int age = static_cast<int>(t - plan.deadline_births[i]);
        loss += link::qos_utility(deadline_qos, age) - link::qos_utility(deadline_qos, age + 1);
    }
    return loss;
}

}  // namespace slicesim::learnplane
