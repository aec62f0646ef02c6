#include "slicesim/link.hpp"

#include <algorithm>

namespace slicesim::link {

double qos_utility(const QosParams& qos, std::optional<int> latency_slots) {
    if (!latency_slots.has_value()) return 0.0;
    if (qos.kind == QosKind::reliability) return 1.0;
    const int lat = *latency_slots;
    if (lat <= qos.t_soft) return 1.0;
    const double slope = static_cast<double>(lat - qos.t_soft) / (qos.t_max - qos.t_soft);
    return std::max(0.0, 1.0 - slope);
}

int SliceQueue::enqueue_arrivals(int count, std::int64_t t) {
    total_arrived += count;
    const int room = capacity_ - size();
    const int admitted = std::clamp(count, 0, room);
    for (int i = 0; i < admitted; ++i) birth_.push_back(t);
    const int rejected = count - admitted;
    total_rejected += rejected;
    return rejected;
}

int SliceQueue::expire_deadline(std::int64_t t) {
    if (qos_.kind != QosKind::deadline) return 0;
    int dropped = 0;
    while (!birth_.empty() && t - birth_.front() > qos_.t_max) {
        birth_.pop_front();
        ++dropped;
    }
    total_dropped += dropped;
    return dropped;
}

ServedStats SliceQueue::serve(int blocks, std::int64_t t) {
    ServedStats stats;
    const int n = std::min(std::max(blocks, 0), size());
    stats.latencies.reserve(n);
    for (int i = 0; i < n; ++i) {
        const int latency = static_cast<int>(t - birth_.front());
        birth_.pop_front();
        stats.latencies.push_back(latency);
        stats.utility_sum += qos_utility(qos_, latency);
    }
    stats.served = n;
    total_served += n;
    return stats;
}

double SliceQueue::deadline_pressure(std::int64_t t) const {
    if (qos_.kind != QosKind::deadline || birth_.empty()) return 0.0;
    // f(age) - f(age + 1) is nonzero only for ages in [t_soft, t_max), where
    // it equals the constant decay slope. Birth times are FIFO-ordered, so the
    // decaying packets form a contiguous range found by binary search.
    const auto first_young = std::lower_bound(birth_.begin(), birth_.end(), t - qos_.t_max + 1);
    const auto first_fresh = std::lower_bound(birth_.begin(), birth_.end(), t - qos_.t_soft + 1);
    const auto count = std::distance(first_young, first_fresh);
    return static_cast<double>(count) / (qos_.t_max - qos_.t_soft);
}

int SliceQueue::aged_count(std::int64_t t) const {
    if (qos_.kind != QosKind::deadline || birth_.empty()) return 0;
    const auto first_fresh = std::lower_bound(birth_.begin(), birth_.end(), t - qos_.t_soft + 1);
    return static_cast<int>(std::distance(birth_.begin(), first_fresh));
}

}  // namespace slicesim::link
