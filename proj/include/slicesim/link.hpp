#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <vector>

namespace slicesim::link {

enum class QosKind { reliability, deadline };

struct QosParams {
    QosKind kind = QosKind::reliability;
    int t_soft = 50;  // slots
    int t_max = 70;   // slots
};

// Utility of serving a packet at the given latency; nullopt means unserved.
double qos_utility(const QosParams& qos, std::optional<int> latency_slots);

struct ServedStats {
    int served = 0;
    double utility_sum = 0.0;
    std::vector<int> latencies;
    int rejected = 0;
    int dropped = 0;
};

// Bounded FIFO of packet birth slots for one slice.
class SliceQueue {
  public:
    SliceQueue() = default;
    SliceQueue(QosParams qos, int capacity) : qos_(qos), capacity_(capacity) {}

    // Appends up to capacity - length packets born at slot t; the excess is
    // rejected and never enters the queue.
    int enqueue_arrivals(int count, std::int64_t t);

    // Drops from the head every packet with age strictly above t_max.
    // Reliability queues never drop.
    int expire_deadline(std::int64_t t);

    // Dequeues min(blocks, length) packets, oldest first, recording latencies
    // and the summed utility of the served packets.
    ServedStats serve(int blocks, std::int64_t t);

    // Utility that decays if nothing is transmitted in the next slot:
    // sum over queued packets of f(age) - f(age + 1).
    double deadline_pressure(std::int64_t t) const;

    // Queued packets whose age has reached the soft deadline (the ones whose
    // utility decays if delayed).
    int aged_count(std::int64_t t) const;

    int size() const { return static_cast<int>(birth_.size()); }
    int capacity() const { return capacity_; }
    const QosParams& qos() const { return qos_; }
    std::int64_t birth_at(int i) const { return birth_[i]; }

    std::int64_t total_arrived = 0;
    std::int64_t total_served = 0;
    std::int64_t total_rejected = 0;
    std::int64_t total_dropped = 0;

  private:
    QosParams qos_;
    int capacity_ = 0;
    std::deque<std::int64_t> birth_;
};

}  // namespace slicesim::link
