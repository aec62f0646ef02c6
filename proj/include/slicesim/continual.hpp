#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "slicesim/agent.hpp"
#include "slicesim/rng.hpp"

namespace slicesim::continual {

using Omega = Eigen::Vector2d;

// Exponentially weighted per-slice average of active-flow counts.
struct ContextEstimate {
    Omega value = Omega::Zero();
    double alpha = 0.001;
};

ContextEstimate update_estimate(const ContextEstimate& est, const Omega& observed);

// True iff the estimate has drifted strictly beyond eta_thr (Euclidean) from
// the reference context. Dwell-time hysteresis is enforced by DriftTracker.
bool detect_change(const ContextEstimate& est, const Omega& omega, double eta_thr);

// Componentwise strict-less-than.
bool strict_minority(const Eigen::VectorXd& x, const Eigen::VectorXd& y);

struct PolicyMemoryEntry {
    Omega omega = Omega::Zero();
    std::vector<double> weights;  // layer-ordered flat record
};

class PolicyMemory {
  public:
    void store(const Omega& omega, const agent::QNet<double>& net);
    std::optional<std::pair<std::size_t, double>> nearest(const Omega& omega) const;
    const PolicyMemoryEntry& entry(std::size_t i) const { return entries_.at(i); }
    std::size_t size() const { return entries_.size(); }
    bool empty() const { return entries_.empty(); }

    // Directory persistence: one record per entry (omega + flat weights).
    void save(const std::string& directory) const;
    static PolicyMemory load(const std::string& directory);

  private:
    std::vector<PolicyMemoryEntry> entries_;
};

enum class TrainingRegime { from_scratch, adaptation };

struct PolicySelection {
    agent::QNet<double> weights;
    TrainingRegime regime = TrainingRegime::from_scratch;
};

// The context-change update rule: reuse the incumbent policy when the new
// context is a strict minority of the old one, reuse the nearest stored
// policy when it lies within eta_thr, and start from fresh N(0, 0.1) weights
// otherwise.
PolicySelection select_policy(const PolicyMemory& memory, const Omega& omega_prev,
                              const agent::QNet<double>& theta_prev, const Omega& omega_new,
                              double eta_thr, Rng& rng);

struct DriftConfig {
    double alpha = 0.001;
    double eta_thr = 2.0;
    int dwell_slots = 10000;
    // Slots between declaring a change and selecting the new policy, so the
    // smoothed estimate has settled on the new context before memory lookup.
    int settle_slots = 3000;
};

// Streams per-slot active-flow counts into the smoothed estimate, declares a
// context change when the estimate leaves the reference ball, and freezes a
// settled reference once the dwell period ends.
class DriftTracker {
  public:
    DriftTracker() = default;
    explicit DriftTracker(const DriftConfig& cfg) : cfg_(cfg) {}

    void reset(const Omega& initial);
    // Returns true when a context change is declared at this slot.
    bool observe(const Omega& active_flows);

    const ContextEstimate& estimate() const { return est_; }
    const Omega& reference() const { return reference_; }
    std::int64_t alarms() const { return alarms_; }

  private:
    DriftConfig cfg_;
    ContextEstimate est_;
    Omega reference_ = Omega::Zero();
    std::int64_t since_change_ = 0;
    bool settled_ = true;
    std::int64_t alarms_ = 0;
};

}  // namespace slicesim::continual
