#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "slicesim/rng.hpp"

namespace slicesim::traffic {

inline constexpr int kSliceCount = 2;

// Two-state on/off chain. Entry o01 is the off-to-on transition probability,
// o11 the probability of staying on; rows must be stochastic.
struct GilbertElliott {
    double o00 = 1.0;
    double o01 = 0.0;
    double o10 = 0.0;
    double o11 = 1.0;

    void validate() const;
    static GilbertElliott from_on_off(double off_to_on, double on_to_off) {
        return {1.0 - off_to_on, off_to_on, on_to_off, 1.0 - on_to_off};
    }
};

struct SliceParams {
    int user_count = 1;
    GilbertElliott chain;
    double rate_bytes_per_s = 512000.0;
};

// One coherence period's traffic statistics.
struct EnvParams {
    int env_index = 0;
    std::array<SliceParams, kSliceCount> slices;

    double expected_active(int slice) const;
    double expected_traffic_bytes_per_s(int slice) const;
    // Total offered load of both slices as a fraction of link capacity.
    double expected_load(double capacity_bytes_per_s) const;
    Eigen::Vector2d omega() const;
};

struct SlotArrivals {
    std::array<int, kSliceCount> packets{0, 0};
    std::array<int, kSliceCount> active_users{0, 0};
};

bool user_chain_step(bool active, const GilbertElliott& chain, Rng& rng);

// Closed-form transition probability of the aggregate active-user chain,
// P(u_(t+1) = v | u_t = u) for U independent users.
double aggregate_transition_prob(int u, int v, int user_count, const GilbertElliott& chain);

// Full (U+1)x(U+1) row-stochastic transition matrix of the aggregate chain.
Eigen::MatrixXd aggregate_transition_matrix(int user_count, const GilbertElliott& chain);

double expected_active_users(int user_count, const GilbertElliott& chain);

// Tracks the on/off state of every user in one slice and converts active
// users into whole packets, carrying fractional per-slot residue.
class SliceTraffic {
  public:
    SliceTraffic() = default;
    SliceTraffic(const SliceParams& params, double slot_ms, double packet_bytes, Rng& rng);

    // Advances every user chain by one slot and returns this slot's arrivals.
    int step(Rng& rng);
    int active_users() const { return active_count_; }
    void reconfigure(const SliceParams& params, Rng& rng);

  private:
    SliceParams params_;
    std::vector<std::uint8_t> on_;
    int active_count_ = 0;
    double packets_per_user_slot_ = 1.0;
    double residue_ = 0.0;
};

struct GeneratorLimits {
    double load_min = 0.75;
    double load_max = 1.1;
    double entry_min = 0.05;
    double entry_max = 0.95;
    int max_draws = 100000;
};

// Samples a fresh environment: chain entries uniform in [0.05, 0.95],
// U1 uniform in [2, floor(14/on1)], U2 matched so the expected total load
// lands in [0.75, 1.1] of capacity; resamples until the load band holds.
EnvParams generate_environment(Rng& rng, double capacity_bytes_per_s,
                               double rate_bytes_per_s = 512000.0,
                               const GeneratorLimits& limits = {});

// Table presets for the four sampled coherence periods (indices 0, 12, 102, 110).
const EnvParams& preset_environment(int table_index);
const std::vector<int>& preset_indices();

}  // namespace slicesim::traffic
