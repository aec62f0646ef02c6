#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include "slicesim/learnplane.hpp"
#include "slicesim/rng.hpp"

namespace slicesim::sched {

enum class SchemeKind { dynamic, out_of_band, fdma, tdma };

struct SchemeConfig {
    SchemeKind kind = SchemeKind::dynamic;
    int fdma_reserved = 1;  // blocks per slot reserved to the learning plane
    int tdma_period = 10;   // slots between all-blocks learning slots
};

SchemeConfig parse_scheme(const std::string& name);
std::string scheme_name(const SchemeConfig& scheme);

enum class SlotKind { drl, learning };

struct PlaneDecision {
    SlotKind kind = SlotKind::drl;
    int drl_blocks = 0;
    int learning_blocks = 0;
    bool instant_delivery = false;
};

// Per-slot plane arbitration. t is the slot index within the current training
// phase (the rho clock restarts when a context change is declared).
PlaneDecision plane_schedule(const SchemeConfig& scheme, std::int64_t t,
                             const learnplane::RhoSchedule& rho_sched, int total_blocks, Rng& rng);

// Blocks the DQN's allocation may distribute: N - reserved for FDMA, N otherwise.
int effective_action_space(const SchemeConfig& scheme, int total_blocks);

}  // namespace slicesim::sched
