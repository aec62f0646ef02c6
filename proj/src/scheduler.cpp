#include "slicesim/scheduler.hpp"

namespace slicesim::sched {

SchemeConfig parse_scheme(const std::string& name) {
    if (name == "dynamic") return {SchemeKind::dynamic};
    if (name == "oob") return {SchemeKind::out_of_band};
    if (name == "fdma") return {SchemeKind::fdma, 1};
    if (name == "tdma10") return {SchemeKind::tdma, 1, 10};
    if (name == "tdma100") return {SchemeKind::tdma, 1, 100};
    throw std::invalid_argument("unknown scheme: " + name);
}

std::string scheme_name(const SchemeConfig& scheme) {
    switch (scheme.kind) {
        case SchemeKind::dynamic: return "dynamic";
        case SchemeKind::out_of_band: return "oob";
        case SchemeKind::fdma: return "fdma";
        case SchemeKind::tdma: return "tdma" + std::to_string(scheme.tdma_period);
    }
    return "unknown";
}

PlaneDecision plane_schedule(const SchemeConfig& scheme, std::int64_t t,
                             const learnplane::RhoSchedule& rho_sched, int total_blocks,
                             Rng& rng) {
    switch (scheme.kind) {
        case SchemeKind::dynamic:
            if (learnplane::is_learning_slot(t, rho_sched, rng)) {
                return {SlotKind::learning, 0, total_blocks, false};
            }
            return {SlotKind::drl, total_blocks, 0, false};
        case SchemeKind::out_of_band:
            return {SlotKind::drl, total_blocks, 0, true};
        case SchemeKind::fdma:
            return {SlotKind::drl, total_blocks - scheme.fdma_reserved, scheme.fdma_reserved,
                    false};
        case SchemeKind::tdma:
            if (t % scheme.tdma_period == 0) {
                return {SlotKind::learning, 0, total_blocks, false};
            }
            return {SlotKind::drl, total_blocks, 0, false};
    }
    throw std::logic_error("unreachable scheme kind");
}

int effective_action_space(const SchemeConfig& scheme, int total_blocks) {
    return scheme.kind == SchemeKind::fdma ? total_blocks - scheme.fdma_reserved : total_blocks;
}

}  // namespace slicesim::sched
