#include "slicesim/continual.hpp"

#include <filesystem>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace slicesim::continual {

ContextEstimate update_estimate(const ContextEstimate& est, const Omega& observed) {
    ContextEstimate next = est;
    next.value = (1.0 - est.alpha) * est.value + est.alpha * observed;
    return next;
}

bool detect_change(const ContextEstimate& est, const Omega& omega, double eta_thr) {
    return (est.value - omega).norm() > eta_thr;
}

bool strict_minority(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
    if (x.size() != y.size()) throw std::invalid_argument("vector length mismatch");
    return (x.array() < y.array()).all();
}

void PolicyMemory::store(const Omega& omega, const agent::QNet<double>& net) {
    entries_.push_back(PolicyMemoryEntry{omega, net.to_flat()});
}

std::optional<std::pair<std::size_t, double>> PolicyMemory::nearest(const Omega& omega) const {
    if (entries_.empty()) return std::nullopt;
    std::size_t best = 0;
    double best_dist = (entries_[0].omega - omega).norm();
    for (std::size_t i = 1; i < entries_.size(); ++i) {
        const double d = (entries_[i].omega - omega).norm();
        if (d < best_dist) {  // strict: ties keep the earliest entry
            best = i;
            best_dist = d;
        }
    }
    return std::make_pair(best, best_dist);
}

void PolicyMemory::save(const std::string& directory) const {
    namespace fs = std::filesystem;
    fs::create_directories(directory);
    for (std::size_t i = 0; i < entries_.size(); ++i) {
        nlohmann::json j;
        j["omega"] = {entries_[i].omega[0], entries_[i].omega[1]};
        j["weights"] = entries_[i].weights;
        std::ofstream out(fs::path(directory) / ("policy_" + std::to_string(i) + ".json"));
        out << j.dump();
    }
}

PolicyMemory PolicyMemory::load(const std::string& directory) {
    namespace fs = std::filesystem;
    PolicyMemory memory;
    for (std::size_t i = 0;; ++i) {
        const fs::path path = fs::path(directory) / ("policy_" + std::to_string(i) + ".json");
        if (!fs::exists(path)) break;
        std::ifstream in(path);
        nlohmann::json j;
        in >> j;
        PolicyMemoryEntry entry;
        entry.omega = Omega(j.at("omega").at(0).get<double>(), j.at("omega").at(1).get<double>());
        entry.weights = j.at("weights").get<std::vector<double>>();
        memory.entries_.push_back(std::move(entry));
    }
    return memory;
}

PolicySelection select_policy(const PolicyMemory& memory, const Omega& omega_prev,
                              const agent::QNet<double>& theta_prev, const Omega& omega_new,
                              double eta_thr, Rng& rng) {
    if (strict_minority(omega_new, omega_prev)) {
        return {theta_prev, TrainingRegime::adaptation};
    }
    if (const auto hit = memory.nearest(omega_new); hit && hit->second < eta_thr) {
        return {agent::QNet<double>::from_flat(memory.entry(hit->first).weights),
                TrainingRegime::adaptation};
    }
    return {agent::init_weights<double>(rng), TrainingRegime::from_scratch};
}

void DriftTracker::reset(const Omega& initial) {
    est_.alpha = cfg_.alpha;
    est_.value = initial;
    reference_ = initial;
    since_change_ = 0;
    settled_ = false;  // refreeze the reference once the initial dwell ends
    alarms_ = 0;
}

bool DriftTracker::observe(const Omega& active_flows) {
    est_ = update_estimate(est_, active_flows);
    ++since_change_;
    if (since_change_ < cfg_.dwell_slots) return false;
    if (!settled_) {
        // Dwell elapsed after an alarm: freeze the settled estimate as the
        // new reference so a large jump cannot re-trigger mid-transition.
        reference_ = est_.value;
        settled_ = true;
    }
    if (detect_change(est_, reference_, cfg_.eta_thr)) {
        ++alarms_;
        since_change_ = 0;
        settled_ = false;
        return true;
    }
    return false;
}

}  // namespace slicesim::continual
