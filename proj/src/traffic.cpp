#include "slicesim/traffic.hpp"

#include <cmath>
#include <limits>

namespace slicesim::traffic {

namespace {

double log_binom(int n, int k) {
    return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

// p^k with the 0^0 = 1 convention, in log space; returns -inf for 0^k, k>0.
double log_pow(double p, int k) {
    if (k == 0) return 0.0;
    if (p <= 0.0) return -std::numeric_limits<double>::infinity();
    return k * std::log(p);
}

}  // namespace

void GilbertElliott::validate() const {
    for (double p : {o00, o01, o10, o11}) {
        if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("chain entry outside [0,1]");
    }
    if (std::abs(o00 + o01 - 1.0) > 1e-12 || std::abs(o10 + o11 - 1.0) > 1e-12) {
        throw std::invalid_argument("chain rows must be stochastic");
    }
}

double EnvParams::expected_active(int slice) const {
    const SliceParams& s = slices.at(slice);
    return expected_active_users(s.user_count, s.chain);
}

double EnvParams::expected_traffic_bytes_per_s(int slice) const {
    return expected_active(slice) * slices.at(slice).rate_bytes_per_s;
}

double EnvParams::expected_load(double capacity_bytes_per_s) const {
    double total = 0.0;
    for (int m = 0; m < kSliceCount; ++m) total += expected_traffic_bytes_per_s(m);
    return total / capacity_bytes_per_s;
}

Eigen::Vector2d EnvParams::omega() const {
    return {expected_active(0), expected_active(1)};
}

bool user_chain_step(bool active, const GilbertElliott& chain, Rng& rng) {
    const double p_on = active ? chain.o11 : chain.o01;
    return bernoulli(rng, p_on);
}

double aggregate_transition_prob(int u, int v, int user_count, const GilbertElliott& chain) {
    if (u < 0 || v < 0 || u > user_count || v > user_count) {
        throw std::invalid_argument("aggregate state outside {0..U}");
    }
    const int w_lo = std::max(0, u + v - user_count);
    const int w_hi = std::min(u, v);
    double total = 0.0;
    for (int w = w_lo; w <= w_hi; ++w) {
        const double lg = log_pow(chain.o11, w) + log_pow(chain.o10, u - w) +
                          log_binom(u, w) + log_binom(user_count - u, v - w) +
                          log_pow(chain.o01, v - w) + log_pow(chain.o00, user_count - u - v + w);
        if (std::isfinite(lg)) total += std::exp(lg);
    }
    return total;
}

Eigen::MatrixXd aggregate_transition_matrix(int user_count, const GilbertElliott& chain) {
    Eigen::MatrixXd m(user_count + 1, user_count + 1);
    for (int u = 0; u <= user_count; ++u)
        for (int v = 0; v <= user_count; ++v)
            m(u, v) = aggregate_transition_prob(u, v, user_count, chain);
    return m;
}

double expected_active_users(int user_count, const GilbertElliott& chain) {
    const double denom = chain.o01 + chain.o10;
    if (denom <= 0.0) throw std::domain_error("degenerate chain: o01 = o10 = 0");
    return chain.o01 * user_count / denom;
}

SliceTraffic::SliceTraffic(const SliceParams& params, double slot_ms, double packet_bytes, Rng& rng) {
    // rate * slot / L, arranged so the table's 512 kB/s / 512 B / 1 ms case
    // is exactly one packet per user per slot.
    packets_per_user_slot_ = params.rate_bytes_per_s * slot_ms / (1000.0 * packet_bytes);
    reconfigure(params, rng);
}

void SliceTraffic::reconfigure(const SliceParams& params, Rng& rng) {
    params_ = params;
    params_.chain.validate();
    on_.assign(params.user_count, 0);
    const double stationary_on = expected_active_users(1, params.chain);
    active_count_ = 0;
    for (auto& state : on_) {
        state = bernoulli(rng, stationary_on) ? 1 : 0;
        active_count_ += state;
    }
}

int SliceTraffic::step(Rng& rng) {
    int active = 0;
    for (auto& state : on_) {
        state = user_chain_step(state != 0, params_.chain, rng) ? 1 : 0;
        active += state;
    }
    active_count_ = active;
    residue_ += active * packets_per_user_slot_;
    const int whole = static_cast<int>(residue_);
    residue_ -= whole;
    return whole;
}

EnvParams generate_environment(Rng& rng, double capacity_bytes_per_s, double rate_bytes_per_s,
                               const GeneratorLimits& limits) {
    std::uniform_real_distribution<double> entry(limits.entry_min, limits.entry_max);
    for (int draw = 0; draw < limits.max_draws; ++draw) {
        std::array<GilbertElliott, kSliceCount> chains;
        for (auto& c : chains) {
            const double o11 = entry(rng);
            const double o00 = entry(rng);
            c = GilbertElliott{o00, 1.0 - o00, 1.0 - o11, o11};
        }
        const double on1 = expected_active_users(1, chains[0]);
        const double on2 = expected_active_users(1, chains[1]);
        const int u1_max = static_cast<int>(std::floor(14.0 / on1));
        if (u1_max < 2) continue;  // degenerate on-probability with tiny population
        const int u1 = uniform_int(rng, 2, u1_max);
        const double remainder = std::max(std::floor(15.0 - u1 * on1), 1.0);
        const int u2 = static_cast<int>(std::floor(remainder / on2));

        EnvParams env;
        env.slices[0] = SliceParams{u1, chains[0], rate_bytes_per_s};
        env.slices[1] = SliceParams{std::max(u2, 1), chains[1], rate_bytes_per_s};
        const double load = env.expected_load(capacity_bytes_per_s);
        if (load >= limits.load_min && load <= limits.load_max) return env;
    }
    throw std::runtime_error("environment generator exceeded its draw budget");
}

namespace {

std::vector<EnvParams> make_presets() {
    // Off-diagonal entries are authoritative; diagonals complete the rows.
    auto env = [](int index, int u1, double o01_1, double o10_1, int u2, double o01_2,
                  double o10_2) {
        EnvParams e;
        e.env_index = index;
        e.slices[0] = SliceParams{u1, GilbertElliott::from_on_off(o01_1, o10_1), 512000.0};
        e.slices[1] = SliceParams{u2, GilbertElliott::from_on_off(o01_2, o10_2), 512000.0};
        return e;
    };
    std::vector<EnvParams> presets;
    presets.push_back(env(0, 28, 0.382, 0.544, 5, 0.843, 0.763));
    presets.push_back(env(12, 15, 0.841, 0.218, 30, 0.074, 0.672));
    presets.push_back(env(102, 20, 0.202, 0.316, 83, 0.050, 0.547));
    presets.push_back(env(110, 9, 0.303, 0.156, 37, 0.195, 0.620));
    return presets;
}

}  // namespace

const EnvParams& preset_environment(int table_index) {
    static const std::vector<EnvParams> presets = make_presets();
    for (const auto& p : presets) {
        if (p.env_index == table_index) return p;
    }
    throw std::invalid_argument("unknown preset environment index");
}

const std::vector<int>& preset_indices() {
    static const std::vector<int> ids{0, 12, 102, 110};
    return ids;
}

}  // namespace slicesim::traffic
