#include "slicesim/sim.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <stdexcept>

#include "slicesim/agent.hpp"
#include "slicesim/continual.hpp"
#include "slicesim/learnplane.hpp"
#include "slicesim/link.hpp"
#include "slicesim/scheduler.hpp"
#include "slicesim/traffic.hpp"

namespace slicesim::harness {

namespace {

using agent::AllocationState;
using agent::Experience;
using continual::Omega;
using continual::TrainingRegime;

// Cloud-side learner: replay ring, online and target networks, Adam state.
class Learner {
  public:
    Learner(const AgentConfig& cfg, double gamma, agent::QNet<double> initial, Rng* sample_rng)
        : cfg_(cfg), gamma_(gamma), net_(initial), target_(initial), sample_rng_(sample_rng) {}

    void ingest(const Experience& sample) {
        replay_.push_back(sample);
        if (static_cast<int>(replay_.size()) > cfg_.replay_capacity) replay_.pop_front();
    }

    bool ready() const { return static_cast<int>(replay_.size()) >= cfg_.batch_size; }

    double train_once() {
        batch_.clear();
        for (int i = 0; i < cfg_.batch_size; ++i) {
            const int idx = uniform_int(*sample_rng_, 0, static_cast<int>(replay_.size()) - 1);
            batch_.push_back(replay_[idx]);
        }
        const double loss = agent::train_step(net_, opt_, target_, batch_, gamma_, cfg_.learning_rate);
        ++gradient_steps_;
        if (gradient_steps_ % cfg_.target_sync_period == 0) agent::sync_target(net_, target_);
        return loss;
    }

    void reset_policy(agent::QNet<double> weights) {
        net_ = weights;
        target_ = weights;
        opt_ = agent::AdamState<double>{};
        replay_.clear();
    }

    const agent::QNet<double>& net() const { return net_; }
    std::int64_t gradient_steps() const { return gradient_steps_; }

  private:
    AgentConfig cfg_;
    double gamma_;
    agent::QNet<double> net_;
    agent::QNet<double> target_;
    agent::AdamState<double> opt_;
    std::deque<Experience> replay_;
    std::vector<Experience> batch_;
    std::int64_t gradient_steps_ = 0;
    Rng* sample_rng_;
};

struct SlotServeStats {
    std::array<int, 2> served{0, 0};
    std::array<double, 2> t_min{0.0, 0.0};
    std::array<double, 2> t_max{0.0, 0.0};
    std::array<double, 2> t_avg{0.0, 0.0};
    std::array<int, 2> discarded{0, 0};
};

class Simulation {
  public:
    Simulation(const RunConfig& config, const WindowCallback& on_window)
        : cfg_(config),
          on_window_(on_window),
          scheme_(sched::parse_scheme(config.scheme)),
          traffic_rng_(make_stream(config.seed, "traffic")),
          explore_rng_(make_stream(config.seed, "exploration")),
          lslot_rng_(make_stream(config.seed, "learning-slot")),
          admission_rng_(make_stream(config.seed, "sample-admission")),
          envgen_rng_(make_stream(config.seed, "environment")),
          init_rng_(make_stream(config.seed, "weight-init")),
          replay_rng_(make_stream(config.seed, "replay")),
          q1_(link::QosParams{link::QosKind::reliability}, config.queue_capacity),
          q2_(link::QosParams{link::QosKind::deadline, config.t_soft_slots, config.t_max_slots},
              config.queue_capacity),
          samples_(config.sample_queue_capacity, config.packets_per_sample),
          tracker_(config.drift),
          learner_(config.agent, config.gamma, agent::init_weights<double>(init_rng_),
                   &replay_rng_) {
        cfg_.validate();
        total_blocks_ = cfg_.blocks_per_slot;
        effective_blocks_ = sched::effective_action_space(scheme_, total_blocks_);
        norms_.queue = cfg_.queue_capacity;
        norms_.latency = 100.0;
        norms_.discard = total_blocks_;
        norms_.allocation = effective_blocks_;
        norms_.pressure = total_blocks_;

        build_environments();
        apply_environment(0);
        // Initial provisioning follows the first period's nominal load split;
        // afterwards the allocation only ever moves through the agent's deltas.
        const double g1 = env_sequence_.front().expected_traffic_bytes_per_s(0);
        const double g2 = env_sequence_.front().expected_traffic_bytes_per_s(1);
        int a1 = effective_blocks_ / 2;
        if (g1 + g2 > 0.0) {
            a1 = static_cast<int>(std::lround(effective_blocks_ * g1 / (g1 + g2)));
        }
        a1 = std::clamp(a1, 0, effective_blocks_);
        alloc_ = AllocationState{a1, effective_blocks_ - a1};
        previous_env_omega_ = current_env_->omega();
        tracker_.reset(Omega(traffic_[0].active_users(), traffic_[1].active_users()));
        begin_phase(0, TrainingRegime::from_scratch);
        result_.histograms.push_back(
            PeriodHistogram{0, env_sequence_.front().env_index, {}});
    }

    RunResult run() {
        const std::int64_t total = cfg_.total_slots();
        for (std::int64_t t = 0; t < total; ++t) step(t);
        finalize();
        return std::move(result_);
    }

  private:
    void build_environments() {
        env_sequence_.clear();
        for (int p = 0; p < cfg_.period_count; ++p) {
            switch (cfg_.environments.kind) {
                case EnvSourceConfig::Kind::presets: {
                    const auto& ids = cfg_.environments.presets;
                    env_sequence_.push_back(traffic::preset_environment(ids[p % ids.size()]));
                    break;
                }
                case EnvSourceConfig::Kind::custom: {
                    const auto& envs = cfg_.environments.custom_envs;
                    env_sequence_.push_back(envs[p % envs.size()]);
                    break;
                }
                case EnvSourceConfig::Kind::generated:
                    env_sequence_.push_back(
                        traffic::generate_environment(envgen_rng_, cfg_.capacity_bytes_per_s()));
                    env_sequence_.back().env_index = p;
                    break;
            }
        }
    }

    void apply_environment(int period) {
        const auto& env = env_sequence_.at(period);
        for (int m = 0; m < 2; ++m) {
            traffic_[m] = traffic::SliceTraffic(env.slices[m], cfg_.slot_ms, cfg_.packet_bytes,
                                                traffic_rng_);
        }
        current_env_ = &env_sequence_[period];
    }

    void begin_phase(std::int64_t t, TrainingRegime regime) {
        phase_start_ = t;
        drl_slots_in_phase_ = 0;
        regime_ = regime;
        rho_phase_ = cfg_.rho;
        if (regime == TrainingRegime::adaptation) {
            rho_phase_.rho0 = std::max(cfg_.rho.rhof, cfg_.rho.rho0 * cfg_.agent.adapt_rho0_scale);
        }
        has_pending_ = false;
    }

    double epsilon() const {
        const double start = regime_ == TrainingRegime::adaptation ? cfg_.agent.adapt_eps_start
                                                                   : cfg_.agent.eps_start;
        const double span = static_cast<double>(regime_ == TrainingRegime::adaptation
                                                    ? cfg_.agent.adapt_eps_decay_slots
                                                    : cfg_.agent.eps_decay_slots);
        const double frac = std::min(1.0, static_cast<double>(drl_slots_in_phase_) / span);
        return std::max(cfg_.agent.eps_end, start - (start - cfg_.agent.eps_end) * frac);
    }

    agent::Observation make_observation(std::int64_t t) const {
        agent::Observation obs;
        obs.slice[0].queue_len = q1_.size();
        obs.slice[1].queue_len = q2_.size();
        for (int m = 0; m < 2; ++m) {
            obs.slice[m].t_min = prev_stats_.served[m] > 0 ? prev_stats_.t_min[m] : 0.0;
            obs.slice[m].t_max = prev_stats_.served[m] > 0 ? prev_stats_.t_max[m] : 0.0;
            obs.slice[m].t_avg = prev_stats_.served[m] > 0 ? prev_stats_.t_avg[m] : 0.0;
            obs.slice[m].discarded = prev_stats_.discarded[m];
        }
        obs.slice[0].allocation = alloc_.a1;
        obs.slice[1].allocation = alloc_.a2;
        obs.deadline_pressure = q2_.deadline_pressure(t);
        return obs;
    }

    void deliver_to_learner(const std::vector<Experience>& delivered) {
        for (const auto& e : delivered) learner_.ingest(e);
        window_delivered_ += static_cast<std::int64_t>(delivered.size());
    }

    void offer_sample(const Experience& sample) {
        if (scheme_.kind == sched::SchemeKind::out_of_band) {
            // side channel with infinite capacity: no queue, no early rejection
            learner_.ingest(sample);
            ++window_delivered_;
            ++oob_direct_;
            return;
        }
        samples_.offer(sample, admission_rng_);
    }

    // Serves the slices with blocks left over by the learning plane, deadline
    // slice first, and merges the result into the slot stats.
    void fallback_serve(int blocks, std::int64_t t, link::ServedStats& s1, link::ServedStats& s2) {
        if (blocks <= 0) return;
        link::ServedStats extra2 = q2_.serve(blocks, t);
        blocks -= extra2.served;
        link::ServedStats extra1 = q1_.serve(blocks, t);
        merge(s2, extra2);
        merge(s1, extra1);
    }

    static void merge(link::ServedStats& into, const link::ServedStats& from) {
        into.served += from.served;
        into.utility_sum += from.utility_sum;
        into.latencies.insert(into.latencies.end(), from.latencies.begin(), from.latencies.end());
    }

    void step(std::int64_t t) {
        if (t > 0 && t % cfg_.period_slots == 0) {
            const int period = static_cast<int>(t / cfg_.period_slots);
            apply_environment(period);
            result_.histograms.push_back(PeriodHistogram{period, current_env_->env_index, {}});
        }

        const int n1 = traffic_[0].step(traffic_rng_);
        const int n2 = traffic_[1].step(traffic_rng_);
        window_.generated[0] += n1;
        window_.generated[1] += n2;

        const int dropped2 = q2_.expire_deadline(t);
        const int rej1 = q1_.enqueue_arrivals(n1, t);
        const int rej2 = q2_.enqueue_arrivals(n2, t);
        window_.dropped[1] += dropped2;
        window_.rejected[0] += rej1;
        window_.rejected[1] += rej2;

        const auto decision = sched::plane_schedule(scheme_, t - phase_start_, rho_phase_,
                                                    total_blocks_, lslot_rng_);

        link::ServedStats s1;
        link::ServedStats s2;
        if (decision.kind == sched::SlotKind::drl) {
            const auto obs = make_observation(t);
            const auto features = agent::featurize(obs, norms_);
            if (has_pending_) {
                offer_sample(Experience{pending_features_, pending_action_, pending_reward_,
                                        features, false});
                has_pending_ = false;
            }
            const Eigen::Vector3d qvals = agent::forward(learner_.net(), features);
            const int action = agent::select_action(qvals, epsilon(), explore_rng_);
            alloc_ = agent::apply_delta(alloc_, action, effective_blocks_);
            if (scheme_.kind == sched::SchemeKind::fdma) {
                // Reserved blocks ship samples every slot; they never fall
                // back to slice service, mirroring a hard frequency split.
                deliver_to_learner(samples_.transmit(decision.learning_blocks).delivered);
            }
            s2 = q2_.serve(alloc_.a2, t);
            s1 = q1_.serve(alloc_.a1, t);
            const double reward = s1.utility_sum + s2.utility_sum;
            pending_features_ = features;
            pending_action_ = action;
            pending_reward_ = reward;
            has_pending_ = true;
            ++drl_slots_in_phase_;
        } else {
            const auto plan = learnplane::full_service_plan(q1_, q2_, total_blocks_, t);
            int learning_blocks = total_blocks_;
            if (scheme_.kind == sched::SchemeKind::dynamic) {
                const auto split = learnplane::greedy_split(
                    q1_.size(), cfg_.queue_pressure_threshold, q2_.aged_count(t), samples_.size(),
                    total_blocks_, cfg_.objective_weights);
                s2 = q2_.serve(split.z2, t);
                s1 = q1_.serve(split.z1, t);
                learning_blocks = split.learning_blocks;
            }
            const auto transmitted = samples_.transmit(learning_blocks);
            deliver_to_learner(transmitted.delivered);
            fallback_serve(transmitted.unused_blocks, t, s1, s2);
            window_.reward_losses.push_back(
                learnplane::reward_loss(plan, q2_.qos(), s2.served, t));
        }

        window_.utility_sum += s1.utility_sum + s2.utility_sum;
        window_.served[0] += s1.served;
        window_.served[1] += s2.served;
        for (const int lat : s2.latencies) {
            auto& bins = result_.histograms.back().bins;
            bins[std::min(lat, kHistogramBins - 1)] += 1;
        }

        prev_stats_.served = {s1.served, s2.served};
        for (int m = 0; m < 2; ++m) {
            const auto& lat = (m == 0 ? s1 : s2).latencies;
            if (!lat.empty()) {
                prev_stats_.t_min[m] = *std::min_element(lat.begin(), lat.end());
                prev_stats_.t_max[m] = *std::max_element(lat.begin(), lat.end());
                double sum = 0.0;
                for (int v : lat) sum += v;
                prev_stats_.t_avg[m] = sum / static_cast<double>(lat.size());
            } else {
                prev_stats_.t_min[m] = prev_stats_.t_max[m] = prev_stats_.t_avg[m] = 0.0;
            }
        }
        prev_stats_.discarded = {rej1, rej2 + dropped2};

        if (learner_.ready() && t % cfg_.agent.train_period == 0) learner_.train_once();

        handle_drift(t);

        if ((t + 1) % cfg_.window_slots() == 0) close_window(t);
    }

    void handle_drift(std::int64_t t) {
        const Omega flows(traffic_[0].active_users(), traffic_[1].active_users());
        if (tracker_.observe(flows)) {
            result_.drift_slots.push_back(t);
            // The reference still holds the completed phase's settled context.
            memory_.store(tracker_.reference(), learner_.net());
            omega_completed_ = tracker_.reference();
            selection_due_ = t + cfg_.drift.settle_slots;
            selection_pending_ = true;
        }
        if (selection_pending_ && t >= selection_due_) {
            selection_pending_ = false;
            apply_policy_selection(t);
        }
    }

    void apply_policy_selection(std::int64_t t) {
        const Omega omega_prev =
            cfg_.minority_uses_true_omega ? previous_env_omega_ : omega_completed_;
        const Omega omega_new =
            cfg_.minority_uses_true_omega ? current_env_->omega() : tracker_.estimate().value;

        continual::PolicySelection selection;
        switch (cfg_.init_strategy) {
            case InitStrategy::nearest:
                selection = continual::select_policy(memory_, omega_prev, learner_.net(),
                                                     omega_new, cfg_.drift.eta_thr, init_rng_);
                break;
            case InitStrategy::previous:
                selection = {learner_.net(), TrainingRegime::adaptation};
                break;
            case InitStrategy::random_memorized:
                if (memory_.empty()) {
                    selection = {agent::init_weights<double>(init_rng_),
                                 TrainingRegime::from_scratch};
                } else {
                    const int pick = uniform_int(init_rng_, 0, static_cast<int>(memory_.size()) - 1);
                    selection = {agent::QNet<double>::from_flat(memory_.entry(pick).weights),
                                 TrainingRegime::adaptation};
                }
                break;
        }
        learner_.reset_policy(selection.weights);
        result_.samples.flushed += samples_.size();
        samples_.clear();
        begin_phase(t, selection.regime);
        previous_env_omega_ = current_env_->omega();
    }

    void close_window(std::int64_t t) {
        window_.window_index = window_index_++;
        window_.env_index = current_env_->env_index;
        window_.norm_reward =
            normalized_reward(window_.utility_sum, window_.generated[0] + window_.generated[1]);
        window_.delivered_samples = window_delivered_;
        window_.rho = scheme_.kind == sched::SchemeKind::dynamic
                          ? learnplane::rho(t - phase_start_, rho_phase_)
                          : 0.0;
        window_.epsilon = epsilon();
        window_.queue_len1 = q1_.size();
        window_.queue_len2 = q2_.size();
        if (on_window_) on_window_(window_);
        result_.windows.push_back(std::move(window_));
        window_ = MetricsWindow{};
        window_delivered_ = 0;
    }

    void finalize() {
        for (int m = 0; m < 2; ++m) {
            const auto& q = m == 0 ? q1_ : q2_;
            result_.conservation[m] = SliceConservation{q.total_arrived, q.total_served,
                                                        q.total_rejected, q.total_dropped,
                                                        q.size()};
            if (!result_.conservation[m].balanced()) {
                throw std::logic_error("link conservation violated");
            }
        }
        result_.samples.offered = samples_.total_offered + oob_direct_;
        result_.samples.accepted = samples_.total_accepted + oob_direct_;
        result_.samples.rejected = samples_.total_rejected;
        result_.samples.delivered = samples_.total_delivered + oob_direct_;
        result_.samples.pending = samples_.size();
        if (!result_.samples.balanced()) throw std::logic_error("sample conservation violated");
        result_.gradient_steps = learner_.gradient_steps();
    }

    RunConfig cfg_;
    WindowCallback on_window_;
    sched::SchemeConfig scheme_;

    Rng traffic_rng_;
    Rng explore_rng_;
    Rng lslot_rng_;
    Rng admission_rng_;
    Rng envgen_rng_;
    Rng init_rng_;
    Rng replay_rng_;

    int total_blocks_ = 15;
    int effective_blocks_ = 15;
    agent::FeatureNorms norms_;

    std::vector<traffic::EnvParams> env_sequence_;
    const traffic::EnvParams* current_env_ = nullptr;
    std::array<traffic::SliceTraffic, 2> traffic_;

    link::SliceQueue q1_;
    link::SliceQueue q2_;
    learnplane::SampleQueue samples_;
    continual::DriftTracker tracker_;
    continual::PolicyMemory memory_;
    Learner learner_;

    AllocationState alloc_;
    learnplane::RhoSchedule rho_phase_;
    TrainingRegime regime_ = TrainingRegime::from_scratch;
    std::int64_t phase_start_ = 0;
    std::int64_t drl_slots_in_phase_ = 0;

    bool has_pending_ = false;
    agent::FeatureVec pending_features_ = agent::FeatureVec::Zero();
    int pending_action_ = 0;
    double pending_reward_ = 0.0;

    SlotServeStats prev_stats_;

    bool selection_pending_ = false;
    std::int64_t selection_due_ = 0;
    Omega omega_completed_ = Omega::Zero();
    Omega previous_env_omega_ = Omega::Zero();

    MetricsWindow window_;
    std::int64_t window_delivered_ = 0;
    std::int64_t window_index_ = 0;
    std::int64_t oob_direct_ = 0;

    RunResult result_;
};

}  // namespace

RunResult run_simulation(const RunConfig& config, const WindowCallback& on_window) {
    Simulation sim(config, on_window);
    return sim.run();
}

}  // namespace slicesim::harness
