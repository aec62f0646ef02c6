#include "slicesim/agent.hpp"

#include <algorithm>
#include <cmath>

namespace slicesim::agent {

AllocationState apply_delta(AllocationState a, int action_index, int total_blocks) {
    const auto& delta = kActionDeltas.at(action_index);
    const int a1 = a.a1 + delta[0];
    const int a2 = a.a2 + delta[1];
    if (a1 < 0 || a2 < 0 || a1 > total_blocks || a2 > total_blocks) return a;
    return AllocationState{a1, a2};
}

FeatureVec featurize(const Observation& obs, const FeatureNorms& norms) {
    auto clamp01 = [](double x) { return std::clamp(x, 0.0, 1.0); };
    FeatureVec f;
    int k = 0;
    for (const auto& s : obs.slice) {
        f[k++] = clamp01(s.queue_len / norms.queue);
        f[k++] = clamp01(s.t_min / norms.latency);
        f[k++] = clamp01(s.t_max / norms.latency);
        f[k++] = clamp01(s.t_avg / norms.latency);
        f[k++] = clamp01(s.discarded / norms.discard);
        f[k++] = clamp01(s.allocation / norms.allocation);
    }
    f[k++] = clamp01(obs.deadline_pressure / norms.pressure);
    return f;
}

int argmax_action(const Eigen::Vector3d& qvals) {
    int best = 0;
    for (int i = 1; i < kActionCount; ++i) {
        if (qvals[i] > qvals[best]) best = i;
    }
    return best;
}

int select_action(const Eigen::Vector3d& qvals, double epsilon, Rng& rng) {
    if (bernoulli(rng, epsilon)) return uniform_int(rng, 0, kActionCount - 1);
    return argmax_action(qvals);
}

template struct QNet<double>;
template double td_loss_and_gradients<double>(const QNet<double>&, const QNet<double>&,
                                              const std::vector<Experience>&, double,
                                              Gradients<double>*);
template double train_step<double>(QNet<double>&, AdamState<double>&, const QNet<double>&,
                                   const std::vector<Experience>&, double, double);

}  // namespace slicesim::agent
