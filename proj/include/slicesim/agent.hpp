#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "slicesim/rng.hpp"

namespace slicesim::agent {

inline constexpr int kFeatureDim = 13;
inline constexpr int kHidden1 = 64;
inline constexpr int kHidden2 = 32;
inline constexpr int kActionCount = 3;
inline constexpr double kInitStd = 0.1;

// delta applied to the (a1, a2) split per action index
inline constexpr std::array<std::array<int, 2>, kActionCount> kActionDeltas{
    {{1, -1}, {0, 0}, {-1, 1}}};

struct AllocationState {
    int a1 = 0;
    int a2 = 0;
    int total() const { return a1 + a2; }
};

AllocationState apply_delta(AllocationState a, int action_index, int total_blocks);

struct Observation {
    struct PerSlice {
        double queue_len = 0.0;
        double t_min = 0.0;
        double t_max = 0.0;
        double t_avg = 0.0;
        double discarded = 0.0;
        double allocation = 0.0;
    };
    std::array<PerSlice, 2> slice;
    double deadline_pressure = 0.0;  // slice 2 only
};

struct FeatureNorms {
    double queue = 1500.0;
    double latency = 100.0;  // slots; larger latencies clamp to 1
    double discard = 15.0;
    double allocation = 15.0;
    double pressure = 15.0;
};

using FeatureVec = Eigen::Matrix<double, kFeatureDim, 1>;

// Fixed input order (q1,Tmin1,Tmax1,Tavg1,d1,a1, q2,Tmin2,Tmax2,Tavg2,d2,a2, xi2),
// each divided by its norm and clamped to [0,1].
FeatureVec featurize(const Observation& obs, const FeatureNorms& norms);

// 13-64-32-3 multilayer perceptron, rectifier hidden layers, linear output.
template <typename Scalar>
struct QNet {
    using Mat1 = Eigen::Matrix<Scalar, kHidden1, kFeatureDim>;
    using Mat2 = Eigen::Matrix<Scalar, kHidden2, kHidden1>;
    using Mat3 = Eigen::Matrix<Scalar, kActionCount, kHidden2>;
    using Vec1 = Eigen::Matrix<Scalar, kHidden1, 1>;
    using Vec2 = Eigen::Matrix<Scalar, kHidden2, 1>;
    using Vec3 = Eigen::Matrix<Scalar, kActionCount, 1>;

    Mat1 w1 = Mat1::Zero();
    Vec1 b1 = Vec1::Zero();
    Mat2 w2 = Mat2::Zero();
    Vec2 b2 = Vec2::Zero();
    Mat3 w3 = Mat3::Zero();
    Vec3 b3 = Vec3::Zero();

    static constexpr int parameter_count() {
        return kHidden1 * kFeatureDim + kHidden1 + kHidden2 * kHidden1 + kHidden2 +
               kActionCount * kHidden2 + kActionCount;
    }

    bool finite() const {
        return w1.allFinite() && b1.allFinite() && w2.allFinite() && b2.allFinite() &&
               w3.allFinite() && b3.allFinite();
    }

    // Layer-ordered flat view (w1, b1, w2, b2, w3, b3) for persistence.
    std::vector<double> to_flat() const;
    static QNet from_flat(const std::vector<double>& flat);
};

static_assert(QNet<double>::parameter_count() == 3075);

template <typename Scalar>
Eigen::Matrix<Scalar, kActionCount, 1> forward(const QNet<Scalar>& net,
                                               const Eigen::Matrix<Scalar, kFeatureDim, 1>& x) {
    if (!net.finite()) throw std::runtime_error("corrupted network: non-finite weights");
    const auto h1 = (net.w1 * x + net.b1).cwiseMax(Scalar(0)).eval();
    const auto h2 = (net.w2 * h1 + net.b2).cwiseMax(Scalar(0)).eval();
    return net.w3 * h2 + net.b3;
}

template <typename Scalar>
QNet<Scalar> init_weights(Rng& rng) {
    std::normal_distribution<double> gauss(0.0, kInitStd);
    QNet<Scalar> net;
    auto fill = [&](auto& m) {
        for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = Scalar(gauss(rng));
    };
    fill(net.w1);
    fill(net.b1);
    fill(net.w2);
    fill(net.b2);
    fill(net.w3);
    fill(net.b3);
    return net;
}

int select_action(const Eigen::Vector3d& qvals, double epsilon, Rng& rng);

// Q-value argmax with ties broken by the lowest index.
int argmax_action(const Eigen::Vector3d& qvals);

struct Experience {
    FeatureVec features = FeatureVec::Zero();
    int action = 0;
    double reward = 0.0;
    FeatureVec next_features = FeatureVec::Zero();
    bool terminal = false;
};

template <typename Scalar>
struct Gradients {
    typename QNet<Scalar>::Mat1 w1 = QNet<Scalar>::Mat1::Zero();
    typename QNet<Scalar>::Vec1 b1 = QNet<Scalar>::Vec1::Zero();
    typename QNet<Scalar>::Mat2 w2 = QNet<Scalar>::Mat2::Zero();
    typename QNet<Scalar>::Vec2 b2 = QNet<Scalar>::Vec2::Zero();
    typename QNet<Scalar>::Mat3 w3 = QNet<Scalar>::Mat3::Zero();
    typename QNet<Scalar>::Vec3 b3 = QNet<Scalar>::Vec3::Zero();
};

// Mean squared temporal-difference error of the taken actions' Q-values,
// with targets r + gamma * max_a' Q_target(s') (r alone for terminal samples),
// and its gradient with respect to the online network.
template <typename Scalar>
double td_loss_and_gradients(const QNet<Scalar>& net, const QNet<Scalar>& target,
                             const std::vector<Experience>& batch, double gamma,
                             Gradients<Scalar>* grads);

// Adam-style first/second-moment accumulator.
template <typename Scalar>
struct AdamState {
    Gradients<Scalar> m;
    Gradients<Scalar> v;
    std::int64_t step = 0;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

// One stochastic-gradient step; returns the pre-step loss.
template <typename Scalar>
double train_step(QNet<Scalar>& net, AdamState<Scalar>& opt, const QNet<Scalar>& target,
                  const std::vector<Experience>& batch, double gamma, double lr);

template <typename Scalar>
void sync_target(const QNet<Scalar>& net, QNet<Scalar>& target) {
    target = net;
}

extern template struct QNet<double>;
extern template double td_loss_and_gradients<double>(const QNet<double>&, const QNet<double>&,
                                                     const std::vector<Experience>&, double,
                                                     Gradients<double>*);
extern template double train_step<double>(QNet<double>&, AdamState<double>&, const QNet<double>&,
                                          const std::vector<Experience>&, double, double);

}  // namespace slicesim::agent

#include "slicesim/agent_impl.hpp"
