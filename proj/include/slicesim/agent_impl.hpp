#pragma once

#include <cmath>

#include "slicesim/agent.hpp"

namespace slicesim::agent {

template <typename Scalar>
std::vector<double> QNet<Scalar>::to_flat() const {
    std::vector<double> flat;
    flat.reserve(parameter_count());
    auto append = [&](const auto& m) {
        for (Eigen::Index i = 0; i < m.size(); ++i) flat.push_back(static_cast<double>(m.data()[i]));
    };
    append(w1);
    append(b1);
    append(w2);
    append(b2);
    append(w3);
    append(b3);
    return flat;
}

template <typename Scalar>
QNet<Scalar> QNet<Scalar>::from_flat(const std::vector<double>& flat) {
    if (static_cast<int>(flat.size()) != parameter_count()) {
        throw std::invalid_argument("flat weight record has wrong length");
    }
    QNet net;
    std::size_t pos = 0;
    auto take = [&](auto& m) {
        for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = Scalar(flat[pos++]);
    };
    take(net.w1);
    take(net.b1);
    take(net.w2);
    take(net.b2);
    take(net.w3);
    take(net.b3);
    return net;
}

template <typename Scalar>
double td_loss_and_gradients(const QNet<Scalar>& net, const QNet<Scalar>& target,
                             const std::vector<Experience>& batch, double gamma,
                             Gradients<Scalar>* grads) {
    if (batch.empty()) throw std::invalid_argument("empty training batch");
    const int n = static_cast<int>(batch.size());

    using BatchIn = Eigen::Matrix<Scalar, kFeatureDim, Eigen::Dynamic>;
    using Batch1 = Eigen::Matrix<Scalar, kHidden1, Eigen::Dynamic>;
    using Batch2 = Eigen::Matrix<Scalar, kHidden2, Eigen::Dynamic>;
    using BatchOut = Eigen::Matrix<Scalar, kActionCount, Eigen::Dynamic>;
    BatchIn x(kFeatureDim, n);
    BatchIn xn(kFeatureDim, n);
    for (int i = 0; i < n; ++i) {
        x.col(i) = batch[i].features.template cast<Scalar>();
        xn.col(i) = batch[i].next_features.template cast<Scalar>();
    }

    const Batch1 z1 = (net.w1 * x).colwise() + net.b1;
    const Batch1 a1 = z1.cwiseMax(Scalar(0));
    const Batch2 z2 = (net.w2 * a1).colwise() + net.b2;
    const Batch2 a2 = z2.cwiseMax(Scalar(0));
    const BatchOut q = (net.w3 * a2).colwise() + net.b3;

    const Batch1 th1 = ((target.w1 * xn).colwise() + target.b1).cwiseMax(Scalar(0));
    const Batch2 th2 = ((target.w2 * th1).colwise() + target.b2).cwiseMax(Scalar(0));
    const BatchOut tq = (target.w3 * th2).colwise() + target.b3;

    BatchOut dq = BatchOut::Zero(kActionCount, n);
    double loss = 0.0;
    for (int i = 0; i < n; ++i) {
        double y = batch[i].reward;
        if (!batch[i].terminal) y += gamma * static_cast<double>(tq.col(i).maxCoeff());
        const double diff = static_cast<double>(q(batch[i].action, i)) - y;
        loss += diff * diff;
        dq(batch[i].action, i) = Scalar(2.0 * diff / n);
    }
    loss /= n;

    if (grads != nullptr) {
        grads->w3 = dq * a2.transpose();
        grads->b3 = dq.rowwise().sum();
        const Batch2 dz2 = (net.w3.transpose() * dq)
                               .cwiseProduct((z2.array() > Scalar(0)).template cast<Scalar>().matrix());
        grads->w2 = dz2 * a1.transpose();
        grads->b2 = dz2.rowwise().sum();
        const Batch1 dz1 = (net.w2.transpose() * dz2)
                               .cwiseProduct((z1.array() > Scalar(0)).template cast<Scalar>().matrix());
        grads->w1 = dz1 * x.transpose();
        grads->b1 = dz1.rowwise().sum();
    }
    return loss;
}

template <typename Scalar>
double train_step(QNet<Scalar>& net, AdamState<Scalar>& opt, const QNet<Scalar>& target,
                  const std::vector<Experience>& batch, double gamma, double lr) {
    Gradients<Scalar> g;
    const double loss = td_loss_and_gradients(net, target, batch, gamma, &g);
    if (!std::isfinite(loss)) throw std::runtime_error("training diverged: non-finite loss");

    opt.step += 1;
    const Scalar b1 = Scalar(opt.beta1);
    const Scalar b2 = Scalar(opt.beta2);
    const Scalar corr1 = Scalar(1.0 - std::pow(opt.beta1, static_cast<double>(opt.step)));
    const Scalar corr2 = Scalar(1.0 - std::pow(opt.beta2, static_cast<double>(opt.step)));
    const Scalar eps = Scalar(opt.eps);
    const Scalar rate = Scalar(lr);

    auto update = [&](auto& param, const auto& grad, auto& m, auto& v) {
        m = b1 * m + (Scalar(1) - b1) * grad;
        v = b2 * v + (Scalar(1) - b2) * grad.cwiseProduct(grad);
        param.array() -= rate * (m.array() / corr1) / ((v.array() / corr2).sqrt() + eps);
    };
    update(net.w1, g.w1, opt.m.w1, opt.v.w1);
    update(net.b1, g.b1, opt.m.b1, opt.v.b1);
    update(net.w2, g.w2, opt.m.w2, opt.v.w2);
    update(net.b2, g.b2, opt.m.b2, opt.v.b2);
    update(net.w3, g.w3, opt.m.w3, opt.v.w3);
    update(net.b3, g.b3, opt.m.b3, opt.v.b3);
    return loss;
}

}  // namespace slicesim::agent
