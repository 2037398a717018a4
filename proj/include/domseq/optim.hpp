#pragma once

#include "domseq/math.hpp"

#include <cmath>
#include <vector>

namespace domseq {

enum class OptimizerKind { Sgd, Adam };

/// Plain SGD or Adam over any parameter struct exposing visit(f).
template <typename Params>
class Optimizer {
public:
    Optimizer(OptimizerKind kind, double learning_rate, const Params& shape)
        : kind_(kind), lr_(learning_rate) {
        if (kind_ == OptimizerKind::Adam) {
            Params copy = shape;
            copy.visit([&](const char*, auto& t) {
                m_.push_back(Vector::Zero(t.size()));
                v_.push_back(Vector::Zero(t.size()));
            });
        }
    }

    void step(Params& params, Params& grads) {
        if (kind_ == OptimizerKind::Sgd) {
            sgd_update(params, grads, lr_);
            return;
        }
        ++t_;
        const double c1 = 1 - std::pow(kBeta1, t_);
        const double c2 = 1 - std::pow(kBeta2, t_);
        std::vector<const Scalar*> g;
        grads.visit([&](const char*, auto& t) { g.push_back(t.data()); });
        std::size_t k = 0;
        params.visit([&](const char*, auto& t) {
            Eigen::Map<const Vector> gk(g[k], t.size());
            m_[k] = kBeta1 * m_[k] + (1 - kBeta1) * gk;
            v_[k] = kBeta2 * v_[k] + (1 - kBeta2) * gk.cwiseAbs2();
            Eigen::Map<Vector>(t.data(), t.size()).array() -=
                lr_ * (m_[k].array() / c1) / ((v_[k].array() / c2).sqrt() + kEps);
            ++k;
        });
    }

private:
    static constexpr double kBeta1 = 0.9;
    static constexpr double kBeta2 = 0.999;
    static constexpr double kEps = 1e-8;

    OptimizerKind kind_;
    double lr_;
    int t_ = 0;
    std::vector<Vector> m_;
    std::vector<Vector> v_;
};

}  // namespace domseq
