#pragma once
// Small numeric helpers shared by every model. All functions accept Eigen
// expressions and keep the scalar type of their argument.

#include "domseq/types.hpp"

#include <algorithm>
#include <concepts>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

namespace domseq {

template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1>
softmax(const Eigen::MatrixBase<Derived>& logits) {
    using S = typename Derived::Scalar;
    const S peak = logits.maxCoeff();
    Eigen::Matrix<S, Eigen::Dynamic, 1> e = (logits.array() - peak).exp().matrix();
    return e / e.sum();
}

template <typename Derived>
typename Derived::Scalar log_sum_exp(const Eigen::MatrixBase<Derived>& x) {
    using std::log;
    const auto peak = x.maxCoeff();
    return peak + log((x.array() - peak).exp().sum());
}

template <std::floating_point S>
S sigmoid(S x) {
    using std::exp;
    // Split by sign so neither branch overflows.
    if (x >= S(0)) return S(1) / (S(1) + exp(-x));
    const S e = exp(x);
    return e / (S(1) + e);
}

template <typename Derived>
auto sigmoid(const Eigen::MatrixBase<Derived>& x) {
    using S = typename Derived::Scalar;
    return x.unaryExpr([](S v) { return sigmoid(v); });
}

/// Cosine similarity; a zero-norm operand yields 0.
template <typename A, typename B>
typename A::Scalar cosine(const Eigen::MatrixBase<A>& u, const Eigen::MatrixBase<B>& v) {
    if (u.size() != v.size()) throw Error("cosine: dimension mismatch");
    const auto nu = u.norm();
    const auto nv = v.norm();
    if (nu == 0 || nv == 0) return 0;
    return std::clamp<typename A::Scalar>(u.dot(v) / (nu * nv), -1, 1);
}

/// Index of the largest entry; ties resolve to the lowest index.
template <typename Derived>
Eigen::Index argmax(const Eigen::MatrixBase<Derived>& x) {
    Eigen::Index best = 0;
    for (Eigen::Index i = 1; i < x.size(); ++i)
        if (x(i) > x(best)) best = i;
    return best;
}

/// Scale every tensor so the joint L2 norm does not exceed max_norm.
/// Returns the norm before clipping.
template <typename Params>
Scalar clip_global_norm(Params& grads, Scalar max_norm) {
    Scalar sq = 0;
    grads.visit([&](const char*, auto& t) { sq += t.squaredNorm(); });
    const Scalar norm = std::sqrt(sq);
    if (max_norm > 0 && norm > max_norm) {
        const Scalar scale = max_norm / norm;
        grads.visit([&](const char*, auto& t) { t *= scale; });
    }
    return norm;
}

/// params -= lr * grads, tensor by tensor.
template <typename Params>
void sgd_update(Params& params, Params& grads, Scalar lr) {
    std::vector<Scalar*> gptr;
    grads.visit([&](const char*, auto& t) { gptr.push_back(t.data()); });
    std::size_t k = 0;
    params.visit([&](const char*, auto& t) {
        Eigen::Map<Vector>(t.data(), t.size()) -= lr * Eigen::Map<const Vector>(gptr[k++], t.size());
    });
}

/// Deterministic, platform-independent random source (SplitMix64).
/// std distributions are implementation-defined, so model files would not be
/// reproducible across standard libraries if we used them.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    /// Uniform in [0, 1).
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0, n).
    std::size_t below(std::size_t n) {
        if (n == 0) return 0;
        return static_cast<std::size_t>(uniform() * static_cast<double>(n));
    }

    bool bernoulli(double p) { return uniform() < p; }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[below(i)]);
    }

    template <typename T>
    const T& pick(const std::vector<T>& v) { return v[below(v.size())]; }

    /// Sample an index proportionally to nonnegative weights.
    std::size_t categorical(std::span<const double> weights) {
        double total = 0;
        for (double w : weights) total += w;
        double r = uniform() * total;
        for (std::size_t i = 0; i < weights.size(); ++i) {
            r -= weights[i];
            if (r < 0) return i;
        }
        return weights.size() - 1;
    }

    void fill_uniform(Matrix& m, double scale) {
        for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = uniform(-scale, scale);
    }
    void fill_uniform(Vector& v, double scale) {
        for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = uniform(-scale, scale);
    }

private:
    std::uint64_t state_;
};

inline std::vector<std::size_t> iota_indices(std::size_t n) {
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    return idx;
}

}  // namespace domseq
