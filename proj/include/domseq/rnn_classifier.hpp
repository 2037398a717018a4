#pragma once
// Recurrent domain classifier. An Elman RNN reads the one-hot domain
// history; its final state is concatenated with the SVM vector and fed to a
// softmax layer:
//   s_t = tanh(W_xh onehot(d_t) + W_hh s_{t-1} + b_h),   s_0 = 0
//   p   = softmax(W_out [s_T ; v_d] + b_out)

#include "domseq/gradcheck.hpp"
#include "domseq/math.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace domseq {

struct RnnDomainModel {
    Matrix w_xh;   // H x (K+1); column K is the START pseudo-domain
    Matrix w_hh;   // H x H
    Vector b_h;    // H
    Matrix w_out;  // K x (H+K)
    Vector b_out;  // K

    int hidden() const { return static_cast<int>(w_hh.rows()); }
    int n_domains() const { return static_cast<int>(w_out.rows()); }

    static RnnDomainModel zeros(int n_domains, int hidden);
    static RnnDomainModel random(int n_domains, int hidden, std::uint64_t seed, double scale = 0.1);

    template <typename F>
    void visit(F&& f) {
        f("w_xh", w_xh);
        f("w_hh", w_hh);
        f("b_h", b_h);
        f("w_out", w_out);
        f("b_out", b_out);
    }
};

struct RnnExample {
    std::vector<DomainId> history;
    DomainDistribution v_d;
    DomainId gold = 0;
};

/// Final hidden state v_r (zero for an empty history).
Vector final_state(const RnnDomainModel& model, std::span<const DomainId> history);

DomainDistribution forward(const RnnDomainModel& model, std::span<const DomainId> history,
                           const DomainDistribution& v_d);

/// Cross-entropy of one example and its gradient by backpropagation through
/// time over the full history.
double loss(const RnnDomainModel& model, const RnnExample& example);
RnnDomainModel bptt_gradient(const RnnDomainModel& model, const RnnExample& example);

struct RnnOptions {
    int hidden = 8;
    int epochs = 50;
    double learning_rate = 0.1;
    double clip = 5.0;
    std::uint64_t seed = 1;
};

/// Per-example SGD with global-norm clipping, shuffled each epoch.
RnnDomainModel train_rnn(std::span<const RnnExample> examples, int n_domains, const RnnOptions& options);

/// BPTT gradients against central finite differences for every tensor.
GradCheckResult gradient_check(const RnnDomainModel& model, const RnnExample& example, double eps = 1e-5);

}  // namespace domseq
