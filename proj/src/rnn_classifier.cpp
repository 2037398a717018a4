#include "domseq/rnn_classifier.hpp"

namespace domseq {

RnnDomainModel RnnDomainModel::zeros(int n_domains, int hidden) {
    return {Matrix::Zero(hidden, n_domains + 1), Matrix::Zero(hidden, hidden), Vector::Zero(hidden),
            Matrix::Zero(n_domains, hidden + n_domains), Vector::Zero(n_domains)};
}

RnnDomainModel RnnDomainModel::random(int n_domains, int hidden, std::uint64_t seed, double scale) {
    RnnDomainModel m = zeros(n_domains, hidden);
    Rng rng(seed);
    m.visit([&](const char*, auto& t) { rng.fill_uniform(t, scale); });
    return m;
}

namespace {

// States s_0..s_T as columns; s_0 = 0.
Matrix unroll(const RnnDomainModel& model, std::span<const DomainId> history) {
    const int h = model.hidden();
    Matrix states = Matrix::Zero(h, static_cast<Eigen::Index>(history.size()) + 1);
    for (std::size_t t = 0; t < history.size(); ++t) {
        const auto col = static_cast<Eigen::Index>(t);
        states.col(col + 1) =
            (model.w_xh.col(history[t]) + model.w_hh * states.col(col) + model.b_h).array().tanh();
    }
    return states;
}

Vector logits(const RnnDomainModel& model, const Vector& v_r, const DomainDistribution& v_d) {
    const int h = model.hidden();
    return model.w_out.leftCols(h) * v_r + model.w_out.rightCols(model.n_domains()) * v_d + model.b_out;
}

void check_history(const RnnDomainModel& model, std::span<const DomainId> history) {
    for (DomainId d : history)
        if (d < 0 || d > model.n_domains()) throw Error("rnn: history domain out of range");
}

}  // namespace

Vector final_state(const RnnDomainModel& model, std::span<const DomainId> history) {
    check_history(model, history);
    return unroll(model, history).rightCols(1);
}

DomainDistribution forward(const RnnDomainModel& model, std::span<const DomainId> history,
                           const DomainDistribution& v_d) {
    return softmax(logits(model, final_state(model, history), v_d));
}

double loss(const RnnDomainModel& model, const RnnExample& example) {
    const Vector z = logits(model, final_state(model, example.history), example.v_d);
    return log_sum_exp(z) - z(example.gold);
}

RnnDomainModel bptt_gradient(const RnnDomainModel& model, const RnnExample& ex) {
    check_history(model, ex.history);
    const int h = model.hidden();
    const int k = model.n_domains();
    const Matrix states = unroll(model, ex.history);
    const auto T = static_cast<Eigen::Index>(ex.history.size());
    const Vector v_r = states.col(T);

    RnnDomainModel g = RnnDomainModel::zeros(k, h);
    Vector dz = softmax(logits(model, v_r, ex.v_d));
    dz(ex.gold) -= 1;
    g.w_out.leftCols(h).noalias() = dz * v_r.transpose();
    g.w_out.rightCols(k).noalias() = dz * ex.v_d.transpose();
    g.b_out = dz;

    Vector ds = model.w_out.leftCols(h).transpose() * dz;
    for (Eigen::Index t = T; t >= 1; --t) {
        const Vector da = ds.array() * (1 - states.col(t).array().square());
        g.w_xh.col(ex.history[static_cast<std::size_t>(t - 1)]) += da;
        g.w_hh.noalias() += da * states.col(t - 1).transpose();
        g.b_h += da;
        ds = model.w_hh.transpose() * da;
    }
    return g;
}

RnnDomainModel train_rnn(std::span<const RnnExample> examples, int n_domains, const RnnOptions& options) {
    if (examples.empty()) throw Error("train_rnn: empty training set");
    RnnDomainModel model = RnnDomainModel::random(n_domains, options.hidden, options.seed);
    Rng rng(options.seed ^ 0x5eedULL);
    auto order = iota_indices(examples.size());
    for (int epoch = 0; epoch < options.epochs; ++epoch) {
        rng.shuffle(order);
        for (std::size_t n : order) {
            RnnDomainModel g = bptt_gradient(model, examples[n]);
            clip_global_norm(g, options.clip);
            sgd_update(model, g, options.learning_rate);
        }
    }
    return model;
}

GradCheckResult gradient_check(const RnnDomainModel& model, const RnnExample& example, double eps) {
    const RnnDomainModel analytic = bptt_gradient(model, example);
    return check_gradients(model, analytic, [&](const RnnDomainModel& m) { return loss(m, example); }, eps);
}

}  // namespace domseq
