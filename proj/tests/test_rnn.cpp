#include "domseq/ensemble_classifier.hpp"
#include "domseq/rnn_classifier.hpp"

#include "fixtures.hpp"

#include <doctest.h>

using namespace domseq;
using doctest::Approx;

TEST_CASE("zero model is uniform on an empty history") {
    const RnnDomainModel m = RnnDomainModel::zeros(3, 4);
    const auto p = forward(m, std::vector<DomainId>{}, Vector::Constant(3, 1.0 / 3));
    for (int k = 0; k < 3; ++k) CHECK(p(k) == Approx(1.0 / 3));
    CHECK(final_state(m, std::vector<DomainId>{}).isZero());
}

TEST_CASE("golden forward pass, H=2 K=2") {
    RnnDomainModel m = RnnDomainModel::zeros(2, 2);
    m.w_xh = Matrix{{0.5, -0.3, 0.1}, {0.2, 0.4, -0.6}};
    m.w_hh = Matrix{{0.1, 0.2}, {-0.3, 0.5}};
    m.b_h = Vector{{0.05, -0.05}};
    m.w_out = Matrix{{0.7, -0.2, 0.3, 0.1}, {-0.4, 0.6, -0.1, 0.2}};
    m.b_out = Vector{{0.1, -0.1}};
    const std::vector<DomainId> history{0, 1};
    const Vector s = final_state(m, history);
    CHECK(s(0) == Approx(-0.16854717).epsilon(1e-7));
    CHECK(s(1) == Approx(0.26760886).epsilon(1e-7));
    const auto p = forward(m, history, Vector{{0.8, 0.2}});
    CHECK(p(0) == Approx(0.52510662).epsilon(1e-7));
    CHECK(p(1) == Approx(0.47489338).epsilon(1e-7));
}

TEST_CASE("bptt matches finite differences") {
    const RnnDomainModel m = RnnDomainModel::random(3, 5, 11, 0.5);
    const RnnExample ex{{0, 2, 1, 1, 0, 2}, Vector{{0.2, 0.5, 0.3}}, 1};
    const auto r = gradient_check(m, ex);
    CHECK(r.max_relative_error < 1e-4);
    CHECK(gradient_check(m, ex).max_relative_error == r.max_relative_error);
}

TEST_CASE("empty history checks only the output layer") {
    const RnnDomainModel m = RnnDomainModel::random(3, 4, 12, 0.5);
    const RnnExample ex{{}, Vector{{0.6, 0.3, 0.1}}, 2};
    const auto r = gradient_check(m, ex);
    CHECK(r.max_relative_error < 1e-4);
    CHECK(bptt_gradient(m, ex).w_hh.isZero());
}

TEST_CASE("learns to follow the most recent domain") {
    Rng rng(4);
    std::vector<RnnExample> data;
    for (int i = 0; i < 300; ++i) {
        RnnExample ex;
        const std::size_t len = 1 + rng.below(5);
        for (std::size_t t = 0; t < len; ++t) ex.history.push_back(static_cast<DomainId>(rng.below(3)));
        ex.v_d = Vector::Constant(3, 1.0 / 3);
        ex.gold = ex.history.back();
        data.push_back(ex);
    }
    const RnnDomainModel m = train_rnn(data, 3, RnnOptions{});
    int correct = 0;
    for (const auto& ex : data) correct += argmax(forward(m, ex.history, ex.v_d)) == ex.gold;
    CHECK(static_cast<double>(correct) / static_cast<double>(data.size()) >= 0.99);
}

TEST_CASE("training is reproducible") {
    const auto data = fixtures::long_dependency_examples(50, 2);
    RnnOptions o;
    o.epochs = 3;
    const RnnDomainModel a = train_rnn(data, 3, o);
    const RnnDomainModel b = train_rnn(data, 3, o);
    CHECK(a.w_hh == b.w_hh);
    CHECK(a.w_out == b.w_out);
}
