#include "domseq/seq2seq.hpp"

#include <doctest.h>

#include <cmath>

using namespace domseq;
using doctest::Approx;

TEST_CASE("tiny model gradients match finite differences") {
    const Seq2SeqParams p = Seq2SeqParams::random(8, 3, 4, 1, 21, 0.5);
    const TokenIds query{4, 5, 6};
    const TokenIds response{7, 4, 5};
    const auto r = gradient_check(p, query, response);
    CAPTURE(r.worst_tensor);
    CHECK(r.max_relative_error < 1e-3);
}

TEST_CASE("two-layer gradients match finite differences") {
    const Seq2SeqParams p = Seq2SeqParams::random(8, 3, 4, 2, 22, 0.5);
    const TokenIds query{4, 6};
    const TokenIds response{5, 7, 6};
    const auto r = gradient_check(p, query, response);
    CAPTURE(r.worst_tensor);
    CHECK(r.max_relative_error < 1e-3);
}

TEST_CASE("attention columns are distributions") {
    const Seq2SeqParams p = Seq2SeqParams::random(10, 4, 6, 1, 3, 0.5);
    const ForwardResult f = teacher_forced(p, TokenIds{4, 5, 6, 7}, TokenIds{8, 9});
    CHECK(f.target_tokens == 3);
    REQUIRE(f.attention.rows() == 4);
    REQUIRE(f.attention.cols() == 3);
    for (Eigen::Index t = 0; t < f.attention.cols(); ++t) {
        CHECK(f.attention.col(t).sum() == Approx(1.0).epsilon(1e-12));
        CHECK(f.attention.col(t).minCoeff() >= 0.0);
    }
}

TEST_CASE("out of range token ids are rejected") {
    const Seq2SeqParams p = Seq2SeqParams::random(8, 3, 4, 1, 1);
    CHECK_THROWS_AS(teacher_forced(p, TokenIds{4, 99}, TokenIds{5}), Error);
}

TEST_CASE("loss decreases while overfitting a single pair") {
    Seq2SeqParams p = Seq2SeqParams::random(10, 4, 8, 1, 5);
    const TokenIds query{4, 5, 6};
    const TokenIds response{7, 8, 9};
    double prev = encode_decode_train_step(p, query, response, 0.5);
    for (int i = 0; i < 49; ++i) {
        const double l = encode_decode_train_step(p, query, response, 0.5);
        CHECK(l < prev);
        prev = l;
    }
    Seq2SeqModel m{p, Vocabulary{}, 0};
    for (int i = 0; i < 300; ++i) encode_decode_train_step(m.params, query, response, 0.5);
    const ScoredResponse r = decode_greedy(m, query, 10);
    CHECK(r.tokens == response);
    CHECK(r.reached_eos);
    CHECK(r.confidence == Approx(response_confidence(r.final_logit)));
    CHECK(decode_greedy(m, query, 10).final_logit == r.final_logit);
    const std::vector<EncodedPair> data{{query, response}};
    CHECK(perplexity(m.params, data) <= 1.2);
}

TEST_CASE("confidence is the sigmoid of the final logit") {
    CHECK(response_confidence(0.0) == 0.5);
    CHECK(response_confidence(std::log(3.0)) == Approx(0.75).epsilon(1e-12));
}

TEST_CASE("uniform model has perplexity equal to the vocabulary size") {
    const Seq2SeqParams p = Seq2SeqParams::zeros(12, 3, 4, 1);
    const std::vector<EncodedPair> data{{{4, 5}, {6, 7, 8}}, {{9}, {10}}};
    CHECK(perplexity(p, data) == Approx(12.0).epsilon(1e-12));
    CHECK_THROWS_AS(perplexity(p, std::vector<EncodedPair>{}), Error);
}

TEST_CASE("greedy decoding stops at max_len and never emits reserved ids") {
    const Seq2SeqParams p = Seq2SeqParams::random(10, 4, 8, 1, 7, 0.3);
    const Seq2SeqModel m{p, Vocabulary{}, 0};
    const ScoredResponse r = decode_greedy(m, TokenIds{4, 5}, 4);
    CHECK(r.tokens.size() <= 4);
    for (int id : r.tokens) {
        CHECK(id != Vocabulary::kPad);
        CHECK(id != Vocabulary::kSos);
        CHECK(id != Vocabulary::kEos);
    }
    CHECK(r.confidence > 0.0);
    CHECK(r.confidence < 1.0);
}

TEST_CASE("train_generator") {
    std::vector<QRPair> pairs;
    for (const auto& [q, r] : std::vector<std::pair<std::string, std::string>>{
             {"hello there", "hi friend"}, {"hello friend", "hi there"}, {"good film", "great film"}}) {
        pairs.push_back({Utterance::make(q), Utterance::make(r), 0});
    }
    GeneratorOptions o;
    o.epochs = 2;
    o.min_count = 1;
    TrainingLog log;
    const Seq2SeqModel m = train_generator(pairs, 0, o, &log);
    CHECK(log.train_loss.size() == 2);
    CHECK(m.vocab.contains("film"));
    CHECK(m.params.vocab_size() == m.vocab.size());
    const Seq2SeqModel again = train_generator(pairs, 0, o);
    CHECK(again.params.w_out == m.params.w_out);
    pairs[1].domain = 1;
    CHECK_THROWS_AS(train_generator(pairs, 0, o), Error);
    CHECK(GeneratorOptions::large_scale().layers == 3);
    CHECK(GeneratorOptions::large_scale().hidden == 1024);
}

TEST_CASE("the gradient check catches a one percent error") {
    const Seq2SeqParams p = Seq2SeqParams::random(8, 3, 4, 1, 21, 0.5);
    const TokenIds query{4, 5, 6};
    const TokenIds response{7, 4, 5};
    Seq2SeqParams g;
    loss_and_gradient(p, query, response, g);
    g.w_out *= 1.01;
    const auto r = check_gradients(p, g, [&](Seq2SeqParams& q) { return teacher_forced(q, query, response).loss; });
    CHECK(r.max_relative_error > 1e-3);
    CHECK(r.worst_tensor == "w_out");
}
