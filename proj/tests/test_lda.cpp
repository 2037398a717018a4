#include "domseq/lda_tagger.hpp"

#include "fixtures.hpp"

#include <doctest.h>

using namespace domseq;
using doctest::Approx;

namespace {

// Ids 0-4 form one cluster, 5-9 the other.
std::vector<TokenIds> separated_documents(int n, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<TokenIds> docs;
    for (int d = 0; d < n; ++d) {
        const int base = d % 2 == 0 ? 0 : 5;
        TokenIds doc;
        for (int w = 0; w < 8; ++w) doc.push_back(base + static_cast<int>(rng.below(5)));
        docs.push_back(doc);
    }
    return docs;
}

LdaOptions two_topics() {
    LdaOptions o;
    o.n_topics = 2;
    o.iterations = 200;
    o.seed = 5;
    return o;
}

}  // namespace

TEST_CASE("fit_lda separates two disjoint clusters") {
    const auto docs = separated_documents(60, 1);
    const LdaFit fit = fit_lda(docs, 10, two_topics());
    for (std::size_t d = 0; d < docs.size(); ++d) {
        const Vector theta = document_theta(fit, d);
        CHECK(theta.sum() == Approx(1.0));
        CHECK(theta.maxCoeff() > 0.9);
    }
}

TEST_CASE("fit_lda with one topic") {
    const auto docs = separated_documents(10, 2);
    LdaOptions o = two_topics();
    o.n_topics = 1;
    const LdaFit fit = fit_lda(docs, 10, o);
    for (std::size_t d = 0; d < docs.size(); ++d) CHECK(document_theta(fit, d)(0) == Approx(1.0));
}

TEST_CASE("fit_lda is deterministic and rejects empty corpora") {
    const auto docs = separated_documents(20, 3);
    const LdaFit a = fit_lda(docs, 10, two_topics());
    const LdaFit b = fit_lda(docs, 10, two_topics());
    CHECK(a.model.topic_word_counts == b.model.topic_word_counts);
    CHECK(a.assignments == b.assignments);
    CHECK_THROWS_AS(fit_lda(std::vector<TokenIds>{}, 10, two_topics()), Error);
}

TEST_CASE("sweep observer sees every sweep") {
    const auto docs = separated_documents(10, 4);
    int calls = 0;
    fit_lda(docs, 10, two_topics(), [&](int, const LdaFit&) { ++calls; });
    CHECK(calls == two_topics().iterations);
}

TEST_CASE("infer_theta on unseen documents") {
    const auto docs = separated_documents(60, 1);
    const LdaFit fit = fit_lda(docs, 10, two_topics());
    const int topic0 = document_theta(fit, 0)(0) > 0.5 ? 0 : 1;
    const TokenIds cluster0{0, 1, 2, 3, 4, 0, 1};
    const Vector theta = infer_theta(fit.model, cluster0, 100, 9);
    CHECK(theta(topic0) > 0.9);
    CHECK(theta.sum() == Approx(1.0));
    const Vector empty = infer_theta(fit.model, TokenIds{}, 100, 9);
    CHECK(empty(0) == Approx(0.5));
    CHECK(empty(1) == Approx(0.5));
}

TEST_CASE("tag_utterance threshold is strict") {
    TopicDomainMap map{{0, 1}, {"movies", "gaming"}};
    CHECK(tag_utterance(Vector{{0.6, 0.4}}, map, 0.5) == 0);
    CHECK_FALSE(tag_utterance(Vector{{0.5, 0.5}}, map, 0.5).has_value());
    TopicDomainMap three{{0, 1, 2}, {"movies", "gaming", "out_of_domain"}};
    CHECK_FALSE(tag_utterance(Vector{{0.4, 0.3, 0.3}}, three, 0.5).has_value());
    TopicDomainMap merged{{0, 0, 1}, {"movies", "gaming"}};
    CHECK(tag_utterance(Vector{{0.3, 0.3, 0.4}}, merged, 0.5) == 0);
}

TEST_CASE("relabel_out_of_scope") {
    const DomainSet d = DomainSet::standard();
    const std::vector<std::optional<int>> tags{0, 5, std::nullopt, 1};
    const auto out = relabel_out_of_scope(tags, d);
    CHECK(out[0] == 0);
    CHECK(out[1] == d.out_of_domain_index);
    CHECK_FALSE(out[2].has_value());
    CHECK(out[3] == 1);
    CHECK(relabel_out_of_scope(std::vector<std::optional<int>>{}, d).empty());
}

TEST_CASE("smooth_domains") {
    const DomainSet d = DomainSet::standard();
    using Tags = std::vector<std::optional<int>>;
    CHECK(smooth_domains(Tags{0, std::nullopt, std::nullopt}, 0.5, d) == std::vector<DomainId>{0, 0, 0});
    CHECK(smooth_domains(Tags{1, 1, 1}, 0.5, d) == std::vector<DomainId>{1, 1, 1});
    CHECK(smooth_domains(Tags{std::nullopt, 1}, 0.5, d) == std::vector<DomainId>{2, 1});
    // A fresh tag outweighs the decayed history.
    CHECK(smooth_domains(Tags{0, 0, 1}, 0.5, d) == std::vector<DomainId>{0, 0, 1});
    // Tiny decay reproduces raw tags wherever they exist.
    const Tags raw{0, 1, std::nullopt, 2, 0};
    const auto smoothed = smooth_domains(raw, 1e-9, d);
    for (std::size_t t = 0; t < raw.size(); ++t) {
        CHECK(smoothed[t] >= 0);
        CHECK(smoothed[t] < d.size());
        if (raw[t]) CHECK(smoothed[t] == *raw[t]);
    }
}

TEST_CASE("map_topics by seed keyword mass") {
    const auto docs = separated_documents(60, 1);
    const LdaFit fit = fit_lda(docs, 14, two_topics());
    const Vocabulary vocab = Vocabulary::from_tokens(
        {"<pad>", "<unk>", "<s>", "</s>", "w0", "w1", "w2", "w3", "w4", "w5", "w6", "w7", "w8", "w9"});
    // Documents above use raw ids 0-9, so shift them past the reserved ids.
    std::vector<TokenIds> shifted = docs;
    for (auto& doc : shifted)
        for (int& id : doc) id += Vocabulary::kReserved;
    const LdaFit fit2 = fit_lda(shifted, vocab.size(), two_topics());
    const std::vector<std::pair<std::string, std::vector<std::string>>> keywords{{"movies", {"w0", "w1"}},
                                                                                {"gaming", {"w5", "w6"}}};
    const auto map = map_topics(fit2.model, vocab, DomainSet::standard(), keywords);
    REQUIRE(map.assignment.size() == 2);
    CHECK(map.assignment[0] != map.assignment[1]);
    const Vector theta = document_theta(fit2, 0);  // cluster of w0..w4
    CHECK(tag_utterance(theta, map, 0.5) == 0);
    (void)fit;
}

TEST_CASE("tag_conversations recovers planted clusters") {
    const auto convs = fixtures::two_cluster_conversations(40, 11);
    TaggerOptions opts;
    opts.lda.n_topics = 2;
    opts.lda.iterations = 200;
    const auto keywords = fixtures::cluster_keywords();
    const auto result = tag_conversations(convs, DomainSet::standard(), keywords, opts);
    std::size_t total = 0, correct = 0;
    for (std::size_t c = 0; c < convs.size(); ++c)
        for (std::size_t t = 0; t < convs[c].turns.size(); ++t) {
            ++total;
            correct += result.conversations[c].turns[t].gold_domain == convs[c].turns[t].gold_domain;
        }
    CHECK(static_cast<double>(correct) / static_cast<double>(total) >= 0.95);
}
