#include "domseq/evalmetrics.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>

using namespace domseq;
using doctest::Approx;

namespace {

EmbeddingTable small_table() {
    EmbeddingTable t(2);
    t.set("a", Vector{{1.0, 0.0}});
    t.set("b", Vector{{0.0, 1.0}});
    t.set("c", Vector{{1.0, 1.0}});
    t.set("d", Vector{{-1.0, 0.0}});
    return t;
}

}  // namespace

TEST_CASE("greedy match basics") {
    const EmbeddingTable t = small_table();
    CHECK(greedy_match(Tokens{"a", "b"}, Tokens{"a", "b"}, t) == Approx(1.0));
    CHECK(greedy_match(Tokens{"a"}, Tokens{"b"}, t) == Approx(0.0));
    CHECK(greedy_match(Tokens{"zzz"}, Tokens{"a"}, t) == 0.0);
    CHECK_FALSE(greedy_match_directional(Tokens{}, Tokens{"a"}, t).has_value());
}

TEST_CASE("greedy match on a 3x2 case") {
    const EmbeddingTable t = small_table();
    // c->r: a->max(cos(a,c)=.7071, cos(a,d)=-1)=.7071, b->.7071, c->1 ; mean=.80474
    // r->c: c->1, d->max(-1, 0, -.7071)=0 ; mean=.5
    const double inv = 1.0 / std::sqrt(2.0);
    const double expected = ((inv + inv + 1.0) / 3.0 + (1.0 + 0.0) / 2.0) / 2.0;
    CHECK(greedy_match(Tokens{"a", "b", "c"}, Tokens{"c", "d"}, t) == Approx(expected).epsilon(1e-12));
    CHECK(*greedy_match_directional(Tokens{"c", "d"}, Tokens{"a", "b", "c"}, t) == Approx(0.5).epsilon(1e-12));
}

TEST_CASE("evaluate") {
    const EmbeddingTable t = small_table();
    const std::vector<EvalExample> perfect{{0, 0, {"a"}, {"a"}}, {1, 1, {"b", "c"}, {"b", "c"}}};
    const EvalReport r = evaluate(perfect, t);
    CHECK(r.n_examples == 2);
    CHECK(*r.domain_accuracy == 1.0);
    CHECK(*r.greedy_match == Approx(1.0));
    const EvalReport empty = evaluate(std::vector<EvalExample>{}, t);
    CHECK(empty.n_examples == 0);
    CHECK_FALSE(empty.domain_accuracy.has_value());
    CHECK_FALSE(empty.greedy_match.has_value());
    const std::vector<EvalExample> baseline{{std::nullopt, 0, {"a"}, {"zzz"}}, {std::nullopt, 1, {"a"}, {"a"}}};
    const EvalReport b = evaluate(baseline, t);
    CHECK_FALSE(b.domain_accuracy.has_value());
    CHECK(*b.greedy_match == Approx(0.5));
    CHECK(b.uncovered_sentences == 1);
}

TEST_CASE("embedding file round trip") {
    const EmbeddingTable t = small_table();
    const auto path = std::filesystem::temp_directory_path() / "domseq_test_vectors.txt";
    save_embeddings(path, t);
    const EmbeddingTable back = load_embeddings(path);
    CHECK(back.dim() == 2);
    CHECK(back.size() == 4);
    CHECK(*back.find("c") == *t.find("c"));
    CHECK(back.tokens() == t.tokens());
}
