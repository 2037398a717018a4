#include "domseq/gradcheck.hpp"
#include "domseq/tfidf_svm.hpp"

#include <doctest.h>

#include <cmath>
#include <map>

using namespace domseq;
using doctest::Approx;

namespace {

const std::vector<Tokens>& small_docs() {
    static const std::vector<Tokens> docs = {{"a", "b"}, {"a", "c"}, {"b", "b", "d"}};
    return docs;
}

}  // namespace

TEST_CASE("idf follows the smoothed formula") {
    const std::vector<Tokens> docs = {{"x", "y"}, {"x"}, {"x"}};
    const TfIdfVectorizer v = fit_tfidf(docs);
    CHECK(v.n_docs == 3);
    CHECK(v.idf(v.vocab.id("x")) == Approx(1.0).epsilon(1e-12));
    CHECK(v.idf(v.vocab.id("y")) == Approx(1.6931471805599454).epsilon(1e-12));
    CHECK_THROWS_AS(fit_tfidf(std::vector<Tokens>{}), Error);
}

TEST_CASE("transform") {
    const TfIdfVectorizer v = fit_tfidf(small_docs());
    SUBCASE("single token normalizes to one") {
        const SparseVector x = transform(v, Tokens{"c"});
        REQUIRE(x.nnz() == 1);
        CHECK(x.values[0] == Approx(1.0));
    }
    SUBCASE("unseen tokens contribute nothing") {
        CHECK(transform(v, Tokens{"zzz"}).nnz() == 0);
        CHECK(transform(v, Tokens{}).nnz() == 0);
    }
    SUBCASE("golden vector") {
        const SparseVector x = transform(v, Tokens{"a", "b", "b", "c", "zzz"});
        REQUIRE(x.nnz() == 3);
        std::map<std::string, double> got;
        for (std::size_t i = 0; i < x.nnz(); ++i) got[v.vocab.token(x.indices[i])] = x.values[i];
        CHECK(got["a"] == Approx(0.38550292161010064).epsilon(1e-12));
        CHECK(got["b"] == Approx(0.7710058432202013).epsilon(1e-12));
        CHECK(got["c"] == Approx(0.5068900148458076).epsilon(1e-12));
        CHECK(x.norm() == Approx(1.0));
        for (std::size_t i = 1; i < x.nnz(); ++i) CHECK(x.indices[i - 1] < x.indices[i]);
    }
}

namespace {

struct Toy {
    TfIdfVectorizer vec;
    std::vector<SparseVector> x;
    std::vector<DomainId> y;
};

Toy separable_toy() {
    const std::vector<Tokens> docs = {{"film", "actor"}, {"cinema", "film"}, {"actor", "scene"},
                                      {"game", "level"}, {"console", "game"}, {"level", "boss"},
                                      {"weather", "rain"}, {"rain", "food"}, {"food", "city"}};
    Toy t;
    t.vec = fit_tfidf(docs);
    for (std::size_t i = 0; i < docs.size(); ++i) {
        t.x.push_back(transform(t.vec, docs[i]));
        t.y.push_back(static_cast<DomainId>(i / 3));
    }
    return t;
}

}  // namespace

TEST_CASE("svm fits separable data") {
    const Toy t = separable_toy();
    SvmOptions o;
    o.epochs = 100;
    const LinearSvm svm = train_svm(t.x, t.y, 3, t.vec.vocab.size(), o);
    for (std::size_t i = 0; i < t.x.size(); ++i) CHECK(predict(svm, t.x[i]) == t.y[i]);
}

TEST_CASE("svm with one example per class") {
    const std::vector<Tokens> docs = {{"film"}, {"game"}, {"rain"}};
    const TfIdfVectorizer vec = fit_tfidf(docs);
    std::vector<SparseVector> x;
    for (const auto& d : docs) x.push_back(transform(vec, d));
    const std::vector<DomainId> y{0, 1, 2};
    const LinearSvm svm = train_svm(x, y, 3, vec.vocab.size(), SvmOptions{});
    for (int i = 0; i < 3; ++i) CHECK(predict(svm, x[static_cast<std::size_t>(i)]) == i);
}

TEST_CASE("svm edge cases") {
    const Toy t = separable_toy();
    SvmOptions o;
    o.epochs = 0;
    const LinearSvm zero = train_svm(t.x, t.y, 3, t.vec.vocab.size(), o);
    CHECK(zero.weights.isZero());
    const DomainDistribution p = predict_distribution(zero, t.x[0]);
    for (int k = 0; k < 3; ++k) CHECK(p(k) == Approx(1.0 / 3));
    const std::vector<DomainId> missing{0, 0, 0, 1, 1, 1, 1, 1, 1};
    CHECK_THROWS_AS(train_svm(t.x, missing, 3, t.vec.vocab.size(), SvmOptions{}), Error);
}

TEST_CASE("margins") {
    LinearSvm svm;
    svm.weights = Matrix{{1.0, 2.0, 0.0}, {0.0, -1.0, 3.0}};
    svm.bias = Vector{{0.5, -0.5}};
    CHECK(margins(svm, SparseVector{}) == svm.bias);
    const SparseVector x{{1, 2}, {0.6, 0.8}};
    const Vector m = margins(svm, x);
    CHECK(m(0) == Approx(1.7));
    CHECK(m(1) == Approx(1.3));
    CHECK(predict(svm, x) == 0);
}

TEST_CASE("svm distribution") {
    LinearSvm svm;
    svm.weights = Matrix::Zero(3, 2);
    svm.bias = Vector{{1.0, 0.0, 0.0}};
    const DomainDistribution p = predict_distribution(svm, SparseVector{});
    CHECK(p(0) == Approx(0.576117).epsilon(1e-5));
    CHECK(p(1) == Approx(0.211942).epsilon(1e-5));
    CHECK(p.sum() == Approx(1.0));
}

TEST_CASE("hinge subgradient matches finite differences") {
    const Toy t = separable_toy();
    LinearSvm svm;
    svm.weights = Matrix::Zero(3, t.vec.vocab.size());
    svm.bias = Vector::Zero(3);
    Rng rng(3);
    rng.fill_uniform(svm.weights, 0.3);
    rng.fill_uniform(svm.bias, 0.3);
    const double l2 = 1e-3;
    const LinearSvm g = hinge_subgradient(svm, t.x, t.y, l2);
    const auto r = check_gradients(svm, g, [&](LinearSvm& s) { return hinge_objective(s, t.x, t.y, l2); });
    CHECK(r.max_relative_error < 1e-4);
}
