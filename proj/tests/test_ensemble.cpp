#include "domseq/ensemble_classifier.hpp"
#include "domseq/gradcheck.hpp"

#include <doctest.h>

using namespace domseq;
using doctest::Approx;

TEST_CASE("featurize pads with START and orders most recent first") {
    const int k = 5;
    const EnsembleFeatures empty = featurize(std::vector<DomainId>{}, 3, k);
    CHECK(empty.prev1 == k);
    CHECK(empty.prev2 == k);
    CHECK(empty.prev3 == k);
    CHECK(empty.svm == 3);
    const EnsembleFeatures f = featurize(std::vector<DomainId>{0, 1, 2, 3}, 4, k);
    CHECK(f.prev1 == 3);
    CHECK(f.prev2 == 2);
    CHECK(f.prev3 == 1);
    CHECK(f.svm == 4);
    const EnsembleFeatures soft = featurize(std::vector<DomainId>{1}, Vector{{0.1, 0.7, 0.2}});
    CHECK(soft.svm == 1);
    CHECK(soft.prev1 == 1);
    CHECK(soft.prev2 == 3);
}

TEST_CASE("encode lays out four one-hot slots") {
    const EnsembleFeatures f = featurize(std::vector<DomainId>{0}, 1, 2);
    const Vector x = f.encode(2, SvmFeature::Hard);
    REQUIRE(x.size() == 12);
    CHECK(x.sum() == 4);
    CHECK(x(0) == 1);
    CHECK(x(5) == 1);
    CHECK(x(8) == 1);
    CHECK(x(10) == 1);
    EnsembleFeatures s = f;
    s.svm_distribution = Vector{{0.25, 0.75}};
    const Vector xs = s.encode(2, SvmFeature::Soft);
    CHECK(xs(9) == 0.25);
    CHECK(xs(10) == 0.75);
    CHECK(xs(11) == 0);
}

TEST_CASE("zero weights give a uniform distribution") {
    const LogisticModel m = LogisticModel::zeros(3);
    const auto p = predict_distribution(m, featurize(std::vector<DomainId>{}, 0, 3), SvmFeature::Hard);
    for (int k = 0; k < 3; ++k) CHECK(p(k) == Approx(1.0 / 3));
}

TEST_CASE("golden distribution on fixed weights") {
    LogisticModel m = LogisticModel::zeros(2);
    m.bias = Vector{{0.3, -0.2}};
    m.weights(0, 0) = 1.0;
    const auto p = predict_distribution(m, featurize(std::vector<DomainId>{0}, 1, 2), SvmFeature::Hard);
    CHECK(p(0) == Approx(0.8175744761936437).epsilon(1e-12));
    CHECK(p.sum() == Approx(1.0));
}

namespace {

struct Batch {
    std::vector<EnsembleFeatures> features;
    std::vector<DomainId> y;
};

Batch random_batch(int n, int k, std::uint64_t seed, int label_from) {
    Rng rng(seed);
    Batch b;
    for (int i = 0; i < n; ++i) {
        std::vector<DomainId> history;
        for (int t = 0; t < 3; ++t) history.push_back(static_cast<DomainId>(rng.below(static_cast<std::size_t>(k))));
        const auto svm = static_cast<DomainId>(rng.below(static_cast<std::size_t>(k)));
        b.features.push_back(featurize(history, svm, k));
        b.y.push_back(label_from == 0 ? history.back() : svm);
    }
    return b;
}

double train_accuracy(const Batch& b, int k) {
    EnsembleOptions o;
    o.svm_feature = SvmFeature::Hard;
    const LogisticModel m = train_ensemble(b.features, b.y, k, o);
    int correct = 0;
    for (std::size_t i = 0; i < b.y.size(); ++i)
        correct += argmax(predict_distribution(m, b.features[i], SvmFeature::Hard)) == b.y[i];
    return static_cast<double>(correct) / static_cast<double>(b.y.size());
}

}  // namespace

TEST_CASE("learns to copy the previous domain") { CHECK(train_accuracy(random_batch(300, 3, 1, 0), 3) == 1.0); }

TEST_CASE("learns to copy the svm label") { CHECK(train_accuracy(random_batch(300, 3, 2, 1), 3) == 1.0); }

TEST_CASE("training rejects absent classes") {
    Batch b = random_batch(20, 3, 3, 0);
    std::fill(b.y.begin(), b.y.end(), 0);
    CHECK_THROWS_AS(train_ensemble(b.features, b.y, 3, EnsembleOptions{}), Error);
}

TEST_CASE("cross-entropy gradient matches finite differences") {
    const Batch b = random_batch(12, 3, 4, 0);
    std::vector<Vector> x;
    for (const auto& f : b.features) x.push_back(f.encode(3, SvmFeature::Hard));
    LogisticModel m = LogisticModel::zeros(3);
    Rng rng(5);
    rng.fill_uniform(m.weights, 0.5);
    rng.fill_uniform(m.bias, 0.5);
    const LogisticModel g = cross_entropy_gradient(m, x, b.y);
    const auto r = check_gradients(m, g, [&](LogisticModel& p) { return cross_entropy(p, x, b.y); });
    CHECK(r.max_relative_error < 1e-4);
}
