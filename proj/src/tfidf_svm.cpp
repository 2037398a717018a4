#include "domseq/tfidf_svm.hpp"

#include <cmath>
#include <map>
#include <set>

namespace domseq {

Scalar SparseVector::norm() const {
    Scalar s = 0;
    for (Scalar v : values) s += v * v;
    return std::sqrt(s);
}

TfIdfVectorizer fit_tfidf(std::span<const Tokens> documents, int min_count) {
    return fit_tfidf(documents, build_vocabulary(documents, min_count));
}

TfIdfVectorizer fit_tfidf(std::span<const Tokens> documents, Vocabulary vocab) {
    if (documents.empty()) throw Error("fit_tfidf: empty corpus");
    TfIdfVectorizer v;
    v.n_docs = static_cast<int>(documents.size());
    Eigen::VectorXi df = Eigen::VectorXi::Zero(vocab.size());
    for (const auto& doc : documents) {
        std::set<int> seen;
        for (const auto& t : doc) seen.insert(vocab.id(t));
        for (int id : seen) ++df(id);
    }
    v.idf.resize(vocab.size());
    for (int id = 0; id < vocab.size(); ++id)
        v.idf(id) = std::log((1.0 + v.n_docs) / (1.0 + df(id))) + 1.0;
    v.vocab = std::move(vocab);
    return v;
}

SparseVector transform(const TfIdfVectorizer& vectorizer, std::span<const std::string> tokens) {
    std::map<int, int> tf;
    for (const auto& t : tokens) {
        const int id = vectorizer.vocab.id(t);
        if (id != Vocabulary::kUnk) ++tf[id];
    }
    SparseVector out;
    for (auto [id, n] : tf) {
        out.indices.push_back(id);
        out.values.push_back(n * vectorizer.idf(id));
    }
    const Scalar norm = out.norm();
    if (norm > 0)
        for (auto& v : out.values) v /= norm;
    return out;
}

Vector margins(const LinearSvm& svm, const SparseVector& x) {
    Vector m = svm.bias;
    for (std::size_t i = 0; i < x.nnz(); ++i) m += x.values[i] * svm.weights.col(x.indices[i]);
    return m;
}

DomainId predict(const LinearSvm& svm, const SparseVector& x) {
    return static_cast<DomainId>(argmax(margins(svm, x)));
}

DomainDistribution predict_distribution(const LinearSvm& svm, const SparseVector& x) {
    return softmax(margins(svm, x));
}

namespace {

void check_training_set(std::span<const SparseVector> x, std::span<const DomainId> y, int n_classes) {
    if (x.size() != y.size() || x.empty()) throw Error("train: features and labels must align and be non-empty");
    std::vector<bool> present(static_cast<std::size_t>(n_classes), false);
    for (DomainId label : y) {
        if (label < 0 || label >= n_classes) throw Error("train: label out of range");
        present[static_cast<std::size_t>(label)] = true;
    }
    for (int k = 0; k < n_classes; ++k)
        if (!present[static_cast<std::size_t>(k)])
            throw Error("train: class " + std::to_string(k) + " absent from training data");
}

}  // namespace

LinearSvm train_svm(std::span<const SparseVector> x, std::span<const DomainId> y, int n_classes, int dim,
                    const SvmOptions& options) {
    check_training_set(x, y, n_classes);
    LinearSvm svm{Matrix::Zero(n_classes, dim), Vector::Zero(n_classes)};
    Rng rng(options.seed);
    auto order = iota_indices(x.size());

    for (int epoch = 0; epoch < options.epochs; ++epoch) {
        const double lr = options.learning_rate / (1.0 + epoch);
        rng.shuffle(order);
        for (std::size_t n : order) {
            const Vector m = margins(svm, x[n]);
            if (options.l2 > 0) svm.weights *= (1.0 - lr * options.l2);
            for (int k = 0; k < n_classes; ++k) {
                const double target = (y[n] == k) ? 1.0 : -1.0;
                if (target * m(k) >= 1.0) continue;
                for (std::size_t i = 0; i < x[n].nnz(); ++i)
                    svm.weights(k, x[n].indices[i]) += lr * target * x[n].values[i];
                svm.bias(k) += lr * target;
            }
        }
    }
    return svm;
}

double hinge_objective(const LinearSvm& svm, std::span<const SparseVector> x, std::span<const DomainId> y,
                       double l2) {
    double loss = 0;
    for (std::size_t n = 0; n < x.size(); ++n) {
        const Vector m = margins(svm, x[n]);
        for (int k = 0; k < svm.n_classes(); ++k) {
            const double target = (y[n] == k) ? 1.0 : -1.0;
            loss += std::max(0.0, 1.0 - target * m(k));
        }
    }
    return loss / static_cast<double>(x.size()) + 0.5 * l2 * svm.weights.squaredNorm();
}

LinearSvm hinge_subgradient(const LinearSvm& svm, std::span<const SparseVector> x,
                            std::span<const DomainId> y, double l2) {
    LinearSvm g{l2 * svm.weights, Vector::Zero(svm.n_classes())};
    const double scale = 1.0 / static_cast<double>(x.size());
    for (std::size_t n = 0; n < x.size(); ++n) {
        const Vector m = margins(svm, x[n]);
        for (int k = 0; k < svm.n_classes(); ++k) {
            const double target = (y[n] == k) ? 1.0 : -1.0;
            if (target * m(k) >= 1.0) continue;
            for (std::size_t i = 0; i < x[n].nnz(); ++i)
                g.weights(k, x[n].indices[i]) -= scale * target * x[n].values[i];
            g.bias(k) -= scale * target;
        }
    }
    return g;
}

}  // namespace domseq
