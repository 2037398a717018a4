#pragma once
// Utterance-level domain prediction: smoothed tf-idf features and a
// one-vs-rest linear SVM trained by stochastic subgradient descent.

#include "domseq/corpus.hpp"
#include "domseq/math.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace domseq {

struct SparseVector {
    std::vector<int> indices;  // strictly increasing
    std::vector<Scalar> values;

    std::size_t nnz() const { return indices.size(); }
    Scalar norm() const;

    template <typename Derived>
    Scalar dot(const Eigen::MatrixBase<Derived>& dense) const {
        Scalar s = 0;
        for (std::size_t i = 0; i < indices.size(); ++i) s += values[i] * dense(indices[i]);
        return s;
    }
};

struct TfIdfVectorizer {
    Vocabulary vocab;
    Vector idf;  // one weight per vocabulary id
    int n_docs = 0;
};

/// idf(w) = ln((1 + n_docs) / (1 + df(w))) + 1.
TfIdfVectorizer fit_tfidf(std::span<const Tokens> documents, int min_count = 1);
TfIdfVectorizer fit_tfidf(std::span<const Tokens> documents, Vocabulary vocab);

/// Raw-count tf times idf, L2-normalized. Tokens outside the vocabulary
/// (UNK) contribute nothing.
SparseVector transform(const TfIdfVectorizer& vectorizer, std::span<const std::string> tokens);

struct LinearSvm {
    Matrix weights;  // K x V
    Vector bias;     // K

    int n_classes() const { return static_cast<int>(weights.rows()); }

    template <typename F>
    void visit(F&& f) {
        f("weights", weights);
        f("bias", bias);
    }
};

struct SvmOptions {
    int epochs = 50;
    double learning_rate = 0.1;  // decays as lr / (1 + epoch)
    double l2 = 1e-4;
    std::uint64_t seed = 1;
};

LinearSvm train_svm(std::span<const SparseVector> x, std::span<const DomainId> y, int n_classes, int dim,
                    const SvmOptions& options);

Vector margins(const LinearSvm& svm, const SparseVector& x);
DomainId predict(const LinearSvm& svm, const SparseVector& x);

/// Softmax over margins; this is the soft SVM vector v_d.
DomainDistribution predict_distribution(const LinearSvm& svm, const SparseVector& x);

/// Mean one-vs-rest hinge loss plus (l2 / 2) ||W||^2.
double hinge_objective(const LinearSvm& svm, std::span<const SparseVector> x, std::span<const DomainId> y,
                       double l2);

/// Subgradient of hinge_objective; exact wherever no margin sits on the hinge.
LinearSvm hinge_subgradient(const LinearSvm& svm, std::span<const SparseVector> x,
                            std::span<const DomainId> y, double l2);

}  // namespace domseq
