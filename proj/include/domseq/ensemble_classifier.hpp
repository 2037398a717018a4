#pragma once
// Context-aware domain classifier: multinomial logistic regression over the
// three most recent domains and the SVM prediction.

#include "domseq/math.hpp"

#include <span>
#include <vector>

namespace domseq {

/// How the SVM slot is encoded: one-hot of the hard label or the soft
/// softmax-of-margins distribution.
enum class SvmFeature { Hard, Soft };

struct EnsembleFeatures {
    // Slot value K (== number of domains) is the START padding id.
    DomainId prev1 = 0;
    DomainId prev2 = 0;
    DomainId prev3 = 0;
    DomainId svm = 0;
    DomainDistribution svm_distribution;  // used with SvmFeature::Soft

    /// Concatenated one-hot encoding, length 4 * (K + 1).
    Vector encode(int n_domains, SvmFeature mode = SvmFeature::Hard) const;
};

/// Most recent history entry fills prev1. Missing slots are START.
EnsembleFeatures featurize(std::span<const DomainId> history, const DomainDistribution& svm_distribution);
EnsembleFeatures featurize(std::span<const DomainId> history, DomainId svm_label, int n_domains);

struct LogisticModel {
    Matrix weights;  // K x 4(K+1)
    Vector bias;     // K

    int n_classes() const { return static_cast<int>(weights.rows()); }

    static LogisticModel zeros(int n_domains);

    template <typename F>
    void visit(F&& f) {
        f("weights", weights);
        f("bias", bias);
    }
};

struct EnsembleOptions {
    int epochs = 200;
    double learning_rate = 0.5;
    SvmFeature svm_feature = SvmFeature::Soft;
};

/// Mean cross-entropy over a batch of encoded feature vectors.
double cross_entropy(const LogisticModel& model, std::span<const Vector> x, std::span<const DomainId> y);
LogisticModel cross_entropy_gradient(const LogisticModel& model, std::span<const Vector> x,
                                     std::span<const DomainId> y);

/// Full-batch gradient descent on the cross-entropy.
LogisticModel train_ensemble(std::span<const EnsembleFeatures> features, std::span<const DomainId> y,
                             int n_domains, const EnsembleOptions& options);

DomainDistribution predict_distribution(const LogisticModel& model, const Vector& encoded);
DomainDistribution predict_distribution(const LogisticModel& model, const EnsembleFeatures& features,
                                        SvmFeature mode);

}  // namespace domseq
