#include "domseq/ensemble_classifier.hpp"

#include <cmath>

namespace domseq {

Vector EnsembleFeatures::encode(int n_domains, SvmFeature mode) const {
    const int slot = n_domains + 1;
    Vector x = Vector::Zero(4 * slot);
    const DomainId slots[] = {prev1, prev2, prev3};
    for (int s = 0; s < 3; ++s) x(s * slot + slots[s]) = 1;
    if (mode == SvmFeature::Soft && svm_distribution.size() == n_domains)
        x.segment(3 * slot, n_domains) = svm_distribution;
    else
        x(3 * slot + svm) = 1;
    return x;
}

EnsembleFeatures featurize(std::span<const DomainId> history, const DomainDistribution& svm_distribution) {
    const int k = static_cast<int>(svm_distribution.size());
    EnsembleFeatures f = featurize(history, static_cast<DomainId>(argmax(svm_distribution)), k);
    f.svm_distribution = svm_distribution;
    return f;
}

EnsembleFeatures featurize(std::span<const DomainId> history, DomainId svm_label, int n_domains) {
    const DomainId start = n_domains;
    auto back = [&](std::size_t k) { return history.size() > k ? history[history.size() - 1 - k] : start; };
    EnsembleFeatures f;
    f.prev1 = back(0);
    f.prev2 = back(1);
    f.prev3 = back(2);
    f.svm = svm_label;
    f.svm_distribution = Vector::Zero(n_domains);
    f.svm_distribution(svm_label) = 1;
    return f;
}

LogisticModel LogisticModel::zeros(int n_domains) {
    return {Matrix::Zero(n_domains, 4 * (n_domains + 1)), Vector::Zero(n_domains)};
}

DomainDistribution predict_distribution(const LogisticModel& model, const Vector& encoded) {
    return softmax(model.weights * encoded + model.bias);
}

DomainDistribution predict_distribution(const LogisticModel& model, const EnsembleFeatures& features,
                                        SvmFeature mode) {
    return predict_distribution(model, features.encode(model.n_classes(), mode));
}

double cross_entropy(const LogisticModel& model, std::span<const Vector> x, std::span<const DomainId> y) {
    double loss = 0;
    for (std::size_t n = 0; n < x.size(); ++n) {
        const Vector z = model.weights * x[n] + model.bias;
        loss += log_sum_exp(z) - z(y[n]);
    }
    return loss / static_cast<double>(x.size());
}

LogisticModel cross_entropy_gradient(const LogisticModel& model, std::span<const Vector> x,
                                     std::span<const DomainId> y) {
    LogisticModel g{Matrix::Zero(model.weights.rows(), model.weights.cols()), Vector::Zero(model.bias.size())};
    const double scale = 1.0 / static_cast<double>(x.size());
    for (std::size_t n = 0; n < x.size(); ++n) {
        Vector dz = predict_distribution(model, x[n]);
        dz(y[n]) -= 1;
        g.weights.noalias() += scale * dz * x[n].transpose();
        g.bias += scale * dz;
    }
    return g;
}

LogisticModel train_ensemble(std::span<const EnsembleFeatures> features, std::span<const DomainId> y,
                             int n_domains, const EnsembleOptions& options) {
    if (features.size() != y.size() || features.empty())
        throw Error("train_ensemble: features and labels must align and be non-empty");
    std::vector<bool> present(static_cast<std::size_t>(n_domains), false);
    for (DomainId d : y) {
        if (d < 0 || d >= n_domains) throw Error("train_ensemble: label out of range");
        present[static_cast<std::size_t>(d)] = true;
    }
    for (int k = 0; k < n_domains; ++k)
        if (!present[static_cast<std::size_t>(k)])
            throw Error("train_ensemble: class " + std::to_string(k) + " absent from training data");

    std::vector<Vector> x;
    x.reserve(features.size());
    for (const auto& f : features) x.push_back(f.encode(n_domains, options.svm_feature));

    LogisticModel model = LogisticModel::zeros(n_domains);
    for (int epoch = 0; epoch < options.epochs; ++epoch) {
        LogisticModel g = cross_entropy_gradient(model, x, y);
        sgd_update(model, g, options.learning_rate);
    }
    return model;
}

}  // namespace domseq
