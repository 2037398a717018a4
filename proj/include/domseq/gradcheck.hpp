#pragma once
// Central finite-difference check of analytic gradients. Works on any
// parameter struct exposing visit(f) over its tensors.

#include "domseq/types.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <vector>

namespace domseq {

struct GradCheckResult {
    double max_relative_error = 0;
    std::string worst_tensor;
    std::size_t entries_checked = 0;
    std::map<std::string, double> per_tensor;
};

/// Relative error with an absolute floor. Central differences at eps = 1e-5
/// carry about 1e-11 of rounding noise, so gradients much smaller than the
/// floor are compared absolutely instead.
inline double relative_error(double analytic, double numeric, double floor = 1e-7) {
    const double denom = std::max({std::abs(analytic), std::abs(numeric), floor});
    return std::abs(analytic - numeric) / denom;
}

template <typename Params, typename LossFn>
GradCheckResult check_gradients(Params params, const Params& analytic, LossFn&& loss,
                                double eps = 1e-5) {
    std::vector<std::pair<std::string, const Scalar*>> grads;
    const_cast<Params&>(analytic).visit(
        [&](const char* name, auto& t) { grads.emplace_back(name, t.data()); });

    GradCheckResult result;
    std::size_t k = 0;
    params.visit([&](const char*, auto& t) {
        const auto& [name, g] = grads[k++];
        double worst = 0;
        for (Eigen::Index i = 0; i < t.size(); ++i) {
            const Scalar saved = t.data()[i];
            t.data()[i] = saved + eps;
            const double up = loss(params);
            t.data()[i] = saved - eps;
            const double down = loss(params);
            t.data()[i] = saved;
            const double numeric = (up - down) / (2 * eps);
            worst = std::max(worst, relative_error(g[i], numeric));
            ++result.entries_checked;
        }
        result.per_tensor[name] = worst;
        if (worst >= result.max_relative_error) {
            result.max_relative_error = worst;
            result.worst_tensor = name;
        }
    });
    return result;
}

}  // namespace domseq
