#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace domseq {

using Scalar = double;
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

/// Index into the configured DomainSet.
using DomainId = int;

/// Probability vector over the K configured domains.
using DomainDistribution = Vector;

/// Raised for malformed inputs, missing files and contract violations.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace domseq
