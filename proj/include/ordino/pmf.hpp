#pragma once

#include <Eigen/Core>

#include <stdexcept>
#include <string>
#include <utility>

namespace ordino {

template <class Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

inline constexpr double kPmfSumTol = 1e-9;
inline constexpr double kPmfEntrySlack = 1e-12;

/// A probability vector over at least three ordered classes. Construction
/// checks membership of the simplex up to floating-point slack; use
/// `unchecked` only for vectors that are on the simplex by construction.
template <class Scalar>
class PmfT {
 public:
  explicit PmfT(VectorX<Scalar> values) : values_(std::move(values)) {
    validate(values_);
  }

  static PmfT unchecked(VectorX<Scalar> values) {
    PmfT p;
    p.values_ = std::move(values);
    return p;
  }

  static void validate(const VectorX<Scalar>& v) {
    if (v.size() < 3)
      throw std::invalid_argument("Pmf: need at least 3 classes, got " +
                                  std::to_string(v.size()));
    if (!v.allFinite()) throw std::invalid_argument("Pmf: non-finite entry");
    const Scalar sum = v.sum();
    if (std::abs(sum - Scalar(1)) > Scalar(kPmfSumTol))
      throw std::invalid_argument("Pmf: entries sum to " + std::to_string(sum));
    if (v.minCoeff() < Scalar(-kPmfEntrySlack) ||
        v.maxCoeff() > Scalar(1) + Scalar(kPmfEntrySlack))
      throw std::invalid_argument("Pmf: entry outside [0, 1]");
  }

  const VectorX<Scalar>& values() const { return values_; }
  Eigen::Index size() const { return values_.size(); }
  Scalar operator[](Eigen::Index i) const { return values_[i]; }

 private:
  PmfT() = default;
  VectorX<Scalar> values_;
};

using Pmf = PmfT<double>;

}  // namespace ordino
