#pragma once

#include <Eigen/Core>

#include <cmath>

namespace tdmix {

// Numerically stable softmax (max-subtraction), usable with any dense
// expression of logits.
template <typename Derived>
Eigen::Vector<typename Derived::Scalar, Eigen::Dynamic> softmax(
    const Eigen::MatrixBase<Derived>& logits) {
  using Scalar = typename Derived::Scalar;
  Eigen::Vector<Scalar, Eigen::Dynamic> shifted =
      logits.derived().array() - logits.derived().maxCoeff();
  shifted = shifted.array().exp();
  return shifted / shifted.sum();
}

// Index of the largest coefficient, ties broken toward the lowest index.
template <typename Derived>
Eigen::Index argmax(const Eigen::MatrixBase<Derived>& values) {
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return best;
}

// Arithmetic mean over one vector of values.
template <typename Derived>
double mean(const Eigen::MatrixBase<Derived>& values) {
  return values.derived().template cast<double>().mean();
}

// Population standard deviation (divisor N, not N-1).
template <typename Derived>
double population_std(const Eigen::MatrixBase<Derived>& values) {
  const double mu = mean(values);
  const double var =
      (values.derived().template cast<double>().array() - mu).square().sum() /
      static_cast<double>(values.size());
  return std::sqrt(var);
}

}  // namespace tdmix
