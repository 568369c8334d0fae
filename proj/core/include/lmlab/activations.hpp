#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "lmlab/numkit.hpp"

namespace lmlab {

/// Nonnegative entries summing to one.
///
/// Entries are positive whenever the inputs are moderate; extreme logit gaps
/// (or masked scores) can underflow individual entries to exactly 0.
class ProbabilityVector {
 public:
  ProbabilityVector() = default;

  /// Checks entries >= 0 and |sum - 1| <= tol, otherwise throws ValidationError.
  static ProbabilityVector validated(std::vector<double> p, double tol = 1e-12);

  std::size_t dim() const { return p_.size(); }
  double operator[](std::size_t i) const { return p_[i]; }
  std::span<const double> values() const { return p_; }
  auto begin() const { return p_.begin(); }
  auto end() const { return p_.end(); }

  /// Index of the largest entry; ties go to the lowest index.
  std::size_t argmax() const;

  /// Inverse-CDF sampling with u in [0, 1): the first i with u < cumsum(p)[i].
  std::size_t sample(double u) const;

 private:
  explicit ProbabilityVector(std::vector<double> p) : p_(std::move(p)) {}
  friend ProbabilityVector softmax(const RealVector& z);
  friend ProbabilityVector softmax_temperature(const RealVector& z, double temperature);

  std::vector<double> p_;
};

double logit(double p);
double sigmoid(double z);
double sigmoid_prime(double z);

/// exp(z_i) / sum_j exp(z_j), evaluated as exp(z_i - max z) for stability.
ProbabilityVector softmax(const RealVector& z);

/// softmax(z / T). T == 1 is bit-identical to softmax(z).
ProbabilityVector softmax_temperature(const RealVector& z, double temperature);

/// Unit-norm amplitudes a_i ~ exp(z_i / (2T)) * exp(i*phase_i); |a_i|^2 is the
/// temperature softmax whatever the phases.
ComplexVector amplitudes_from_logits(const RealVector& z, double temperature,
                                     const RealVector& phases);

/// Lowest index of the maximum entry.
std::size_t argmax(std::span<const double> v);

}  // namespace lmlab
