#include "lmlab/activations.hpp"

#include <cmath>
#include <string>

namespace lmlab {

ProbabilityVector ProbabilityVector::validated(std::vector<double> p, double tol) {
  double sum = 0.0;
  for (double x : p) {
    if (!(x >= 0.0)) throw ValidationError("probability vector has a negative or NaN entry");
    sum += x;
  }
  if (p.empty() || std::abs(sum - 1.0) > tol) {
    throw ValidationError("probability vector sums to " + std::to_string(sum));
  }
  return ProbabilityVector(std::move(p));
}

std::size_t ProbabilityVector::argmax() const { return lmlab::argmax(p_); }

std::size_t ProbabilityVector::sample(double u) const {
  double cum = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t i = 0; i < p_.size(); ++i) {
    if (p_[i] > 0.0) last_positive = i;
    cum += p_[i];
    if (u < cum) return i;
  }
  // Rounding left cum slightly below 1 and u landed in the gap.
  return last_positive;
}

std::size_t argmax(std::span<const double> v) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < v.size(); ++i)
    if (v[i] > v[best]) best = i;
  return best;
}

double logit(double p) {
  if (!(p > 0.0 && p < 1.0)) throw DomainError("logit: p must lie in (0, 1)");
  return std::log(p / (1.0 - p));
}

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double sigmoid_prime(double z) {
  const double s = sigmoid(z);
  return s * (1.0 - s);
}

ProbabilityVector softmax(const RealVector& z) {
  if (z.empty()) throw ShapeError("softmax: empty input");
  const double m = z[argmax(z.span())];
  std::vector<double> p(z.dim());
  double sum = 0.0;
  for (std::size_t i = 0; i < z.dim(); ++i) {
    p[i] = std::exp(z[i] - m);
    sum += p[i];
  }
  for (auto& x : p) x /= sum;
  return ProbabilityVector(std::move(p));
}

ProbabilityVector softmax_temperature(const RealVector& z, double temperature) {
  if (!(temperature > 0.0)) throw DomainError("softmax_temperature: T must be > 0");
  RealVector scaled(z.dim());
  for (std::size_t i = 0; i < z.dim(); ++i) scaled[i] = z[i] / temperature;
  return softmax(scaled);
}

ComplexVector amplitudes_from_logits(const RealVector& z, double temperature,
                                     const RealVector& phases) {
  if (!(temperature > 0.0)) throw DomainError("amplitudes_from_logits: T must be > 0");
  if (phases.dim() != z.dim()) throw ShapeError("amplitudes_from_logits: phases dim mismatch");
  if (z.empty()) throw ShapeError("amplitudes_from_logits: empty input");
  const double m = z[argmax(z.span())];
  std::vector<double> mod(z.dim());
  double sum = 0.0;
  for (std::size_t i = 0; i < z.dim(); ++i) {
    mod[i] = std::exp((z[i] - m) / (2.0 * temperature));
    sum += mod[i] * mod[i];
  }
  const double inv = 1.0 / std::sqrt(sum);
  ComplexVector a(z.dim());
  for (std::size_t i = 0; i < z.dim(); ++i) a[i] = std::polar(mod[i] * inv, phases[i]);
  return a;
}

}  // namespace lmlab
