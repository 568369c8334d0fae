#pragma once

// Independent reference computations shared by the unit tests. Written
// separately from the library code, without its helpers.

#include <cmath>
#include <vector>

#include "lmlab/numkit.hpp"

namespace oracle {

inline lmlab::RealMatrix naive_matmul(const lmlab::RealMatrix& a, const lmlab::RealMatrix& b) {
  lmlab::RealMatrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < b.cols(); ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < a.cols(); ++k) s += a(i, k) * b(k, j);
      c(i, j) = s;
    }
  return c;
}

inline double max_abs(const lmlab::RealMatrix& a, const lmlab::RealMatrix& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) m = std::max(m, std::abs(a(i, j) - b(i, j)));
  return m;
}

// Softmax written from the definition, shifting by the max for range only.
inline std::vector<double> softmax(const std::vector<double>& z) {
  double m = z[0];
  for (double x : z) m = std::max(m, x);
  std::vector<double> p(z.size());
  double s = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) s += (p[i] = std::exp(z[i] - m));
  for (auto& x : p) x /= s;
  return p;
}

}  // namespace oracle
