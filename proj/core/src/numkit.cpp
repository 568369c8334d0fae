#include "lmlab/numkit.hpp"

#include <cmath>

namespace lmlab {
namespace {

std::string shape_str(std::size_t r, std::size_t c) {
  return std::to_string(r) + "x" + std::to_string(c);
}

template <Scalar T>
void require_same_shape(const Matrix<T>& a, const Matrix<T>& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ShapeError(std::string(op) + ": " + shape_str(a.rows(), a.cols()) + " vs " +
                     shape_str(b.rows(), b.cols()));
  }
}

template <Scalar T>
void require_same_dim(const Vector<T>& a, const Vector<T>& b, const char* op) {
  if (a.dim() != b.dim()) {
    throw ShapeError(std::string(op) + ": dim " + std::to_string(a.dim()) + " vs " +
                     std::to_string(b.dim()));
  }
}

}  // namespace

template <Scalar T>
Matrix<T> matmul(const Matrix<T>& a, const Matrix<T>& b) {
  if (a.cols() != b.rows()) {
    throw ShapeError("matmul: " + shape_str(a.rows(), a.cols()) + " * " +
                     shape_str(b.rows(), b.cols()));
  }
  Matrix<T> out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < b.cols(); ++j) {
      T acc{};
      for (std::size_t k = 0; k < a.cols(); ++k) acc += a(i, k) * b(k, j);
      out(i, j) = acc;
    }
  }
  return out;
}

template <Scalar T>
Vector<T> matvec(const Matrix<T>& a, const Vector<T>& x) {
  if (a.cols() != x.dim()) {
    throw ShapeError("matvec: " + shape_str(a.rows(), a.cols()) + " * dim " +
                     std::to_string(x.dim()));
  }
  Vector<T> out(a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    T acc{};
    for (std::size_t k = 0; k < a.cols(); ++k) acc += a(i, k) * x[k];
    out[i] = acc;
  }
  return out;
}

template <Scalar T>
Matrix<T> transpose(const Matrix<T>& a) {
  Matrix<T> out(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) out(j, i) = a(i, j);
  return out;
}

template <Scalar T>
Matrix<T> adjoint(const Matrix<T>& a) {
  Matrix<T> out(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) out(j, i) = conj_if(a(i, j));
  return out;
}

template <Scalar T>
T inner(const Vector<T>& u, const Vector<T>& v) {
  require_same_dim(u, v, "inner");
  T acc{};
  for (std::size_t i = 0; i < u.dim(); ++i) acc += conj_if(u[i]) * v[i];
  return acc;
}

template <Scalar T>
double norm(const Vector<T>& v) {
  double acc = 0.0;
  for (const auto& x : v) acc += abs2(x);
  return std::sqrt(acc);
}

double polarization_inner(const RealVector& u, const RealVector& v) {
  require_same_dim(u, v, "polarization_inner");
  double uu = 0.0, vv = 0.0, dd = 0.0;
  for (std::size_t i = 0; i < u.dim(); ++i) {
    uu += u[i] * u[i];
    vv += v[i] * v[i];
    const double diff = u[i] - v[i];
    dd += diff * diff;
  }
  return 0.5 * (uu + vv - dd);
}

template <Scalar T>
Vector<T> operator+(const Vector<T>& a, const Vector<T>& b) {
  require_same_dim(a, b, "vector +");
  Vector<T> out(a.dim());
  for (std::size_t i = 0; i < a.dim(); ++i) out[i] = a[i] + b[i];
  return out;
}

template <Scalar T>
Vector<T> operator-(const Vector<T>& a, const Vector<T>& b) {
  require_same_dim(a, b, "vector -");
  Vector<T> out(a.dim());
  for (std::size_t i = 0; i < a.dim(); ++i) out[i] = a[i] - b[i];
  return out;
}

template <Scalar T>
Vector<T> operator*(T s, const Vector<T>& v) {
  Vector<T> out(v.dim());
  for (std::size_t i = 0; i < v.dim(); ++i) out[i] = s * v[i];
  return out;
}

template <Scalar T>
Matrix<T> operator+(const Matrix<T>& a, const Matrix<T>& b) {
  require_same_shape(a, b, "matrix +");
  Matrix<T> out(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.size(); ++i) out.data()[i] = a.data()[i] + b.data()[i];
  return out;
}

template <Scalar T>
Matrix<T> operator-(const Matrix<T>& a, const Matrix<T>& b) {
  require_same_shape(a, b, "matrix -");
  Matrix<T> out(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.size(); ++i) out.data()[i] = a.data()[i] - b.data()[i];
  return out;
}

template <Scalar T>
Matrix<T> operator*(T s, const Matrix<T>& m) {
  Matrix<T> out(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.size(); ++i) out.data()[i] = s * m.data()[i];
  return out;
}

template <Scalar T>
Vector<T> normalized(const Vector<T>& v) {
  const double n = norm(v);
  if (n == 0.0) throw DomainError("normalized: zero vector");
  return T{1.0 / n} * v;
}

template <Scalar T>
double max_abs_diff(const Matrix<T>& a, const Matrix<T>& b) {
  require_same_shape(a, b, "max_abs_diff");
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
  return m;
}

template <Scalar T>
double max_abs_diff(const Vector<T>& a, const Vector<T>& b) {
  require_same_dim(a, b, "max_abs_diff");
  double m = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

template <Scalar T>
double frobenius(const Matrix<T>& a) {
  double acc = 0.0;
  for (const auto& x : a.data()) acc += abs2(x);
  return std::sqrt(acc);
}

ComplexVector to_complex(const RealVector& v) {
  ComplexVector out(v.dim());
  for (std::size_t i = 0; i < v.dim(); ++i) out[i] = v[i];
  return out;
}

ComplexMatrix to_complex(const RealMatrix& m) {
  ComplexMatrix out(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.size(); ++i) out.data()[i] = m.data()[i];
  return out;
}

RealMatrix random_unit_vectors(Rng& rng, std::size_t n, std::size_t d) {
  if (n == 0 || d == 0) throw DomainError("random_unit_vectors: n and d must be >= 1");
  constexpr int kMaxRetries = 64;
  RealMatrix out(n, d);
  for (std::size_t r = 0; r < n; ++r) {
    auto row = out.row(r);
    for (int attempt = 0;; ++attempt) {
      if (attempt == kMaxRetries) {
        throw ValidationError("random_unit_vectors: repeated zero-norm draws");
      }
      double ss = 0.0;
      for (auto& x : row) {
        x = rng.normal();
        ss += x * x;
      }
      if (ss > 0.0) {
        const double nrm = std::sqrt(ss);
        for (auto& x : row) x /= nrm;
        break;
      }
    }
  }
  return out;
}

RealMatrix random_gaussian(Rng& rng, std::size_t rows, std::size_t cols, double sigma) {
  RealMatrix out(rows, cols);
  for (auto& x : out.data()) x = sigma * rng.normal();
  return out;
}

RealMatrix random_uniform(Rng& rng, std::size_t rows, std::size_t cols, double lo, double hi) {
  RealMatrix out(rows, cols);
  for (auto& x : out.data()) x = rng.uniform(lo, hi);
  return out;
}

template <Scalar T>
Matrix<T> orthonormalize_rows(const Matrix<T>& m) {
  constexpr double kDependent = 1e-10;
  Matrix<T> out = m;
  for (std::size_t i = 0; i < out.rows(); ++i) {
    auto ri = out.row(i);
    const double original = [&] {
      double s = 0.0;
      for (const auto& x : ri) s += abs2(x);
      return std::sqrt(s);
    }();
    for (std::size_t j = 0; j < i; ++j) {
      auto rj = out.row(j);
      T proj{};
      for (std::size_t k = 0; k < out.cols(); ++k) proj += conj_if(rj[k]) * ri[k];
      for (std::size_t k = 0; k < out.cols(); ++k) ri[k] -= proj * rj[k];
    }
    double s = 0.0;
    for (const auto& x : ri) s += abs2(x);
    const double n = std::sqrt(s);
    if (!(n > kDependent * std::max(1.0, original))) {
      throw ValidationError("orthonormalize_rows: row " + std::to_string(i) +
                            " is linearly dependent on earlier rows");
    }
    for (auto& x : ri) x /= n;
  }
  return out;
}

#define LMLAB_INSTANTIATE(T)                                                   \
  template Matrix<T> matmul(const Matrix<T>&, const Matrix<T>&);               \
  template Vector<T> matvec(const Matrix<T>&, const Vector<T>&);               \
  template Matrix<T> transpose(const Matrix<T>&);                              \
  template Matrix<T> adjoint(const Matrix<T>&);                                \
  template T inner(const Vector<T>&, const Vector<T>&);                        \
  template double norm(const Vector<T>&);                                      \
  template Vector<T> operator+(const Vector<T>&, const Vector<T>&);            \
  template Vector<T> operator-(const Vector<T>&, const Vector<T>&);            \
  template Vector<T> operator*(T, const Vector<T>&);                           \
  template Matrix<T> operator+(const Matrix<T>&, const Matrix<T>&);            \
  template Matrix<T> operator-(const Matrix<T>&, const Matrix<T>&);            \
  template Matrix<T> operator*(T, const Matrix<T>&);                           \
  template Vector<T> normalized(const Vector<T>&);                             \
  template double max_abs_diff(const Matrix<T>&, const Matrix<T>&);            \
  template double max_abs_diff(const Vector<T>&, const Vector<T>&);            \
  template double frobenius(const Matrix<T>&);                                 \
  template Matrix<T> orthonormalize_rows(const Matrix<T>&);

LMLAB_INSTANTIATE(double)
LMLAB_INSTANTIATE(cplx)

#undef LMLAB_INSTANTIATE

}  // namespace lmlab
