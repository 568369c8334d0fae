#pragma once

#include <algorithm>
#include <complex>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include "lmlab/error.hpp"
#include "lmlab/rng.hpp"

namespace lmlab {

using cplx = std::complex<double>;

template <class T>
inline constexpr bool is_complex_v = std::is_same_v<T, cplx>;

template <class T>
concept Scalar = std::is_same_v<T, double> || std::is_same_v<T, cplx>;

inline double conj_if(double x) { return x; }
inline cplx conj_if(cplx x) { return std::conj(x); }
inline double abs2(double x) { return x * x; }
inline double abs2(cplx x) { return x.real() * x.real() + x.imag() * x.imag(); }

/// Dense vector over double or complex<double>.
template <Scalar T>
class Vector {
 public:
  using value_type = T;

  Vector() = default;
  explicit Vector(std::size_t dim) : data_(dim, T{}) {}
  explicit Vector(std::vector<T> data) : data_(std::move(data)) {}
  Vector(std::initializer_list<T> init) : data_(init) {}

  static Vector basis(std::size_t dim, std::size_t i) {
    Vector v(dim);
    v.data_.at(i) = T{1.0};
    return v;
  }

  std::size_t dim() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  T& operator[](std::size_t i) { return data_[i]; }
  const T& operator[](std::size_t i) const { return data_[i]; }

  std::span<T> span() { return data_; }
  std::span<const T> span() const { return data_; }
  const std::vector<T>& values() const { return data_; }

  auto begin() { return data_.begin(); }
  auto end() { return data_.end(); }
  auto begin() const { return data_.begin(); }
  auto end() const { return data_.end(); }

  bool operator==(const Vector&) const = default;

 private:
  std::vector<T> data_;
};

/// Dense row-major matrix over double or complex<double>. Token embeddings are rows.
template <Scalar T>
class Matrix {
 public:
  using value_type = T;

  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, T{}) {}
  Matrix(std::size_t rows, std::size_t cols, std::vector<T> data)
      : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows_ * cols_) {
      throw ShapeError("matrix data length " + std::to_string(data_.size()) + " != " +
                       std::to_string(rows_) + "x" + std::to_string(cols_));
    }
  }
  Matrix(std::initializer_list<std::initializer_list<T>> rows) : rows_(rows.size()) {
    cols_ = rows_ == 0 ? 0 : rows.begin()->size();
    data_.reserve(rows_ * cols_);
    for (const auto& r : rows) {
      if (r.size() != cols_) throw ShapeError("ragged matrix initializer");
      data_.insert(data_.end(), r.begin(), r.end());
    }
  }

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = T{1.0};
    return m;
  }

  static Matrix from_rows(const std::vector<Vector<T>>& rows) {
    if (rows.empty()) return {};
    Matrix m(rows.size(), rows.front().dim());
    for (std::size_t r = 0; r < rows.size(); ++r) {
      if (rows[r].dim() != m.cols()) throw ShapeError("from_rows: rows differ in length");
      std::copy(rows[r].begin(), rows[r].end(), m.row(r).begin());
    }
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }

  T& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  const T& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<T> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const T> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }
  Vector<T> row_vector(std::size_t r) const {
    return Vector<T>(std::vector<T>(row(r).begin(), row(r).end()));
  }
  Vector<T> col_vector(std::size_t c) const {
    Vector<T> v(rows_);
    for (std::size_t r = 0; r < rows_; ++r) v[r] = (*this)(r, c);
    return v;
  }

  std::span<T> data() { return data_; }
  std::span<const T> data() const { return data_; }

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> data_;
};

using RealVector = Vector<double>;
using ComplexVector = Vector<cplx>;
using RealMatrix = Matrix<double>;
using ComplexMatrix = Matrix<cplx>;

// All reductions below run in strictly ascending index order.

template <Scalar T>
Matrix<T> matmul(const Matrix<T>& a, const Matrix<T>& b);

template <Scalar T>
Vector<T> matvec(const Matrix<T>& a, const Vector<T>& x);

template <Scalar T>
Matrix<T> transpose(const Matrix<T>& a);

/// Conjugate transpose; plain transpose for real matrices.
template <Scalar T>
Matrix<T> adjoint(const Matrix<T>& a);

/// Sum_i conj(u_i) * v_i.
template <Scalar T>
T inner(const Vector<T>& u, const Vector<T>& v);

template <Scalar T>
double norm(const Vector<T>& v);

/// Inner product recovered from norms: (|u|^2 + |v|^2 - |u - v|^2) / 2. Real field only.
double polarization_inner(const RealVector& u, const RealVector& v);

template <Scalar T>
Vector<T> operator+(const Vector<T>& a, const Vector<T>& b);
template <Scalar T>
Vector<T> operator-(const Vector<T>& a, const Vector<T>& b);
template <Scalar T>
Vector<T> operator*(T s, const Vector<T>& v);

template <Scalar T>
Matrix<T> operator+(const Matrix<T>& a, const Matrix<T>& b);
template <Scalar T>
Matrix<T> operator-(const Matrix<T>& a, const Matrix<T>& b);
template <Scalar T>
Matrix<T> operator*(T s, const Matrix<T>& m);

template <Scalar T>
Vector<T> normalized(const Vector<T>& v);

/// Largest elementwise |a - b|.
template <Scalar T>
double max_abs_diff(const Matrix<T>& a, const Matrix<T>& b);
template <Scalar T>
double max_abs_diff(const Vector<T>& a, const Vector<T>& b);

/// Frobenius norm.
template <Scalar T>
double frobenius(const Matrix<T>& a);

ComplexVector to_complex(const RealVector& v);
ComplexMatrix to_complex(const RealMatrix& m);

/// n rows of normalized Gaussian draws, so the distribution is rotation invariant.
RealMatrix random_unit_vectors(Rng& rng, std::size_t n, std::size_t d);

/// Matrix with independent N(0, sigma^2) entries.
RealMatrix random_gaussian(Rng& rng, std::size_t rows, std::size_t cols, double sigma = 1.0);

/// Matrix with independent uniform(lo, hi) entries.
RealMatrix random_uniform(Rng& rng, std::size_t rows, std::size_t cols, double lo, double hi);

/// Modified Gram-Schmidt on the rows. Throws ValidationError when a row is
/// (numerically) dependent on the previous ones.
template <Scalar T>
Matrix<T> orthonormalize_rows(const Matrix<T>& m);

}  // namespace lmlab
