#pragma once

// Dense complex matrices and the validated Hermitian wrapper used as the
// stand-in for every self-adjoint operator in the library.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "specflow/errors.hpp"

namespace specflow {

using Complex = std::complex<double>;
inline constexpr Complex kI{0.0, 1.0};

/// Plain complex product, without the inf/nan recovery of operator*.
inline Complex cmul(Complex a, Complex b) {
  return {a.real() * b.real() - a.imag() * b.imag(), a.real() * b.imag() + a.imag() * b.real()};
}

/// Row-major dense complex matrix.
class ComplexMatrix {
 public:
  ComplexMatrix() = default;
  ComplexMatrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), data_(rows * cols, Complex{0.0, 0.0}) {}
  ComplexMatrix(std::size_t rows, std::size_t cols, std::vector<Complex> data)
      : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows_ * cols_) {
      throw DimensionMismatch("matrix data size does not match shape");
    }
  }
  ComplexMatrix(std::initializer_list<std::initializer_list<Complex>> rows) {
    rows_ = rows.size();
    cols_ = rows_ == 0 ? 0 : rows.begin()->size();
    data_.reserve(rows_ * cols_);
    for (const auto& r : rows) {
      if (r.size() != cols_) throw DimensionMismatch("ragged matrix literal");
      data_.insert(data_.end(), r.begin(), r.end());
    }
  }

  static ComplexMatrix zeros(std::size_t rows, std::size_t cols) { return {rows, cols}; }
  static ComplexMatrix identity(std::size_t n) {
    ComplexMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }
  static ComplexMatrix diagonal(std::span<const double> d) {
    ComplexMatrix m(d.size(), d.size());
    for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
    return m;
  }
  static ComplexMatrix diagonal(std::span<const Complex> d) {
    ComplexMatrix m(d.size(), d.size());
    for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
    return m;
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool square() const noexcept { return rows_ == cols_; }
  bool empty() const noexcept { return data_.empty(); }

  Complex& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  const Complex& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::span<const Complex> data() const noexcept { return data_; }
  std::span<Complex> data() noexcept { return data_; }

  ComplexMatrix adjoint() const {
    ComplexMatrix r(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) r(j, i) = std::conj((*this)(i, j));
    return r;
  }

  ComplexMatrix column(std::size_t j) const {
    ComplexMatrix c(rows_, 1);
    for (std::size_t i = 0; i < rows_; ++i) c(i, 0) = (*this)(i, j);
    return c;
  }

  double max_abs() const {
    double m = 0.0;
    for (const auto& z : data_) m = std::max(m, std::abs(z));
    return m;
  }
  double frobenius() const {
    double s = 0.0;
    for (const auto& z : data_) s += std::norm(z);
    return std::sqrt(s);
  }
  bool all_finite() const {
    return std::all_of(data_.begin(), data_.end(), [](const Complex& z) {
      return std::isfinite(z.real()) && std::isfinite(z.imag());
    });
  }
  Complex trace() const {
    Complex t{0.0, 0.0};
    for (std::size_t i = 0; i < std::min(rows_, cols_); ++i) t += (*this)(i, i);
    return t;
  }

  ComplexMatrix& operator+=(const ComplexMatrix& o) {
    require_same_shape(o);
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += o.data_[k];
    return *this;
  }
  ComplexMatrix& operator-=(const ComplexMatrix& o) {
    require_same_shape(o);
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= o.data_[k];
    return *this;
  }
  ComplexMatrix& operator*=(Complex s) {
    for (auto& z : data_) z *= s;
    return *this;
  }

  friend ComplexMatrix operator+(ComplexMatrix a, const ComplexMatrix& b) { return a += b; }
  friend ComplexMatrix operator-(ComplexMatrix a, const ComplexMatrix& b) { return a -= b; }
  friend ComplexMatrix operator*(ComplexMatrix a, Complex s) { return a *= s; }
  friend ComplexMatrix operator*(Complex s, ComplexMatrix a) { return a *= s; }
  friend ComplexMatrix operator-(ComplexMatrix a) { return a *= -1.0; }

  friend ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b) {
    if (a.cols_ != b.rows_) {
      throw DimensionMismatch("matrix product shape mismatch: " + a.shape() + " * " + b.shape());
    }
    ComplexMatrix r(a.rows_, b.cols_);
    for (std::size_t i = 0; i < a.rows_; ++i) {
      for (std::size_t k = 0; k < a.cols_; ++k) {
        const Complex aik = a(i, k);
        if (aik == Complex{}) continue;
        const Complex* brow = &b.data_[k * b.cols_];
        Complex* rrow = &r.data_[i * r.cols_];
        for (std::size_t j = 0; j < b.cols_; ++j) rrow[j] += cmul(aik, brow[j]);
      }
    }
    return r;
  }

  std::string shape() const {
    std::ostringstream os;
    os << rows_ << "x" << cols_;
    return os.str();
  }

 private:
  void require_same_shape(const ComplexMatrix& o) const {
    if (rows_ != o.rows_ || cols_ != o.cols_) {
      throw DimensionMismatch("shape mismatch: " + shape() + " vs " + o.shape());
    }
  }

  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<Complex> data_;
};

/// Largest |A_ij - conj(A_ji)|.
inline double hermitian_defect(const ComplexMatrix& a) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = i; j < a.cols(); ++j) d = std::max(d, std::abs(a(i, j) - std::conj(a(j, i))));
  return d;
}

/// Square complex matrix equal to its adjoint within 1e-12 * max|entry|.
class HermitianMatrix {
 public:
  HermitianMatrix() = default;

  /// Validates and exactly symmetrizes. Throws NonHermitianError on a defect
  /// larger than 1e-12 * max|entry|.
  explicit HermitianMatrix(ComplexMatrix m) : m_(std::move(m)) {
    if (!m_.square()) throw DimensionMismatch("Hermitian matrix must be square, got " + m_.shape());
    if (m_.rows() == 0) throw DimensionMismatch("Hermitian matrix must have positive dimension");
    if (!m_.all_finite()) throw InputError("matrix has non-finite entries");
    const double defect = hermitian_defect(m_);
    const double tol = 1e-12 * m_.max_abs();
    if (defect > tol) {
      std::ostringstream os;
      os << "matrix is not Hermitian: symmetry defect " << defect << " exceeds " << tol;
      throw NonHermitianError(os.str(), defect);
    }
    symmetrize();
  }

  /// Takes the Hermitian part (A + A*)/2 without validation. For results that
  /// are Hermitian in exact arithmetic.
  static HermitianMatrix hermitian_part(ComplexMatrix m) {
    if (!m.square()) throw DimensionMismatch("Hermitian part needs a square matrix, got " + m.shape());
    HermitianMatrix h;
    h.m_ = std::move(m);
    h.symmetrize();
    return h;
  }

  static HermitianMatrix zeros(std::size_t n) { return HermitianMatrix(ComplexMatrix(n, n)); }
  static HermitianMatrix identity(std::size_t n) { return HermitianMatrix(ComplexMatrix::identity(n)); }
  static HermitianMatrix diagonal(std::span<const double> d) {
    return HermitianMatrix(ComplexMatrix::diagonal(d));
  }
  static HermitianMatrix diagonal(std::initializer_list<double> d) {
    std::vector<double> v(d);
    return diagonal(std::span<const double>(v));
  }

  std::size_t dim() const noexcept { return m_.rows(); }
  const ComplexMatrix& matrix() const noexcept { return m_; }
  const Complex& operator()(std::size_t i, std::size_t j) const { return m_(i, j); }

  HermitianMatrix& operator+=(const HermitianMatrix& o) {
    m_ += o.m_;
    return *this;
  }
  HermitianMatrix& operator-=(const HermitianMatrix& o) {
    m_ -= o.m_;
    return *this;
  }
  HermitianMatrix& operator*=(double s) {
    m_ *= s;
    return *this;
  }
  friend HermitianMatrix operator+(HermitianMatrix a, const HermitianMatrix& b) { return a += b; }
  friend HermitianMatrix operator-(HermitianMatrix a, const HermitianMatrix& b) { return a -= b; }
  friend HermitianMatrix operator*(HermitianMatrix a, double s) { return a *= s; }
  friend HermitianMatrix operator*(double s, HermitianMatrix a) { return a *= s; }
  friend HermitianMatrix operator-(HermitianMatrix a) { return a *= -1.0; }

  /// Conjugation U H U*.
  HermitianMatrix conjugated_by(const ComplexMatrix& u) const {
    return hermitian_part(u * m_ * u.adjoint());
  }

 private:
  void symmetrize() {
    const std::size_t n = m_.rows();
    for (std::size_t i = 0; i < n; ++i) {
      m_(i, i) = Complex(m_(i, i).real(), 0.0);
      for (std::size_t j = i + 1; j < n; ++j) {
        const Complex avg = 0.5 * (m_(i, j) + std::conj(m_(j, i)));
        m_(i, j) = avg;
        m_(j, i) = std::conj(avg);
      }
    }
  }

  ComplexMatrix m_;
};

/// LU factorization with partial pivoting (PA = LU), packed in one matrix.
class LuDecomposition {
 public:
  /// Throws InvertibilityError when a pivot falls below pivot_tol * max|entry|.
  explicit LuDecomposition(ComplexMatrix a, double pivot_tol = 1e-14) : lu_(std::move(a)) {
    if (!lu_.square()) throw DimensionMismatch("LU needs a square matrix, got " + lu_.shape());
    const std::size_t n = lu_.rows();
    perm_.resize(n);
    for (std::size_t i = 0; i < n; ++i) perm_[i] = i;
    const double scale = std::max(lu_.max_abs(), 1e-300);
    for (std::size_t k = 0; k < n; ++k) {
      std::size_t piv = k;
      double best = std::abs(lu_(k, k));
      for (std::size_t i = k + 1; i < n; ++i) {
        if (std::abs(lu_(i, k)) > best) {
          best = std::abs(lu_(i, k));
          piv = i;
        }
      }
      if (best <= pivot_tol * scale) {
        std::ostringstream os;
        os << "matrix is singular to working precision (pivot " << best << " at column " << k << ")";
        throw InvertibilityError(os.str());
      }
      if (piv != k) {
        for (std::size_t j = 0; j < n; ++j) std::swap(lu_(k, j), lu_(piv, j));
        std::swap(perm_[k], perm_[piv]);
      }
      const Complex inv_pivot = 1.0 / lu_(k, k);
      for (std::size_t i = k + 1; i < n; ++i) {
        const Complex f = lu_(i, k) * inv_pivot;
        lu_(i, k) = f;
        if (f == Complex{}) continue;
        for (std::size_t j = k + 1; j < n; ++j) lu_(i, j) -= f * lu_(k, j);
      }
    }
  }

  /// Solves A X = B.
  ComplexMatrix solve(const ComplexMatrix& b) const {
    const std::size_t n = lu_.rows();
    if (b.rows() != n) throw DimensionMismatch("LU solve right-hand side has wrong row count");
    ComplexMatrix x(n, b.cols());
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < b.cols(); ++j) x(i, j) = b(perm_[i], j);
    for (std::size_t c = 0; c < b.cols(); ++c) {
      for (std::size_t i = 0; i < n; ++i) {
        Complex s = x(i, c);
        for (std::size_t k = 0; k < i; ++k) s -= lu_(i, k) * x(k, c);
        x(i, c) = s;
      }
      for (std::size_t ii = n; ii-- > 0;) {
        Complex s = x(ii, c);
        for (std::size_t k = ii + 1; k < n; ++k) s -= lu_(ii, k) * x(k, c);
        x(ii, c) = s / lu_(ii, ii);
      }
    }
    return x;
  }

  ComplexMatrix inverse() const { return solve(ComplexMatrix::identity(lu_.rows())); }

 private:
  ComplexMatrix lu_;
  std::vector<std::size_t> perm_;
};

inline ComplexMatrix inverse(const ComplexMatrix& a) { return LuDecomposition(a).inverse(); }

/// A + s*I for square A.
inline ComplexMatrix shifted(const ComplexMatrix& a, Complex s) {
  if (!a.square()) throw DimensionMismatch("shift needs a square matrix");
  ComplexMatrix r = a;
  for (std::size_t i = 0; i < r.rows(); ++i) r(i, i) += s;
  return r;
}

inline void require_same_dim(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    std::ostringstream os;
    os << what << ": dimension mismatch (" << a << " vs " << b << ")";
    throw DimensionMismatch(os.str());
  }
}

}  // namespace specflow
