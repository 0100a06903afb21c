#pragma once

// Riesz transform F(T) = T (I + T^2)^{-1/2} and Cayley transform
// kappa(T) = (T - i)(T + i)^{-1}, their inverses, and image membership tests.

#include <cmath>
#include <limits>
#include <sstream>
#include <string>

#include "specflow/matcore.hpp"

namespace specflow {

/// Square matrix with ||U*U - I|| <= 1e-10.
class UnitaryMatrix {
 public:
  UnitaryMatrix() = default;
  explicit UnitaryMatrix(ComplexMatrix u) : u_(std::move(u)) {
    if (!u_.square() || u_.rows() == 0) throw DimensionMismatch("unitary matrix must be square and nonempty");
    const double defect = op_norm(u_.adjoint() * u_ - ComplexMatrix::identity(u_.rows()));
    if (defect > 1e-10) {
      std::ostringstream os;
      os << "matrix is not unitary: ||U*U - I|| = " << defect;
      throw NotUnitaryError(os.str());
    }
  }
  static UnitaryMatrix identity(std::size_t n) { return UnitaryMatrix(ComplexMatrix::identity(n)); }
  /// Cyclic shift e_k -> e_{k+1 mod n}.
  static UnitaryMatrix cyclic_shift(std::size_t n) {
    ComplexMatrix s(n, n);
    for (std::size_t k = 0; k < n; ++k) s((k + 1) % n, k) = 1.0;
    return UnitaryMatrix(std::move(s));
  }

  std::size_t dim() const noexcept { return u_.rows(); }
  const ComplexMatrix& matrix() const noexcept { return u_; }
  UnitaryMatrix adjoint() const {
    UnitaryMatrix a;
    a.u_ = u_.adjoint();
    return a;
  }

 private:
  ComplexMatrix u_;
};

inline HermitianMatrix riesz(const EigenDecomposition& e) {
  return apply_function(e, [](double x) { return x / std::sqrt(1.0 + x * x); });
}

/// F(T) = T (I + T^2)^{-1/2}; ||F(T)|| < 1.
inline HermitianMatrix riesz(const HermitianMatrix& t) { return riesz(eigh(t)); }

/// F^{-1}(S) = (I - S^2)^{-1/2} S. Requires ||S|| < 1 - 1e-9.
inline HermitianMatrix riesz_inverse(const HermitianMatrix& s) {
  const auto e = eigh(s);
  if (!(e.max_abs() < 1.0 - 1e-9)) {
    std::ostringstream os;
    os << "matrix is outside the Riesz image: ||S|| = " << e.max_abs() << " >= 1 - 1e-9";
    throw ImageMembershipError(os.str());
  }
  return apply_function(e, [](double x) { return x / std::sqrt(1.0 - x * x); });
}

inline UnitaryMatrix cayley(const EigenDecomposition& e) {
  std::vector<Complex> w(e.dim());
  for (std::size_t k = 0; k < e.dim(); ++k) w[k] = (e.values[k] - kI) / (e.values[k] + kI);
  return UnitaryMatrix(reassemble_complex(e, w));
}

/// kappa(T) = (T - i)(T + i)^{-1}.
inline UnitaryMatrix cayley(const HermitianMatrix& t) { return cayley(eigh(t)); }

/// Distance of z from the spectrum of the normal matrix U: smallest singular value of U - z.
inline double distance_to_spectrum(const UnitaryMatrix& u, Complex z) {
  const auto s = singular_values(shifted(u.matrix(), -z));
  return s.empty() ? std::numeric_limits<double>::infinity() : s.back();
}

/// kappa^{-1}(U) = i (I + U)(I - U)^{-1}. Requires +1 at distance > 1e-9 from spec(U).
inline HermitianMatrix cayley_inverse(const UnitaryMatrix& u) {
  const double d = distance_to_spectrum(u, 1.0);
  if (!(d > 1e-9)) {
    std::ostringstream os;
    os << "+1 is (nearly) an eigenvalue of U (distance " << d << "): point at infinity";
    throw PointAtInfinityError(os.str());
  }
  const std::size_t n = u.dim();
  const ComplexMatrix id = ComplexMatrix::identity(n);
  // X (I - U) = i (I + U)  <=>  (I - U)* X* = -i (I + U)*
  const ComplexMatrix rhs = ((id + u.matrix()) * kI).adjoint();
  const ComplexMatrix xadj = LuDecomposition((id - u.matrix()).adjoint()).solve(rhs);
  return HermitianMatrix::hermitian_part(xadj.adjoint());
}

struct MembershipResult {
  bool member = false;
  std::string witness;        // human-readable violating (or deciding) quantity
  double quantity = 0.0;      // the deciding numeric value
  explicit operator bool() const noexcept { return member; }
};

/// S lies in F(bounded self-adjoints) iff ||S|| <= 1 and S +- I injective.
inline MembershipResult is_in_riesz_image(const HermitianMatrix& s) {
  const auto e = eigh(s);
  const double nrm = e.max_abs();
  double dist = std::numeric_limits<double>::infinity();
  for (double v : e.values) dist = std::min({dist, std::abs(v - 1.0), std::abs(v + 1.0)});
  MembershipResult r;
  std::ostringstream os;
  if (nrm > 1.0 + 1e-12) {
    os << "||S|| = " << nrm << " > 1";
    r.quantity = nrm;
  } else if (!(dist > 1e-9)) {
    os << "spectrum within " << dist << " of {-1, +1}";
    r.quantity = dist;
  } else {
    r.member = true;
    os << "distance of spectrum to {-1, +1} = " << dist;
    r.quantity = dist;
  }
  r.witness = os.str();
  return r;
}

/// U is the Cayley transform of an invertible self-adjoint iff U + I and U - I are invertible.
inline MembershipResult is_in_cayley_invertible_image(const UnitaryMatrix& u) {
  const double dp = distance_to_spectrum(u, 1.0);
  const double dm = distance_to_spectrum(u, -1.0);
  MembershipResult r;
  std::ostringstream os;
  if (!(dp > 1e-9)) {
    os << "+1 within " << dp << " of spec(U)";
    r.quantity = dp;
  } else if (!(dm > 1e-9)) {
    os << "-1 within " << dm << " of spec(U)";
    r.quantity = dm;
  } else {
    r.member = true;
    r.quantity = std::min(dp, dm);
    os << "distance of {-1, +1} to spec(U) = " << r.quantity;
  }
  r.witness = os.str();
  return r;
}

/// Eigendecomposition of a unitary U = V diag(e^{i theta}) V*. Uses the real
/// combination Re U + c Im U (Hermitian, commuting with U) at a few fixed c and
/// keeps the first whose eigenvectors diagonalize U.
struct UnitaryEigen {
  std::vector<double> phases;  // in (-pi, pi]
  ComplexMatrix vectors;
};

inline UnitaryEigen unitary_eig(const UnitaryMatrix& u) {
  const ComplexMatrix& m = u.matrix();
  const std::size_t n = u.dim();
  const ComplexMatrix re = (m + m.adjoint()) * Complex(0.5);
  const ComplexMatrix im = (m - m.adjoint()) * Complex(0.0, -0.5);
  for (double c : {0.6180339887498949, 1.4142135623730951, -2.718281828459045, 0.1234567891}) {
    const auto e = eigh(HermitianMatrix::hermitian_part(re + im * Complex(c)));
    const ComplexMatrix d = e.vectors.adjoint() * m * e.vectors;
    double off = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (i != j) off = std::max(off, std::abs(d(i, j)));
    if (off < 1e-10) {
      UnitaryEigen r;
      r.vectors = e.vectors;
      r.phases.resize(n);
      for (std::size_t k = 0; k < n; ++k) r.phases[k] = std::arg(d(k, k));
      return r;
    }
  }
  throw ConsistencyFault("unitary eigendecomposition failed");
}

/// exp(i s K) for Hermitian K.
inline UnitaryMatrix unitary_exp(const EigenDecomposition& k, double s) {
  std::vector<Complex> w(k.dim());
  for (std::size_t j = 0; j < k.dim(); ++j) w[j] = std::exp(kI * (s * k.values[j]));
  return UnitaryMatrix(reassemble_complex(k, w));
}

/// Hermitian K with exp(iK) = U and spec(K) in (-pi, pi].
inline HermitianMatrix unitary_log(const UnitaryMatrix& u) {
  const auto ue = unitary_eig(u);
  EigenDecomposition e;
  e.values = ue.phases;
  e.vectors = ue.vectors;
  return reassemble(e, ue.phases);
}

}  // namespace specflow
