#pragma once

// Hermitian eigensolver, Borel functional calculus on matrices, spectral
// projections (eigenbasis and contour routes), norms, numerical rank, and the
// inverse square root as a resolvent integral.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <numeric>
#include <sstream>
#include <vector>

#include "specflow/errors.hpp"
#include "specflow/matrix.hpp"

namespace specflow {

struct EigenDecomposition {
  std::vector<double> values;  // ascending
  ComplexMatrix vectors;       // columns are orthonormal eigenvectors

  std::size_t dim() const noexcept { return values.size(); }
  double min_abs() const {
    double m = std::numeric_limits<double>::infinity();
    for (double v : values) m = std::min(m, std::abs(v));
    return m;
  }
  double max_abs() const {
    double m = 0.0;
    for (double v : values) m = std::max(m, std::abs(v));
    return m;
  }
};

namespace detail {

inline double offdiag_frobenius(const ComplexMatrix& a) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j)
      if (i != j) s += std::norm(a(i, j));
  return std::sqrt(s);
}

// One complex Jacobi rotation annihilating a(p,q). The rotation is the real
// symmetric Jacobi rotation conjugated by diag(1, e^{-i phi}) on (p,q), where
// phi = arg a(p,q).
inline void jacobi_rotate(ComplexMatrix& a, ComplexMatrix* v, std::size_t p, std::size_t q) {
  const Complex apq = a(p, q);
  const double g = std::abs(apq);
  if (g == 0.0) return;
  const Complex phase = apq / g;  // e^{i phi}
  const double app = a(p, p).real();
  const double aqq = a(q, q).real();
  const double tau = (aqq - app) / (2.0 * g);
  const double t = (tau >= 0.0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
  const double c = 1.0 / std::sqrt(1.0 + t * t);
  const double s = t * c;
  // G = E R with E = diag(1, conj(phase)), R = [[c, s], [-s, c]]; G_pp = c, G_pq = s.
  const Complex gqp = -s * std::conj(phase);
  const Complex gqq = c * std::conj(phase);
  const std::size_t n = a.rows();
  for (std::size_t k = 0; k < n; ++k) {  // A <- A G
    const Complex akp = a(k, p);
    const Complex akq = a(k, q);
    a(k, p) = akp * c + cmul(akq, gqp);
    a(k, q) = akp * s + cmul(akq, gqq);
  }
  for (std::size_t k = 0; k < n; ++k) {  // A <- G* A
    const Complex apk = a(p, k);
    const Complex aqk = a(q, k);
    a(p, k) = apk * c + cmul(std::conj(gqp), aqk);
    a(q, k) = apk * s + cmul(std::conj(gqq), aqk);
  }
  a(p, q) = 0.0;
  a(q, p) = 0.0;
  a(p, p) = a(p, p).real();
  a(q, q) = a(q, q).real();
  if (!v) return;
  for (std::size_t k = 0; k < n; ++k) {  // V <- V G
    const Complex vkp = (*v)(k, p);
    const Complex vkq = (*v)(k, q);
    (*v)(k, p) = vkp * c + cmul(vkq, gqp);
    (*v)(k, q) = vkp * s + cmul(vkq, gqq);
  }
}

}  // namespace detail

namespace detail {
// Cyclic Jacobi sweeps on a (and v, when given) until the off-diagonal
// Frobenius mass drops below 1e-14 * ||H||_F.
inline void jacobi_sweeps(ComplexMatrix& a, ComplexMatrix* v) {
  const std::size_t n = a.rows();
  const double target = 1e-14 * std::max(a.frobenius(), 1e-300);
  constexpr int kMaxSweeps = 100;
  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    if (offdiag_frobenius(a) <= target) break;
    for (std::size_t p = 0; p + 1 < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) jacobi_rotate(a, v, p, q);
  }
  if (offdiag_frobenius(a) > target * 1e3) {
    throw ConsistencyFault("Jacobi eigensolver failed to converge");
  }
}
}  // namespace detail

/// Cyclic Jacobi diagonalization, eigenvalues ascending.
inline EigenDecomposition eigh(const HermitianMatrix& h) {
  const std::size_t n = h.dim();
  ComplexMatrix a = h.matrix();
  ComplexMatrix v = ComplexMatrix::identity(n);
  detail::jacobi_sweeps(a, &v);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return a(i, i).real() < a(j, j).real(); });
  EigenDecomposition e;
  e.values.resize(n);
  e.vectors = ComplexMatrix(n, n);
  for (std::size_t c = 0; c < n; ++c) {
    e.values[c] = a(order[c], order[c]).real();
    for (std::size_t r = 0; r < n; ++r) e.vectors(r, c) = v(r, order[c]);
  }
  return e;
}

/// Eigenvalues only, ascending.
inline std::vector<double> eigvalsh(const HermitianMatrix& h) {
  ComplexMatrix a = h.matrix();
  detail::jacobi_sweeps(a, nullptr);
  std::vector<double> w(h.dim());
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = a(i, i).real();
  std::sort(w.begin(), w.end());
  return w;
}

/// Returns V diag(w) V* for real weights w.
inline HermitianMatrix reassemble(const EigenDecomposition& e, std::span<const double> w) {
  const std::size_t n = e.dim();
  ComplexMatrix r(n, n);
  for (std::size_t k = 0; k < n; ++k) {
    if (w[k] == 0.0) continue;
    for (std::size_t i = 0; i < n; ++i) {
      const Complex vik = e.vectors(i, k) * w[k];
      for (std::size_t j = 0; j < n; ++j) r(i, j) += cmul(vik, std::conj(e.vectors(j, k)));
    }
  }
  return HermitianMatrix::hermitian_part(std::move(r));
}

/// Returns V diag(w) V* for complex weights w (a normal matrix).
inline ComplexMatrix reassemble_complex(const EigenDecomposition& e, std::span<const Complex> w) {
  const std::size_t n = e.dim();
  ComplexMatrix r(n, n);
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t i = 0; i < n; ++i) {
      const Complex vik = e.vectors(i, k) * w[k];
      for (std::size_t j = 0; j < n; ++j) r(i, j) += cmul(vik, std::conj(e.vectors(j, k)));
    }
  }
  return r;
}

inline HermitianMatrix apply_function(const EigenDecomposition& e, const std::function<double(double)>& f) {
  std::vector<double> w(e.dim());
  for (std::size_t k = 0; k < e.dim(); ++k) {
    w[k] = f(e.values[k]);
    if (!std::isfinite(w[k])) {
      std::ostringstream os;
      os << "function is undefined at eigenvalue " << e.values[k];
      throw DomainError(os.str(), e.values[k]);
    }
  }
  return reassemble(e, w);
}

/// f(H) = V f(Lambda) V*. Throws DomainError when f is not finite at an eigenvalue.
inline HermitianMatrix apply_function(const HermitianMatrix& h, const std::function<double(double)>& f) {
  return apply_function(eigh(h), f);
}

/// ||H|| for Hermitian H: largest |eigenvalue|.
inline double op_norm(const HermitianMatrix& h) {
  const auto w = eigvalsh(h);
  return w.empty() ? 0.0 : std::max(std::abs(w.front()), std::abs(w.back()));
}

/// Largest singular value, via the eigenvalues of the smaller Gram matrix.
inline double op_norm(const ComplexMatrix& a) {
  if (a.empty()) return 0.0;
  if (a.max_abs() == 0.0) return 0.0;
  const ComplexMatrix gram = a.rows() <= a.cols() ? a * a.adjoint() : a.adjoint() * a;
  const auto w = eigvalsh(HermitianMatrix::hermitian_part(gram));
  return std::sqrt(std::max(w.back(), 0.0));
}

inline double scale_of(const HermitianMatrix& h) { return 1.0 + op_norm(h); }

/// All singular values, descending, computed from the Hermitian dilation
/// [[0, A*], [A, 0]] so that small singular values keep absolute accuracy.
inline std::vector<double> singular_values(const ComplexMatrix& a) {
  const std::size_t m = a.rows();
  const std::size_t n = a.cols();
  const std::size_t k = std::min(m, n);
  if (k == 0) return {};
  ComplexMatrix dil(m + n, m + n);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      dil(n + i, j) = a(i, j);
      dil(j, n + i) = std::conj(a(i, j));
    }
  const auto w = eigvalsh(HermitianMatrix::hermitian_part(std::move(dil)));
  // Eigenvalues are +-sigma_i plus |m-n| zeros; the k largest are the sigmas.
  std::vector<double> s(k);
  for (std::size_t i = 0; i < k; ++i) s[i] = std::max(w[m + n - 1 - i], 0.0);
  return s;
}

struct RankResult {
  std::size_t rank = 0;
  /// Some singular value lies within a factor 10 of the tolerance.
  bool ill_conditioned = false;
  /// Singular value closest to tol in log scale (for diagnostics), or NaN.
  double nearest_singular_value = std::numeric_limits<double>::quiet_NaN();
};

/// Number of singular values above tol, with an ill-conditioning flag when the
/// spectrum has no factor-10 gap around tol.
inline RankResult rank_eps(const ComplexMatrix& a, double tol) {
  if (!(tol > 0.0)) throw InputError("rank tolerance must be positive");
  RankResult r;
  double best = std::numeric_limits<double>::infinity();
  for (double s : singular_values(a)) {
    if (s > tol) ++r.rank;
    if (s > tol / 10.0 && s < tol * 10.0) r.ill_conditioned = true;
    const double d = s > 0.0 ? std::abs(std::log(s / tol)) : std::numeric_limits<double>::infinity();
    if (d < best) {
      best = d;
      r.nearest_singular_value = s;
    }
  }
  return r;
}

/// Orthogonal projection: Hermitian, idempotent within 1e-10.
class Projection {
 public:
  Projection() = default;

  explicit Projection(ComplexMatrix m) {
    HermitianMatrix h(std::move(m));
    const ComplexMatrix& p = h.matrix();
    const double defect = (p * p - p).max_abs();
    if (defect > 1e-10) {
      std::ostringstream os;
      os << "matrix is not idempotent: ||P^2 - P||_max = " << defect;
      throw NotProjectionError(os.str());
    }
    p_ = std::move(h);
  }

  /// Projection onto the span of the selected eigenvectors.
  static Projection from_eigenvectors(const EigenDecomposition& e, const std::vector<bool>& selected) {
    const std::size_t n = e.dim();
    ComplexMatrix r(n, n);
    for (std::size_t k = 0; k < n; ++k) {
      if (!selected[k]) continue;
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) r(i, j) += e.vectors(i, k) * std::conj(e.vectors(j, k));
    }
    Projection pr;
    pr.p_ = HermitianMatrix::hermitian_part(std::move(r));
    return pr;
  }

  static Projection zero(std::size_t n) { return Projection(ComplexMatrix(n, n)); }
  static Projection identity(std::size_t n) { return Projection(ComplexMatrix::identity(n)); }

  /// Projection onto the span of a single (not necessarily unit) vector.
  static Projection onto(const ComplexMatrix& column) {
    const double nrm = column.frobenius();
    if (nrm == 0.0) throw InputError("cannot project onto the zero vector");
    ComplexMatrix u = column * Complex(1.0 / nrm);
    return Projection(u * u.adjoint());
  }

  std::size_t dim() const noexcept { return p_.dim(); }
  const HermitianMatrix& hermitian() const noexcept { return p_; }
  const ComplexMatrix& matrix() const noexcept { return p_.matrix(); }
  /// Rank as the rounded trace (exact for a valid projection).
  std::size_t rank() const { return static_cast<std::size_t>(std::llround(p_.matrix().trace().real())); }

  Projection complement() const {
    Projection c;
    c.p_ = HermitianMatrix::hermitian_part(ComplexMatrix::identity(dim()) - p_.matrix());
    return c;
  }
  Projection conjugated_by(const ComplexMatrix& u) const {
    Projection c;
    c.p_ = p_.conjugated_by(u);
    return c;
  }

 private:
  HermitianMatrix p_;
};

/// Real interval with independent open/closed ends. Infinite ends are allowed.
struct Interval {
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
  bool lo_closed = true;
  bool hi_closed = true;

  static Interval closed(double a, double b) { return {a, b, true, true}; }
  static Interval open(double a, double b) { return {a, b, false, false}; }
  static Interval closed_open(double a, double b) { return {a, b, true, false}; }
  static Interval open_closed(double a, double b) { return {a, b, false, true}; }
  static Interval real_line() { return {}; }
  static Interval nonnegative() {
    return {0.0, std::numeric_limits<double>::infinity(), true, true};
  }

  bool contains(double x) const {
    const bool above = lo_closed ? x >= lo : x > lo;
    const bool below = hi_closed ? x <= hi : x < hi;
    return above && below;
  }
};

inline double spectral_tolerance(const EigenDecomposition& e) { return 1e-9 * (1.0 + e.max_abs()); }

inline Projection spectral_projection(const EigenDecomposition& e, const Interval& x) {
  const double tol = spectral_tolerance(e);
  std::vector<bool> sel(e.dim());
  for (std::size_t k = 0; k < e.dim(); ++k) {
    const double lam = e.values[k];
    for (double end : {x.lo, x.hi}) {
      if (std::isfinite(end) && std::abs(lam - end) <= tol) {
        std::ostringstream os;
        os << "boundary collision: eigenvalue " << lam << " within " << tol << " of interval endpoint " << end;
        throw BoundaryCollision(os.str(), lam);
      }
    }
    sel[k] = x.contains(lam);
  }
  return Projection::from_eigenvectors(e, sel);
}

/// 1_X(H) for an interval X. Throws BoundaryCollision when an eigenvalue is
/// within 1e-9 (1 + ||H||) of a finite endpoint.
inline Projection spectral_projection(const HermitianMatrix& h, const Interval& x) {
  return spectral_projection(eigh(h), x);
}

/// Number of eigenvalues in the interval, no collision check.
inline std::size_t count_in(const EigenDecomposition& e, const Interval& x) {
  return static_cast<std::size_t>(std::count_if(e.values.begin(), e.values.end(),
                                                [&](double v) { return x.contains(v); }));
}

struct ContourOptions {
  std::size_t initial_nodes = 16;
  std::size_t max_nodes = 1u << 16;
  double tolerance = 1e-12;  // successive-refinement stopping threshold
};

/// Riesz projection (1/2 pi i) \oint (z - H)^{-1} dz over |z - center| = radius,
/// by the trapezoid rule on the circle with node doubling. The resolvents are
/// computed by LU solves, independently of the eigenbasis; the eigenvalues are
/// used only to guard against contour collisions.
inline Projection contour_projection(const HermitianMatrix& h, double center, double radius,
                                     const ContourOptions& opts = {}) {
  if (!(radius > 0.0)) throw InputError("contour radius must be positive");
  const auto e = eigh(h);
  const double tol = spectral_tolerance(e);
  for (double lam : e.values) {
    if (std::abs(std::abs(lam - center) - radius) <= tol) {
      std::ostringstream os;
      os << "contour collision: eigenvalue " << lam << " lies on |z - " << center << "| = " << radius;
      throw ContourCollision(os.str(), lam);
    }
  }
  const std::size_t n = h.dim();
  auto quadrature = [&](std::size_t nodes) {
    ComplexMatrix sum(n, n);
    for (std::size_t k = 0; k < nodes; ++k) {
      const double theta = 2.0 * std::numbers::pi * (static_cast<double>(k) + 0.5) / static_cast<double>(nodes);
      const Complex w = radius * std::exp(kI * theta);
      const Complex z = center + w;
      const ComplexMatrix zmh = shifted(-h.matrix(), z);
      sum += LuDecomposition(zmh).inverse() * w;
    }
    return sum * Complex(1.0 / static_cast<double>(nodes));
  };
  std::size_t nodes = opts.initial_nodes;
  ComplexMatrix prev = quadrature(nodes);
  while (true) {
    nodes *= 2;
    if (nodes > opts.max_nodes) {
      throw ContourCollision("contour quadrature did not converge (eigenvalue too close to contour)", center + radius);
    }
    ComplexMatrix next = quadrature(nodes);
    const double diff = (next - prev).max_abs();
    prev = std::move(next);
    if (diff < opts.tolerance) break;
  }
  return Projection(HermitianMatrix::hermitian_part(std::move(prev)).matrix());
}

/// Gauss-Legendre nodes and weights on [-1, 1] by Newton iteration on P_n.
struct GaussLegendre {
  std::vector<double> nodes;
  std::vector<double> weights;

  explicit GaussLegendre(std::size_t n) : nodes(n), weights(n) {
    // (P_n(x), P_n'(x)) by the three-term recurrence.
    auto legendre = [n](double x) {
      double p0 = 1.0;
      double p1 = x;
      for (std::size_t k = 2; k <= n; ++k) {
        const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / static_cast<double>(k);
        p0 = p1;
        p1 = pk;
      }
      const double dp = static_cast<double>(n) * (x * p1 - p0) / (x * x - 1.0);
      return std::pair{p1, dp};
    };
    for (std::size_t i = 0; i < (n + 1) / 2; ++i) {
      double x = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) / (static_cast<double>(n) + 0.5));
      for (int it = 0; it < 100; ++it) {
        const auto [p, dp] = legendre(x);
        const double dx = p / dp;
        x -= dx;
        if (std::abs(dx) < 1e-16) break;
      }
      const double dp = legendre(x).second;
      nodes[i] = -x;
      nodes[n - 1 - i] = x;
      weights[i] = weights[n - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
  }
};

struct QuadratureOptions {
  std::size_t initial_nodes = 16;
  std::size_t max_nodes = 4096;
  double tolerance = 1e-8;  // successive results must differ less than this
};

struct InvSqrtResult {
  HermitianMatrix value;
  std::size_t nodes = 0;
  double last_change = 0.0;
};

/// A^{-1/2} = (2/pi) \int_0^inf (A + x^2)^{-1} dx for positive definite A.
/// With x = tan(theta) the integrand becomes (cos^2 A + sin^2 I)^{-1} on
/// [0, pi/2), integrated by Gauss-Legendre with node doubling.
inline InvSqrtResult inv_sqrt_integral_detailed(const HermitianMatrix& a, const QuadratureOptions& opts = {}) {
  const auto e = eigh(a);
  if (!(e.values.front() > 0.0)) {
    std::ostringstream os;
    os << "matrix is not positive definite: lambda_min = " << e.values.front();
    throw DefinitenessError(os.str(), e.values.front());
  }
  const std::size_t n = a.dim();
  auto integrate = [&](std::size_t m) {
    const GaussLegendre gl(m);
    ComplexMatrix sum(n, n);
    const double half = std::numbers::pi / 4.0;  // [0, pi/2] = half*(x+1)
    for (std::size_t k = 0; k < m; ++k) {
      const double theta = half * (gl.nodes[k] + 1.0);
      const double c2 = std::cos(theta) * std::cos(theta);
      const double s2 = std::sin(theta) * std::sin(theta);
      ComplexMatrix m_theta = a.matrix() * Complex(c2);
      for (std::size_t i = 0; i < n; ++i) m_theta(i, i) += s2;
      sum += LuDecomposition(m_theta).inverse() * Complex(gl.weights[k] * half);
    }
    return sum * Complex(2.0 / std::numbers::pi);
  };
  std::size_t m = opts.initial_nodes;
  ComplexMatrix prev = integrate(m);
  double change = std::numeric_limits<double>::infinity();
  while (m * 2 <= opts.max_nodes) {
    m *= 2;
    ComplexMatrix next = integrate(m);
    change = op_norm(next - prev);
    prev = std::move(next);
    if (change < opts.tolerance) break;
  }
  if (!(change < opts.tolerance)) {
    throw ConsistencyFault("inverse square root quadrature did not converge");
  }
  return {HermitianMatrix::hermitian_part(std::move(prev)), m, change};
}

inline HermitianMatrix inv_sqrt_integral(const HermitianMatrix& a, const QuadratureOptions& opts = {}) {
  return inv_sqrt_integral_detailed(a, opts).value;
}

/// Norm identities and inequalities for similarity by an invertible
/// self-adjoint T and a symmetric B:
///   ||T B T^{-1}|| = ||T^{-1} B T||,   ||B|| <= ||T^{-1} B T||,
/// and for positive definite T:  ||T^{-1/2} B T^{-1/2}|| <= ||T^{-1} B||.
struct A1Report {
  double norm_tbtinv = 0.0;
  double norm_tinvbt = 0.0;
  double norm_b = 0.0;
  bool similarity_norms_equal = false;
  bool b_bounded_by_similarity = false;
  bool positive_definite = false;
  double norm_sandwich = 0.0;   // ||T^{-1/2} B T^{-1/2}||, SPD T only
  double norm_tinv_b = 0.0;     // ||T^{-1} B||, SPD T only
  bool sandwich_bounded = true;  // vacuously true when T is not SPD

  bool all_hold() const { return similarity_norms_equal && b_bounded_by_similarity && sandwich_bounded; }
};

inline A1Report check_a1(const HermitianMatrix& t, const HermitianMatrix& b) {
  require_same_dim(t.dim(), b.dim(), "check_a1");
  const auto e = eigh(t);
  if (e.min_abs() <= 1e-12 * (1.0 + e.max_abs())) throw InvertibilityError("check_a1: T is singular");
  const HermitianMatrix tinv = apply_function(e, [](double x) { return 1.0 / x; });
  A1Report r;
  r.norm_tbtinv = op_norm(t.matrix() * b.matrix() * tinv.matrix());
  r.norm_tinvbt = op_norm(tinv.matrix() * b.matrix() * t.matrix());
  r.norm_b = op_norm(b);
  const double scale = std::max({r.norm_tbtinv, r.norm_tinvbt, 1e-300});
  r.similarity_norms_equal = std::abs(r.norm_tbtinv - r.norm_tinvbt) <= 1e-10 * scale;
  r.b_bounded_by_similarity = r.norm_b <= r.norm_tinvbt + 1e-10;
  r.positive_definite = e.values.front() > 0.0;
  if (r.positive_definite) {
    const HermitianMatrix tinvsqrt = apply_function(e, [](double x) { return 1.0 / std::sqrt(x); });
    r.norm_sandwich = op_norm(tinvsqrt.matrix() * b.matrix() * tinvsqrt.matrix());
    r.norm_tinv_b = op_norm(tinv.matrix() * b.matrix());
    r.sandwich_bounded = r.norm_sandwich <= r.norm_tinv_b + 1e-10;
  }
  return r;
}

}  // namespace specflow
