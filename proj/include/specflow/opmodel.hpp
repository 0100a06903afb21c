#pragma once

// Truncated diagonal model of an operator with compact resolvent: D = diag(lambda_k)
// on C^N with |lambda_k| growing, plus the named bounded perturbation families
// that separate the norm, domain, Riesz and graph distances.

#include <cmath>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "specflow/matcore.hpp"

namespace specflow {

enum class LambdaLaw { linear, signed_, shifted };

inline std::string to_string(LambdaLaw law) {
  switch (law) {
    case LambdaLaw::linear: return "linear";
    case LambdaLaw::signed_: return "signed";
    case LambdaLaw::shifted: return "shifted";
  }
  return "?";
}

inline LambdaLaw parse_law(const std::string& s) {
  if (s == "linear") return LambdaLaw::linear;
  if (s == "signed") return LambdaLaw::signed_;
  if (s == "shifted") return LambdaLaw::shifted;
  throw InputError("unknown eigenvalue law '" + s + "' (expected linear|signed|shifted)");
}

/// k-th eigenvalue (k >= 1): linear k, signed (-1)^k ceil(k/2), shifted k + 1/2.
inline double lambda_of(LambdaLaw law, std::size_t k) {
  const double kd = static_cast<double>(k);
  switch (law) {
    case LambdaLaw::linear: return kd;
    case LambdaLaw::signed_: return (k % 2 == 0 ? 1.0 : -1.0) * std::ceil(kd / 2.0);
    case LambdaLaw::shifted: return kd + 0.5;
  }
  return kd;
}

enum class Family { rank_one, lambda, fuglede, swap };

inline std::string to_string(Family f) {
  switch (f) {
    case Family::rank_one: return "rank_one";
    case Family::lambda: return "lambda";
    case Family::fuglede: return "fuglede";
    case Family::swap: return "swap";
  }
  return "?";
}

inline Family parse_family(const std::string& s) {
  if (s == "rank_one") return Family::rank_one;
  if (s == "lambda") return Family::lambda;
  if (s == "fuglede") return Family::fuglede;
  if (s == "swap") return Family::swap;
  throw InputError("unknown family '" + s + "' (expected rank_one|lambda|fuglede|swap)");
}

struct DiagonalModel {
  std::size_t trunc_dim = 0;
  LambdaLaw law = LambdaLaw::linear;
  std::optional<HermitianMatrix> perturbation;

  DiagonalModel(std::size_t n, LambdaLaw l, std::optional<HermitianMatrix> c = std::nullopt)
      : trunc_dim(n), law(l), perturbation(std::move(c)) {
    if (trunc_dim == 0) throw InputError("truncation dimension must be positive");
    if (perturbation && perturbation->dim() != trunc_dim) {
      throw DimensionMismatch("perturbation dimension does not match truncation dimension");
    }
  }

  double lambda(std::size_t k) const { return lambda_of(law, k); }

  std::vector<double> eigenvalues() const {
    std::vector<double> v(trunc_dim);
    for (std::size_t k = 1; k <= trunc_dim; ++k) v[k - 1] = lambda(k);
    return v;
  }

  /// Same base, different perturbation.
  DiagonalModel with(HermitianMatrix c) const { return DiagonalModel(trunc_dim, law, std::move(c)); }
  DiagonalModel base() const { return DiagonalModel(trunc_dim, law); }
};

/// diag(lambda_1..lambda_N) + perturbation.
inline HermitianMatrix realize(const DiagonalModel& m) {
  const auto ev = m.eigenvalues();
  HermitianMatrix d = HermitianMatrix::diagonal(ev);
  if (m.perturbation) d += *m.perturbation;
  return d;
}

namespace detail {
inline void require_index(const DiagonalModel& m, std::size_t n, std::size_t lo) {
  if (n < lo || n > m.trunc_dim) {
    std::ostringstream os;
    os << "family index n = " << n << " outside [" << lo << ", " << m.trunc_dim << "]";
    throw RangeError(os.str());
  }
}
inline HermitianMatrix single_entry(std::size_t dim, std::size_t n, double value) {
  ComplexMatrix c(dim, dim);
  c(n - 1, n - 1) = value;
  return HermitianMatrix(std::move(c));
}
}  // namespace detail

/// C_n e_k = delta_{kn} e_n.
inline HermitianMatrix ce_rank_one(const DiagonalModel& m, std::size_t n) {
  detail::require_index(m, n, 1);
  return detail::single_entry(m.trunc_dim, n, 1.0);
}

/// C_n = lambda_n e_n (x) e_n.
inline HermitianMatrix ce_lambda(const DiagonalModel& m, std::size_t n) {
  detail::require_index(m, n, 1);
  return detail::single_entry(m.trunc_dim, n, m.lambda(n));
}

/// C_n = -2 lambda_n e_n (x) e_n, which flips the sign of the n-th eigenvalue.
inline HermitianMatrix ce_fuglede(const DiagonalModel& m, std::size_t n) {
  detail::require_index(m, n, 1);
  return detail::single_entry(m.trunc_dim, n, -2.0 * m.lambda(n));
}

/// C_n swaps e_1 and e_n (rank two, norm one).
inline HermitianMatrix ce_swap(const DiagonalModel& m, std::size_t n) {
  detail::require_index(m, n, 2);
  ComplexMatrix c(m.trunc_dim, m.trunc_dim);
  c(0, n - 1) = 1.0;
  c(n - 1, 0) = 1.0;
  return HermitianMatrix(std::move(c));
}

inline HermitianMatrix family_perturbation(const DiagonalModel& m, Family f, std::size_t n) {
  switch (f) {
    case Family::rank_one: return ce_rank_one(m, n);
    case Family::lambda: return ce_lambda(m, n);
    case Family::fuglede: return ce_fuglede(m, n);
    case Family::swap: return ce_swap(m, n);
  }
  throw InputError("unknown family");
}

/// Closed-form distances between D + C_n and D. For the swap family only
/// bounds are known: d_W >= w_lower, d_G <= g_upper, plus the lower bound on
/// the conjugated norm ||(D+i)^{-1} C_n (D+i)||.
struct ClosedForm {
  std::optional<double> d_norm;
  std::optional<double> d_domain;
  std::optional<double> d_riesz;
  std::optional<double> d_graph;
  std::optional<double> domain_lower;
  std::optional<double> graph_upper;
  std::optional<double> conjugated_lower;
};

inline ClosedForm closed_form(const DiagonalModel& m, Family f, std::size_t n) {
  const double l = m.lambda(n);
  const double a = std::abs(l);
  ClosedForm c;
  switch (f) {
    case Family::rank_one:
      detail::require_index(m, n, 1);
      c.d_norm = 1.0;
      c.d_domain = 1.0 / std::sqrt(1.0 + l * l);
      c.d_riesz = std::abs(l / std::sqrt(1.0 + l * l) - (l + 1.0) / std::sqrt(1.0 + (l + 1.0) * (l + 1.0)));
      c.d_graph = std::abs(1.0 / Complex(l + 1.0, 1.0) - 1.0 / Complex(l, 1.0));
      break;
    case Family::lambda:
      detail::require_index(m, n, 1);
      c.d_norm = a;
      c.d_domain = a / std::sqrt(1.0 + l * l);
      c.d_riesz = std::abs(2.0 * l / std::sqrt(1.0 + 4.0 * l * l) - l / std::sqrt(1.0 + l * l));
      c.d_graph = std::abs(1.0 / Complex(2.0 * l, 1.0) - 1.0 / Complex(l, 1.0));
      break;
    case Family::fuglede:
      detail::require_index(m, n, 1);
      c.d_norm = 2.0 * a;
      c.d_domain = 2.0 * a / std::sqrt(1.0 + l * l);
      c.d_riesz = 2.0 * a / std::sqrt(1.0 + l * l);
      c.d_graph = 2.0 * a / (1.0 + l * l);
      break;
    case Family::swap: {
      detail::require_index(m, n, 2);
      const double l1 = m.lambda(1);
      c.d_norm = 1.0;
      c.domain_lower = 1.0 / std::sqrt(1.0 + l1 * l1);
      c.graph_upper = 2.0 / std::sqrt(1.0 + l * l);
      c.conjugated_lower = std::abs(Complex(l, 1.0)) / std::abs(Complex(l1, 1.0));
      break;
    }
  }
  return c;
}

/// ||(D+i)^{-1} C (D+i)||: the conjugation witness for perturbation balls.
inline double conjugated_norm(const DiagonalModel& m, const HermitianMatrix& c) {
  const auto ev = m.eigenvalues();
  const std::size_t n = m.trunc_dim;
  ComplexMatrix r(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) r(i, j) = c(i, j) * Complex(ev[j], 1.0) / Complex(ev[i], 1.0);
  return op_norm(r);
}

/// f_n(T): eigenvalues clamped to [-n, n].
inline HermitianMatrix truncate_fn(const HermitianMatrix& t, double n) {
  if (!(n > 0.0)) throw InputError("truncation level must be positive");
  return apply_function(t, [n](double x) { return std::clamp(x, -n, n); });
}

/// |n / sqrt(1 + n^2) - 1|: bound on d_R(T, f_n(T)).
inline double truncation_riesz_bound(double n) { return std::abs(n / std::sqrt(1.0 + n * n) - 1.0); }

}  // namespace specflow
