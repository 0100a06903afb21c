#pragma once

// Odd self-adjoint operators T = [[0, A*], [A, 0]] on C^p (+) C^q with grading
// alpha = diag(I_p, -I_q), the graded kernel index ind0 = dim ker A - dim ker A*,
// and the cancellation of graded dimensions on nonzero eigenvalue levels.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <sstream>
#include <vector>

#include "specflow/matcore.hpp"
#include "specflow/metrics.hpp"
#include "specflow/projpair.hpp"
#include "specflow/random.hpp"

namespace specflow {

class GradedOperator {
 public:
  GradedOperator() = default;
  /// A is q x p (maps C^p to C^q).
  GradedOperator(std::size_t p, std::size_t q, ComplexMatrix a) : p_(p), q_(q), a_(std::move(a)) {
    if (p_ + q_ == 0) throw InputError("graded operator needs p + q > 0");
    if (a_.rows() != q_ || a_.cols() != p_) {
      std::ostringstream os;
      os << "block A must be " << q_ << "x" << p_ << ", got " << a_.shape();
      throw DimensionMismatch(os.str());
    }
    if (!a_.all_finite()) throw InputError("block A has non-finite entries");
  }

  std::size_t p() const noexcept { return p_; }
  std::size_t q() const noexcept { return q_; }
  std::size_t dim() const noexcept { return p_ + q_; }
  const ComplexMatrix& block() const noexcept { return a_; }

  HermitianMatrix assembled() const {
    ComplexMatrix t(dim(), dim());
    for (std::size_t i = 0; i < q_; ++i)
      for (std::size_t j = 0; j < p_; ++j) {
        t(p_ + i, j) = a_(i, j);
        t(j, p_ + i) = std::conj(a_(i, j));
      }
    return HermitianMatrix(std::move(t));
  }

  HermitianMatrix grading() const {
    std::vector<double> d(dim(), 1.0);
    for (std::size_t i = p_; i < dim(); ++i) d[i] = -1.0;
    return HermitianMatrix::diagonal(d);
  }

  GradedOperator operator+(const GradedOperator& e) const {
    if (e.p_ != p_ || e.q_ != q_) throw DimensionMismatch("graded operators of different type");
    return GradedOperator(p_, q_, a_ + e.a_);
  }

  /// (U+ (+) U-) T (U+ (+) U-)* acts on the block as A -> U- A U+*.
  GradedOperator conjugated(const ComplexMatrix& u_plus, const ComplexMatrix& u_minus) const {
    return GradedOperator(p_, q_, u_minus * a_ * u_plus.adjoint());
  }

 private:
  std::size_t p_ = 0;
  std::size_t q_ = 0;
  ComplexMatrix a_;
};

struct Ind0Result {
  int value = 0;
  std::size_t kernel = 0;    // dim ker A
  std::size_t cokernel = 0;  // dim ker A*
  bool ill_conditioned = false;
};

inline Ind0Result ind0_detailed(const GradedOperator& t) {
  Ind0Result r;
  std::size_t rank = 0, rank_adj = 0;
  if (t.p() > 0 && t.q() > 0) {
    const RankResult ra = rank_eps(t.block(), kRankTol);
    const RankResult rs = rank_eps(t.block().adjoint(), kRankTol);
    rank = ra.rank;
    rank_adj = rs.rank;
    r.ill_conditioned = ra.ill_conditioned || rs.ill_conditioned;
  }
  r.kernel = t.p() - rank;
  r.cokernel = t.q() - rank_adj;
  r.value = static_cast<int>(r.kernel) - static_cast<int>(r.cokernel);
  return r;
}

inline int ind0(const GradedOperator& t) { return ind0_detailed(t).value; }

/// Smallest singular value of A above the rank tolerance (infinity if A = 0).
inline double singular_gap(const GradedOperator& t) {
  double g = std::numeric_limits<double>::infinity();
  if (t.p() == 0 || t.q() == 0) return g;
  for (double s : singular_values(t.block()))
    if (s > kRankTol) g = std::min(g, s);
  return g;
}

namespace detail {
inline int graded_trace(const Projection& pr, const HermitianMatrix& alpha) {
  return static_cast<int>(std::llround((alpha.matrix() * pr.matrix()).trace().real()));
}
}  // namespace detail

/// tr(alpha 1_[-eps, eps](T)): the graded dimension of the spectral window.
inline int graded_window_dim(const GradedOperator& t, double eps) {
  if (!(eps > 0.0)) throw InputError("window half-width must be positive");
  const auto pr = spectral_projection(t.assembled(), Interval::closed(-eps, eps));
  return detail::graded_trace(pr, t.grading());
}

struct LevelDimension {
  double level = 0.0;     // |lambda|
  int multiplicity = 0;   // dim ker(T^2 - lambda^2)
  int graded_dim = 0;     // tr(alpha) on that eigenspace
};

struct CancellationReport {
  std::vector<LevelDimension> levels;  // ascending; a zero level first when present
  int kernel_graded_dim = 0;
  int total = 0;                       // sum over all levels = p - q
  bool cancels = true;                 // every nonzero level has graded dim 0
};

/// Groups eigenvalues of T by |lambda| (clusters within 1e-8 (1 + ||T||)) and
/// computes the graded dimension of each ker(T^2 - lambda^2).
inline CancellationReport eigenpair_cancellation_check(const GradedOperator& t) {
  const auto e = eigh(t.assembled());
  const HermitianMatrix alpha = t.grading();
  const double tol = 1e-8 * (1.0 + e.max_abs());
  std::vector<std::size_t> order(e.dim());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return std::abs(e.values[i]) < std::abs(e.values[j]); });
  CancellationReport rep;
  std::size_t k = 0;
  while (k < order.size()) {
    std::size_t end = k + 1;
    while (end < order.size() && std::abs(e.values[order[end]]) - std::abs(e.values[order[end - 1]]) <= tol) ++end;
    std::vector<bool> sel(e.dim(), false);
    for (std::size_t i = k; i < end; ++i) sel[order[i]] = true;
    LevelDimension lv;
    lv.level = std::abs(e.values[order[k]]);
    lv.multiplicity = static_cast<int>(end - k);
    lv.graded_dim = detail::graded_trace(Projection::from_eigenvectors(e, sel), alpha);
    const bool zero_level = lv.level <= tol;
    if (zero_level) rep.kernel_graded_dim = lv.graded_dim;
    else if (lv.graded_dim != 0) rep.cancels = false;
    rep.total += lv.graded_dim;
    rep.levels.push_back(lv);
    k = end;
  }
  return rep;
}

struct StabilityReport {
  int index = 0;
  int trials = 0;
  int violations = 0;
  double gap = 0.0;
  double delta = 0.0;
  double max_graph_distance = 0.0;
  double max_formula_gap = 0.0;
  bool holds() const { return violations == 0; }
};

/// Random odd perturbations E with ||E|| = u delta, u in [0.05, 0.9],
/// delta = min(gap / 2, 0.1): ind0 and the window dimension at eps = gap / 2
/// must not change, and d_G(T, T + E) < delta.
inline StabilityReport index_stability_check(const GradedOperator& t, int trials, Rng& rng) {
  StabilityReport rep;
  rep.gap = singular_gap(t);
  if (!(rep.gap > 10.0 * kRankTol)) {
    std::ostringstream os;
    os << "no singular-value gap: smallest nonzero singular value " << rep.gap << " <= " << 10.0 * kRankTol;
    throw PreconditionError(os.str());
  }
  const double gap = std::isfinite(rep.gap) ? rep.gap : 1.0;
  rep.delta = std::min(0.5 * gap, 0.1);
  rep.index = ind0(t);
  const HermitianMatrix tm = t.assembled();
  for (int k = 0; k < trials; ++k) {
    ComplexMatrix b = random_complex(rng, t.q(), t.p());
    const double nb = t.p() > 0 && t.q() > 0 ? op_norm(b) : 0.0;
    if (nb > 0.0) b = b * Complex(rng.uniform(0.05, 0.9) * rep.delta / nb);
    const GradedOperator te = t + GradedOperator(t.p(), t.q(), b);
    const auto g = graph_distance_detailed(tm, te.assembled());
    rep.max_graph_distance = std::max(rep.max_graph_distance, g.resolvent);
    rep.max_formula_gap = std::max(rep.max_formula_gap, g.discrepancy());
    const bool ok = g.resolvent < rep.delta && ind0(te) == rep.index && graded_window_dim(te, 0.5 * gap) == rep.index;
    if (!ok) ++rep.violations;
    ++rep.trials;
  }
  return rep;
}

/// Random graded operator; with probability 1/3 the block is rank deficient.
inline GradedOperator random_graded(Rng& rng, std::size_t max_side) {
  const std::size_t p = static_cast<std::size_t>(rng.integer(0, static_cast<int>(max_side)));
  std::size_t q = static_cast<std::size_t>(rng.integer(0, static_cast<int>(max_side)));
  if (p + q == 0) q = 1;
  ComplexMatrix a = random_complex(rng, q, p);
  if (p > 0 && q > 0 && rng.integer(0, 2) == 0) {
    const std::size_t r = static_cast<std::size_t>(rng.integer(0, static_cast<int>(std::min(p, q)) - 1));
    a = random_complex(rng, q, r) * random_complex(rng, r, p);
    if (r == 0) a = ComplexMatrix(q, p);
  }
  return GradedOperator(p, q, std::move(a));
}

}  // namespace specflow
