#pragma once

// Index of a pair of orthogonal projections: ind(P, Q) is the Fredholm index
// of x -> Qx as a map im P -> im Q.

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>
#include <utility>
#include <vector>

#include "specflow/matcore.hpp"

namespace specflow {

inline constexpr double kRankTol = 1e-8;

struct PairIndexResult {
  int value = 0;
  int route_rank_diff = 0;
  int route_restricted_map = 0;
  int route_eigencount = 0;
  double min_gap_to_pm1 = 1.0;
  bool ill_conditioned = false;
};

/// Spectrum of P - Q.
inline std::vector<double> difference_spectrum(const Projection& p, const Projection& q) {
  require_same_dim(p.dim(), q.dim(), "projection pair");
  return eigvalsh(p.hermitian() - q.hermitian());
}

inline double fredholm_pair_gap(const std::vector<double>& mu) {
  double gap = 1.0;
  for (double m : mu)
    if (std::abs(m) < 1.0 - 1e-9) gap = std::min(gap, 1.0 - std::abs(m));
  return gap;
}

/// min over eigenvalues mu of P - Q with |mu| < 1 - 1e-9 of 1 - |mu|.
inline double fredholm_pair_gap(const Projection& p, const Projection& q) {
  return fredholm_pair_gap(difference_spectrum(p, q));
}

namespace detail {
// Orthonormal basis of im P (eigenvectors with eigenvalue above 1/2).
inline ComplexMatrix range_basis(const EigenDecomposition& e) {
  std::vector<std::size_t> cols;
  for (std::size_t k = 0; k < e.dim(); ++k)
    if (e.values[k] > 0.5) cols.push_back(k);
  ComplexMatrix b(e.dim(), cols.size());
  for (std::size_t j = 0; j < cols.size(); ++j)
    for (std::size_t i = 0; i < e.dim(); ++i) b(i, j) = e.vectors(i, cols[j]);
  return b;
}

inline RankResult rank_from_values(const std::vector<double>& values, double tol) {
  RankResult r;
  double best = std::numeric_limits<double>::infinity();
  for (double v : values) {
    const double s = std::abs(v);
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
}  // namespace detail

/// Rank of a Hermitian matrix: singular values are |eigenvalues|.
inline RankResult rank_eps(const HermitianMatrix& h, double tol) {
  if (!(tol > 0.0)) throw InputError("rank tolerance must be positive");
  return detail::rank_from_values(eigvalsh(h), tol);
}

inline PairIndexResult pair_index(const Projection& p, const Projection& q) {
  require_same_dim(p.dim(), q.dim(), "pair_index");
  PairIndexResult r;
  const auto ep = eigh(p.hermitian());
  const auto eq = eigh(q.hermitian());
  const RankResult rp = detail::rank_from_values(ep.values, kRankTol);
  const RankResult rq = detail::rank_from_values(eq.values, kRankTol);
  // matrix of x -> Qx from im P to im Q in orthonormal bases; rank(QP) = rank(B_Q* B_P)
  const ComplexMatrix bp = detail::range_basis(ep);
  const ComplexMatrix bq = detail::range_basis(eq);
  RankResult rqp;
  if (bp.cols() > 0 && bq.cols() > 0) rqp = rank_eps(bq.adjoint() * bp, kRankTol);
  r.ill_conditioned = rp.ill_conditioned || rq.ill_conditioned || rqp.ill_conditioned;
  const int np = static_cast<int>(rp.rank), nq = static_cast<int>(rq.rank), nqp = static_cast<int>(rqp.rank);
  r.route_rank_diff = np - nq;
  // kernel: im P minus the part mapped onto; cokernel: im Q minus the range
  r.route_restricted_map = (np - nqp) - (nq - nqp);

  // ker(P - Q - I) = im P cap ker Q, ker(P - Q + I) = ker P cap im Q
  const auto mu = eigvalsh(p.hermitian() - q.hermitian());
  int plus = 0, minus = 0;
  for (double m : mu) {
    if (std::abs(m - 1.0) < 1e-9) ++plus;
    if (std::abs(m + 1.0) < 1e-9) ++minus;
  }
  r.route_eigencount = plus - minus;
  r.min_gap_to_pm1 = fredholm_pair_gap(mu);

  if (r.route_rank_diff != r.route_restricted_map || r.route_rank_diff != r.route_eigencount) {
    std::ostringstream os;
    os << "pair index routes disagree: rank difference " << r.route_rank_diff << ", restricted map "
       << r.route_restricted_map << ", eigencount " << r.route_eigencount;
    throw ConsistencyFault(os.str());
  }
  r.value = r.route_rank_diff;
  return r;
}

struct PairPathReport {
  int index = 0;
  bool constant = true;
  double max_jump_p = 0.0;
  double max_jump_q = 0.0;
  std::vector<int> indices;
};

using PairPath = std::function<std::pair<Projection, Projection>(double)>;

/// Samples t_k = k/(samples-1) and checks ind(P(t), Q(t)) is constant.
/// Consecutive jumps ||P(t_{k+1}) - P(t_k)|| must stay below 1.
inline PairPathReport pair_path_invariance(const PairPath& path, int samples) {
  if (samples < 2) throw InputError("pair path needs at least 2 samples");
  PairPathReport rep;
  std::pair<Projection, Projection> prev;
  for (int k = 0; k < samples; ++k) {
    const double t = static_cast<double>(k) / (samples - 1);
    auto cur = path(t);
    if (k > 0) {
      const double jp = op_norm(cur.first.hermitian() - prev.first.hermitian());
      const double jq = op_norm(cur.second.hermitian() - prev.second.hermitian());
      rep.max_jump_p = std::max(rep.max_jump_p, jp);
      rep.max_jump_q = std::max(rep.max_jump_q, jq);
      if (jp >= 1.0 || jq >= 1.0) {
        std::ostringstream os;
        os << "sampling too coarse: projection jump " << std::max(jp, jq) << " >= 1 on ["
           << static_cast<double>(k - 1) / (samples - 1) << ", " << t << "]";
        throw SamplingTooCoarse(os.str(), static_cast<double>(k - 1) / (samples - 1), t);
      }
    }
    rep.indices.push_back(pair_index(cur.first, cur.second).value);
    prev = std::move(cur);
  }
  rep.index = rep.indices.front();
  rep.constant = std::all_of(rep.indices.begin(), rep.indices.end(), [&](int v) { return v == rep.index; });
  return rep;
}

}  // namespace specflow
