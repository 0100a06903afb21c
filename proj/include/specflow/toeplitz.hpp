#pragma once

// Toeplitz compressions P W P : im P -> im P of a unitary W and the identity
// ind(P_+ W P_+) = SF((1-s) D + s W D W*), P_+ = 1_[0,inf)(D).
//
// In finite dimension the compression is square, so both sides are 0. The
// report keeps the crossing ledger of the path, where up- and down-crossings
// cancel, and checks the chain ind(P_+ W P_+) = ind(W P_+ W*, P_+) as well as
// the square-matrix route ind(I + (W - I) P_+).

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "specflow/matcore.hpp"
#include "specflow/projpair.hpp"
#include "specflow/random.hpp"
#include "specflow/specflow.hpp"
#include "specflow/transforms.hpp"

namespace specflow {

/// Matrix of x -> P W x on im P, in an orthonormal eigenbasis of P.
inline ComplexMatrix toeplitz_compression(const Projection& p, const UnitaryMatrix& w) {
  require_same_dim(p.dim(), w.dim(), "toeplitz_compression");
  const ComplexMatrix b = detail::range_basis(eigh(p.hermitian()));
  if (b.cols() == 0) return ComplexMatrix(0, 0);
  return b.adjoint() * w.matrix() * b;
}

struct ToeplitzIndex {
  int index = 0;
  std::size_t dim = 0;      // rank P
  std::size_t rank = 0;     // rank of the compression
  std::size_t rank_adj = 0; // rank of its adjoint
  bool ill_conditioned = false;
};

/// dim ker C - dim ker C* for the compression C.
inline ToeplitzIndex toeplitz_index_detailed(const Projection& p, const UnitaryMatrix& w) {
  const ComplexMatrix c = toeplitz_compression(p, w);
  ToeplitzIndex r;
  r.dim = c.rows();
  if (r.dim == 0) return r;
  const RankResult rc = rank_eps(c, kRankTol);
  const RankResult ra = rank_eps(c.adjoint(), kRankTol);
  r.rank = rc.rank;
  r.rank_adj = ra.rank;
  r.ill_conditioned = rc.ill_conditioned || ra.ill_conditioned;
  r.index = (static_cast<int>(r.dim) - static_cast<int>(r.rank)) - (static_cast<int>(r.dim) - static_cast<int>(r.rank_adj));
  return r;
}

inline int toeplitz_index(const Projection& p, const UnitaryMatrix& w) { return toeplitz_index_detailed(p, w).index; }

/// Index of a square matrix: dim ker A - dim ker A*.
inline int square_index(const ComplexMatrix& a) {
  const int n = static_cast<int>(a.rows());
  return (n - static_cast<int>(rank_eps(a, kRankTol).rank)) - (n - static_cast<int>(rank_eps(a.adjoint(), kRankTol).rank));
}

/// s -> (1 - s) D + s W D W*.
inline OperatorPath toeplitz_path(const HermitianMatrix& d, const UnitaryMatrix& w) {
  require_same_dim(d.dim(), w.dim(), "toeplitz_path");
  const HermitianMatrix wd = d.conjugated_by(w.matrix());
  auto p = function_path(d.dim(), "toeplitz_line", [d, wd](double s) { return d * (1.0 - s) + wd * s; });
  return p;
}

/// ||[D, W] (D + i)^{-1}||.
inline double commutator_report(const HermitianMatrix& d, const UnitaryMatrix& w) {
  require_same_dim(d.dim(), w.dim(), "commutator_report");
  const ComplexMatrix comm = d.matrix() * w.matrix() - w.matrix() * d.matrix();
  return op_norm(comm * inverse(shifted(d.matrix(), kI)));
}

/// D = diag(k + 1/2, k = -m..m) and the cyclic shift on C^{2m+1}.
struct ToeplitzFamily {
  HermitianMatrix d;
  UnitaryMatrix w;
};

inline ToeplitzFamily cyclic_family(int m) {
  if (m < 1) throw RangeError("cyclic family needs m >= 1");
  std::vector<double> diag;
  for (int k = -m; k <= m; ++k) diag.push_back(k + 0.5);
  return {HermitianMatrix::diagonal(diag), UnitaryMatrix::cyclic_shift(diag.size())};
}

struct ToeplitzReport {
  int lhs = 0;              // ind(P_+ W P_+)
  int rhs = 0;              // SF of the path, subdivision method
  bool equal = false;
  int pair_route = 0;       // ind(W P_+ W*, P_+)
  int square_route = 0;     // ind(I + (W - I) P_+)
  bool chain_holds = false;
  int oracle_net = 0;
  int up = 0;               // crossing ledger from the oracle
  int down = 0;
  std::vector<Crossing> crossings;
  int segments = 0;
  double commutator = 0.0;
};

inline ToeplitzReport verify_toeplitz_theorem(const HermitianMatrix& d, const UnitaryMatrix& w, const SfOptions& opts = {}) {
  require_same_dim(d.dim(), w.dim(), "verify_toeplitz_theorem");
  const auto e = eigh(d);
  if (!(e.min_abs() > opts.endpoint_tol)) {
    std::ostringstream os;
    os << "D is not invertible: min |spec| = " << e.min_abs();
    throw InvertibilityError(os.str());
  }
  const Projection pp = spectral_projection(e, Interval::nonnegative());
  ToeplitzReport r;
  r.lhs = toeplitz_index(pp, w);
  const OperatorPath path = toeplitz_path(d, w);
  const SfCertificate cert = sf_phillips(path, opts);
  r.rhs = cert.total;
  r.segments = static_cast<int>(cert.segments.size());
  r.equal = r.lhs == r.rhs;

  r.pair_route = pair_index(pp.conjugated_by(w.matrix()), pp).value;
  const ComplexMatrix id = ComplexMatrix::identity(d.dim());
  r.square_route = square_index(id + (w.matrix() - id) * pp.matrix());
  r.chain_holds = r.pair_route == r.lhs && r.square_route == r.lhs;

  const CrossingTally tally = sf_crossing_tally(path, opts.samples, opts);
  r.oracle_net = tally.net;
  r.up = tally.up;
  r.down = tally.down;
  r.crossings = tally.crossings;
  if (tally.net != r.rhs) throw ConsistencyFault("crossing tally disagrees with the subdivision spectral flow");
  r.commutator = commutator_report(d, w);
  return r;
}

/// Random D with spectrum in +-[0.2, 2] and Haar-like unitary W.
inline ToeplitzFamily random_toeplitz_pair(Rng& rng, std::size_t n) {
  const auto d = random_with_spectrum(rng, random_gapped_spectrum(rng, n, 0.2, 2.0));
  return {d, UnitaryMatrix(random_unitary(rng, n))};
}

}  // namespace specflow
