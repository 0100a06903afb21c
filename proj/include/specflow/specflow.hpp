#pragma once

// Spectral flow of a path of Hermitian matrices, three ways plus a
// brute-force crossing count:
//   sf_phillips         subdivision with windows [0, eps_j), Weyl-certified
//   sf_pairsum          sum of pair indices of positive spectral projections
//   sf_endpoints        rank 1_[0,inf)(f(1)) - rank 1_[0,inf)(f(0))
//   sf_crossing_oracle  dense sampling and sorted-branch sign tracking
// All paths must have invertible endpoints.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "specflow/matcore.hpp"
#include "specflow/projpair.hpp"
#include "specflow/random.hpp"
#include "specflow/transforms.hpp"

namespace specflow {

/// t in [0,1] -> Hermitian matrix of fixed dim. `breakpoints` lists the
/// parameters where the path may fail to be smooth (grid points of a sampled
/// path, junctions of a concatenation); the subdivision never straddles them.
struct OperatorPath {
  std::size_t dim = 0;
  std::string kind = "closed-form";  // or "sampled"
  std::string name;
  std::function<HermitianMatrix(double)> eval;
  std::vector<double> breakpoints{0.0, 1.0};
  std::optional<double> lipschitz_hint;

  HermitianMatrix operator()(double t) const {
    if (!(t >= 0.0 && t <= 1.0)) throw RangeError("path parameter outside [0, 1]");
    HermitianMatrix m = eval(t);
    if (m.dim() != dim) {
      std::ostringstream os;
      os << "path " << name << " changed dimension at t = " << t << ": " << m.dim() << " != " << dim;
      throw DimensionMismatch(os.str());
    }
    return m;
  }
};

namespace detail {
inline std::vector<double> merge_breakpoints(std::vector<double> b) {
  b.push_back(0.0);
  b.push_back(1.0);
  std::sort(b.begin(), b.end());
  b.erase(std::unique(b.begin(), b.end()), b.end());
  return b;
}
}  // namespace detail

inline OperatorPath function_path(std::size_t dim, std::string name, std::function<HermitianMatrix(double)> f) {
  if (dim == 0) throw InputError("path dimension must be positive");
  OperatorPath p;
  p.dim = dim;
  p.name = std::move(name);
  p.eval = std::move(f);
  return p;
}

inline OperatorPath constant_path(const HermitianMatrix& t) {
  return function_path(t.dim(), "constant", [t](double) { return t; });
}

/// (1-t) A + t B.
inline OperatorPath linear_path(const HermitianMatrix& a, const HermitianMatrix& b) {
  require_same_dim(a.dim(), b.dim(), "linear path");
  return function_path(a.dim(), "linear_interp", [a, b](double t) { return a * (1.0 - t) + b * t; });
}

/// Piecewise-linear interpolation of matrices on the uniform grid k/(K-1).
inline OperatorPath sampled_path(std::vector<HermitianMatrix> samples) {
  if (samples.size() < 2) throw InputError("sampled path needs at least 2 samples");
  const std::size_t n = samples.front().dim();
  for (const auto& s : samples) require_same_dim(s.dim(), n, "sampled path");
  auto data = std::make_shared<const std::vector<HermitianMatrix>>(std::move(samples));
  const std::size_t k = data->size() - 1;
  OperatorPath p = function_path(n, "sampled", [data, k](double t) {
    const double x = t * static_cast<double>(k);
    const std::size_t i = std::min(static_cast<std::size_t>(x), k - 1);
    const double u = x - static_cast<double>(i);
    if (u == 0.0) return (*data)[i];
    if (u == 1.0) return (*data)[i + 1];
    return (*data)[i] * (1.0 - u) + (*data)[i + 1] * u;
  });
  p.kind = "sampled";
  p.breakpoints.clear();
  for (std::size_t i = 0; i <= k; ++i) p.breakpoints.push_back(static_cast<double>(i) / static_cast<double>(k));
  p.breakpoints.back() = 1.0;
  return p;
}

/// f * g: f on [0, 1/2], g on [1/2, 1]. Requires ||f(1) - g(0)|| <= 1e-10.
inline OperatorPath path_concat(const OperatorPath& f, const OperatorPath& g) {
  require_same_dim(f.dim, g.dim, "path_concat");
  const double mismatch = op_norm(f(1.0) - g(0.0));
  if (mismatch > 1e-10) {
    std::ostringstream os;
    os << "cannot concatenate: ||f(1) - g(0)|| = " << mismatch;
    throw InputError(os.str());
  }
  OperatorPath h = function_path(f.dim, f.name + "*" + g.name, [f, g](double t) {
    return t <= 0.5 ? f(std::min(1.0, 2.0 * t)) : g(std::max(0.0, 2.0 * t - 1.0));
  });
  std::vector<double> b;
  for (double x : f.breakpoints) b.push_back(0.5 * x);
  for (double x : g.breakpoints) b.push_back(0.5 + 0.5 * x);
  h.breakpoints = detail::merge_breakpoints(std::move(b));
  if (f.kind == "sampled" && g.kind == "sampled") h.kind = "sampled";
  return h;
}

inline OperatorPath path_reverse(const OperatorPath& f) {
  OperatorPath h = function_path(f.dim, "reverse(" + f.name + ")", [f](double t) { return f(1.0 - t); });
  std::vector<double> b;
  for (double x : f.breakpoints) b.push_back(1.0 - x);
  h.breakpoints = detail::merge_breakpoints(std::move(b));
  h.kind = f.kind;
  return h;
}

/// t -> c f(t).
inline OperatorPath path_scaled(const OperatorPath& f, double c) {
  OperatorPath h = f;
  h.name = "scaled(" + f.name + ")";
  h.eval = [f, c](double t) { return f(t) * c; };
  return h;
}

/// t -> U f(t) U*.
inline OperatorPath path_conjugated(const OperatorPath& f, const ComplexMatrix& u) {
  OperatorPath h = f;
  h.name = "conjugated(" + f.name + ")";
  h.eval = [f, u](double t) { return f(t).conjugated_by(u); };
  return h;
}

/// Random smooth path f(t) = (1-t) A + t B + sum_k sin(k pi t) H_k / k with
/// |spec(A)|, |spec(B)| >= gap, so the endpoints are invertible.
inline OperatorPath trig_random_path(Rng& rng, std::size_t dim, int degree, double gap,
                                     std::optional<HermitianMatrix> start = std::nullopt) {
  const HermitianMatrix a = start ? *start : random_with_spectrum(rng, random_gapped_spectrum(rng, dim, gap, 2.0));
  const HermitianMatrix b = random_with_spectrum(rng, random_gapped_spectrum(rng, dim, gap, 2.0));
  std::vector<HermitianMatrix> h;
  for (int k = 1; k <= degree; ++k) h.push_back(random_hermitian(rng, dim, 1.5 / k));
  return function_path(dim, "trig_random", [a, b, h](double t) {
    HermitianMatrix m = a * (1.0 - t) + b * t;
    for (std::size_t k = 0; k < h.size(); ++k) m += h[k] * std::sin(static_cast<double>(k + 1) * M_PI * t);
    return m;
  });
}

struct SfOptions {
  int max_depth = 24;
  double endpoint_tol = 1e-8;  // endpoints need min |spec| above this
  double margin_tol = 1e-10;   // certified Weyl margins must exceed this
  int samples = 512;           // crossing oracle grid size
};

struct SfSegment {
  double t_lo = 0.0;
  double t_hi = 0.0;
  double eps = 0.0;
  int rank_right = 0;
  int rank_left = 0;
  double weyl_margin = 0.0;
  std::optional<int> pair_index;      // sf_pairsum only
  std::optional<double> projection_jump;  // sf_pairsum only
};

struct SfCertificate {
  std::string method;
  int total = 0;
  std::vector<SfSegment> segments;
  double eps_cap = 0.0;
  SfOptions options;

  int segment_sum() const {
    int s = 0;
    for (const auto& g : segments) s += g.rank_right - g.rank_left;
    return s;
  }
};

namespace detail {

struct Sample {
  HermitianMatrix m;
  EigenDecomposition e;
};

class SpectrumCache {
 public:
  explicit SpectrumCache(const OperatorPath& p) : path_(p) {}
  const Sample& at(double t) {
    auto it = cache_.find(t);
    if (it == cache_.end()) {
      HermitianMatrix m = path_(t);
      EigenDecomposition e = eigh(m);
      it = cache_.emplace(t, Sample{std::move(m), std::move(e)}).first;
    }
    return it->second;
  }

 private:
  const OperatorPath& path_;
  std::map<double, Sample> cache_;
};

inline double distance_to_pm(const EigenDecomposition& e, double eps) {
  double d = std::numeric_limits<double>::infinity();
  for (double v : e.values) d = std::min({d, std::abs(v - eps), std::abs(v + eps)});
  return d;
}

inline int count_window(const EigenDecomposition& e, double eps) {
  return static_cast<int>(std::count_if(e.values.begin(), e.values.end(), [eps](double v) { return v >= 0.0 && v < eps; }));
}

inline int count_nonnegative(const EigenDecomposition& e) {
  return static_cast<int>(std::count_if(e.values.begin(), e.values.end(), [](double v) { return v >= 0.0; }));
}

inline Projection positive_projection(const EigenDecomposition& e, double above) {
  std::vector<bool> sel(e.dim());
  for (std::size_t k = 0; k < e.dim(); ++k) sel[k] = e.values[k] >= above;
  return Projection::from_eigenvectors(e, sel);
}

inline Projection strict_projection(const EigenDecomposition& e, double above) {
  std::vector<bool> sel(e.dim());
  for (std::size_t k = 0; k < e.dim(); ++k) sel[k] = e.values[k] > above;
  return Projection::from_eigenvectors(e, sel);
}

/// Smallest distance of the endpoint spectra to 0; throws if not invertible.
inline double endpoint_gap(SpectrumCache& cache, const SfOptions& opts) {
  double gap = std::numeric_limits<double>::infinity();
  for (double t : {0.0, 1.0}) {
    const double m = cache.at(t).e.min_abs();
    if (!(m > opts.endpoint_tol)) {
      std::ostringstream os;
      os << "path endpoint f(" << t << ") is not invertible: min |spec| = " << m << " <= " << opts.endpoint_tol;
      throw EndpointError(os.str(), t, m);
    }
    gap = std::min(gap, m);
  }
  return gap;
}

/// Weyl margin of eps on [a, b] with samples a, mid, b: each sample's
/// distance from +-eps minus the norm step to each neighbouring sample.
inline double weyl_margin(const EigenDecomposition& ea, const EigenDecomposition& em, const EigenDecomposition& eb,
                          double s1, double s2, double eps) {
  return std::min({distance_to_pm(ea, eps) - s1, distance_to_pm(em, eps) - std::max(s1, s2),
                   distance_to_pm(eb, eps) - s2});
}

using SegmentCheck = std::function<bool(double a, double m, double b, double eps, SfSegment& seg)>;

/// Recursive bisection. On each segment eps is the midpoint of the widest gap
/// of {0} u {|lambda|} u {cap} below cap whose Weyl margin is positive; other
/// gaps are tried in decreasing width before the segment is bisected.
class Subdivider {
 public:
  Subdivider(const OperatorPath& p, const SfOptions& o, SegmentCheck extra)
      : path_(p), opts_(o), cache_(p), extra_(std::move(extra)) {}

  SfCertificate run(const std::string& method) {
    SfCertificate cert;
    cert.method = method;
    cert.options = opts_;
    cap_ = 0.5 * endpoint_gap(cache_, opts_);
    cert.eps_cap = cap_;
    const auto bp = merge_breakpoints(path_.breakpoints);
    for (std::size_t i = 0; i + 1 < bp.size(); ++i) segment(bp[i], bp[i + 1], 0, cert.segments);
    cert.total = cert.segment_sum();
    return cert;
  }

  SpectrumCache& cache() { return cache_; }

 private:
  void segment(double a, double b, int depth, std::vector<SfSegment>& out) {
    const double m = 0.5 * (a + b);
    const Sample& sa = cache_.at(a);
    const Sample& sm = cache_.at(m);
    const Sample& sb = cache_.at(b);
    const double s1 = op_norm(sm.m - sa.m);
    const double s2 = op_norm(sb.m - sm.m);

    std::vector<double> levels{0.0, cap_};
    for (const auto* e : {&sa.e, &sm.e, &sb.e})
      for (double v : e->values)
        if (std::abs(v) < cap_) levels.push_back(std::abs(v));
    std::sort(levels.begin(), levels.end());
    std::vector<std::pair<double, double>> gaps;  // (width, midpoint)
    for (std::size_t i = 0; i + 1 < levels.size(); ++i) {
      const double w = levels[i + 1] - levels[i];
      if (w > 2.0 * opts_.margin_tol) gaps.emplace_back(w, 0.5 * (levels[i] + levels[i + 1]));
    }
    std::stable_sort(gaps.begin(), gaps.end(), [](const auto& x, const auto& y) { return x.first > y.first; });

    for (const auto& [w, eps] : gaps) {
      const double margin = weyl_margin(sa.e, sm.e, sb.e, s1, s2, eps);
      if (!(margin > opts_.margin_tol)) continue;
      SfSegment seg;
      seg.t_lo = a;
      seg.t_hi = b;
      seg.eps = eps;
      seg.weyl_margin = margin;
      seg.rank_left = count_window(sa.e, eps);
      seg.rank_right = count_window(sb.e, eps);
      if (extra_ && !extra_(a, m, b, eps, seg)) continue;
      out.push_back(seg);
      return;
    }
    if (depth >= opts_.max_depth) {
      std::ostringstream os;
      os << "spectral flow not certified on [" << a << ", " << b << "] after " << depth
         << " bisections (eigenvalue hugging 0?)";
      throw CertificationFailure(os.str(), a, b);
    }
    segment(a, m, depth + 1, out);
    segment(m, b, depth + 1, out);
  }

  const OperatorPath& path_;
  SfOptions opts_;
  SpectrumCache cache_;
  SegmentCheck extra_;
  double cap_ = 0.0;
};

}  // namespace detail

/// Spectral flow as sum_j rank 1_[0,eps_j)(f(t_j)) - rank 1_[0,eps_j)(f(t_{j-1})).
inline SfCertificate sf_phillips(const OperatorPath& path, const SfOptions& opts = {}) {
  detail::Subdivider sub(path, opts, nullptr);
  return sub.run("phillips");
}

/// Spectral flow as sum_j ind(1_[0,inf)(f(t_j)), 1_[0,inf)(f(t_{j-1}))) over a
/// subdivision fine enough that 1_(eps_j,inf)(f) moves by less than 1 in norm
/// between consecutive samples.
inline SfCertificate sf_pairsum(const OperatorPath& path, const SfOptions& opts = {}) {
  detail::SpectrumCache* cache = nullptr;
  auto check = [&cache](double a, double m, double b, double eps, SfSegment& seg) {
    const auto& ea = cache->at(a).e;
    const auto& em = cache->at(m).e;
    const auto& eb = cache->at(b).e;
    const Projection pa = detail::strict_projection(ea, eps);
    const Projection pm = detail::strict_projection(em, eps);
    const Projection pb = detail::strict_projection(eb, eps);
    const double jump = std::max(op_norm(pm.hermitian() - pa.hermitian()), op_norm(pb.hermitian() - pm.hermitian()));
    if (!(jump < 1.0)) return false;
    const Projection qa = detail::positive_projection(ea, 0.0);
    const Projection qb = detail::positive_projection(eb, 0.0);
    seg.projection_jump = jump;
    seg.rank_left = detail::count_nonnegative(ea);
    seg.rank_right = detail::count_nonnegative(eb);
    seg.pair_index = pair_index(qb, qa).value;
    return true;
  };
  detail::Subdivider sub(path, opts, check);
  cache = &sub.cache();
  SfCertificate cert = sub.run("pairsum");
  int sum = 0;
  for (const auto& s : cert.segments) sum += *s.pair_index;
  if (sum != cert.total) throw ConsistencyFault("pair-index sum differs from rank bookkeeping");
  cert.total = sum;
  return cert;
}

/// rank 1_[0,inf)(f(1)) - rank 1_[0,inf)(f(0)).
inline int sf_endpoints(const OperatorPath& path, const SfOptions& opts = {}) {
  detail::SpectrumCache cache(path);
  detail::endpoint_gap(cache, opts);
  const auto r1 = spectral_projection(cache.at(1.0).e, Interval::nonnegative()).rank();
  const auto r0 = spectral_projection(cache.at(0.0).e, Interval::nonnegative()).rank();
  return static_cast<int>(r1) - static_cast<int>(r0);
}

struct Crossing {
  double t_lo = 0.0;
  double t_hi = 0.0;
  std::size_t branch = 0;  // index in the sorted spectrum
  int direction = 0;       // +1 up through 0, -1 down
};

struct CrossingTally {
  int net = 0;
  int up = 0;
  int down = 0;
  int samples = 0;
  double max_step = 0.0;
  std::vector<Crossing> crossings;
};

/// Dense-grid brute force: sorted eigenvalue branches at t_k = k/(samples-1),
/// sign changes counted per branch.
inline CrossingTally sf_crossing_tally(const OperatorPath& path, int samples, const SfOptions& opts = {}) {
  if (samples < 2) throw InputError("crossing oracle needs at least 2 samples");
  detail::SpectrumCache ends(path);
  const double g0 = ends.at(0.0).e.min_abs();
  const double g1 = ends.at(1.0).e.min_abs();
  detail::endpoint_gap(ends, opts);

  CrossingTally tally;
  tally.samples = samples;
  auto t_of = [samples](int k) { return k == samples - 1 ? 1.0 : static_cast<double>(k) / (samples - 1); };
  HermitianMatrix prev_m = path(0.0);
  EigenDecomposition prev_e = eigh(prev_m);
  for (int k = 1; k < samples; ++k) {
    const double t0 = t_of(k - 1), t1 = t_of(k);
    HermitianMatrix m = path(t1);
    EigenDecomposition e = eigh(m);
    const double step = op_norm(m - prev_m);
    tally.max_step = std::max(tally.max_step, step);
    const double slack = 1e-9 * (1.0 + std::max(e.max_abs(), prev_e.max_abs()));
    if ((k == 1 && !(step < 0.5 * g0)) || (k == samples - 1 && !(step < 0.5 * g1))) {
      std::ostringstream os;
      os << "crossing oracle resolution too low: endpoint step " << step << " not below half the endpoint gap "
         << (k == 1 ? g0 : g1) << "; increase samples beyond " << samples;
      throw ResolutionError(os.str(), t0, t1);
    }
    for (std::size_t i = 0; i < e.dim(); ++i) {
      if (std::abs(e.values[i] - prev_e.values[i]) > step + slack) {
        std::ostringstream os;
        os << "eigenvalue branch " << i << " moved " << std::abs(e.values[i] - prev_e.values[i])
           << " but the step norm is " << step << " on [" << t0 << ", " << t1 << "]";
        throw ResolutionError(os.str(), t0, t1);
      }
      const bool was = prev_e.values[i] >= 0.0, is = e.values[i] >= 0.0;
      if (was != is) tally.crossings.push_back({t0, t1, i, is ? 1 : -1});
      if (!was && is) ++tally.up;
      if (was && !is) ++tally.down;
    }
    prev_m = std::move(m);
    prev_e = std::move(e);
  }
  tally.net = tally.up - tally.down;
  const int ends_diff = detail::count_nonnegative(prev_e) - detail::count_nonnegative(ends.at(0.0).e);
  if (ends_diff != tally.net) throw ConsistencyFault("crossing tally does not match endpoint counts");
  return tally;
}

inline int sf_crossing_oracle(const OperatorPath& path, int samples, const SfOptions& opts = {}) {
  return sf_crossing_tally(path, samples, opts).net;
}

struct RecheckResult {
  bool valid = true;
  std::string message;
};

/// Re-derives a phillips or pairsum certificate from the path alone: coverage
/// of [0,1], the Weyl margin of every eps_j, the window ranks and the total.
inline RecheckResult recheck_certificate(const OperatorPath& path, const SfCertificate& cert) {
  RecheckResult r;
  auto fail = [&r](const std::string& m) {
    r.valid = false;
    r.message = m;
    return r;
  };
  if (cert.segments.empty()) return fail("no segments");
  if (cert.segments.front().t_lo != 0.0 || cert.segments.back().t_hi != 1.0) return fail("segments do not cover [0,1]");
  detail::SpectrumCache cache(path);
  int total = 0;
  for (std::size_t j = 0; j < cert.segments.size(); ++j) {
    const auto& s = cert.segments[j];
    if (j > 0 && s.t_lo != cert.segments[j - 1].t_hi) return fail("gap between segments");
    if (!(s.eps > 0.0)) return fail("window eps must be positive");
    const double m = 0.5 * (s.t_lo + s.t_hi);
    const auto& sa = cache.at(s.t_lo);
    const auto& sm = cache.at(m);
    const auto& sb = cache.at(s.t_hi);
    const double margin = detail::weyl_margin(sa.e, sm.e, sb.e, op_norm(sm.m - sa.m), op_norm(sb.m - sm.m), s.eps);
    if (!(margin > 0.0)) return fail("eps not certified on a segment");
    int left, right;
    if (cert.method == "pairsum") {
      left = detail::count_nonnegative(sa.e);
      right = detail::count_nonnegative(sb.e);
      if (!s.pair_index || *s.pair_index != right - left) return fail("pair index mismatch");
    } else {
      left = detail::count_window(sa.e, s.eps);
      right = detail::count_window(sb.e, s.eps);
    }
    if (left != s.rank_left || right != s.rank_right) return fail("window rank mismatch");
    total += right - left;
  }
  if (total != cert.total) return fail("total differs from the segment sum");
  r.message = "ok";
  return r;
}

/// All four methods on one path.
struct SfComparison {
  SfCertificate phillips;
  SfCertificate pairsum;
  int endpoints = 0;
  CrossingTally oracle;
  bool agree() const {
    return phillips.total == pairsum.total && pairsum.total == endpoints && endpoints == oracle.net;
  }
};

inline SfComparison sf_compare(const OperatorPath& path, const SfOptions& opts = {}) {
  SfComparison c;
  c.phillips = sf_phillips(path, opts);
  c.pairsum = sf_pairsum(path, opts);
  c.endpoints = sf_endpoints(path, opts);
  c.oracle = sf_crossing_tally(path, opts.samples, opts);
  return c;
}

}  // namespace specflow
