#pragma once

// Executable uniqueness axioms for a spectral flow functional mu:
// concatenation additivity, homotopy invariance (endpoints moving inside the
// invertibles), normalization mu(t -> tP + (I-P) T0 (I-P)) = 1, and vanishing
// on paths of invertibles. Plus component labels of the invertibles and a
// constructive connector between matrices with equal labels.

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "specflow/matcore.hpp"
#include "specflow/parallel.hpp"
#include "specflow/random.hpp"
#include "specflow/specflow.hpp"
#include "specflow/transforms.hpp"

namespace specflow {

struct SfFunctional {
  std::string name;
  std::function<int(const OperatorPath&)> mu;
  int operator()(const OperatorPath& p) const { return mu(p); }
};

inline std::vector<SfFunctional> standard_functionals(const SfOptions& opts = {}) {
  return {
      {"phillips", [opts](const OperatorPath& p) { return sf_phillips(p, opts).total; }},
      {"pairsum", [opts](const OperatorPath& p) { return sf_pairsum(p, opts).total; }},
      {"endpoints", [opts](const OperatorPath& p) { return sf_endpoints(p, opts); }},
      {"crossing_oracle", [opts](const OperatorPath& p) { return sf_crossing_oracle(p, opts.samples, opts); }},
  };
}

inline SfFunctional functional_by_name(const std::string& name, const SfOptions& opts = {}) {
  for (auto& f : standard_functionals(opts))
    if (f.name == name) return f;
  throw InputError("unknown spectral flow method '" + name + "'");
}

struct AxiomReport {
  std::string check;
  std::string method;
  int trials = 0;
  int excluded = 0;     // certification failures, not counted as violations
  int regenerated = 0;  // generated inputs rejected by a precondition
  std::vector<std::string> failures;
  std::uint64_t seed = 0;
  bool passed() const { return failures.empty(); }
};

namespace detail {

struct TrialOutcome {
  bool excluded = false;
  int regenerated = 0;
  std::string failure;  // empty when the trial passed
};

inline AxiomReport collect(std::string check, const SfFunctional& mu, std::uint64_t seed, int trials,
                           const std::function<TrialOutcome(std::size_t)>& run) {
  AxiomReport rep;
  rep.check = std::move(check);
  rep.method = mu.name;
  rep.seed = seed;
  const auto out = parallel_map<TrialOutcome>(static_cast<std::size_t>(trials), [&](std::size_t i) {
    try {
      return run(i);
    } catch (const CertificationFailure&) {
      TrialOutcome o;
      o.excluded = true;
      return o;
    }
  });
  for (const auto& o : out) {
    ++rep.trials;
    rep.regenerated += o.regenerated;
    if (o.excluded) ++rep.excluded;
    else if (!o.failure.empty()) rep.failures.push_back(o.failure);
  }
  return rep;
}

inline std::size_t random_dim(Rng& rng, std::size_t lo, std::size_t hi) {
  return static_cast<std::size_t>(rng.integer(static_cast<int>(lo), static_cast<int>(hi)));
}

}  // namespace detail

/// mu(f * g) = mu(f) + mu(g) on random compatible pairs (dims 2..max_dim).
/// Every tenth pair is (f, reverse f), and the next one is (f, constant f(1)).
inline AxiomReport check_concatenation(const SfFunctional& mu, int trials, std::uint64_t seed, std::size_t max_dim = 10) {
  return detail::collect("concatenation", mu, seed, trials, [&](std::size_t i) {
    Rng rng = Rng::stream(seed, i);
    const std::size_t n = detail::random_dim(rng, 2, max_dim);
    const OperatorPath f = trig_random_path(rng, n, 2, 0.2);
    OperatorPath g = i % 10 == 0   ? path_reverse(f)
                     : i % 10 == 1 ? constant_path(f(1.0))
                                   : trig_random_path(rng, n, 2, 0.2, f(1.0));
    const int a = mu(f), b = mu(g), ab = mu(path_concat(f, g));
    detail::TrialOutcome o;
    if (ab != a + b) {
      std::ostringstream os;
      os << "trial " << i << " (dim " << n << "): mu(f*g) = " << ab << " but mu(f) + mu(g) = " << a << " + " << b;
      o.failure = os.str();
    }
    return o;
  });
}

/// Two-parameter family H(s, t); H(s, .) is a path for each s.
struct Homotopy {
  std::size_t dim = 0;
  std::string name;
  std::function<HermitianMatrix(double, double)> h;

  OperatorPath at(double s) const {
    auto hh = h;
    return function_path(dim, name, [hh, s](double t) { return hh(s, t); });
  }
};

struct HomotopyReport {
  std::vector<int> values;  // mu(H(s_i, .)) on the s grid
  bool constant = true;
  double min_endpoint_margin = 0.0;
};

/// Endpoints H(s_i, 0), H(s_i, 1) stay invertible between grid values of s:
/// min |spec| at each grid point exceeds the norm step to its neighbours.
/// A failed margin is a request for a finer s grid, not a violation.
inline HomotopyReport check_homotopy(const SfFunctional& mu, const Homotopy& family, int s_samples) {
  if (s_samples < 2) throw InputError("homotopy grid needs at least 2 values of s");
  HomotopyReport rep;
  rep.min_endpoint_margin = std::numeric_limits<double>::infinity();
  auto s_of = [s_samples](int i) { return i == s_samples - 1 ? 1.0 : static_cast<double>(i) / (s_samples - 1); };
  for (double t : {0.0, 1.0}) {
    std::function<void(double, double, double, double, int)> certify = [&](double sa, double sb, double ma, double mb,
                                                                          int depth) {
      const double step = op_norm(family.h(sa, t) - family.h(sb, t));
      const double margin = std::min(ma, mb) - step;
      if (margin > 0.0) {
        rep.min_endpoint_margin = std::min(rep.min_endpoint_margin, margin);
        return;
      }
      if (depth >= 20) {
        std::ostringstream os;
        os << "homotopy endpoint t = " << t << " not certified invertible on s in [" << sa << ", " << sb << "]";
        throw CertificationFailure(os.str(), sa, sb);
      }
      const double sm = 0.5 * (sa + sb);
      const double mm = eigh(family.h(sm, t)).min_abs();
      certify(sa, sm, ma, mm, depth + 1);
      certify(sm, sb, mm, mb, depth + 1);
    };
    for (int i = 0; i + 1 < s_samples; ++i)
      certify(s_of(i), s_of(i + 1), eigh(family.h(s_of(i), t)).min_abs(), eigh(family.h(s_of(i + 1), t)).min_abs(), 0);
  }
  for (int i = 0; i < s_samples; ++i) rep.values.push_back(mu(family.at(s_of(i))));
  rep.constant = std::all_of(rep.values.begin(), rep.values.end(), [&](int v) { return v == rep.values.front(); });
  return rep;
}

/// Seeded homotopies of three kinds, cycling with i:
///   0: U(s) f(t) U(s)*, U(s) = exp(i s K)
///   1: f(t) + s eps I, eps half the smaller endpoint gap
///   2: (1 - s) f + s g, g = f + sin(pi t) E sharing both endpoints
inline Homotopy random_homotopy(Rng& rng, int kind, std::size_t dim) {
  const OperatorPath f = trig_random_path(rng, dim, 2, 0.3);
  Homotopy h;
  h.dim = dim;
  switch (kind % 3) {
    case 0: {
      const auto k = eigh(random_hermitian(rng, dim, 2.0));
      h.name = "conjugation";
      h.h = [f, k](double s, double t) { return f(t).conjugated_by(unitary_exp(k, s).matrix()); };
      break;
    }
    case 1: {
      const double eps = 0.5 * std::min(eigh(f(0.0)).min_abs(), eigh(f(1.0)).min_abs());
      h.name = "shift";
      h.h = [f, eps](double s, double t) { return f(t) + HermitianMatrix::identity(f.dim) * (s * eps); };
      break;
    }
    default: {
      const HermitianMatrix e = random_hermitian(rng, dim, 2.0);
      h.name = "straight_line";
      h.h = [f, e](double s, double t) { return f(t) + e * (s * std::sin(M_PI * t)); };
      break;
    }
  }
  return h;
}

inline AxiomReport check_homotopy_sweep(const SfFunctional& mu, int families, std::uint64_t seed, int s_samples = 9,
                                        std::size_t max_dim = 8) {
  return detail::collect("homotopy", mu, seed, families, [&](std::size_t i) {
    Rng rng = Rng::stream(seed, i);
    const std::size_t n = detail::random_dim(rng, 2, max_dim);
    const Homotopy h = random_homotopy(rng, static_cast<int>(i), n);
    const auto rep = check_homotopy(mu, h, s_samples);
    detail::TrialOutcome o;
    if (!rep.constant) {
      std::ostringstream os;
      os << "family " << i << " (" << h.name << ", dim " << n << "): mu varies over s:";
      for (int v : rep.values) os << ' ' << v;
      o.failure = os.str();
    }
    return o;
  });
}

/// u -> (u - 1/2) P + (I - P) T0 (I - P) with P a random rank-one
/// projection and T0 invertible on ker P (|spec| in [0.3, 2]).
inline OperatorPath normalization_path(Rng& rng, std::size_t dim) {
  if (dim == 0) throw InputError("normalization needs dim >= 1");
  const ComplexMatrix v = random_unitary(rng, dim);
  std::vector<double> lam = random_gapped_spectrum(rng, dim, 0.3, 2.0);
  lam[0] = 0.0;
  const HermitianMatrix t0 = HermitianMatrix::diagonal(lam).conjugated_by(v);
  const Projection p = Projection::onto(v.column(0));
  const HermitianMatrix comp = p.complement().hermitian();
  const HermitianMatrix rest = HermitianMatrix::hermitian_part(comp.matrix() * t0.matrix() * comp.matrix());
  const HermitianMatrix ph = p.hermitian();
  return function_path(dim, "normalization", [ph, rest](double u) { return ph * (u - 0.5) + rest; });
}

inline AxiomReport check_normalization(const SfFunctional& mu, int trials, std::uint64_t seed, std::size_t max_dim = 10) {
  return detail::collect("normalization", mu, seed, trials, [&](std::size_t i) {
    Rng rng = Rng::stream(seed, i);
    const std::size_t n = i == 0 ? 1 : detail::random_dim(rng, 1, max_dim);
    const int v = mu(normalization_path(rng, n));
    detail::TrialOutcome o;
    if (v != 1) {
      std::ostringstream os;
      os << "trial " << i << " (dim " << n << "): mu = " << v << ", expected 1";
      o.failure = os.str();
    }
    return o;
  });
}

/// t -> U(t) Lambda(t) U(t)* with U(t) = exp(i t K) and diagonal entries
/// sigma_k (g + a_k (1 + sin(w_k t + phi_k))), so |spec| >= g throughout.
/// Odd trials use sigma_k = +1 (positive definite paths).
inline OperatorPath invertible_path(Rng& rng, std::size_t dim, double g, bool positive) {
  const auto k = eigh(random_hermitian(rng, dim, 2.0));
  std::vector<double> sigma(dim), amp(dim), w(dim), phi(dim);
  for (std::size_t j = 0; j < dim; ++j) {
    sigma[j] = positive || rng.coin() ? 1.0 : -1.0;
    amp[j] = rng.uniform(0.0, 1.0);
    w[j] = rng.uniform(0.0, 8.0);
    phi[j] = rng.uniform(0.0, 2.0 * M_PI);
  }
  return function_path(dim, positive ? "positive_definite" : "invertible", [=](double t) {
    std::vector<double> d(dim);
    for (std::size_t j = 0; j < dim; ++j) d[j] = sigma[j] * (g + amp[j] * (1.0 + std::sin(w[j] * t + phi[j])));
    return HermitianMatrix::diagonal(d).conjugated_by(unitary_exp(k, t).matrix());
  });
}

inline double sampled_min_abs(const OperatorPath& p, int samples) {
  double m = std::numeric_limits<double>::infinity();
  for (int k = 0; k < samples; ++k) m = std::min(m, eigh(p(static_cast<double>(k) / (samples - 1))).min_abs());
  return m;
}

inline AxiomReport check_invertible_vanishing(const SfFunctional& mu, int trials, std::uint64_t seed,
                                              std::size_t max_dim = 10) {
  constexpr double kGap = 0.2;
  return detail::collect("invertible_vanishing", mu, seed, trials, [&](std::size_t i) {
    Rng rng = Rng::stream(seed, i);
    detail::TrialOutcome o;
    const std::size_t n = detail::random_dim(rng, 1, max_dim);
    OperatorPath p = invertible_path(rng, n, kGap, i % 2 == 1);
    while (!(sampled_min_abs(p, 65) > 0.5 * kGap)) {
      ++o.regenerated;
      p = invertible_path(rng, n, kGap, i % 2 == 1);
    }
    const int v = mu(p);
    if (v != 0) {
      std::ostringstream os;
      os << "trial " << i << " (dim " << n << ", " << p.name << "): mu = " << v << " on an invertible path";
      o.failure = os.str();
    }
    return o;
  });
}

/// All four checks with the given sizes.
struct AxiomSuiteConfig {
  int concatenation = 200;
  int homotopy = 50;
  int normalization = 50;
  int vanishing = 200;
  std::size_t max_dim = 10;
};

inline std::vector<AxiomReport> run_axiom_suite(const SfFunctional& mu, std::uint64_t seed, const AxiomSuiteConfig& c = {}) {
  return {
      check_concatenation(mu, c.concatenation, seed, c.max_dim),
      check_homotopy_sweep(mu, c.homotopy, seed + 1, 9, std::min<std::size_t>(c.max_dim, 8)),
      check_normalization(mu, c.normalization, seed + 2, c.max_dim),
      check_invertible_vanishing(mu, c.vanishing, seed + 3, c.max_dim),
  };
}

/// rank 1_[0,inf)(T) for invertible T.
inline int component_label(const HermitianMatrix& t, double tol = 1e-8) {
  const auto e = eigh(t);
  if (!(e.min_abs() > tol)) {
    std::ostringstream os;
    os << "matrix is not invertible: min |spec| = " << e.min_abs();
    throw InvertibilityError(os.str());
  }
  return static_cast<int>(spectral_projection(e, Interval::nonnegative()).rank());
}

/// Path of invertibles from T1 to T2 (equal labels): T1 -> 2P1 - I along
/// the straight line, then U(t) (2P1 - I) U(t)* with U(1) = V2 V1*, then
/// 2P2 - I -> T2.
inline OperatorPath connect_invertibles(const HermitianMatrix& t1, const HermitianMatrix& t2) {
  require_same_dim(t1.dim(), t2.dim(), "connect_invertibles");
  const int l1 = component_label(t1), l2 = component_label(t2);
  if (l1 != l2) {
    std::ostringstream os;
    os << "labels differ (" << l1 << " vs " << l2 << "): no path through invertibles";
    throw PreconditionError(os.str());
  }
  const auto e1 = eigh(t1), e2 = eigh(t2);
  std::vector<double> sign(t1.dim());
  for (std::size_t k = 0; k < sign.size(); ++k) sign[k] = e1.values[k] >= 0.0 ? 1.0 : -1.0;
  const HermitianMatrix s1 = reassemble(e1, sign);
  const HermitianMatrix s2 = reassemble(e2, sign);
  const UnitaryMatrix v(e2.vectors * e1.vectors.adjoint());
  const auto k = eigh(unitary_log(v));
  const OperatorPath rotate = function_path(t1.dim(), "rotate", [s1, k](double t) {
    return s1.conjugated_by(unitary_exp(k, t).matrix());
  });
  // close the rotation exactly onto s2 so that concatenation matches
  const OperatorPath rot = function_path(t1.dim(), "rotate", [rotate, s2](double t) {
    return t == 1.0 ? s2 : rotate(t);
  });
  const double drift = op_norm(rotate(1.0) - s2);
  if (drift > 1e-8) throw ConsistencyFault("unitary connector misses its target");
  return path_concat(path_concat(linear_path(t1, s1), rot), linear_path(s2, t2));
}

struct InvertibleCertificate {
  int segments = 0;
  double min_margin = std::numeric_limits<double>::infinity();  // min over samples of min|spec| - step
  int label = 0;
  bool label_constant = true;
};

/// Bisection until min |spec| at each sample exceeds the norm steps to its
/// neighbours (Weyl), which certifies the path stays invertible.
inline InvertibleCertificate certify_invertible(const OperatorPath& path, int max_depth = 24) {
  InvertibleCertificate cert;
  detail::SpectrumCache cache(path);
  cert.label = detail::count_nonnegative(cache.at(0.0).e);
  std::function<void(double, double, int)> seg = [&](double a, double b, int depth) {
    const double m = 0.5 * (a + b);
    const auto& sa = cache.at(a);
    const auto& sm = cache.at(m);
    const auto& sb = cache.at(b);
    const double s1 = op_norm(sm.m - sa.m), s2 = op_norm(sb.m - sm.m);
    const double margin = std::min({sa.e.min_abs() - s1, sm.e.min_abs() - std::max(s1, s2), sb.e.min_abs() - s2});
    if (margin > 0.0) {
      ++cert.segments;
      cert.min_margin = std::min(cert.min_margin, margin);
      for (const auto* s : {&sa, &sm, &sb})
        if (detail::count_nonnegative(s->e) != cert.label) cert.label_constant = false;
      return;
    }
    if (depth >= max_depth) {
      std::ostringstream os;
      os << "invertibility not certified on [" << a << ", " << b << "]";
      throw CertificationFailure(os.str(), a, b);
    }
    seg(a, m, depth + 1);
    seg(m, b, depth + 1);
  };
  const auto bp = detail::merge_breakpoints(path.breakpoints);
  for (std::size_t i = 0; i + 1 < bp.size(); ++i) seg(bp[i], bp[i + 1], 0);
  return cert;
}

}  // namespace specflow
