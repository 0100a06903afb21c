#pragma once

// The four distances on self-adjoint operators:
//   d_N  norm distance             ||T1 - T2||
//   d_W  domain (graph-norm) dist.  ||(T1 - T2)(I + D^2)^{-1/2}||  for a base D
//   d_R  Riesz distance            ||F(T1) - F(T2)||
//   d_G  graph (gap) distance      ||(T1 + i)^{-1} - (T2 + i)^{-1}|| = 1/2 ||kappa(T1) - kappa(T2)||

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "specflow/matcore.hpp"
#include "specflow/opmodel.hpp"
#include "specflow/transforms.hpp"

namespace specflow {

inline double norm_distance(const HermitianMatrix& t1, const HermitianMatrix& t2) {
  require_same_dim(t1.dim(), t2.dim(), "d_N");
  return op_norm(t1 - t2);
}

inline double domain_distance(const HermitianMatrix& t1, const HermitianMatrix& t2, const HermitianMatrix& d) {
  require_same_dim(t1.dim(), t2.dim(), "d_W");
  require_same_dim(t1.dim(), d.dim(), "d_W base");
  const HermitianMatrix weight = apply_function(d, [](double x) { return 1.0 / std::sqrt(1.0 + x * x); });
  return op_norm((t1 - t2).matrix() * weight.matrix());
}

inline double riesz_distance(const HermitianMatrix& t1, const HermitianMatrix& t2) {
  require_same_dim(t1.dim(), t2.dim(), "d_R");
  return op_norm(riesz(t1) - riesz(t2));
}

/// Both graph-distance formulas. The resolvents are formed by LU solves, the
/// Cayley transforms through the eigenbasis, so the two values come from
/// independent computations.
struct GraphDistance {
  double resolvent = 0.0;  // ||(T1+i)^{-1} - (T2+i)^{-1}||
  double cayley = 0.0;     // 1/2 ||kappa(T1) - kappa(T2)||
  double discrepancy() const { return std::abs(resolvent - cayley); }
};

inline GraphDistance graph_distance_detailed(const HermitianMatrix& t1, const HermitianMatrix& t2) {
  require_same_dim(t1.dim(), t2.dim(), "d_G");
  GraphDistance g;
  const ComplexMatrix r1 = inverse(shifted(t1.matrix(), kI));
  const ComplexMatrix r2 = inverse(shifted(t2.matrix(), kI));
  g.resolvent = op_norm(r1 - r2);
  g.cayley = 0.5 * op_norm(cayley(t1).matrix() - cayley(t2).matrix());
  if (g.discrepancy() > 1e-9) {
    std::ostringstream os;
    os << "graph distance formulas disagree: resolvent " << g.resolvent << " vs Cayley " << g.cayley;
    throw ConsistencyFault(os.str());
  }
  return g;
}

inline double graph_distance(const HermitianMatrix& t1, const HermitianMatrix& t2) {
  return graph_distance_detailed(t1, t2).resolvent;
}

/// Quantitative comparison of d_G and the operator norm on a norm ball of radius R:
///   d_G(T, T~) < 1/(2(1+R))  =>  ||T - T~|| <= 2(1+R)^2 d_G(T, T~)
///   ||T - T~|| < 1/2         =>  d_G(T, T~) <= 2 ||T - T~||
struct NormGraphReport {
  double d_norm = 0.0;
  double d_graph = 0.0;
  double graph_formula_gap = 0.0;
  bool graph_hypothesis_active = false;
  bool graph_to_norm_holds = true;
  bool norm_hypothesis_active = false;
  bool norm_to_graph_holds = true;
  bool holds() const { return graph_to_norm_holds && norm_to_graph_holds; }
};

inline NormGraphReport norm_graph_equivalence_check(const HermitianMatrix& t, const HermitianMatrix& t2, double radius) {
  require_same_dim(t.dim(), t2.dim(), "norm_graph_equivalence_check");
  const double tn = op_norm(t);
  if (tn > radius) {
    std::ostringstream os;
    os << "||T|| = " << tn << " exceeds R = " << radius;
    throw PreconditionError(os.str());
  }
  NormGraphReport r;
  r.d_norm = norm_distance(t, t2);
  const auto g = graph_distance_detailed(t, t2);
  r.d_graph = g.resolvent;
  r.graph_formula_gap = g.discrepancy();
  r.graph_hypothesis_active = r.d_graph < 0.5 / (1.0 + radius);
  if (r.graph_hypothesis_active) {
    r.graph_to_norm_holds = r.d_norm <= 2.0 * (1.0 + radius) * (1.0 + radius) * r.d_graph + 1e-10;
  }
  r.norm_hypothesis_active = r.d_norm < 0.5;
  if (r.norm_hypothesis_active) r.norm_to_graph_holds = r.d_graph <= 2.0 * r.d_norm + 1e-10;
  return r;
}

/// One row of the counterexample table: distances between D + C_n and D,
/// and residuals against the closed forms. For bound-only quantities the
/// residual is the amount by which the bound is violated (0 when it holds);
/// quantities with neither form get NaN.
struct MetricReport {
  std::string family;
  std::size_t n = 0;
  double d_norm = 0.0;
  double d_domain = 0.0;
  double d_riesz = 0.0;
  double d_graph = 0.0;
  double res_norm = 0.0;
  double res_domain = 0.0;
  double res_riesz = 0.0;
  double res_graph = 0.0;
  double graph_formula_gap = 0.0;
  double conjugated_norm = std::numeric_limits<double>::quiet_NaN();

  double max_residual() const {
    double m = 0.0;
    for (double r : {res_norm, res_domain, res_riesz, res_graph})
      if (!std::isnan(r)) m = std::max(m, r);
    return m;
  }
};

inline MetricReport metric_row(const DiagonalModel& model, Family family, std::size_t n) {
  const DiagonalModel base = model.base();
  const HermitianMatrix d = realize(base);
  const HermitianMatrix c = family_perturbation(base, family, n);
  const HermitianMatrix t = realize(base.with(c));
  MetricReport r;
  r.family = to_string(family);
  r.n = n;
  r.d_norm = norm_distance(t, d);
  r.d_domain = domain_distance(t, d, d);
  r.d_riesz = riesz_distance(t, d);
  const auto g = graph_distance_detailed(t, d);
  r.d_graph = g.resolvent;
  r.graph_formula_gap = g.discrepancy();
  const ClosedForm cf = closed_form(base, family, n);
  constexpr double nan = std::numeric_limits<double>::quiet_NaN();
  auto exact = [](const std::optional<double>& ref, double v) { return ref ? std::abs(v - *ref) : nan; };
  r.res_norm = exact(cf.d_norm, r.d_norm);
  r.res_domain = cf.d_domain ? exact(cf.d_domain, r.d_domain)
                             : (cf.domain_lower ? std::max(0.0, *cf.domain_lower - r.d_domain) : nan);
  r.res_riesz = exact(cf.d_riesz, r.d_riesz);
  r.res_graph = cf.d_graph ? exact(cf.d_graph, r.d_graph)
                           : (cf.graph_upper ? std::max(0.0, r.d_graph - *cf.graph_upper) : nan);
  if (family == Family::swap) r.conjugated_norm = conjugated_norm(base, c);
  return r;
}

/// Counterexample table for one family over n in [n_lo, n_hi]. The range is
/// capped at N - 1 so trends stay inside the truncation.
inline std::vector<MetricReport> metric_separation_report(const DiagonalModel& model, Family family,
                                                          std::size_t n_lo, std::size_t n_hi) {
  const std::size_t lo_allowed = family == Family::swap ? 2 : 1;
  if (n_lo < lo_allowed || n_hi < n_lo || n_hi + 1 > model.trunc_dim) {
    std::ostringstream os;
    os << "n range [" << n_lo << ", " << n_hi << "] outside [" << lo_allowed << ", " << model.trunc_dim - 1
       << "] for family " << to_string(family);
    throw RangeError(os.str());
  }
  std::vector<MetricReport> rows;
  rows.reserve(n_hi - n_lo + 1);
  for (std::size_t n = n_lo; n <= n_hi; ++n) rows.push_back(metric_row(model, family, n));
  return rows;
}

inline std::string format_g17(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string metric_csv_header() { return "family,n,d_N,d_W,d_R,d_G,res_N,res_W,res_R,res_G"; }

inline std::string to_csv_row(const MetricReport& r) {
  std::ostringstream os;
  os << r.family << ',' << r.n;
  for (double v : {r.d_norm, r.d_domain, r.d_riesz, r.d_graph, r.res_norm, r.res_domain, r.res_riesz, r.res_graph})
    os << ',' << format_g17(v);
  return os.str();
}

inline std::string to_csv(const std::vector<MetricReport>& rows, bool header = true) {
  std::ostringstream os;
  if (header) os << metric_csv_header() << '\n';
  for (const auto& r : rows) os << to_csv_row(r) << '\n';
  return os.str();
}

}  // namespace specflow
