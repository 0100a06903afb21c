#pragma once

// JSON formats: matrix literals, path specs, graded specs, model specs and
// the certificate / report writers.

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "specflow/axioms.hpp"
#include "specflow/graded.hpp"
#include "specflow/matcore.hpp"
#include "specflow/metrics.hpp"
#include "specflow/opmodel.hpp"
#include "specflow/specflow.hpp"
#include "specflow/toeplitz.hpp"
#include "specflow/transforms.hpp"

namespace specflow::io {

using nlohmann::json;

namespace detail {
inline const json& field(const json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) throw InputError(where + ": missing field '" + key + "'");
  return j.at(key);
}

inline double number(const json& j, const std::string& where) {
  if (!j.is_number()) throw InputError(where + ": expected a number");
  return j.get<double>();
}

template <class T>
T integer(const json& j, const std::string& where) {
  if (!j.is_number_integer()) throw InputError(where + ": expected an integer");
  const auto v = j.get<std::int64_t>();
  if constexpr (std::is_unsigned_v<T>) {
    if (v < 0) throw InputError(where + ": expected a non-negative integer");
  }
  return static_cast<T>(v);
}

// NaN and infinities have no JSON literal; they are written as null
inline json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }
}  // namespace detail

// ---- matrices ----

/// {"dim": n, "re": [[...]], "im": [[...]]}; rectangular matrices carry
/// "rows" and "cols" instead of "dim".
inline json matrix_to_json(const ComplexMatrix& m) {
  json j;
  if (m.square()) j["dim"] = m.rows();
  else {
    j["rows"] = m.rows();
    j["cols"] = m.cols();
  }
  json re = json::array(), im = json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    json rr = json::array(), ri = json::array();
    for (std::size_t k = 0; k < m.cols(); ++k) {
      rr.push_back(m(i, k).real());
      ri.push_back(m(i, k).imag());
    }
    re.push_back(std::move(rr));
    im.push_back(std::move(ri));
  }
  j["re"] = std::move(re);
  j["im"] = std::move(im);
  return j;
}

inline ComplexMatrix matrix_from_json(const json& j, const std::string& where = "matrix") {
  std::size_t rows = 0, cols = 0;
  if (j.is_object() && j.contains("dim")) rows = cols = detail::integer<std::size_t>(j.at("dim"), where + ".dim");
  else {
    rows = detail::integer<std::size_t>(detail::field(j, "rows", where), where + ".rows");
    cols = detail::integer<std::size_t>(detail::field(j, "cols", where), where + ".cols");
  }
  const json& re = detail::field(j, "re", where);
  const bool has_im = j.contains("im");
  const json& im = has_im ? j.at("im") : re;
  auto check_rows = [&](const json& a, const char* part) {
    if (!a.is_array() || a.size() != rows) {
      std::ostringstream os;
      os << where << "." << part << ": expected " << rows << " rows";
      throw DimensionMismatch(os.str());
    }
    for (const auto& r : a)
      if (!r.is_array() || r.size() != cols) {
        std::ostringstream os;
        os << where << "." << part << ": expected rows of length " << cols;
        throw DimensionMismatch(os.str());
      }
  };
  check_rows(re, "re");
  if (has_im) check_rows(im, "im");
  ComplexMatrix m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t k = 0; k < cols; ++k) {
      const double a = detail::number(re[i][k], where + ".re");
      const double b = has_im ? detail::number(im[i][k], where + ".im") : 0.0;
      m(i, k) = Complex(a, b);
    }
  return m;
}

inline HermitianMatrix hermitian_from_json(const json& j, const std::string& where = "matrix") {
  ComplexMatrix m = matrix_from_json(j, where);
  if (!m.square()) throw DimensionMismatch(where + ": Hermitian matrix must be square");
  return HermitianMatrix(std::move(m));
}

inline UnitaryMatrix unitary_from_json(const json& j, const std::string& where = "matrix") {
  return UnitaryMatrix(matrix_from_json(j, where));
}

// ---- path specs ----

inline DiagonalModel model_from_json(const json& p, const std::string& where) {
  const std::size_t n = detail::integer<std::size_t>(detail::field(p, "N", where), where + ".N");
  const LambdaLaw law = p.contains("law") ? parse_law(p.at("law").get<std::string>()) : LambdaLaw::linear;
  return DiagonalModel(n, law);
}

/// {"dim", "kind": "sampled"|"family", "samples": [...], "family": {"name", "params", "seed"}}.
inline OperatorPath path_from_json(const json& j) {
  const std::string kind = detail::field(j, "kind", "path spec").get<std::string>();
  std::optional<std::size_t> dim;
  if (j.contains("dim")) dim = detail::integer<std::size_t>(j.at("dim"), "path spec.dim");
  OperatorPath path;
  if (kind == "sampled") {
    const json& s = detail::field(j, "samples", "path spec");
    if (!s.is_array()) throw InputError("path spec.samples: expected an array");
    std::vector<HermitianMatrix> samples;
    for (std::size_t k = 0; k < s.size(); ++k) samples.push_back(hermitian_from_json(s[k], "samples[" + std::to_string(k) + "]"));
    path = sampled_path(std::move(samples));
  } else if (kind == "family") {
    const json& f = detail::field(j, "family", "path spec");
    const std::string name = detail::field(f, "name", "family").get<std::string>();
    const json params = f.contains("params") ? f.at("params") : json::object();
    const std::uint64_t seed = f.contains("seed") ? detail::integer<std::uint64_t>(f.at("seed"), "family.seed") : 0;
    if (name == "linear_interp") {
      path = linear_path(hermitian_from_json(detail::field(params, "from", "params"), "params.from"),
                         hermitian_from_json(detail::field(params, "to", "params"), "params.to"));
    } else if (name == "fuglede_line") {
      // t -> D + t C_n for one of the counterexample perturbations (fuglede by default)
      const DiagonalModel m = model_from_json(params, "params");
      const std::size_t n = detail::integer<std::size_t>(detail::field(params, "n", "params"), "params.n");
      const Family fam = params.contains("family") ? parse_family(params.at("family").get<std::string>()) : Family::fuglede;
      const HermitianMatrix d = realize(m);
      const HermitianMatrix c = family_perturbation(m, fam, n);
      path = function_path(m.trunc_dim, "fuglede_line", [d, c](double t) { return d + c * t; });
    } else if (name == "toeplitz_line") {
      if (params.contains("m")) {
        const auto fam = cyclic_family(detail::integer<int>(params.at("m"), "params.m"));
        path = toeplitz_path(fam.d, fam.w);
      } else {
        path = toeplitz_path(hermitian_from_json(detail::field(params, "D", "params"), "params.D"),
                             unitary_from_json(detail::field(params, "W", "params"), "params.W"));
      }
    } else if (name == "trig_random") {
      if (!dim) throw InputError("trig_random family needs \"dim\"");
      const int degree = params.contains("degree") ? detail::integer<int>(params.at("degree"), "params.degree") : 3;
      const double gap = params.contains("gap") ? detail::number(params.at("gap"), "params.gap") : 0.2;
      if (degree < 0) throw RangeError("trig_random degree must be >= 0");
      if (!(gap > 0.0 && gap < 2.0)) throw RangeError("trig_random gap must lie in (0, 2)");
      Rng rng(seed);
      path = trig_random_path(rng, *dim, degree, gap);
    } else {
      throw InputError("unknown path family '" + name + "' (expected linear_interp|fuglede_line|toeplitz_line|trig_random)");
    }
  } else {
    throw InputError("unknown path kind '" + kind + "' (expected sampled|family)");
  }
  if (dim && *dim != path.dim) {
    std::ostringstream os;
    os << "path spec declares dim " << *dim << " but the path has dim " << path.dim;
    throw DimensionMismatch(os.str());
  }
  return path;
}

/// {"p": int, "q": int, "A": matrix literal}.
inline GradedOperator graded_from_json(const json& j) {
  const std::size_t p = detail::integer<std::size_t>(detail::field(j, "p", "graded spec"), "graded spec.p");
  const std::size_t q = detail::integer<std::size_t>(detail::field(j, "q", "graded spec"), "graded spec.q");
  ComplexMatrix a = j.contains("A") ? matrix_from_json(j.at("A"), "A") : ComplexMatrix(q, p);
  return GradedOperator(p, q, std::move(a));
}

// ---- writers ----

inline json options_to_json(const SfOptions& o) {
  return {{"max_depth", o.max_depth}, {"endpoint_tol", o.endpoint_tol}, {"margin_tol", o.margin_tol}, {"samples", o.samples}};
}

inline json certificate_to_json(const SfCertificate& c) {
  json segs = json::array();
  for (const auto& s : c.segments) {
    json g = {{"t_lo", s.t_lo},         {"t_hi", s.t_hi},           {"eps", s.eps},
              {"rank_right", s.rank_right}, {"rank_left", s.rank_left}, {"weyl_margin", s.weyl_margin}};
    if (s.pair_index) g["pair_index"] = *s.pair_index;
    if (s.projection_jump) g["projection_jump"] = *s.projection_jump;
    segs.push_back(std::move(g));
  }
  return {{"method", c.method}, {"total", c.total}, {"eps_cap", c.eps_cap}, {"options", options_to_json(c.options)},
          {"segments", std::move(segs)}};
}

inline SfCertificate certificate_from_json(const json& j) {
  SfCertificate c;
  c.method = detail::field(j, "method", "certificate").get<std::string>();
  c.total = detail::integer<int>(detail::field(j, "total", "certificate"), "certificate.total");
  c.eps_cap = j.value("eps_cap", 0.0);
  if (j.contains("options")) {
    const json& o = j.at("options");
    c.options.max_depth = o.value("max_depth", c.options.max_depth);
    c.options.endpoint_tol = o.value("endpoint_tol", c.options.endpoint_tol);
    c.options.margin_tol = o.value("margin_tol", c.options.margin_tol);
    c.options.samples = o.value("samples", c.options.samples);
  }
  for (const auto& g : detail::field(j, "segments", "certificate")) {
    SfSegment s;
    s.t_lo = detail::number(detail::field(g, "t_lo", "segment"), "segment.t_lo");
    s.t_hi = detail::number(detail::field(g, "t_hi", "segment"), "segment.t_hi");
    s.eps = detail::number(detail::field(g, "eps", "segment"), "segment.eps");
    s.rank_right = detail::integer<int>(detail::field(g, "rank_right", "segment"), "segment.rank_right");
    s.rank_left = detail::integer<int>(detail::field(g, "rank_left", "segment"), "segment.rank_left");
    s.weyl_margin = detail::number(detail::field(g, "weyl_margin", "segment"), "segment.weyl_margin");
    if (g.contains("pair_index")) s.pair_index = g.at("pair_index").get<int>();
    if (g.contains("projection_jump")) s.projection_jump = g.at("projection_jump").get<double>();
    c.segments.push_back(s);
  }
  return c;
}

inline json tally_to_json(const CrossingTally& t) {
  json cs = json::array();
  for (const auto& c : t.crossings)
    cs.push_back({{"t_lo", c.t_lo}, {"t_hi", c.t_hi}, {"branch", c.branch}, {"direction", c.direction}});
  return {{"net", t.net}, {"up", t.up},       {"down", t.down},
          {"samples", t.samples}, {"max_step", t.max_step}, {"crossings", std::move(cs)}};
}

inline json comparison_to_json(const OperatorPath& path, const SfComparison& c) {
  return {{"path", {{"dim", path.dim}, {"kind", path.kind}, {"name", path.name}}},
          {"total", c.phillips.total},
          {"agree", c.agree()},
          {"phillips", certificate_to_json(c.phillips)},
          {"pairsum", certificate_to_json(c.pairsum)},
          {"endpoints", c.endpoints},
          {"oracle", tally_to_json(c.oracle)}};
}

inline json axiom_report_to_json(const AxiomReport& r) {
  return {{"check", r.check},       {"method", r.method},     {"trials", r.trials},  {"excluded", r.excluded},
          {"regenerated", r.regenerated}, {"failures", r.failures}, {"seed", r.seed}, {"passed", r.passed()}};
}

inline json toeplitz_report_to_json(const ToeplitzReport& r) {
  json cs = json::array();
  for (const auto& c : r.crossings)
    cs.push_back({{"t_lo", c.t_lo}, {"t_hi", c.t_hi}, {"branch", c.branch}, {"direction", c.direction}});
  return {{"lhs", r.lhs},         {"rhs", r.rhs},           {"equal", r.equal},         {"pair_route", r.pair_route},
          {"square_route", r.square_route}, {"chain_holds", r.chain_holds}, {"oracle_net", r.oracle_net},
          {"up", r.up},           {"down", r.down},         {"segments", r.segments},   {"commutator", r.commutator},
          {"crossings", std::move(cs)}};
}

inline json metric_report_to_json(const MetricReport& r) {
  return {{"family", r.family},     {"n", r.n},
          {"d_N", detail::num(r.d_norm)}, {"d_W", detail::num(r.d_domain)},
          {"d_R", detail::num(r.d_riesz)}, {"d_G", detail::num(r.d_graph)},
          {"res_N", detail::num(r.res_norm)}, {"res_W", detail::num(r.res_domain)},
          {"res_R", detail::num(r.res_riesz)}, {"res_G", detail::num(r.res_graph)}};
}

inline json cancellation_to_json(const CancellationReport& r) {
  json lv = json::array();
  for (const auto& l : r.levels) lv.push_back({{"level", l.level}, {"multiplicity", l.multiplicity}, {"graded_dim", l.graded_dim}});
  return {{"levels", std::move(lv)}, {"kernel_graded_dim", r.kernel_graded_dim}, {"total", r.total}, {"cancels", r.cancels}};
}

inline json stability_to_json(const StabilityReport& r) {
  return {{"index", r.index},   {"trials", r.trials}, {"violations", r.violations},
          {"gap", detail::num(r.gap)}, {"delta", r.delta},   {"max_graph_distance", r.max_graph_distance},
          {"max_formula_gap", r.max_formula_gap}, {"holds", r.holds()}};
}

}  // namespace specflow::io
