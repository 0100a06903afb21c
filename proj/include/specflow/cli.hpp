#pragma once

// Command-line surface: compute | metrics | toeplitz | axioms | graded | report.

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "specflow/axioms.hpp"
#include "specflow/errors.hpp"
#include "specflow/graded.hpp"
#include "specflow/io.hpp"
#include "specflow/metrics.hpp"
#include "specflow/opmodel.hpp"
#include "specflow/parallel.hpp"
#include "specflow/specflow.hpp"
#include "specflow/toeplitz.hpp"

namespace specflow::cli {

using nlohmann::json;

struct RunConfig {
  std::string command;
  std::string input;
  std::string out;
  std::optional<double> tol;
  int max_depth = 24;
  int samples = 512;
  std::uint64_t seed = 42;
  std::optional<std::size_t> trunc_dim;
  std::string format;  // json | csv; empty = command default

  void validate() const {
    if (tol && !(*tol > 0.0)) throw InputError("--tol must be positive");
    if (samples < 2) throw InputError("--samples must be >= 2");
    if (max_depth < 0) throw InputError("--max-depth must be >= 0");
    if (trunc_dim && *trunc_dim == 0) throw InputError("--trunc-dim must be positive");
  }

  SfOptions sf_options() const {
    SfOptions o;
    o.max_depth = max_depth;
    o.samples = samples;
    if (tol) o.endpoint_tol = *tol;
    return o;
  }
};

/// Text written to the output target plus the exit code.
struct CommandResult {
  std::string text;
  ExitCode code = ExitCode::ok;
};

inline constexpr double kMetricResidualTol = 1e-12;
inline constexpr double kGraphFormulaTol = 1e-11;

namespace detail {
inline json read_json_file(const std::string& file) {
  std::ifstream in(file);
  if (!in) throw InputError("cannot open input file '" + file + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw InputError("invalid JSON in '" + file + "': " + e.what());
  }
}

inline std::optional<json> optional_input(const RunConfig& c) {
  if (c.input.empty()) return std::nullopt;
  return read_json_file(c.input);
}

inline std::string format_or(const RunConfig& c, const char* fallback) {
  return c.format.empty() ? std::string(fallback) : c.format;
}

inline std::string csv_bool(bool b) { return b ? "true" : "false"; }
}  // namespace detail

// ---- compute ----

inline std::pair<json, ExitCode> compute_json(const RunConfig& c) {
  if (c.input.empty()) throw InputError("compute needs --input PATH_SPEC");
  const OperatorPath path = io::path_from_json(detail::read_json_file(c.input));
  const SfComparison cmp = sf_compare(path, c.sf_options());
  json j = io::comparison_to_json(path, cmp);
  ExitCode code = ExitCode::ok;
  for (const auto* cert : {&cmp.phillips, &cmp.pairsum}) {
    const RecheckResult rc = recheck_certificate(path, *cert);
    if (!rc.valid) {
      j["recheck_error"] = cert->method + ": " + rc.message;
      code = ExitCode::consistency_fault;
    }
  }
  if (!cmp.agree()) code = ExitCode::consistency_fault;
  return {j, code};
}

inline CommandResult cmd_compute(const RunConfig& c) {
  auto [j, code] = compute_json(c);
  return {j.dump(2) + "\n", code};
}

// ---- metrics ----

struct MetricsRun {
  std::vector<MetricReport> rows;
  double max_residual = 0.0;
  double max_formula_gap = 0.0;
  bool ok() const { return max_residual <= kMetricResidualTol && max_formula_gap <= kGraphFormulaTol; }
};

/// Model spec {"N", "law", "family", "n"}; a null family runs all four, a
/// missing n runs n = 1..min(32, N - 1).
inline MetricsRun run_metrics(const RunConfig& c) {
  const auto in = detail::optional_input(c);
  std::size_t n_model = 64;
  LambdaLaw law = LambdaLaw::linear;
  std::vector<Family> families{Family::rank_one, Family::lambda, Family::fuglede, Family::swap};
  std::optional<std::size_t> single_n;
  if (in) {
    if (in->contains("N")) n_model = io::detail::integer<std::size_t>(in->at("N"), "model spec.N");
    if (in->contains("law")) law = parse_law(in->at("law").get<std::string>());
    if (in->contains("family") && !in->at("family").is_null()) families = {parse_family(in->at("family").get<std::string>())};
    if (in->contains("n")) single_n = io::detail::integer<std::size_t>(in->at("n"), "model spec.n");
  }
  if (c.trunc_dim) n_model = *c.trunc_dim;
  const DiagonalModel model(n_model, law);
  if (n_model < 2) throw RangeError("metric tables need N >= 2");
  MetricsRun run;
  for (Family f : families) {
    const std::size_t lo = single_n ? *single_n : (f == Family::swap ? 2 : 1);
    const std::size_t hi = single_n ? *single_n : std::min<std::size_t>(32, n_model - 1);
    if (lo > hi) continue;
    for (auto& r : metric_separation_report(model, f, lo, hi)) {
      for (double v : {r.res_norm, r.res_domain, r.res_riesz, r.res_graph})
        if (std::isfinite(v)) run.max_residual = std::max(run.max_residual, v);
      run.max_formula_gap = std::max(run.max_formula_gap, r.graph_formula_gap);
      run.rows.push_back(std::move(r));
    }
  }
  return run;
}

inline json metrics_json(const MetricsRun& run) {
  json rows = json::array();
  for (const auto& r : run.rows) rows.push_back(io::metric_report_to_json(r));
  return {{"rows", std::move(rows)},
          {"max_residual", run.max_residual},
          {"max_graph_formula_gap", run.max_formula_gap},
          {"ok", run.ok()}};
}

inline CommandResult cmd_metrics(const RunConfig& c) {
  const MetricsRun run = run_metrics(c);
  const ExitCode code = run.ok() ? ExitCode::ok : ExitCode::consistency_fault;
  if (detail::format_or(c, "csv") == "csv") return {to_csv(run.rows), code};
  return {metrics_json(run).dump(2) + "\n", code};
}

// ---- toeplitz ----

struct ToeplitzRow {
  std::string label;
  std::size_t dim = 0;
  ToeplitzReport report;
};

/// Input: {"D", "W"} | {"m"} | {"m_max", "random"}; default m = 1..20 plus
/// 100 seeded random pairs of dimension 2..12.
inline std::vector<ToeplitzRow> run_toeplitz(const RunConfig& c) {
  const auto in = detail::optional_input(c);
  const SfOptions opts = c.sf_options();
  std::vector<ToeplitzRow> rows;
  if (in && in->contains("D")) {
    const auto d = io::hermitian_from_json(in->at("D"), "D");
    const auto w = io::unitary_from_json(io::detail::field(*in, "W", "toeplitz spec"), "W");
    rows.push_back({"input", d.dim(), verify_toeplitz_theorem(d, w, opts)});
    return rows;
  }
  int m_lo = 1, m_hi = 20, random = 100;
  if (in && in->contains("m")) m_lo = m_hi = io::detail::integer<int>(in->at("m"), "toeplitz spec.m"), random = 0;
  if (in && in->contains("m_max")) m_hi = io::detail::integer<int>(in->at("m_max"), "toeplitz spec.m_max");
  if (in && in->contains("random")) random = io::detail::integer<int>(in->at("random"), "toeplitz spec.random");
  if (random < 0) throw InputError("toeplitz spec.random must be >= 0");
  const std::size_t n_cyc = m_hi >= m_lo ? static_cast<std::size_t>(m_hi - m_lo + 1) : 0;
  const std::size_t total = n_cyc + static_cast<std::size_t>(random);
  const std::uint64_t seed = c.seed;
  return parallel_map<ToeplitzRow>(total, [&, m_lo, seed](std::size_t i) {
    if (i < n_cyc) {
      const int m = m_lo + static_cast<int>(i);
      const auto fam = cyclic_family(m);
      return ToeplitzRow{"cyclic m=" + std::to_string(m), fam.d.dim(), verify_toeplitz_theorem(fam.d, fam.w, opts)};
    }
    const std::size_t k = i - n_cyc;
    Rng rng = Rng::stream(seed, k);
    const std::size_t n = static_cast<std::size_t>(rng.integer(2, 12));
    const auto fam = random_toeplitz_pair(rng, n);
    return ToeplitzRow{"random " + std::to_string(k), n, verify_toeplitz_theorem(fam.d, fam.w, opts)};
  });
}

inline bool toeplitz_ok(const std::vector<ToeplitzRow>& rows) {
  return std::all_of(rows.begin(), rows.end(), [](const ToeplitzRow& r) {
    return r.report.equal && r.report.chain_holds && r.report.up - r.report.down == r.report.oracle_net;
  });
}

inline json toeplitz_json(const std::vector<ToeplitzRow>& rows) {
  json arr = json::array();
  for (const auto& r : rows) {
    json j = io::toeplitz_report_to_json(r.report);
    j["case"] = r.label;
    j["dim"] = r.dim;
    arr.push_back(std::move(j));
  }
  return {{"cases", std::move(arr)}, {"all_equal", toeplitz_ok(rows)}};
}

inline CommandResult cmd_toeplitz(const RunConfig& c) {
  const auto rows = run_toeplitz(c);
  const ExitCode code = toeplitz_ok(rows) ? ExitCode::ok : ExitCode::consistency_fault;
  if (detail::format_or(c, "json") == "csv") {
    std::ostringstream os;
    os << "case,dim,lhs,rhs,equal,chain_holds,up,down,oracle_net,segments,commutator\n";
    for (const auto& r : rows) {
      const auto& t = r.report;
      os << r.label << ',' << r.dim << ',' << t.lhs << ',' << t.rhs << ',' << detail::csv_bool(t.equal) << ','
         << detail::csv_bool(t.chain_holds) << ',' << t.up << ',' << t.down << ',' << t.oracle_net << ',' << t.segments
         << ',' << format_g17(t.commutator) << '\n';
    }
    return {os.str(), code};
  }
  return {toeplitz_json(rows).dump(2) + "\n", code};
}

// ---- axioms ----

/// Input: {"concatenation", "homotopy", "normalization", "vanishing",
/// "max_dim", "methods": [...]}; defaults to the full suite on all methods.
inline std::vector<AxiomReport> run_axioms(const RunConfig& c) {
  const auto in = detail::optional_input(c);
  AxiomSuiteConfig cfg;
  std::vector<SfFunctional> methods = standard_functionals(c.sf_options());
  if (in) {
    cfg.concatenation = in->value("concatenation", cfg.concatenation);
    cfg.homotopy = in->value("homotopy", cfg.homotopy);
    cfg.normalization = in->value("normalization", cfg.normalization);
    cfg.vanishing = in->value("vanishing", cfg.vanishing);
    cfg.max_dim = in->value("max_dim", cfg.max_dim);
    if (in->contains("methods")) {
      methods.clear();
      for (const auto& m : in->at("methods")) methods.push_back(functional_by_name(m.get<std::string>(), c.sf_options()));
    }
  }
  if (cfg.max_dim < 2) throw RangeError("axiom sweeps need max_dim >= 2");
  std::vector<AxiomReport> out;
  for (const auto& mu : methods)
    for (auto& r : run_axiom_suite(mu, c.seed, cfg)) out.push_back(std::move(r));
  return out;
}

inline bool axioms_ok(const std::vector<AxiomReport>& reps) {
  return std::all_of(reps.begin(), reps.end(), [](const AxiomReport& r) { return r.passed(); });
}

inline json axioms_json(const std::vector<AxiomReport>& reps) {
  json arr = json::array();
  for (const auto& r : reps) arr.push_back(io::axiom_report_to_json(r));
  return {{"reports", std::move(arr)}, {"all_passed", axioms_ok(reps)}};
}

inline CommandResult cmd_axioms(const RunConfig& c) {
  const auto reps = run_axioms(c);
  const ExitCode code = axioms_ok(reps) ? ExitCode::ok : ExitCode::consistency_fault;
  if (detail::format_or(c, "json") == "csv") {
    std::ostringstream os;
    os << "check,method,trials,excluded,regenerated,failures,seed,passed\n";
    for (const auto& r : reps)
      os << r.check << ',' << r.method << ',' << r.trials << ',' << r.excluded << ',' << r.regenerated << ','
         << r.failures.size() << ',' << r.seed << ',' << detail::csv_bool(r.passed()) << '\n';
    return {os.str(), code};
  }
  return {axioms_json(reps).dump(2) + "\n", code};
}

// ---- graded ----

inline json graded_single_json(const GradedOperator& t, Rng& rng, int stability_trials, bool& ok) {
  const Ind0Result r = ind0_detailed(t);
  const double gap = singular_gap(t);
  const double eps = std::isfinite(gap) ? 0.5 * gap : 1.0;
  const int window = graded_window_dim(t, eps);
  const CancellationReport cr = eigenpair_cancellation_check(t);
  const int pq = static_cast<int>(t.p()) - static_cast<int>(t.q());
  json j = {{"p", t.p()},
            {"q", t.q()},
            {"ind0", r.value},
            {"kernel", r.kernel},
            {"cokernel", r.cokernel},
            {"ill_conditioned", r.ill_conditioned},
            {"singular_gap", io::detail::num(gap)},
            {"window_eps", eps},
            {"window_dim", window},
            {"cancellation", io::cancellation_to_json(cr)}};
  ok = window == r.value && cr.cancels && cr.total == pq && r.value == pq && cr.kernel_graded_dim == r.value;
  if (stability_trials > 0 && gap > 10.0 * kRankTol) {
    const StabilityReport s = index_stability_check(t, stability_trials, rng);
    j["stability"] = io::stability_to_json(s);
    ok = ok && s.holds();
  }
  j["ok"] = ok;
  return j;
}

/// Input: graded spec {"p", "q", "A"} or sweep {"trials", "max_side",
/// "stability_instances", "stability_trials"}; default sweep is 500 random
/// operators, the first 50 with 100 stability trials each.
inline std::pair<json, bool> run_graded(const RunConfig& c) {
  const auto in = detail::optional_input(c);
  if (in && in->contains("p")) {
    Rng rng(c.seed);
    bool ok = true;
    json j = graded_single_json(io::graded_from_json(*in), rng, in->value("stability_trials", 100), ok);
    return {j, ok};
  }
  int trials = 500, max_side = 8, instances = 50, stab = 100;
  if (in) {
    trials = in->value("trials", trials);
    max_side = in->value("max_side", max_side);
    instances = in->value("stability_instances", instances);
    stab = in->value("stability_trials", stab);
  }
  if (trials < 0 || max_side < 1 || instances < 0 || stab < 0) throw InputError("graded sweep parameters out of range");
  const std::uint64_t seed = c.seed;
  struct Row {
    bool ok = true;
    std::string failure;
  };
  const auto rows = parallel_map<Row>(static_cast<std::size_t>(trials), [&](std::size_t i) {
    Rng rng = Rng::stream(seed, i);
    const GradedOperator t = random_graded(rng, static_cast<std::size_t>(max_side));
    Row row;
    const json j = graded_single_json(t, rng, static_cast<int>(i) < instances ? stab : 0, row.ok);
    if (!row.ok) row.failure = "trial " + std::to_string(i) + ": " + j.dump();
    return row;
  });
  json failures = json::array();
  for (const auto& r : rows)
    if (!r.ok) failures.push_back(r.failure);
  const bool ok = failures.empty();
  return {json{{"check", "graded"},
               {"trials", trials},
               {"stability_instances", std::min(instances, trials)},
               {"stability_trials", stab},
               {"failures", std::move(failures)},
               {"seed", seed},
               {"passed", ok}},
          ok};
}

inline CommandResult cmd_graded(const RunConfig& c) {
  auto [j, ok] = run_graded(c);
  return {j.dump(2) + "\n", ok ? ExitCode::ok : ExitCode::consistency_fault};
}

// ---- report ----

/// Every suite in one JSON document (the --input file is ignored).
inline CommandResult cmd_report(const RunConfig& c) {
  RunConfig d = c;
  d.input.clear();
  const MetricsRun m = run_metrics(d);
  const auto t = run_toeplitz(d);
  const auto [g, g_ok] = run_graded(d);
  const auto a = run_axioms(d);
  const bool ok = m.ok() && toeplitz_ok(t) && g_ok && axioms_ok(a);
  const json j = {{"metrics", metrics_json(m)},
                  {"toeplitz", toeplitz_json(t)},
                  {"graded", g},
                  {"axioms", axioms_json(a)},
                  {"all_passed", ok}};
  return {j.dump(2) + "\n", ok ? ExitCode::ok : ExitCode::consistency_fault};
}

inline CommandResult dispatch(const RunConfig& c) {
  c.validate();
  if (!c.format.empty() && c.format != "json" && c.format != "csv") throw InputError("--format must be json or csv");
  if (c.command == "compute") return cmd_compute(c);
  if (c.command == "metrics") return cmd_metrics(c);
  if (c.command == "toeplitz") return cmd_toeplitz(c);
  if (c.command == "axioms") return cmd_axioms(c);
  if (c.command == "graded") return cmd_graded(c);
  if (c.command == "report") return cmd_report(c);
  throw InputError("unknown command '" + c.command + "'");
}

inline std::string describe(const Error& e) {
  std::ostringstream os;
  os << e.what();
  if (const auto* cf = dynamic_cast<const CertificationFailure*>(&e)) {
    os << " (unresolved on [" << cf->t_lo() << ", " << cf->t_hi()
       << "]; refine with a larger --max-depth or --samples, or a denser sample grid)";
  }
  return os.str();
}

/// Parses argv, runs the command, writes output; returns the process exit code.
inline int run(int argc, char** argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Certified spectral flow on finite-dimensional Hermitian paths"};
  RunConfig c;
  double tol = 0.0;
  std::size_t trunc = 0;
  app.add_option("command", c.command, "compute | metrics | toeplitz | axioms | graded | report")
      ->required()
      ->check(CLI::IsMember({"compute", "metrics", "toeplitz", "axioms", "graded", "report"}));
  app.add_option("--input", c.input, "input JSON file");
  app.add_option("--out", c.out, "output file (default stdout)");
  auto* tol_opt = app.add_option("--tol", tol, "endpoint invertibility tolerance");
  app.add_option("--max-depth", c.max_depth, "maximal bisection depth");
  app.add_option("--samples", c.samples, "crossing oracle grid size");
  app.add_option("--seed", c.seed, "master seed");
  auto* trunc_opt = app.add_option("--trunc-dim", trunc, "truncation dimension N of the diagonal model");
  app.add_option("--format", c.format, "json | csv")->check(CLI::IsMember({"json", "csv"}));
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e, out, err);
    return rc == 0 ? 0 : static_cast<int>(ExitCode::input_error);
  }
  if (tol_opt->count() > 0) c.tol = tol;
  if (trunc_opt->count() > 0) c.trunc_dim = trunc;
  try {
    const CommandResult r = dispatch(c);
    if (c.out.empty()) out << r.text;
    else {
      std::ofstream f(c.out);
      if (!f) throw InputError("cannot open output file '" + c.out + "'");
      f << r.text;
    }
    if (r.code != ExitCode::ok) err << "error: checks failed (exit " << static_cast<int>(r.code) << ")\n";
    return static_cast<int>(r.code);
  } catch (const Error& e) {
    err << "error: " << describe(e) << '\n';
    return static_cast<int>(e.code());
  } catch (const json::exception& e) {
    err << "error: " << e.what() << '\n';
    return static_cast<int>(ExitCode::input_error);
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return static_cast<int>(ExitCode::consistency_fault);
  }
}

}  // namespace specflow::cli
