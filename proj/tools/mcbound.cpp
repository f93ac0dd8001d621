// mcbound command-line front end.
//
//   mcbound finite   {stationary|eigen-bound|minorization|pseudo|tv-exact} ...
//   mcbound bound    {t1|t2} ...
//   mcbound simulate ...
//   mcbound verify   {drift|minorization} ...
//
// Reports go to <output>/<stem>.json and/or <stem>.csv. Exit codes: 0 success,
// 2 usage or configuration error, 3 mathematical or verification failure.

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "mcbound/mcbound.hpp"

namespace {

using nlohmann::json;
using nlohmann::ordered_json;
using mcb::InvalidArgument;
using mcb::MathError;
using mcb::Provenance;

// ---------------------------------------------------------------------------
// Output helpers

struct Output {
  std::string dir = ".";
  std::string format = "json";
};

std::string fmt17(double v) {
  if (std::isnan(v)) return "";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

using CsvRow = std::vector<std::string>;

struct Report {
  std::string stem;
  ordered_json doc;
  CsvRow csv_header;
  std::vector<CsvRow> csv_rows;
  std::string extra_csv_name;
  CsvRow extra_csv_header;
  std::vector<CsvRow> extra_csv_rows;
};

ordered_json envelope(const std::string& command) {
  ordered_json j;
  j["tool"] = "mcbound";
  j["version"] = MCBOUND_VERSION;
  j["command"] = command;
  j["status"] = "ok";
  j["config"] = ordered_json::object();
  j["seed"] = nullptr;
  j["provenance"] = ordered_json::object();
  j["result"] = ordered_json::object();
  j["warnings"] = ordered_json::array();
  return j;
}

void write_csv(const std::filesystem::path& path, const CsvRow& header,
               const std::vector<CsvRow>& rows) {
  std::ofstream out(path);
  if (!out) throw InvalidArgument("cannot write " + path.string());
  auto line = [&](const CsvRow& r) {
    for (std::size_t i = 0; i < r.size(); ++i) out << (i ? "," : "") << r[i];
    out << "\n";
  };
  line(header);
  for (const auto& r : rows) line(r);
}

void emit(const Output& o, const Report& r) {
  std::filesystem::create_directories(o.dir);
  const std::filesystem::path base = std::filesystem::path(o.dir) / r.stem;
  if (o.format == "json" || o.format == "both") {
    const auto path = base.string() + ".json";
    std::ofstream out(path);
    if (!out) throw InvalidArgument("cannot write " + path);
    out << r.doc.dump(2) << "\n";
    std::cout << "wrote " << path << "\n";
  }
  if ((o.format == "csv" || o.format == "both") && !r.csv_header.empty()) {
    const auto path = base.string() + ".csv";
    write_csv(path, r.csv_header, r.csv_rows);
    std::cout << "wrote " << path << "\n";
  }
  if (!r.extra_csv_name.empty()) {
    const auto path = (std::filesystem::path(o.dir) / r.extra_csv_name).string();
    write_csv(path, r.extra_csv_header, r.extra_csv_rows);
    std::cout << "wrote " << path << "\n";
  }
}

ordered_json curve_json(const mcb::BoundReport& b) {
  ordered_json c = ordered_json::array();
  for (const auto& p : b.curve) {
    ordered_json e{{"n", p.n}, {"value", p.value}};
    if (p.j) e["j"] = *p.j;
    c.push_back(e);
  }
  return c;
}

ordered_json crossing_json(const mcb::BoundReport& b) {
  if (!b.crossing) return nullptr;
  ordered_json c{{"n", b.crossing->n}, {"value", b.crossing->value}};
  if (b.crossing->j) c["j"] = *b.crossing->j;
  return c;
}

ordered_json rationals(std::span<const mcb::Rational> v) {
  ordered_json a = ordered_json::array();
  for (const auto& x : v) a.push_back(mcb::to_string(x));
  return a;
}

ordered_json doubles(std::span<const mcb::Rational> v) {
  ordered_json a = ordered_json::array();
  for (const auto& x : v) a.push_back(mcb::to_double(x));
  return a;
}

/// Accepts "p/q", integers, or decimals.
double parse_number(const std::string& s, const std::string& what) {
  if (s.find('/') != std::string::npos) return mcb::to_double(mcb::parse_rational(s));
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size() || !std::isfinite(v)) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw InvalidArgument("invalid number for " + what + ": '" + s + "'");
  }
}

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag, std::string& source) {
  if (flag) {
    source = "flag";
    return *flag;
  }
  if (const char* env = std::getenv("MCB_SEED")) {
    try {
      std::size_t used = 0;
      const auto v = std::stoull(env, &used);
      if (used != std::string(env).size()) throw std::invalid_argument(env);
      source = "env";
      return v;
    } catch (const std::exception&) {
      throw InvalidArgument(std::string("MCB_SEED is not an unsigned integer: '") + env + "'");
    }
  }
  source = "default";
  return 0;
}

// ---------------------------------------------------------------------------
// Finite models

struct FiniteSource {
  std::string grid;
  std::string matrix_file;
};

struct FiniteModel {
  mcb::StochasticMatrix p;
  ordered_json description;
  std::size_t default_start = 0;
};

FiniteModel load_finite(const FiniteSource& src) {
  if (!src.grid.empty() && !src.matrix_file.empty())
    throw InvalidArgument("--grid and --matrix-file are mutually exclusive");
  if (!src.grid.empty()) {
    const auto x = src.grid.find('x');
    std::size_t rows = 0, cols = 0;
    try {
      if (x == std::string::npos) throw std::invalid_argument(src.grid);
      std::size_t u1 = 0, u2 = 0;
      rows = std::stoul(src.grid.substr(0, x), &u1);
      cols = std::stoul(src.grid.substr(x + 1), &u2);
      if (u1 != x || u2 != src.grid.size() - x - 1) throw std::invalid_argument(src.grid);
    } catch (const std::exception&) {
      throw InvalidArgument("--grid expects ROWSxCOLS, got '" + src.grid + "'");
    }
    if (rows * cols > 400) throw InvalidArgument("grid larger than 400 states");
    FiniteModel m{mcb::build_grid_walk(rows, cols), {{"kind", "grid"}, {"rows", rows}, {"cols", cols}},
                  (rows / 2) * cols + cols / 2};
    return m;
  }
  if (!src.matrix_file.empty()) {
    return {mcb::load_matrix_file(src.matrix_file), {{"kind", "matrix-file"}, {"path", src.matrix_file}}, 0};
  }
  throw InvalidArgument("a chain is required: --grid ROWSxCOLS or --matrix-file PATH");
}

std::size_t state_index(const std::optional<std::size_t>& label, std::size_t fallback, std::size_t n,
                        const char* what) {
  if (!label) return fallback;
  if (*label < 1 || *label > n)
    throw InvalidArgument(std::string(what) + " must be a state label in 1.." + std::to_string(n));
  return *label - 1;
}

ordered_json cert_json(const mcb::MinorizationCert& c) {
  ordered_json j;
  j["variant"] = mcb::to_string(c.variant);
  j["n0"] = c.n0;
  j["epsilon"] = mcb::to_string(c.epsilon);
  j["epsilon_float"] = mcb::to_double(c.epsilon);
  if (c.nu) {
    j["nu"] = rationals(c.nu->entries());
  }
  if (!c.argmin_pairs.empty()) {
    ordered_json pairs = ordered_json::array();
    for (auto [a, b] : c.argmin_pairs) pairs.push_back({a + 1, b + 1});
    j["argmin_pairs"] = pairs;
  }
  j["verified"] = mcb::verify_certificate(c);
  return j;
}

struct FiniteArgs {
  std::string analysis;
  FiniteSource src;
  std::optional<std::size_t> start, target;
  unsigned long n0 = 2;
  unsigned long n_max = 200;
  double delta = 0.01;
};

Report cmd_finite(const FiniteArgs& a) {
  if (a.n0 == 0) throw InvalidArgument("--n0 must be at least 1");
  if (!(a.delta > 0 && a.delta < 1)) throw InvalidArgument("--delta must lie in (0,1)");
  const FiniteModel m = load_finite(a.src);
  const std::size_t n = m.p.size();
  const std::size_t start = state_index(a.start, m.default_start, n, "--start");
  const std::size_t target = state_index(a.target, start, n, "--target");

  Report r;
  r.stem = "finite_" + a.analysis;
  r.doc = envelope("finite " + a.analysis);
  auto& cfg = r.doc["config"];
  cfg["analysis"] = a.analysis;
  cfg["model"] = m.description;
  cfg["states"] = n;
  cfg["start"] = start + 1;
  cfg["target"] = target + 1;
  cfg["n0"] = a.n0;
  cfg["n_max"] = a.n_max;
  cfg["delta"] = a.delta;
  auto& res = r.doc["result"];
  auto& prov = r.doc["provenance"];
  const auto mu0 = mcb::ProbVector::point_mass(n, start);

  if (a.analysis == "stationary") {
    const auto pi = mcb::stationary(m.p);
    res["stationary"] = rationals(pi.entries());
    res["stationary_float"] = doubles(pi.entries());
    prov["stationary"] = mcb::to_string(Provenance::computed);
    r.csv_header = {"state", "value"};
    for (std::size_t i = 0; i < n; ++i) r.csv_rows.push_back({std::to_string(i + 1), fmt17(mcb::to_double(pi[i]))});
  } else if (a.analysis == "eigen-bound") {
    const auto eb = mcb::eigen_bound(m.p, mu0, target);
    res["coefficient"] = eb.coefficient;
    res["rate"] = eb.rate;
    res["condition_number"] = eb.condition_number;
    ordered_json ev = ordered_json::array();
    for (const auto& mode : eb.modes) {
      ev.push_back({{"re", mode.eigenvalue.real()},
                    {"im", mode.eigenvalue.imag()},
                    {"modulus", std::abs(mode.eigenvalue)},
                    {"multiplicity", mode.multiplicity},
                    {"weight", mode.weight}});
    }
    res["modes"] = ev;
    const auto n_star = mcb::steps_to_threshold([&](std::uint64_t k) { return eb.bound(k); }, a.delta);
    res["steps_to_threshold"] = n_star;
    // Exact deviation at the target for comparison with the bound.
    const auto pi = mcb::stationary(m.p);
    mcb::ProbVector mu = mu0;
    ordered_json curve = ordered_json::array();
    std::size_t violations = 0;
    r.csv_header = {"n", "value", "exact"};
    for (unsigned long k = 0; k <= a.n_max; ++k) {
      const double exact = std::abs(mcb::to_double(mcb::Rational(mu[target] - pi[target])));
      const double bound = eb.bound(k);
      if (exact > bound + 1e-9) ++violations;
      curve.push_back({{"n", k}, {"value", bound}, {"exact", exact}});
      r.csv_rows.push_back({std::to_string(k), fmt17(bound), fmt17(exact)});
      if (k < a.n_max) mu = mcb::step(mu, m.p);
    }
    res["curve"] = curve;
    res["violations"] = violations;
    prov["coefficient"] = mcb::to_string(Provenance::computed);
    prov["rate"] = mcb::to_string(Provenance::computed);
  } else if (a.analysis == "minorization" || a.analysis == "pseudo") {
    const bool pseudo = a.analysis == "pseudo";
    const auto cert = pseudo ? mcb::minorization_pseudo(m.p, a.n0) : mcb::minorization_uniform(m.p, a.n0);
    if (!cert) {
      throw MathError(std::string("no ") + (pseudo ? "pseudo-" : "uniform ") +
                      "minorization: epsilon is 0 for n0 = " + std::to_string(a.n0));
    }
    res["certificate"] = cert_json(*cert);
    const double eps = mcb::to_double(cert->epsilon);
    const auto n_star = mcb::steps_to_threshold(
        [&](std::uint64_t k) { return mcb::theorem1_bound(eps, a.n0, k); }, a.delta);
    const auto rep = mcb::theorem1_report(eps, a.n0, std::max<std::uint64_t>(a.n_max, n_star), a.delta);
    res["steps_to_threshold"] = n_star;
    res["curve"] = curve_json(rep);
    res["crossing"] = crossing_json(rep);
    prov["epsilon"] = mcb::to_string(Provenance::computed);
    r.csv_header = {"n", "value"};
    for (const auto& p : rep.curve) r.csv_rows.push_back({std::to_string(p.n), fmt17(p.value)});
  } else if (a.analysis == "tv-exact") {
    const auto tv = mcb::exact_tv_curve(mu0, m.p, a.n_max);
    const auto uni = mcb::minorization_uniform(m.p, a.n0);
    const auto pse = mcb::minorization_pseudo(m.p, a.n0);
    res["stationary"] = rationals(tv.stationary.entries());
    ordered_json curve = ordered_json::array();
    std::size_t violations = 0;
    r.csv_header = {"n", "value", "uniform_bound", "pseudo_bound"};
    for (std::size_t k = 0; k < tv.values.size(); ++k) {
      const double v = mcb::to_double(tv.values[k]);
      ordered_json e{{"n", k}, {"exact", mcb::to_string(tv.values[k])}, {"value", v}};
      double ub = NAN, pb = NAN;
      if (uni) {
        ub = mcb::theorem1_bound(mcb::to_double(uni->epsilon), a.n0, k);
        e["uniform_bound"] = ub;
        if (v > ub + 1e-12) ++violations;
      }
      if (pse) {
        pb = mcb::theorem1_bound(mcb::to_double(pse->epsilon), a.n0, k);
        e["pseudo_bound"] = pb;
        if (v > pb + 1e-12) ++violations;
      }
      curve.push_back(e);
      r.csv_rows.push_back({std::to_string(k), fmt17(v), fmt17(ub), fmt17(pb)});
    }
    res["curve"] = curve;
    res["uniform_certificate"] = uni ? cert_json(*uni) : ordered_json(nullptr);
    res["pseudo_certificate"] = pse ? cert_json(*pse) : ordered_json(nullptr);
    res["violations"] = violations;
    prov["exact_tv"] = mcb::to_string(Provenance::computed);
    if (violations > 0) {
      r.doc["status"] = "fail";
      r.doc["warnings"].push_back(ordered_json{
          {"message", "exact TV exceeds a Theorem-1 bound"}, {"violations", violations}});
    }
  } else {
    throw InvalidArgument("unknown finite analysis '" + a.analysis + "'");
  }
  return r;
}

// ---------------------------------------------------------------------------
// Bounds

struct BoundArgs {
  std::string theorem;
  std::string preset;
  std::optional<std::string> epsilon;
  std::optional<std::uint64_t> n0;
  std::optional<double> lambda, b, d, sup_rh, b_const, eh, pp_c, pp_d;
  double v_start = 1.0;
  double delta = 0.01;
  std::optional<std::uint64_t> n_max;
  std::optional<std::uint64_t> schedule_n, schedule_j;
  bool check_containment = false;
};

ordered_json t2_value_json(const mcb::Theorem2Value& v, std::uint64_t n, std::uint64_t j) {
  return {{"n", n},
          {"j", j},
          {"value", v.value},
          {"log_value", v.log_value},
          {"log_term1", v.log_term1},
          {"log_term2", v.log_term2}};
}

Report cmd_bound(const BoundArgs& a) {
  if (!(a.delta > 0 && a.delta < 1)) throw InvalidArgument("--delta must lie in (0,1)");
  Report r;
  r.stem = "bound_" + a.theorem;
  r.doc = envelope("bound " + a.theorem);
  auto& cfg = r.doc["config"];
  auto& res = r.doc["result"];
  auto& prov = r.doc["provenance"];
  cfg["theorem"] = a.theorem;
  cfg["preset"] = a.preset.empty() ? ordered_json(nullptr) : ordered_json(a.preset);
  cfg["delta"] = a.delta;
  const auto user = mcb::to_string(Provenance::user_supplied);

  if (a.theorem == "t1") {
    double eps = 0.0;
    std::uint64_t n0 = a.n0.value_or(1);
    if (a.preset == "halfline") {
      eps = mcb::HalflineMixture::epsilon;
      prov["epsilon"] = mcb::to_string(Provenance::preset);
    } else if (a.preset == "pointprocess") {
      if (!a.pp_c || !a.pp_d) throw InvalidArgument("pointprocess preset needs --C and --D");
      eps = mcb::lemma1_epsilon(*a.pp_c, *a.pp_d);
      cfg["C"] = *a.pp_c;
      cfg["D"] = *a.pp_d;
      prov["epsilon"] = mcb::to_string(Provenance::analytic);
    } else if (a.preset.empty()) {
      if (!a.epsilon) throw InvalidArgument("bound t1 needs --epsilon (or a preset)");
      eps = parse_number(*a.epsilon, "--epsilon");
      prov["epsilon"] = user;
    } else {
      throw InvalidArgument("unknown t1 preset '" + a.preset + "'");
    }
    if (a.epsilon && !a.preset.empty()) {
      eps = parse_number(*a.epsilon, "--epsilon");
      prov["epsilon"] = user;
    }
    if (n0 == 0) throw InvalidArgument("--n0 must be at least 1");
    prov["n0"] = a.n0 ? user : mcb::to_string(Provenance::preset);
    if (!(eps > 0) || eps > 1) throw InvalidArgument("epsilon must lie in (0,1]");
    cfg["epsilon"] = eps;
    cfg["n0"] = n0;
    const auto n_star = mcb::steps_to_threshold(
        [&](std::uint64_t k) { return mcb::theorem1_bound(eps, n0, k); }, a.delta);
    const std::uint64_t n_max = a.n_max.value_or(n_star);
    cfg["n_max"] = n_max;
    const auto rep = mcb::theorem1_report(eps, n0, n_max, a.delta);
    res["epsilon"] = eps;
    res["steps_to_threshold"] = n_star;
    res["crossing"] = crossing_json(rep);
    res["curve"] = curve_json(rep);
    r.csv_header = {"n", "value"};
    for (const auto& p : rep.curve) r.csv_rows.push_back({std::to_string(p.n), fmt17(p.value)});
    return r;
  }

  if (a.theorem != "t2") throw InvalidArgument("unknown theorem '" + a.theorem + "'");
  mcb::presets::Theorem2Pipeline pipe;
  std::optional<std::uint64_t> sched_n = a.schedule_n, sched_j = a.schedule_j;
  if (a.preset == "rwm-laplace") {
    const bool overridden = a.epsilon || a.n0 || a.lambda || a.b || a.d || a.sup_rh || a.b_const || a.eh;
    if (overridden) throw InvalidArgument("the rwm-laplace preset fixes all Theorem-2 constants");
    pipe = mcb::presets::laplace_pipeline(a.check_containment);
    prov["epsilon"] = mcb::to_string(Provenance::preset);
    prov["n0"] = mcb::to_string(Provenance::preset);
    prov["lambda"] = mcb::to_string(Provenance::preset);
    prov["b"] = mcb::to_string(Provenance::preset);
    prov["d"] = mcb::to_string(Provenance::analytic);
    prov["sup_rh"] = mcb::to_string(pipe.sup_rh_source);
    prov["eh"] = mcb::to_string(pipe.eh_source);
    if (!sched_n) sched_n = mcb::presets::laplace_schedule_n;
    if (!sched_j) sched_j = mcb::presets::laplace_schedule_j;
    // Spot-check d = inf V off C on a probe grid.
    double inf_v = INFINITY;
    for (double x : mcb::probe_grid(2.0 + 1e-9, 20.0, 0.01)) inf_v = std::min(inf_v, mcb::presets::laplace_v(x));
    res["d_probe_infimum"] = inf_v;
  } else if (a.preset.empty()) {
    if (!a.epsilon || !a.lambda || !a.b || !a.d || (!a.sup_rh && !a.b_const))
      throw InvalidArgument("bound t2 needs --epsilon, --lambda, --b, --d and --sup-rh or --B");
    const double eps = parse_number(*a.epsilon, "--epsilon");
    pipe = mcb::presets::assemble_theorem2(eps, a.n0.value_or(1), *a.lambda, *a.b, *a.d, a.sup_rh,
                                           a.b_const, a.eh, a.v_start);
    for (const char* k : {"epsilon", "lambda", "b", "d"}) prov[k] = user;
    prov["n0"] = a.n0 ? user : mcb::to_string(Provenance::preset);
    if (a.b_const)
      prov["B"] = user;
    else
      prov["sup_rh"] = user;
    prov["eh"] = a.eh ? user : mcb::to_string(Provenance::fallback);
  } else {
    throw InvalidArgument("unknown t2 preset '" + a.preset + "'");
  }
  const auto& in = pipe.inputs;
  if (!prov.contains("B")) prov["B"] = mcb::to_string(Provenance::computed);
  prov["alpha"] = mcb::to_string(Provenance::computed);
  cfg["epsilon"] = in.epsilon;
  cfg["n0"] = in.n0;
  cfg["lambda"] = pipe.lambda;
  cfg["b"] = pipe.b;
  cfg["d"] = pipe.d;
  cfg["check_containment"] = a.check_containment;

  res["epsilon"] = in.epsilon;
  res["alpha_inverse"] = pipe.inv_alpha;
  res["alpha"] = pipe.alpha;
  res["precondition"] = {{"inequality", "d > b/(1-lambda) - 1"},
                         {"required_lower_bound", pipe.precondition},
                         {"d", pipe.d},
                         {"holds", pipe.d > pipe.precondition}};
  res["sup_rh"] = pipe.sup_rh > 0 ? ordered_json(pipe.sup_rh) : ordered_json(nullptr);
  if (pipe.containment_defect) res["containment_defect"] = *pipe.containment_defect;
  res["B"] = in.b_const;
  res["stationary_moment_bound"] = pipe.stationary_moment;
  res["eh"] = {{"value", pipe.eh}, {"source", mcb::to_string(pipe.eh_source)}};
  res["eh_fallback"] = pipe.eh_fallback;

  const auto opt = mcb::optimize_theorem2(in, a.delta);
  res["optimum"] = t2_value_json(opt.value, opt.n, opt.j);
  res["optimum"]["below_delta"] = opt.value.value < a.delta;
  if (sched_n || sched_j) {
    if (!sched_n || !sched_j) throw InvalidArgument("--schedule-n and --schedule-j go together");
    const auto v = mcb::theorem2_eval(in, *sched_n, *sched_j);
    res["schedule"] = t2_value_json(v, *sched_n, *sched_j);
    res["schedule"]["below_delta"] = v.value < a.delta;
    cfg["schedule_n"] = *sched_n;
    cfg["schedule_j"] = *sched_j;
  } else {
    res["schedule"] = nullptr;
  }
  res["curve"] = curve_json(opt.report);
  r.csv_header = {"n", "value", "j"};
  for (const auto& p : opt.report.curve)
    r.csv_rows.push_back({std::to_string(p.n), fmt17(p.value), std::to_string(p.j.value_or(0))});
  return r;
}

// ---------------------------------------------------------------------------
// Simulation

struct SimArgs {
  FiniteSource src;
  bool halfline = false;
  bool laplace = false;
  std::string cert = "pseudo";
  unsigned long n0 = 2;
  std::optional<std::size_t> start;
  double x0 = 0.0;
  std::optional<std::uint64_t> n_max;
  std::uint64_t reps = 10000;
  std::optional<std::uint64_t> seed;
  unsigned workers = 1;
  std::uint64_t stride = 1;
  std::uint64_t trajectories = 0;
  std::uint64_t burn_in = 1000;
};

void fill_simulation(Report& r, const mcb::CouplingResult& cr, const std::function<double(std::uint64_t)>& bound) {
  auto& res = r.doc["result"];
  res["mode"] = cr.mode;
  res["n0"] = cr.n0;
  res["epsilon"] = cr.epsilon;
  ordered_json table = ordered_json::array();
  r.csv_header = {"n", "value", "se", "bound"};
  if (!cr.tv_to_reference.empty()) {
    r.csv_header.insert(r.csv_header.end(), {"tv", "tv_se", "tv_between_copies"});
  }
  if (!cr.observable_mean.empty()) r.csv_header.insert(r.csv_header.end(), {"observable", "observable_se"});
  double prev = 2.0;
  bool monotone = true;
  for (std::size_t k = 0; k < cr.times.size(); ++k) {
    const auto n = cr.times[k];
    const double p = cr.p_noncoupled[k], se = cr.se_noncoupled[k];
    const double bd = bound ? bound(n) : NAN;
    ordered_json e{{"n", n},
                   {"noncoupled", cr.noncoupled[k]},
                   {"p_noncoupled", p},
                   {"se", se},
                   {"bound", std::isnan(bd) ? ordered_json(nullptr) : ordered_json(bd)},
                   {"mean_small_set_visits", cr.mean_small_set_visits[k]}};
    CsvRow row{std::to_string(n), fmt17(p), fmt17(se), fmt17(bd)};
    if (!cr.tv_to_reference.empty()) {
      e["tv_to_reference"] = cr.tv_to_reference[k].value;
      e["tv_se"] = cr.tv_to_reference[k].se;
      e["tv_between_copies"] = cr.tv_between_copies[k];
      row.insert(row.end(), {fmt17(cr.tv_to_reference[k].value), fmt17(cr.tv_to_reference[k].se),
                             fmt17(cr.tv_between_copies[k])});
    }
    if (!cr.observable_mean.empty()) {
      e["observable_mean"] = cr.observable_mean[k];
      e["observable_se"] = cr.observable_se[k];
      row.insert(row.end(), {fmt17(cr.observable_mean[k]), fmt17(cr.observable_se[k])});
    }
    if (!std::isnan(bd) && p > bd + 3.0 * se) {
      r.doc["warnings"].push_back(ordered_json{
          {"n", n}, {"message", "empirical non-coupling exceeds bound + 3 SE"}, {"p", p}, {"se", se}, {"bound", bd}});
    }
    if (p > prev) monotone = false;
    prev = p;
    table.push_back(e);
    r.csv_rows.push_back(std::move(row));
  }
  res["monotone"] = monotone;
  res["table"] = table;
  res["coupling_time"] = {{"coupled", cr.coupling_time.coupled},
                          {"censored", cr.coupling_time.censored},
                          {"mean", cr.coupling_time.mean},
                          {"median", cr.coupling_time.median},
                          {"q90", cr.coupling_time.q90},
                          {"q99", cr.coupling_time.q99}};
  if (!cr.trajectories.empty()) {
    r.extra_csv_name = r.stem + "_trajectories.csv";
    r.extra_csv_header = {"replication", "n", "x", "x_prime", "coupled"};
    for (const auto& t : cr.trajectories) {
      r.extra_csv_rows.push_back(
          {std::to_string(t.replication), std::to_string(t.n), t.x, t.x_prime, t.coupled ? "1" : "0"});
    }
  }
}

Report cmd_simulate(const SimArgs& a) {
  const int models = (a.halfline ? 1 : 0) + (a.laplace ? 1 : 0) +
                     ((!a.src.grid.empty() || !a.src.matrix_file.empty()) ? 1 : 0);
  if (models != 1) throw InvalidArgument("choose exactly one model: --grid, --matrix-file, --halfline or --rwm-laplace");
  std::string seed_source;
  const std::uint64_t seed = resolve_seed(a.seed, seed_source);

  Report r;
  r.stem = "simulate";
  r.doc = envelope("simulate");
  auto& cfg = r.doc["config"];
  auto& prov = r.doc["provenance"];
  r.doc["seed"] = seed;
  cfg["seed_source"] = seed_source;
  cfg["replications"] = a.reps;
  cfg["workers"] = a.workers;
  cfg["record_stride"] = a.stride;
  cfg["trajectories"] = a.trajectories;

  mcb::CouplingConfig cc;
  cc.replications = a.reps;
  cc.master_seed = seed;
  cc.workers = a.workers;
  cc.record_stride = a.stride;
  cc.trajectory_dump = a.trajectories;

  if (a.halfline || a.laplace) {
    if (a.halfline) {
      if (!(a.x0 >= 0)) throw InvalidArgument("--x0 must be >= 0 for the half-line chain");
      cc.n_max = a.n_max.value_or(30);
      cfg["model"] = {{"kind", "halfline"}};
      cfg["x0"] = a.x0;
      cfg["burn_in"] = a.burn_in;
      cfg["n_max"] = cc.n_max;
      prov["epsilon"] = mcb::to_string(Provenance::preset);
      prov["stationary_start"] = "burn-in";
      const mcb::HalflineMixture k;
      const double x0 = a.x0;
      mcb::KernelCouplingModel<mcb::HalflineMixture> model(
          k, mcb::presets::halfline_cert(), [x0](mcb::Rng&) { return x0; },
          mcb::burn_in_sampler(k, 0.0, a.burn_in));
      const auto cr = mcb::run_uniform_coupling(model, cc);
      fill_simulation(r, cr, [](std::uint64_t n) { return mcb::theorem1_bound(0.5, 1, n); });
    } else {
      cc.n_max = a.n_max.value_or(20000);
      cfg["model"] = {{"kind", "rwm-laplace"}};
      cfg["x0"] = a.x0;
      cfg["n_max"] = cc.n_max;
      prov["epsilon"] = mcb::to_string(Provenance::preset);
      prov["stationary_start"] = "exact";
      const double x0 = a.x0;
      mcb::KernelCouplingModel<mcb::RwmLaplace> model(
          mcb::RwmLaplace{}, mcb::presets::laplace_cert(), [x0](mcb::Rng&) { return x0; },
          &mcb::RwmLaplace::sample_target, &mcb::presets::laplace_v);
      const auto cr = mcb::run_small_set_coupling(model, cc);
      const auto pipe = mcb::presets::laplace_pipeline();
      fill_simulation(r, cr, [in = pipe.inputs](std::uint64_t n) {
        if (n == 0) return 1.0;
        return std::min(1.0, mcb::theorem2_bound(in, n, mcb::best_j(in, n)));
      });
      auto& res = r.doc["result"];
      const auto& drift = mcb::presets::laplace_drift();
      res["observable"] = "V(x) = exp(|x|/2)";
      res["drift_ceiling"] = drift.v(x0) + drift.b / (1.0 - drift.lambda);
    }
    return r;
  }

  const FiniteModel m = load_finite(a.src);
  const std::size_t n = m.p.size();
  const std::size_t start = state_index(a.start, m.default_start, n, "--start");
  if (a.n0 == 0) throw InvalidArgument("--n0 must be at least 1");
  if (a.cert != "uniform" && a.cert != "pseudo") throw InvalidArgument("--cert must be uniform or pseudo");
  cc.n_max = a.n_max.value_or(60);
  cfg["model"] = m.description;
  cfg["cert"] = a.cert;
  cfg["n0"] = a.n0;
  cfg["start"] = start + 1;
  cfg["n_max"] = cc.n_max;
  const auto cert = a.cert == "pseudo" ? mcb::minorization_pseudo(m.p, a.n0) : mcb::minorization_uniform(m.p, a.n0);
  if (!cert) throw MathError("no " + a.cert + " minorization certificate at n0 = " + std::to_string(a.n0));
  prov["epsilon"] = mcb::to_string(Provenance::computed);
  prov["stationary_start"] = "exact";
  const auto mu0 = mcb::ProbVector::point_mass(n, start);
  const mcb::FiniteCouplingModel model(m.p, *cert, mu0);
  const auto cr = mcb::run_uniform_coupling(model, cc);
  const double eps = mcb::to_double(cert->epsilon);
  fill_simulation(r, cr, [eps, n0 = a.n0](std::uint64_t k) { return mcb::theorem1_bound(eps, n0, k); });
  auto& res = r.doc["result"];
  res["certificate"] = cert_json(*cert);

  // Pooled marginal of X_n against the exact law of the chain from mu0.
  const auto pd = m.p.to_double();
  std::vector<double> mu = mu0.to_double();
  std::uint64_t t = 0;
  double worst_z = 0.0;
  std::uint64_t worst_n = 0;
  const double reps = static_cast<double>(a.reps);
  for (std::size_t k = 0; k < cr.times.size(); ++k) {
    while (t < cr.times[k]) {
      std::vector<double> next(n, 0.0);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) next[j] += mu[i] * pd(i, j);
      mu = std::move(next);
      ++t;
    }
    for (std::size_t s = 0; s < n; ++s) {
      const double q = mu[s];
      const double f = static_cast<double>(cr.x_counts[k][s]) / reps;
      const double se = std::sqrt(q * (1.0 - q) / reps);
      const double z = se > 0 ? std::abs(f - q) / se : (f == q ? 0.0 : INFINITY);
      if (z > worst_z) {
        worst_z = z;
        worst_n = cr.times[k];
      }
    }
  }
  res["marginal_check"] = {{"max_z", std::isfinite(worst_z) ? ordered_json(worst_z) : ordered_json("inf")},
                           {"at_n", worst_n},
                           {"within_4_se", worst_z <= 4.0}};
  return r;
}

// ---------------------------------------------------------------------------
// Verification

struct VerifyArgs {
  std::string condition;
  std::string preset;
  std::optional<double> lambda, b;
  std::optional<std::string> epsilon;
  double grid_lo = -10.0, grid_hi = 10.0, grid_step = 0.05;
  double tolerance = -1.0;
  std::optional<double> pp_c, pp_d;
  std::uint64_t samples = 200000;
  std::uint64_t pairs = 20;
  std::optional<std::uint64_t> seed;
};

Report cmd_verify(const VerifyArgs& a) {
  Report r;
  r.stem = "verify_" + a.condition;
  r.doc = envelope("verify " + a.condition);
  auto& cfg = r.doc["config"];
  auto& res = r.doc["result"];
  auto& prov = r.doc["provenance"];
  cfg["condition"] = a.condition;
  cfg["preset"] = a.preset;
  const auto user = mcb::to_string(Provenance::user_supplied);
  const auto preset = mcb::to_string(Provenance::preset);

  if (a.condition == "drift") {
    if (a.preset != "rwm-laplace") throw InvalidArgument("drift verification supports --preset rwm-laplace");
    if (!(a.grid_step > 0) || !(a.grid_hi >= a.grid_lo)) throw InvalidArgument("invalid probe grid");
    auto drift = mcb::presets::laplace_drift();
    if (a.lambda) drift.lambda = *a.lambda;
    if (a.b) drift.b = *a.b;
    if (!(drift.lambda > 0) || !(drift.b >= 0)) throw InvalidArgument("--lambda must be > 0 and --b >= 0");
    prov["lambda"] = a.lambda ? user : preset;
    prov["b"] = a.b ? user : preset;
    prov["V"] = preset;
    const double tol = a.tolerance < 0 ? 1e-6 : a.tolerance;
    cfg["V"] = "exp(|x|/2)";
    cfg["small_set"] = drift.small_set.describe();
    cfg["lambda"] = drift.lambda;
    cfg["b"] = drift.b;
    cfg["grid"] = {{"lo", a.grid_lo}, {"hi", a.grid_hi}, {"step", a.grid_step}};
    cfg["tolerance"] = tol;
    const mcb::DriftSpec spec{drift.v, drift.small_set, drift.lambda, drift.b};
    const auto rep = mcb::verify_univariate_drift(mcb::RwmLaplace{}, spec,
                                                  mcb::probe_grid(a.grid_lo, a.grid_hi, a.grid_step), tol);
    res["passed"] = rep.passed;
    res["max_violation"] = rep.max_violation;
    res["worst_state"] = rep.worst_state;
    res["quadrature_error_estimate"] = rep.quadrature_error_estimate;
    res["probes"] = rep.grid.size();
    const auto pv6 = mcb::transition_expectation(mcb::RwmLaplace{}, 6.0, drift.v);
    res["pv_over_v_at_6"] = pv6.value / drift.v(6.0);
    r.csv_header = {"x", "lhs", "rhs"};
    for (std::size_t i = 0; i < rep.grid.size(); ++i)
      r.csv_rows.push_back({fmt17(rep.grid[i]), fmt17(rep.lhs[i]), fmt17(rep.rhs[i])});
    if (!rep.passed) r.doc["status"] = "fail";
    return r;
  }

  if (a.condition != "minorization") throw InvalidArgument("unknown condition '" + a.condition + "'");
  const double tol = a.tolerance < 0 ? 1e-8 : a.tolerance;
  cfg["tolerance"] = tol;
  std::optional<double> eps_override;
  if (a.epsilon) eps_override = parse_number(*a.epsilon, "--epsilon");
  prov["epsilon"] = a.epsilon ? user : preset;

  if (a.preset == "halfline" || a.preset == "rwm-laplace") {
    mcb::MinorizationVerificationReport rep;
    if (a.preset == "halfline") {
      const double eps = eps_override.value_or(mcb::HalflineMixture::epsilon);
      cfg["epsilon"] = eps;
      cfg["n0"] = 1;
      cfg["nu"] = "Exp(2)";
      cfg["x_probes"] = {{"lo", 0.0}, {"hi", 50.0}, {"step", 0.5}};
      cfg["y_probes"] = {{"lo", 0.0}, {"hi", 50.0}, {"step", 0.1}};
      rep = mcb::verify_minorization_numeric(mcb::HalflineMixture{}, mcb::IntervalSet::whole_line(), 1, eps,
                                             &mcb::HalflineMixture::nu_density, mcb::probe_grid(0.0, 50.0, 0.5),
                                             mcb::probe_grid(0.0, 50.0, 0.1), tol);
    } else {
      const double eps = eps_override.value_or(mcb::presets::laplace_epsilon());
      cfg["epsilon"] = eps;
      cfg["n0"] = 2;
      cfg["small_set"] = "[-2, 2]";
      cfg["nu"] = "Uniform[-1, 1]";
      cfg["x_probes"] = {{"lo", -2.0}, {"hi", 2.0}, {"step", 0.05}};
      cfg["y_probes"] = {{"lo", -1.0}, {"hi", 1.0}, {"step", 0.05}};
      rep = mcb::verify_minorization_numeric(mcb::RwmLaplace{}, mcb::presets::laplace_small_set(), 2, eps,
                                             &mcb::presets::laplace_nu_density, mcb::probe_grid(-2.0, 2.0, 0.05),
                                             mcb::probe_grid(-1.0, 1.0, 0.05), tol);
    }
    res["passed"] = rep.passed;
    res["epsilon"] = rep.epsilon;
    res["min_margin"] = rep.min_margin;
    res["worst_x"] = rep.worst_x;
    res["worst_y"] = rep.worst_y;
    res["probes"] = rep.probes;
    res["quadrature_error_estimate"] = rep.quadrature_error_estimate;
    if (!rep.passed) r.doc["status"] = "fail";
    return r;
  }

  if (a.preset == "pointprocess") {
    if (!a.pp_c || !a.pp_d) throw InvalidArgument("pointprocess preset needs --C and --D");
    if (a.samples < 2 || a.pairs < 1) throw InvalidArgument("--samples must be >= 2 and --pairs >= 1");
    std::string seed_source;
    const auto seed = resolve_seed(a.seed, seed_source);
    r.doc["seed"] = seed;
    cfg["seed_source"] = seed_source;
    const mcb::PointProcessMetropolis k(*a.pp_c, *a.pp_d);
    const double eps = eps_override.value_or(mcb::lemma1_epsilon(*a.pp_c, *a.pp_d));
    if (!eps_override) prov["epsilon"] = mcb::to_string(Provenance::analytic);
    cfg["C"] = *a.pp_c;
    cfg["D"] = *a.pp_d;
    cfg["epsilon"] = eps;
    cfg["samples"] = a.samples;
    cfg["pairs"] = a.pairs;
    // Overlap of P(x,.) and P(x2,.) at random start pairs; the minorization
    // constant must not exceed any of them.
    auto rng = mcb::make_stream(seed, 0);
    double worst = INFINITY, worst_se = 0.0;
    ordered_json pairs = ordered_json::array();
    for (std::uint64_t i = 0; i < a.pairs; ++i) {
      auto draw_state = [&] {
        for (;;) {
          const auto s = mcb::PointProcessMetropolis::propose(rng);
          if (std::isfinite(k.log_target(s))) return s;
        }
      };
      const auto x = draw_state(), x2 = draw_state();
      const auto [m, se] = k.estimate_overlap(x, x2, a.samples, rng);
      pairs.push_back({{"overlap", m}, {"se", se}});
      if (m < worst) {
        worst = m;
        worst_se = se;
      }
    }
    const bool passed = worst + 3.0 * worst_se >= eps;
    res["passed"] = passed;
    res["epsilon"] = eps;
    res["min_overlap"] = worst;
    res["min_overlap_se"] = worst_se;
    res["pairs"] = pairs;
    if (!passed) r.doc["status"] = "fail";
    return r;
  }
  throw InvalidArgument("minorization verification supports presets halfline, rwm-laplace, pointprocess");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Convergence bounds for Markov chains via coupling, minorization and drift", "mcbound"};
  app.set_version_flag("--version", std::string(MCBOUND_VERSION));
  app.require_subcommand(1);
  Output out;
  app.add_option("--output,-o", out.dir, "output directory")->capture_default_str();
  app.add_option("--format", out.format, "json, csv or both")
      ->check(CLI::IsMember({"json", "csv", "both"}))
      ->capture_default_str();

  FiniteArgs fa;
  auto* finite = app.add_subcommand("finite", "exact analyses of a finite chain");
  finite->add_option("analysis", fa.analysis, "stationary|eigen-bound|minorization|pseudo|tv-exact")
      ->required()
      ->check(CLI::IsMember({"stationary", "eigen-bound", "minorization", "pseudo", "tv-exact"}));
  finite->add_option("--grid", fa.src.grid, "grid walk, ROWSxCOLS");
  finite->add_option("--matrix-file", fa.src.matrix_file, "JSON transition matrix");
  finite->add_option("--start", fa.start, "initial state label (default: grid centre or 1)");
  finite->add_option("--target", fa.target, "state tracked by the eigen bound (default: start)");
  finite->add_option("--n0", fa.n0, "minorization step count")->capture_default_str();
  finite->add_option("--n,--n-max", fa.n_max, "curve length")->capture_default_str();
  finite->add_option("--delta", fa.delta, "threshold")->capture_default_str();

  BoundArgs ba;
  auto* bound = app.add_subcommand("bound", "Theorem-1 or Theorem-2 bound curves");
  bound->add_option("theorem", ba.theorem, "t1|t2")->required()->check(CLI::IsMember({"t1", "t2"}));
  bound->add_option("--preset", ba.preset, "halfline|pointprocess (t1), rwm-laplace (t2)");
  bound->add_option("--epsilon", ba.epsilon, "minorization constant (decimal or p/q)");
  bound->add_option("--n0", ba.n0, "minorization step count");
  bound->add_option("--lambda", ba.lambda, "drift rate");
  bound->add_option("--b", ba.b, "drift constant");
  bound->add_option("--d", ba.d, "inf of V off the small set");
  bound->add_option("--sup-rh", ba.sup_rh, "bound on sup of R-bar h over C x C");
  bound->add_option("--B", ba.b_const, "B constant (overrides --sup-rh)");
  bound->add_option("--eh", ba.eh, "E_pi h(x, Z)");
  bound->add_option("--v-start", ba.v_start, "V at the start state, for the E_pi h fallback")->capture_default_str();
  bound->add_option("--C", ba.pp_c, "point-process C");
  bound->add_option("--D", ba.pp_d, "point-process D");
  bound->add_option("--delta", ba.delta, "threshold")->capture_default_str();
  bound->add_option("--n-max", ba.n_max, "t1 curve length (default: threshold step)");
  bound->add_option("--schedule-n", ba.schedule_n, "t2: evaluate at this n");
  bound->add_option("--schedule-j", ba.schedule_j, "t2: evaluate at this j");
  bound->add_flag("--check-containment", ba.check_containment, "t2 preset: derive sup R-bar h numerically");

  SimArgs sa;
  auto* sim = app.add_subcommand("simulate", "Monte Carlo coupling simulation");
  sim->add_option("--grid", sa.src.grid, "grid walk, ROWSxCOLS");
  sim->add_option("--matrix-file", sa.src.matrix_file, "JSON transition matrix");
  sim->add_flag("--halfline", sa.halfline, "half-line mixture chain");
  sim->add_flag("--rwm-laplace", sa.laplace, "Laplace random-walk Metropolis chain");
  sim->add_option("--cert", sa.cert, "finite chains: uniform|pseudo")->capture_default_str();
  sim->add_option("--n0", sa.n0, "finite chains: minorization step count")->capture_default_str();
  sim->add_option("--start", sa.start, "finite chains: initial state label");
  sim->add_option("--x0", sa.x0, "continuous chains: initial state")->capture_default_str();
  sim->add_option("--n-max", sa.n_max, "last time simulated");
  sim->add_option("--reps", sa.reps, "replications")->capture_default_str();
  sim->add_option("--seed", sa.seed, "master seed (fallback: MCB_SEED, then 0)");
  sim->add_option("--workers", sa.workers, "worker threads")->capture_default_str();
  sim->add_option("--stride", sa.stride, "record every k-th lattice time")->capture_default_str();
  sim->add_option("--trajectories", sa.trajectories, "dump this many trajectories as CSV")->capture_default_str();
  sim->add_option("--burn-in", sa.burn_in, "half-line: burn-in steps for the stationary start")->capture_default_str();

  VerifyArgs va;
  auto* verify = app.add_subcommand("verify", "numeric drift or minorization checks");
  verify->add_option("condition", va.condition, "drift|minorization")
      ->required()
      ->check(CLI::IsMember({"drift", "minorization"}));
  verify->add_option("--preset", va.preset, "rwm-laplace, halfline or pointprocess")->required();
  verify->add_option("--lambda", va.lambda, "drift rate");
  verify->add_option("--b", va.b, "drift constant");
  verify->add_option("--epsilon", va.epsilon, "minorization constant");
  verify->add_option("--grid-lo", va.grid_lo)->capture_default_str();
  verify->add_option("--grid-hi", va.grid_hi)->capture_default_str();
  verify->add_option("--grid-step", va.grid_step)->capture_default_str();
  verify->add_option("--tolerance", va.tolerance, "pass tolerance (default 1e-6 drift, 1e-8 minorization)");
  verify->add_option("--C", va.pp_c, "point-process C");
  verify->add_option("--D", va.pp_d, "point-process D");
  verify->add_option("--samples", va.samples, "point process: Monte Carlo samples per pair")->capture_default_str();
  verify->add_option("--pairs", va.pairs, "point process: start pairs")->capture_default_str();
  verify->add_option("--seed", va.seed, "point process: master seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    Report r;
    if (finite->parsed()) {
      r = cmd_finite(fa);
    } else if (bound->parsed()) {
      r = cmd_bound(ba);
    } else if (sim->parsed()) {
      if (sa.workers == 0) throw InvalidArgument("--workers must be >= 1");
      r = cmd_simulate(sa);
    } else {
      r = cmd_verify(va);
    }
    emit(out, r);
    const auto& res = r.doc["result"];
    for (const char* key : {"steps_to_threshold", "passed", "max_violation", "min_margin"}) {
      if (res.contains(key)) std::cout << key << ": " << res[key].dump() << "\n";
    }
    if (!r.doc["warnings"].empty()) {
      std::cout << "WARN: " << r.doc["warnings"].size() << " warning(s); see report\n";
    }
    return r.doc["status"] == "ok" ? 0 : 3;
  } catch (const InvalidArgument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
