#include "cli.hpp"

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "mollikit/analysis.hpp"
#include "mollikit/feasible.hpp"
#include "mollikit/field_io.hpp"
#include "mollikit/parallel.hpp"

namespace mollikit::cli {

namespace {

using nlohmann::json;

struct Common {
  int threads = 0;
  std::uint64_t seed = 0;
  bool no_timestamp = false;
  std::string domain;
  int dim = 1;
  int resolution = 0;
};

/// A checked invariant failed after the run completed; the report is still written.
struct Failed {
  json report;
};

std::string timestamp() {
  const std::time_t t = std::time(nullptr);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

void emit(const json& report, const std::string& path, const Common& c) {
  json out = report;
  if (!c.no_timestamp) out["timestamp"] = timestamp();
  if (path.empty()) {
    std::cout << out.dump(2) << "\n";
    return;
  }
  std::ofstream os(path);
  if (!os) throw ConfigError("cannot write " + path);
  os << out.dump(2) << "\n";
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream os(path);
  if (!os) throw ConfigError("cannot write " + path);
  os << text;
}

std::vector<int> parse_int_list(const std::string& s) {
  std::vector<int> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      const int v = std::stoi(item, &used);
      if (used != item.size() || v < 1) throw std::invalid_argument(item);
      out.push_back(v);
    } catch (const std::exception&) {
      throw ConfigError("expected a list of positive integers, got '" + s + "'");
    }
  }
  if (out.empty()) throw ConfigError("empty integer list");
  return out;
}

std::vector<std::string> split(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

DomainPtr resolve_domain(const Common& c, const std::string& field_path = {}) {
  if (!c.domain.empty()) return parse_domain_spec(c.domain);
  if (!field_path.empty()) return read_field_csv(field_path).domain_ptr();
  if (c.dim < 1 || c.dim > kMaxDim) throw ConfigError("dim must be 1, 2 or 3");
  const int res = c.resolution > 0 ? c.resolution : (c.dim == 1 ? 257 : c.dim == 2 ? 65 : 17);
  return std::make_shared<Domain>(Domain::unit_box(c.dim, res));
}

int default_order(int dim) { return dim == 1 ? 64 : dim == 2 ? 32 : 12; }

Kernel parse_kernel(const std::string& spec, int dim) {
  if (spec.empty()) return make_kernel(Profile::Bump, dim, default_order(dim));
  json j;
  try {
    j = json::parse(spec);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("kernel spec is not valid JSON: ") + e.what());
  }
  const Profile p = parse_profile(j.value("profile", std::string("bump")));
  return make_kernel(p, dim, j.value("order", default_order(dim)), j.value("n", 0));
}

/// "whitney:<ε>", "regdist:<ε>", "quadratic:<ε>", or a CSV path holding η.
EtaProfile parse_eta(const std::string& spec, const DomainPtr& domain, const Kernel& kernel) {
  const auto colon = spec.find(':');
  if (colon != std::string::npos) {
    const std::string builder = spec.substr(0, colon);
    double eps = 0.0;
    try {
      eps = std::stod(spec.substr(colon + 1));
    } catch (const std::exception&) {
      throw ConfigError("bad epsilon in eta spec '" + spec + "'");
    }
    if (builder == "whitney") return build_whitney_eta(domain, domain->theta_mask(), eps);
    if (builder == "regdist") return regularized_distance(domain, eps, kernel);
    if (builder == "quadratic") return quadratic_eta(domain, eps, kernel);
    throw ConfigError("unknown eta builder '" + builder + "'");
  }
  return eta_from_field(read_field_csv(spec, domain));
}

json eta_report(const EtaProfile& e) {
  json j{{"builder", e.builder},
         {"epsilon", e.epsilon},
         {"decay", to_string(e.decay)},
         {"max_slope", e.max_slope},
         {"grad_bound", e.grad_bound},
         {"second_difference_bound", e.second_difference_bound},
         {"violations", e.violations}};
  if (e.kappa) j["kappa"] = *e.kappa;
  return j;
}

void write_vector_csv(const std::string& path, const VectorField& v) {
  std::ofstream os(path);
  if (!os) throw ConfigError("cannot write " + path);
  const Domain& d = v.components.front().domain();
  os << field_csv_header(d) << "\n";
  char buf[64];
  for (std::size_t i = 0; i < d.node_count(); ++i) {
    for (int a = 0; a < v.dim(); ++a) {
      std::snprintf(buf, sizeof buf, "%.17g", v.components[a][i]);
      os << (a ? "," : "") << buf;
    }
    os << "\n";
  }
}

// --- subcommands -------------------------------------------------------------------------------

struct EtaArgs {
  std::string builder = "whitney", alpha, kernel, out, report;
  double epsilon = 0.25;
  int bins = 64;
};

json run_eta(const Common& c, const EtaArgs& a) {
  const DomainPtr domain = resolve_domain(c, a.alpha);
  const Kernel kernel = parse_kernel(a.kernel, domain->dim());
  EtaProfile eta;
  json extra;
  if (a.builder == "whitney") {
    eta = build_whitney_eta(domain, domain->theta_mask(), a.epsilon);
  } else if (a.builder == "regdist") {
    eta = regularized_distance(domain, a.epsilon, kernel);
  } else if (a.builder == "quadratic") {
    eta = quadratic_eta(domain, a.epsilon, kernel);
  } else if (a.builder == "calibrated") {
    if (a.alpha.empty()) throw ConfigError("the calibrated builder needs --alpha");
    const ConstraintSpec spec =
        ConstraintSpec::from_alpha(read_field_csv(a.alpha, domain), ConstraintMode::Value);
    const EtaProfile base = build_whitney_eta(spec.domain, spec.theta(), std::min(a.epsilon, 0.5));
    const ModulusOfContinuity w = estimate_modulus(spec.alpha, a.bins, c.seed);
    eta = calibrated_eta(spec.domain, spec.alpha, w, base);
    eta.violations.insert(eta.violations.end(), base.violations.begin(), base.violations.end());
    extra["modulus"] = {{"knots", w.knots}, {"values", w.values}, {"floor_slope", w.floor_slope}};
  } else {
    throw ConfigError("unknown builder '" + a.builder + "'");
  }
  write_field_csv(a.out, eta.field);
  json r = eta_report(eta);
  if (!extra.is_null()) r.update(extra);
  if (!eta.violations.empty()) throw Failed{r};
  return r;
}

struct MollifyArgs {
  std::string input, eta, kernel, n = "none", variant = "standard", out, grad, report;
};

json run_mollify(const Common& c, const MollifyArgs& a) {
  const DomainPtr domain = resolve_domain(c, a.input);
  const ScalarField f = read_field_csv(a.input, domain);
  const Kernel kernel = parse_kernel(a.kernel, domain->dim());
  std::optional<int> n;
  if (a.n != "none") n = parse_int_list(a.n).at(0);
  MollifierConfig cfg;
  if (a.variant == "modified") {
    if (!n) throw ConfigError("the modified variant needs an integer --n");
    cfg = modified_config(domain, *n, kernel.order());
  } else if (a.variant == "standard") {
    if (a.eta.empty()) throw ConfigError("--eta is required for the standard variant");
    cfg.kernel = kernel;
    cfg.eta = parse_eta(a.eta, domain, kernel);
    cfg.n = n;
  } else {
    throw ConfigError("unknown variant '" + a.variant + "'");
  }
  const auto t0 = std::chrono::steady_clock::now();
  MollifyStats stats;
  const Mollifier T(cfg);
  const ScalarField tf = T.apply(f, &stats);
  if (!a.grad.empty()) write_vector_csv(a.grad, T.apply_gradient(f, gradient(f)));
  const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  write_field_csv(a.out, tf);
  json r{{"sup_ratio", stats.sup_ratio},
         {"identity_nodes", stats.identity_nodes},
         {"flagged_subgrid_nodes", stats.flagged_subgrid_nodes}};
  if (!c.no_timestamp) r["runtime_ms"] = ms;
  return r;
}

struct StudyArgs {
  std::string fixture = "sin", eta = "quadratic:0.1", kernel, n = "1,2,4,8,16", norms, variant = "standard",
              out, csv;
};

json run_study(const Common& c, const StudyArgs& a) {
  const bool custom = a.fixture.rfind("custom:", 0) == 0;
  const std::string path = custom ? a.fixture.substr(7) : std::string();
  const DomainPtr domain = resolve_domain(c, path);
  const ScalarField f = custom ? read_field_csv(path, domain) : make_fixture(a.fixture, domain);
  const Kernel kernel = parse_kernel(a.kernel, domain->dim());
  const bool step = a.fixture == "step";
  std::vector<NormSpec> norms;
  for (const auto& s : split(a.norms.empty() ? (step ? "L1" : "L1,L2,W12") : a.norms))
    norms.push_back(parse_norm(s));

  StudyOptions opts;
  ConfigFamily family;
  if (a.variant == "modified") {
    family = [&](int n) { return modified_config(domain, n, kernel.order()); };
    opts.strict_tv = step;
  } else if (a.variant == "standard") {
    const EtaProfile eta = parse_eta(a.eta, domain, kernel);
    family = [eta, kernel](int n) {
      MollifierConfig cfg;
      cfg.kernel = kernel;
      cfg.eta = eta;
      cfg.n = n;
      return cfg;
    };
    if (step) opts.tv_ceiling = 1.5;
  } else {
    throw ConfigError("unknown variant '" + a.variant + "'");
  }
  opts.decay_checks = false;
  StudyReport r = convergence_study(a.fixture, f, family, parse_int_list(a.n), norms, opts);
  for (const NormSpec& s : norms) {
    if (s.kind == NormKind::TV) continue;
    std::vector<double> e;
    for (const auto& row : r.rows) e.push_back(row.errors.at(to_string(s)));
    append_decay_checks(r, to_string(s), e);
  }
  if (!a.csv.empty()) write_text(a.csv, study_csv(r));
  json j = to_json(r, !c.no_timestamp);
  if (!r.pass()) throw Failed{j};
  return j;
}

struct Norm1Args {
  std::string eta = "quadratic:0.1", kernel, n = "1,4,16";
  std::size_t probes = 100;
  std::string out;
};

json run_norm1(const Common& c, const Norm1Args& a) {
  const DomainPtr domain = resolve_domain(c);
  const Kernel kernel = parse_kernel(a.kernel, domain->dim());
  const EtaProfile eta = parse_eta(a.eta, domain, kernel);
  json rows = json::array();
  std::vector<BoundCheck> checks;
  double prev = std::numeric_limits<double>::infinity();
  OperatorNormReport last;
  for (int n : parse_int_list(a.n)) {
    MollifierConfig cfg;
    cfg.kernel = kernel;
    cfg.eta = eta;
    cfg.n = n;
    OperatorNormOptions opts;
    opts.random_probes = a.probes;
    opts.seed = c.seed;
    last = l1_operator_norm(cfg, opts);
    json j = to_json(last);
    j["n"] = n;
    rows.push_back(j);
    checks.push_back(make_check("estimate <= 1.1 bound n=" + std::to_string(n), last.estimate, 1.1 * last.bound));
    if (std::isfinite(prev))
      checks.push_back(make_check("nonincreasing n=" + std::to_string(n), last.estimate, prev));
    prev = last.estimate;
  }
  checks.push_back(make_check("final <= 1.1 limsup bound", last.estimate, 1.1 * last.limsup_bound));
  json cj = json::array();
  bool ok = true;
  for (const auto& ch : checks) {
    cj.push_back(to_json(ch));
    ok = ok && ch.pass;
  }
  json r{{"rows", rows}, {"checks", cj}, {"pass", ok}};
  if (!ok) throw Failed{r};
  return r;
}

json run_counterexample(const std::string& resolutions) {
  const CounterexampleReport r = counterexample_run(parse_int_list(resolutions));
  json j = to_json(r);
  if (!r.pass()) throw Failed{j};
  return j;
}

struct FeasibleArgs {
  std::string f, alpha, mode = "value", n = "1,2,4,8,16", kernel, out, emit;
  double epsilon = 0.5;
  int bins = 64;
  bool truncate = false;
};

json run_feasible(const Common& c, const FeasibleArgs& a) {
  const DomainPtr domain = resolve_domain(c, a.alpha);
  const ConstraintMode mode = a.mode == "gradient" ? ConstraintMode::Gradient
                              : a.mode == "value"  ? ConstraintMode::Value
                                                   : throw ConfigError("unknown mode '" + a.mode + "'");
  const ConstraintSpec spec = ConstraintSpec::from_alpha(read_field_csv(a.alpha, domain), mode);
  const ScalarField f = read_field_csv(a.f, domain);
  const Kernel kernel = parse_kernel(a.kernel, domain->dim());
  const EtaProfile base = build_whitney_eta(spec.domain, spec.theta(), a.epsilon);
  const ModulusOfContinuity w = estimate_modulus(spec.alpha, a.bins, c.seed);
  const EtaProfile eta = calibrated_eta(spec.domain, spec.alpha, w, base);
  const std::vector<int> ns = parse_int_list(a.n);
  DensityOptions opts;
  opts.truncate = a.truncate;
  const StudyReport r = density_study("custom", f, spec, eta, kernel, ns, opts);
  if (!a.emit.empty()) {
    std::filesystem::create_directories(a.emit);
    for (int n : ns) {
      const ScalarField input = a.truncate ? truncate_near_theta(f, spec, 1.0 / n) : f;
      const FeasibleResult fr = feasible_smooth(input, spec, eta, kernel, n);
      write_field_csv(std::filesystem::path(a.emit) / ("iterate_n" + std::to_string(n) + ".csv"), fr.g);
    }
  }
  json j = to_json(r, !c.no_timestamp);
  j["eta"] = eta_report(eta);
  std::vector<double> ratios;
  for (int n : ns) ratios.push_back(calibration_ratio(eta, spec.alpha, w, n));
  j["calibration_ratio"] = ratios;
  if (!r.pass() || !eta.violations.empty()) throw Failed{j};
  return j;
}

json error_json(const char* kind, const std::string& what) { return {{"error", kind}, {"message", what}}; }

}  // namespace

int run(int argc, char** argv) {
  CLI::App app{"Variable-step mollifiers: step functions, smoothing, norms and feasibility studies"};
  app.require_subcommand(1);
  Common c;
  std::string out;
  auto common = [&](CLI::App* s) {
    s->add_option("--threads", c.threads, "worker threads (default MOLLIKIT_THREADS or 1)");
    s->add_option("--seed", c.seed, "seed for randomized sampling");
    s->add_flag("--no-timestamp", c.no_timestamp, "omit timestamps and timings from reports");
    s->add_option("--domain", c.domain, "domain spec (JSON or path)");
    s->add_option("--dim", c.dim, "dimension of the default unit box");
    s->add_option("--resolution", c.resolution, "nodes per axis of the default unit box");
  };

  EtaArgs eta_a;
  auto* eta = app.add_subcommand("eta", "build a step function");
  common(eta);
  eta->add_option("--builder", eta_a.builder)->check(CLI::IsMember({"whitney", "regdist", "quadratic", "calibrated"}));
  eta->add_option("--epsilon", eta_a.epsilon);
  eta->add_option("--alpha", eta_a.alpha);
  eta->add_option("--kernel", eta_a.kernel);
  eta->add_option("--bins", eta_a.bins);
  eta->add_option("--out", eta_a.out)->required();
  eta->add_option("--report", eta_a.report);

  MollifyArgs mol_a;
  auto* mol = app.add_subcommand("mollify", "apply a mollifier to a field");
  common(mol);
  mol->add_option("--input", mol_a.input)->required();
  mol->add_option("--eta", mol_a.eta);
  mol->add_option("--kernel", mol_a.kernel);
  mol->add_option("--n", mol_a.n);
  mol->add_option("--variant", mol_a.variant);
  mol->add_option("--out", mol_a.out)->required();
  mol->add_option("--grad", mol_a.grad);
  mol->add_option("--report", mol_a.report);

  StudyArgs st_a;
  auto* st = app.add_subcommand("study", "convergence study on a fixture");
  common(st);
  st->add_option("--fixture", st_a.fixture);
  st->add_option("--eta", st_a.eta);
  st->add_option("--kernel", st_a.kernel);
  st->add_option("--n", st_a.n);
  st->add_option("--norms", st_a.norms);
  st->add_option("--variant", st_a.variant);
  st->add_option("--out", st_a.out);
  st->add_option("--csv", st_a.csv);

  Norm1Args n1_a;
  auto* n1 = app.add_subcommand("norm1", "estimate the L1 operator norm");
  common(n1);
  n1->add_option("--eta", n1_a.eta);
  n1->add_option("--kernel", n1_a.kernel);
  n1->add_option("--probes", n1_a.probes);
  n1->add_option("--n", n1_a.n);
  n1->add_option("--out", n1_a.out);

  std::string resolutions = "257,1025";
  auto* ce = app.add_subcommand("counterexample", "the unbounded-on-L1 example");
  common(ce);
  ce->add_option("--resolutions", resolutions);
  ce->add_option("--out", out);

  FeasibleArgs fe_a;
  auto* fe = app.add_subcommand("feasible", "feasible smoothing under a pointwise bound");
  common(fe);
  fe->add_option("--f", fe_a.f)->required();
  fe->add_option("--alpha", fe_a.alpha)->required();
  fe->add_option("--mode", fe_a.mode);
  fe->add_option("--n", fe_a.n);
  fe->add_option("--kernel", fe_a.kernel);
  fe->add_option("--epsilon", fe_a.epsilon);
  fe->add_option("--bins", fe_a.bins);
  fe->add_flag("--truncate", fe_a.truncate);
  fe->add_option("--out", fe_a.out);
  fe->add_option("--emit-iterates", fe_a.emit);

  auto* self = app.add_subcommand("selftest", "run the built-in invariant suite");
  common(self);
  self->add_option("--out", out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  std::string report_path;
  try {
    if (c.threads < 0) throw ConfigError("--threads must be positive");
    if (c.threads > 0) set_thread_count(c.threads);
    json r;
    if (*eta) {
      report_path = eta_a.report;
      r = run_eta(c, eta_a);
    } else if (*mol) {
      report_path = mol_a.report;
      r = run_mollify(c, mol_a);
    } else if (*st) {
      report_path = st_a.out;
      r = run_study(c, st_a);
    } else if (*n1) {
      report_path = n1_a.out;
      r = run_norm1(c, n1_a);
    } else if (*ce) {
      report_path = out;
      r = run_counterexample(resolutions);
    } else if (*fe) {
      report_path = fe_a.out;
      r = run_feasible(c, fe_a);
    } else if (*self) {
      report_path = out;
      r = selftest();
      if (!r.at("pass").get<bool>()) throw Failed{r};
    }
    emit(r, report_path, c);
    return 0;
  } catch (const Failed& f) {
    json r = f.report;
    std::vector<std::string> failed;
    if (r.contains("checks"))
      for (const auto& ch : r["checks"])
        if (!ch.value("pass", true)) failed.push_back(ch.value("name", std::string()));
    if (!r.value("violations", json::array()).empty()) failed.push_back("violations");
    r["failed"] = failed;
    try {
      emit(r, report_path, c);
    } catch (const std::exception&) {
    }
    std::cerr << json{{"error", "assertion"}, {"failed", failed}}.dump() << "\n";
    return 1;
  } catch (const ConfigError& e) {
    std::cerr << error_json("config", e.what()).dump() << "\n";
    return 2;
  } catch (const CertificationError& e) {
    std::cerr << error_json("certification", e.what()).dump() << "\n";
    return 1;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << error_json("io", e.what()).dump() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << error_json("internal", e.what()).dump() << "\n";
    return 1;
  }
}

}  // namespace mollikit::cli
