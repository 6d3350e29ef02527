#include "mollikit/analysis.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>
#include <random>
#include <set>
#include <sstream>

#include "mollikit/parallel.hpp"

namespace mollikit {

namespace {

double elapsed_ms(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

ScalarField difference(const ScalarField& a, const ScalarField& b) {
  ScalarField out(a.domain_ptr());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
  return out;
}

double accumulate_p(double acc, double v, double p) {
  return std::isinf(p) ? std::max(acc, v) : acc + std::pow(v, p);
}

double finish_p(double acc, double p, double cell) {
  return std::isinf(p) ? acc : std::pow(cell * acc, 1.0 / p);
}

}  // namespace

NormSpec parse_norm(const std::string& name) {
  auto parse_p = [&](const std::string& s) {
    if (s == "inf") return std::numeric_limits<double>::infinity();
    try {
      std::size_t used = 0;
      const double p = std::stod(s, &used);
      if (used == s.size() && p >= 1.0) return p;
    } catch (const std::exception&) {
    }
    throw ConfigError("unknown norm '" + name + "'");
  };
  if (name == "TV") return {NormKind::TV, 1.0};
  if (name == "H1") return {NormKind::W1pSemi, 2.0};
  if (name.size() > 2 && name.rfind("W1", 0) == 0) return {NormKind::W1p, parse_p(name.substr(2))};
  if (name.size() > 1 && name[0] == 'L') return {NormKind::Lp, parse_p(name.substr(1))};
  throw ConfigError("unknown norm '" + name + "'");
}

std::string to_string(const NormSpec& spec) {
  auto p = [&] {
    if (std::isinf(spec.p)) return std::string("inf");
    std::ostringstream os;
    os << spec.p;
    return os.str();
  };
  switch (spec.kind) {
    case NormKind::Lp: return "L" + p();
    case NormKind::W1p: return "W1" + p();
    case NormKind::W1pSemi: return spec.p == 2.0 ? "H1" : "W1" + p() + "semi";
    case NormKind::TV: return "TV";
  }
  return "?";
}

double norm(const ScalarField& f, const NormSpec& spec) {
  const Domain& d = f.domain();
  const double cell = d.cell_volume();
  const int dim = d.dim();
  if (spec.kind == NormKind::TV) {
    double acc = 0.0;
    for (std::size_t i = 0; i < d.node_count(); ++i) {
      const auto c = d.coords(i);
      bool touches = d.inside(i);
      double s = 0.0;
      for (int a = 0; a < dim; ++a) {
        if (c[a] + 1 >= d.shape(a)) continue;
        const std::size_t j = i + d.stride(a);
        touches = touches || d.inside(j);
        const double g = (f[j] - f[i]) / d.spacing(a);
        s += g * g;
      }
      if (touches) acc += std::sqrt(s);
    }
    return cell * acc;
  }
  const double p = spec.p;
  double acc = 0.0;
  for (std::size_t i = 0; i < d.node_count(); ++i) {
    if (!d.inside(i)) continue;
    if (spec.kind != NormKind::W1pSemi) acc = accumulate_p(acc, std::abs(f[i]), p);
    if (spec.kind != NormKind::Lp) {
      double s = 0.0;
      for (int a = 0; a < dim; ++a) {
        const double g = f.derivative(i, a);
        s += g * g;
      }
      acc = accumulate_p(acc, std::sqrt(s), p);
    }
  }
  return finish_p(acc, p, cell);
}

BoundCheck make_check(std::string name, double lhs, double rhs, double slack) {
  return BoundCheck{std::move(name), lhs, rhs, lhs <= rhs + slack};
}

// --- weak L1 -----------------------------------------------------------------------------------

WeakL1Report weak_l1_check(const ScalarField& f, const MollifierConfig& cfg,
                           const std::vector<double>& lambdas) {
  const Mollifier T(cfg);
  const Domain& d = T.domain();
  const ScalarField tf = T.apply(f);
  WeakL1Report r;
  r.constant = std::pow(5.0, d.dim()) * unit_ball_volume(d.dim()) * cfg.kernel.m_rho();
  r.l1_norm = norm(f, {NormKind::Lp, 1.0});
  const double cell = d.cell_volume();
  for (double lambda : lambdas) {
    if (!(lambda > 0.0)) throw ConfigError("weak-L1 levels must be positive");
    std::size_t count = 0;
    for (std::size_t i = 0; i < d.node_count(); ++i)
      if (d.inside(i) && std::abs(tf[i]) > lambda) ++count;
    WeakL1Row row;
    row.lambda = lambda;
    row.measure = cell * static_cast<double>(count);
    row.rhs = r.constant / lambda * r.l1_norm + cell;
    row.pass = row.measure <= row.rhs;
    if (!row.pass) ++r.violations;
    r.rows.push_back(row);
  }
  return r;
}

// --- L1 operator norm --------------------------------------------------------------------------

double interpolant_lipschitz(const ScalarField& f) {
  // Inside one cell, ∂_a of the multilinear interpolant is a convex combination of the
  // slopes of the cell's edges along a, so the cellwise bound below is rigorous.
  const Domain& d = f.domain();
  const int dim = d.dim();
  const int corners = 1 << dim;
  double best = 0.0;
  for (std::size_t i = 0; i < d.node_count(); ++i) {
    const auto c = d.coords(i);
    bool lower_corner = true;
    for (int a = 0; a < dim; ++a) lower_corner = lower_corner && c[a] + 1 < d.shape(a);
    if (!lower_corner) continue;
    double sum = 0.0;
    for (int a = 0; a < dim; ++a) {
      double m = 0.0;
      for (int mask = 0; mask < corners; ++mask) {
        if (mask & (1 << a)) continue;
        std::size_t j = i;
        for (int b = 0; b < dim; ++b)
          if (mask & (1 << b)) j += d.stride(b);
        m = std::max(m, std::abs(f[j + d.stride(a)] - f[j]) / d.spacing(a));
      }
      sum += m * m;
    }
    best = std::max(best, std::sqrt(sum));
  }
  return best;
}

double operator_norm_integral(const Mollifier& T, const Point& y, double lipschitz) {
  if (!(lipschitz < 1.0)) throw ConfigError("step Lipschitz bound must be below 1");
  const Domain& d = T.domain();
  const Kernel& k = T.kernel();
  const double sy = T.step_at(y);
  if (!(sy > 0.0)) return 0.0;
  // Every x with |x - y| < s(x) lies in B_R(y) because s(x) <= s(y) + λ|x - y|.
  const double radius = sy / (1.0 - lipschitz);
  const int dim = d.dim();
  const double volume = std::pow(radius, dim);
  double acc = 0.0;
  for (std::size_t q = 0; q < k.nodes().size(); ++q) {
    Point x{};
    for (int a = 0; a < dim; ++a) x[a] = y[a] + radius * k.nodes()[q][a];
    if (!d.in_bbox(x)) continue;
    const double s = T.step_at(x);
    if (!(s > 0.0)) continue;
    double r2 = 0.0;
    for (int a = 0; a < dim; ++a) r2 += (x[a] - y[a]) * (x[a] - y[a]);
    const double r = std::sqrt(r2) / s;
    if (r >= 1.0) continue;
    acc += volume * k.weights()[q] * k.m_rho() / std::pow(s, dim) * k.profile_value(r);
  }
  return acc;
}

OperatorNormReport l1_operator_norm(const MollifierConfig& cfg, const OperatorNormOptions& opts) {
  if (cfg.eta.decay != Decay::Quadratic || !cfg.eta.kappa)
    throw ConfigError("the L1 operator norm bound needs a quadratic step with certified kappa");
  const Mollifier raw(cfg);
  const Domain& d = raw.domain();
  const ScalarField sigma = distance_field(raw.domain_ptr(), DistanceTarget::Boundary);
  double max_sigma = 0.0;
  for (std::size_t i = 0; i < d.node_count(); ++i) max_sigma = std::max(max_sigma, sigma[i]);

  // Probes: the boundary strip where the sup lives, plus seeded interior samples.
  std::set<std::size_t> chosen;
  std::vector<std::size_t> interior;
  for (std::size_t i = 0; i < d.node_count(); ++i) {
    if (!d.inside(i)) continue;
    interior.push_back(i);
    if (sigma[i] <= d.diameter() / 8.0) chosen.insert(i);
  }
  std::mt19937_64 rng(opts.seed);
  if (!interior.empty()) {
    std::uniform_int_distribution<std::size_t> pick(0, interior.size() - 1);
    for (std::size_t k = 0; k < opts.random_probes; ++k) chosen.insert(interior[pick(rng)]);
  }
  const std::vector<std::size_t> probes(chosen.begin(), chosen.end());

  auto sup = [&](const Mollifier& T, std::size_t* where) {
    const double lip = interpolant_lipschitz(T.step());
    std::vector<double> vals(probes.size());
    parallel_for(probes.size(), [&](std::size_t j) {
      vals[j] = operator_norm_integral(T, d.point(probes[j]), lip);
    });
    double best = 0.0;
    for (std::size_t j = 0; j < vals.size(); ++j) {
      if (vals[j] > best) {
        best = vals[j];
        if (where) *where = probes[j];
      }
    }
    return std::pair{best, lip};
  };

  OperatorNormReport r;
  r.probes = probes.size();
  const bool rescaled = opts.rescale && max_sigma >= 0.125;
  r.lipschitz = interpolant_lipschitz(raw.step());
  if (r.lipschitz < 1.0 || !rescaled) {
    std::size_t where = 0;
    const auto [raw_est, raw_lip] = sup(raw, &where);
    r.estimate_raw = raw_est;
    r.estimate = raw_est;
    r.argmax_node = where;
  } else {
    // The unscaled lattice radius s/(1-λ) is undefined; only the rescaled estimate is meaningful.
    r.estimate_raw = std::numeric_limits<double>::quiet_NaN();
  }
  if (rescaled) {
    // Shrinking Ω by a factor L maps a quadratic step to L²η, i.e. L·η in original units.
    r.scale = 0.125 / max_sigma * 0.999;
    MollifierConfig scaled = cfg;
    scaled.step_scale *= r.scale;
    const auto [est, lip] = sup(Mollifier(scaled), &r.argmax_node);
    r.estimate = est;
    r.lipschitz = lip;
  }
  const int n = d.dim();
  const double kappa = *cfg.eta.kappa;
  const double base = cfg.kernel.m_rho() * unit_ball_volume(n);
  r.bound = base * (1.0 + n * std::log(2.0 / kappa));
  r.limsup_bound = base * (1.0 + n * std::log(1.0 / kappa));
  r.pass = r.estimate <= 1.1 * r.bound;
  return r;
}

// --- convergence studies -----------------------------------------------------------------------

bool StudyReport::pass() const {
  return std::all_of(checks.begin(), checks.end(), [](const BoundCheck& c) { return c.pass; });
}

void append_decay_checks(StudyReport& report, const std::string& label,
                         const std::vector<double>& errors) {
  if (errors.empty()) return;
  constexpr double floor = 1e-14;
  bool monotone = true;
  double worst = 0.0;
  for (std::size_t k = 1; k < errors.size(); ++k) {
    const double excess = errors[k] - 1.05 * errors[k - 1];
    worst = std::max(worst, excess);
    monotone = monotone && excess <= floor;
  }
  report.checks.push_back(BoundCheck{"monotone " + label, worst, 0.0, monotone});
  report.checks.push_back(make_check("decay " + label, errors.back(), 0.3 * errors.front(), floor));
}

StudyReport convergence_study(const std::string& fixture, const ScalarField& f,
                              const ConfigFamily& family, const std::vector<int>& n_list,
                              const std::vector<NormSpec>& norms, const StudyOptions& opts) {
  StudyReport r;
  r.fixture = fixture;
  r.n_values = n_list;
  r.reference_tv = norm(f, {NormKind::TV, 1.0});
  std::map<std::string, std::vector<double>> series;
  for (int n : n_list) {
    const auto t0 = std::chrono::steady_clock::now();
    const MollifierConfig cfg = family(n);
    const ScalarField g = Mollifier(cfg).apply(f);
    const ScalarField e = difference(g, f);
    StudyRow row;
    row.n = n;
    for (const NormSpec& spec : norms) {
      const double v = norm(e, spec);
      row.errors[to_string(spec)] = v;
      series[to_string(spec)].push_back(v);
    }
    row.tv = norm(g, {NormKind::TV, 1.0});
    if (opts.strict_tv && n >= 2) {
      const double zeta = 1.0 / (1.0 - 1.0 / n) - 1.0 + cfg.eta.grad_bound / n + 0.05;
      r.checks.push_back(make_check("strict TV n=" + std::to_string(n),
                                    std::abs(row.tv - r.reference_tv), zeta * r.reference_tv));
    }
    if (opts.tv_ceiling)
      r.checks.push_back(make_check("bounded TV n=" + std::to_string(n), row.tv,
                                    *opts.tv_ceiling * r.reference_tv));
    row.runtime_ms = elapsed_ms(t0);
    r.rows.push_back(std::move(row));
  }
  if (opts.decay_checks)
    for (const NormSpec& spec : norms) append_decay_checks(r, to_string(spec), series[to_string(spec)]);
  return r;
}

ScalarField make_fixture(const std::string& name, const DomainPtr& domain) {
  const int dim = domain->dim();
  auto unit = [&](const Point& p, int a) {
    const Interval& iv = domain->bbox(a);
    return (p[a] - iv.lo) / (iv.hi - iv.lo);
  };
  if (name == "sin")
    return sample(domain, [&](const Point& p) {
      double v = 1.0;
      for (int a = 0; a < dim; ++a) v *= std::sin(std::numbers::pi * unit(p, a));
      return v;
    });
  if (name == "poly")
    return sample(domain, [&](const Point& p) {
      double v = 1.0;
      for (int a = 0; a < dim; ++a) v *= 4.0 * unit(p, a) * (1.0 - unit(p, a));
      return v;
    });
  if (name == "step")
    return sample(domain, [&](const Point& p) { return unit(p, 0) > 0.5 ? 1.0 : 0.0; });
  if (name == "const") return ScalarField(domain, 1.0);
  if (name == "linear") return sample(domain, [&](const Point& p) { return unit(p, 0); });
  throw ConfigError("unknown fixture '" + name + "'");
}

// --- trace -------------------------------------------------------------------------------------

bool TraceReport::pass() const {
  return std::all_of(rows.begin(), rows.end(), [](const TraceRow& r) { return r.pass; });
}

TraceReport trace_check(const ScalarField& f, const MollifierConfig& cfg,
                        const std::vector<double>& width_cells) {
  const Mollifier T(cfg);
  const Domain& d = T.domain();
  const ScalarField tf = T.apply(f);
  const ScalarField sigma = distance_field(T.domain_ptr(), DistanceTarget::Boundary);
  std::vector<double> osc(d.node_count(), 0.0);
  auto sampler = [&f](const Point& p) { return f.at(p); };
  parallel_for(d.node_count(), [&](std::size_t i) { osc[i] = T.oscillation_node(i, sampler); });
  double scale = 0.0;
  for (std::size_t i = 0; i < d.node_count(); ++i) scale = std::max(scale, std::abs(f[i]));

  TraceReport r;
  for (double cells : width_cells) {
    TraceRow row;
    row.width = cells * d.h();
    for (std::size_t i = 0; i < d.node_count(); ++i) {
      if (!d.inside(i) || sigma[i] > row.width) continue;
      ++row.nodes;
      row.max_error = std::max(row.max_error, std::abs(tf[i] - f[i]));
      row.oscillation = std::max(row.oscillation, osc[i]);
    }
    // Interpolating at a node reproduces the node value up to round-off.
    row.pass = row.max_error <= row.oscillation + 1e-14 * (1.0 + scale);
    r.rows.push_back(row);
  }
  return r;
}

// --- JSON --------------------------------------------------------------------------------------

nlohmann::json to_json(const BoundCheck& c) {
  return {{"name", c.name}, {"lhs", c.lhs}, {"rhs", c.rhs}, {"pass", c.pass}};
}

nlohmann::json to_json(const StudyReport& r, bool timing) {
  nlohmann::json rows = nlohmann::json::array();
  for (const StudyRow& row : r.rows) {
    nlohmann::json j{{"n", row.n}, {"errors", row.errors}, {"tv", row.tv}};
    if (timing) j["runtime_ms"] = row.runtime_ms;
    rows.push_back(std::move(j));
  }
  nlohmann::json checks = nlohmann::json::array();
  for (const BoundCheck& c : r.checks) checks.push_back(to_json(c));
  return {{"fixture", r.fixture}, {"n_values", r.n_values}, {"reference_tv", r.reference_tv},
          {"rows", rows},         {"checks", checks},       {"pass", r.pass()}};
}

nlohmann::json to_json(const WeakL1Report& r) {
  nlohmann::json rows = nlohmann::json::array();
  for (const WeakL1Row& row : r.rows)
    rows.push_back({{"lambda", row.lambda}, {"measure", row.measure}, {"rhs", row.rhs}, {"pass", row.pass}});
  return {{"constant", r.constant}, {"l1_norm", r.l1_norm}, {"rows", rows}, {"violations", r.violations}};
}

nlohmann::json to_json(const OperatorNormReport& r) {
  return {{"estimate", r.estimate},         {"estimate_raw", r.estimate_raw},
          {"bound", r.bound},               {"limsup_bound", r.limsup_bound},
          {"scale", r.scale},               {"lipschitz", r.lipschitz},
          {"probes", r.probes},             {"argmax_node", r.argmax_node},
          {"pass", r.pass}};
}

nlohmann::json to_json(const TraceReport& r) {
  nlohmann::json rows = nlohmann::json::array();
  for (const TraceRow& row : r.rows)
    rows.push_back({{"width", row.width},
                    {"max_error", row.max_error},
                    {"oscillation", row.oscillation},
                    {"nodes", row.nodes},
                    {"pass", row.pass}});
  return {{"rows", rows}, {"pass", r.pass()}};
}

nlohmann::json to_json(const CounterexampleReport& r) {
  nlohmann::json grid = nlohmann::json::array();
  for (const auto& g : r.grid)
    grid.push_back({{"resolution", g.resolution}, {"x", g.x}, {"tf", g.tf_quarter}, {"closed", g.closed}});
  nlohmann::json checks = nlohmann::json::array();
  for (const BoundCheck& c : r.checks) checks.push_back(to_json(c));
  return {{"deltas", r.deltas},
          {"integrals", r.integrals},
          {"integrals_closed", r.integrals_closed},
          {"f0_norms", r.f0_norms},
          {"f0_norms_closed", r.f0_norms_closed},
          {"slope", r.slope},
          {"tf_quarter", r.tf_quarter},
          {"grid", grid},
          {"checks", checks},
          {"pass", r.pass()}};
}

std::string study_csv(const StudyReport& r) {
  std::ostringstream os;
  os.precision(17);
  os << "n";
  std::vector<std::string> names;
  if (!r.rows.empty())
    for (const auto& [k, v] : r.rows.front().errors) names.push_back(k);
  for (const auto& k : names) os << "," << k;
  os << ",TV\n";
  for (const StudyRow& row : r.rows) {
    os << row.n;
    for (const auto& k : names) os << "," << row.errors.at(k);
    os << "," << row.tv << "\n";
  }
  return os.str();
}

}  // namespace mollikit
