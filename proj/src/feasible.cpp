#include "mollikit/feasible.hpp"

#include <chrono>
#include <cmath>
#include <sstream>

#include "mollikit/parallel.hpp"

namespace mollikit {

namespace {

/// |w| or |∇w| at every node, per the constraint mode.
ScalarField constrained_quantity(const ScalarField& f, ConstraintMode mode) {
  if (mode == ConstraintMode::Gradient) return gradient_magnitude(f);
  ScalarField out(f.domain_ptr());
  for (std::size_t i = 0; i < f.size(); ++i) out[i] = std::abs(f[i]);
  return out;
}

}  // namespace

ConstraintSpec ConstraintSpec::from_alpha(ScalarField alpha, ConstraintMode mode) {
  const Domain& d = alpha.domain();
  ConstraintSpec s;
  s.mode = mode;
  s.delta.assign(d.node_count(), 0);
  for (std::size_t i = 0; i < d.node_count(); ++i) {
    if (!std::isfinite(alpha[i]) || alpha[i] < 0.0)
      throw ConfigError("alpha must be finite and nonnegative at node " + std::to_string(i));
    s.delta[i] = d.inside(i) && alpha[i] == 0.0;
  }
  s.gamma = d.gamma_mask();
  s.domain = std::make_shared<Domain>(d.with_delta(s.delta));
  s.alpha_lipschitz = adjacent_slope_bound(alpha);
  s.alpha = ScalarField(s.domain, std::vector<double>(alpha.values().begin(), alpha.values().end()));
  return s;
}

Membership membership(const ScalarField& f, const ConstraintSpec& spec, double tolerance) {
  const Domain& d = f.domain();
  if (d.node_count() != spec.alpha.size()) throw ConfigError("f and alpha grids differ");
  const ScalarField q = constrained_quantity(f, spec.mode);
  Membership m;
  m.margin = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < d.node_count(); ++i) {
    if (!d.inside(i)) continue;
    const double v = q[i] - spec.alpha[i];
    if (v > m.margin) {
      m.margin = v;
      m.worst_node = i;
    }
  }
  m.member = m.margin <= tolerance;
  return m;
}

ConvergenceFactor convergence_factor(const ConstraintSpec& spec, const EtaProfile& eta,
                                     const Kernel& kernel, int n) {
  MollifierConfig cfg;
  cfg.kernel = kernel;
  cfg.eta = eta;
  cfg.n = n;
  const Mollifier T(cfg);
  const Domain& d = T.domain();
  const NodeMask theta = spec.theta();
  const int dim = d.dim();
  ConvergenceFactor out;
  out.m = ScalarField(T.domain_ptr(), 1.0);
  std::vector<std::string> errors(d.node_count());
  parallel_for(d.node_count(), [&](std::size_t i) {
    if (theta[i] || !d.inside(i)) return;
    const double a = spec.alpha[i];
    if (!(a > 0.0)) {
      errors[i] = "alpha vanishes off delta at node " + std::to_string(i);
      return;
    }
    const double s = T.step()[i];
    if (s <= 0.0) return;
    const Point x = d.point(i);
    double best = a;
    auto visit = [&](const Point& dir) {
      Point p{};
      for (int k = 0; k < dim; ++k) p[k] = x[k] - s * dir[k];
      best = std::max(best, spec.alpha.at(p));
    };
    for (const Point& z : kernel.nodes()) visit(z);
    for (int k = 0; k < dim; ++k) {
      Point e{};
      e[k] = 1.0;
      visit(e);
      e[k] = -1.0;
      visit(e);
    }
    out.m[i] = best / a;
  });
  for (const auto& e : errors)
    if (!e.empty()) throw ConfigError(e);
  for (std::size_t i = 0; i < d.node_count(); ++i)
    out.sup_excess = std::max(out.sup_excess, out.m[i] - 1.0);
  return out;
}

FeasibleResult feasible_smooth(const ScalarField& f, const ConstraintSpec& spec,
                               const EtaProfile& eta, const Kernel& kernel, int n) {
  const Domain& d = f.domain();
  FeasibleResult r;
  r.slack = 1e-8 + 3.0 * d.h() * spec.alpha_lipschitz;
  // Central differences of a member of K_G may overshoot α by O(h²); allow the same slack.
  const double entry_tol = spec.mode == ConstraintMode::Gradient ? r.slack : 1e-12;
  const Membership in = membership(f, spec, entry_tol);
  if (!in.member) {
    std::ostringstream os;
    os << "input is not in the constraint set: margin " << in.margin << " at node " << in.worst_node;
    throw ConfigError(os.str());
  }

  const ConvergenceFactor mf = convergence_factor(spec, eta, kernel, n);
  double excess = mf.sup_excess;
  if (spec.mode == ConstraintMode::Gradient) {
    const double k = 1.0 + eta.grad_bound / n;
    for (std::size_t i = 0; i < d.node_count(); ++i) excess = std::max(excess, k * mf.m[i] - 1.0);
  }
  r.sup_excess = excess;
  r.beta = 1.0 / (1.0 + excess);

  MollifierConfig cfg;
  cfg.kernel = kernel;
  cfg.eta = eta;
  cfg.n = n;
  const ScalarField tf = Mollifier(cfg).apply(f);
  r.g = ScalarField(f.domain_ptr());
  for (std::size_t i = 0; i < d.node_count(); ++i) r.g[i] = r.beta * tf[i];

  r.chain_margin = -std::numeric_limits<double>::infinity();
  if (spec.mode == ConstraintMode::Value) {
    for (std::size_t i = 0; i < d.node_count(); ++i)
      if (d.inside(i)) r.chain_margin = std::max(r.chain_margin, std::abs(tf[i]) - mf.m[i] * spec.alpha[i]);
  }
  r.membership = membership(r.g, spec, r.slack);
  return r;
}

ScalarField truncate_near_theta(const ScalarField& f, const ConstraintSpec& spec, double width) {
  const ScalarField dist = distance_field(spec.domain, DistanceTarget::Theta);
  ScalarField out(f.domain_ptr());
  for (std::size_t i = 0; i < f.size(); ++i) out[i] = dist[i] >= width ? f[i] : 0.0;
  return out;
}

StudyReport density_study(const std::string& fixture, const ScalarField& f,
                          const ConstraintSpec& spec, const EtaProfile& eta, const Kernel& kernel,
                          const std::vector<int>& n_list, const DensityOptions& opts) {
  std::vector<NormSpec> norms = opts.norms;
  if (norms.empty())
    norms.push_back(spec.mode == ConstraintMode::Value ? NormSpec{NormKind::Lp, 2.0}
                                                        : NormSpec{NormKind::W1p, 2.0});
  StudyReport r;
  r.fixture = fixture;
  r.n_values = n_list;
  r.reference_tv = norm(f, {NormKind::TV, 1.0});
  std::map<std::string, std::vector<double>> series;
  std::vector<double> betas, excess;
  for (int n : n_list) {
    const auto t0 = std::chrono::steady_clock::now();
    const ScalarField input = opts.truncate ? truncate_near_theta(f, spec, 1.0 / n) : f;
    const FeasibleResult fr = feasible_smooth(input, spec, eta, kernel, n);
    StudyRow row;
    row.n = n;
    ScalarField e(f.domain_ptr());
    for (std::size_t i = 0; i < f.size(); ++i) e[i] = fr.g[i] - f[i];
    for (const NormSpec& s : norms) {
      const double v = norm(e, s);
      row.errors[to_string(s)] = v;
      series[to_string(s)].push_back(v);
    }
    row.errors["beta"] = fr.beta;
    row.errors["M_excess"] = fr.sup_excess;
    row.tv = norm(fr.g, {NormKind::TV, 1.0});
    r.checks.push_back(make_check("feasible n=" + std::to_string(n), fr.membership.margin, fr.slack));
    if (spec.mode == ConstraintMode::Value)
      r.checks.push_back(make_check("chain |Tf| <= M alpha n=" + std::to_string(n), fr.chain_margin,
                                    0.0, 1e-10));
    bool zero_on_delta = true;
    for (std::size_t i = 0; i < f.size(); ++i)
      if (spec.delta[i] && fr.g[i] != 0.0) zero_on_delta = false;
    r.checks.push_back(BoundCheck{"vanishes on delta n=" + std::to_string(n), 0.0, 0.0, zero_on_delta});
    betas.push_back(fr.beta);
    excess.push_back(fr.sup_excess);
    row.runtime_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    r.rows.push_back(std::move(row));
  }
  for (const NormSpec& s : norms) append_decay_checks(r, to_string(s), series[to_string(s)]);
  for (std::size_t k = 1; k < betas.size(); ++k)
    r.checks.push_back(make_check("beta nondecreasing n=" + std::to_string(n_list[k]), betas[k - 1],
                                  betas[k]));
  for (std::size_t a = 0; a < n_list.size(); ++a) {
    for (std::size_t b = 0; b < n_list.size(); ++b) {
      if (n_list[b] != 4 * n_list[a]) continue;
      r.checks.push_back(make_check("M excess halves n=" + std::to_string(n_list[a]) + "->" +
                                        std::to_string(n_list[b]),
                                    excess[b], 0.5 * 1.1 * excess[a], 1e-14));
    }
    if (n_list[a] == 64) r.checks.push_back(make_check("beta_64 >= 0.95", 0.95, betas[a]));
  }
  return r;
}

}  // namespace mollikit
