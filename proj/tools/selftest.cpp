// Compact invariant suite behind `mollikit selftest`. Sizes are small so the whole run
// takes seconds; the report is bit-identical for any worker count.
#include <cmath>
#include <functional>
#include <numbers>

#include "cli.hpp"
#include "mollikit/analysis.hpp"
#include "mollikit/feasible.hpp"

namespace mollikit::cli {

namespace {

using nlohmann::json;

DomainPtr unit(int dim, int nodes) { return std::make_shared<Domain>(Domain::unit_box(dim, nodes)); }

MollifierConfig standard(const Kernel& k, const EtaProfile& eta, std::optional<int> n) {
  MollifierConfig cfg;
  cfg.kernel = k;
  cfg.eta = eta;
  cfg.n = n;
  return cfg;
}

double max_abs_diff(const ScalarField& a, const ScalarField& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

void exactness(std::vector<BoundCheck>& out, int dim, int nodes, int order) {
  const std::string tag = " (" + std::to_string(dim) + "D)";
  const DomainPtr d = unit(dim, nodes);
  const Kernel k = make_kernel(Profile::Bump, dim, order);
  const MollifierConfig cfg = standard(k, quadratic_eta(d, 0.1, k), std::nullopt);
  const Mollifier T(cfg);

  const ScalarField c(d, 3.25);
  out.push_back(make_check("T(c) = c" + tag, max_abs_diff(T.apply(c), c), 1e-12));

  const ScalarField affine = sample(d, [&](const Point& p) { return 0.5 + 2.0 * p[0] - (dim > 1 ? p[1] : 0.0); });
  out.push_back(make_check("affine reproduction" + tag, max_abs_diff(T.apply(affine), affine), 1e-10));

  const ScalarField f = make_fixture("sin", d);
  const ScalarField g = sample(d, [&](const Point& p) { return std::cos(5.0 * p[0]) + p[0] * p[0]; });
  ScalarField mix(d);
  for (std::size_t i = 0; i < mix.size(); ++i) mix[i] = 2.0 * f[i] - 0.75 * g[i];
  const ScalarField tf = T.apply(f), tg = T.apply(g), tm = T.apply(mix);
  double lin = 0.0, sup_f = 0.0, sup_tf = 0.0, ident = 0.0;
  for (std::size_t i = 0; i < mix.size(); ++i) {
    lin = std::max(lin, std::abs(tm[i] - (2.0 * tf[i] - 0.75 * tg[i])));
    sup_f = std::max(sup_f, std::abs(g[i]));
    sup_tf = std::max(sup_tf, std::abs(tg[i]));
    if (T.step()[i] == 0.0) ident = std::max(ident, std::abs(tg[i] - g[i]));
  }
  out.push_back(make_check("linearity" + tag, lin, 1e-10));
  out.push_back(make_check("sup bound" + tag, sup_tf, sup_f));
  out.push_back(make_check("identity where the step vanishes" + tag, ident, 0.0));
}

}  // namespace

json selftest() {
  std::vector<BoundCheck> checks;
  json errors = json::array();
  auto section = [&](const std::string& name, const std::function<void()>& body) {
    try {
      body();
    } catch (const std::exception& e) {
      checks.push_back(BoundCheck{name + " raised", 1.0, 0.0, false});
      errors.push_back({{"section", name}, {"message", e.what()}});
    }
  };

  section("kernel", [&] {
    const Kernel k = make_kernel(Profile::Bump, 1, 200);
    checks.push_back(make_check("bump m_rho near 2.2523", std::abs(k.m_rho() - 2.2523), 1e-3));
    checks.push_back(make_check("odd moment vanishes", std::abs(kernel_moment(k, {1, 0, 0})), 0.0));
  });

  section("exactness", [&] {
    exactness(checks, 1, 129, 64);
    exactness(checks, 2, 33, 16);
  });

  section("regularized distance", [&] {
    const DomainPtr d = unit(1, 257);
    const Kernel k = make_kernel(Profile::Bump, 1, 64);
    const EtaProfile q = quadratic_eta(d, 0.1, k);
    checks.push_back(make_check("kappa", std::abs(*q.kappa - std::pow(0.9 / 1.1, 2)), 1e-15));
    const EtaProfile w = build_whitney_eta(d, d->theta_mask(), 0.25);
    checks.push_back(make_check("whitney slope", w.max_slope, 0.25));
    checks.push_back(make_check("whitney violations", static_cast<double>(w.violations.size()), 0.0));
  });

  section("gradient", [&] {
    const DomainPtr d = unit(1, 257);
    const Kernel k = make_kernel(Profile::Bump, 1, 64);
    const MollifierConfig cfg = standard(k, quadratic_eta(d, 0.1, k), 4);
    const GradientBoundReport r = pointwise_gradient_bound_check(make_fixture("sin", d), cfg);
    checks.push_back(make_check("pointwise gradient bounds", static_cast<double>(r.violations_total + r.violations_deviation), 0.0));
  });

  section("weak L1", [&] {
    const DomainPtr d = unit(1, 257);
    const Kernel k = make_kernel(Profile::Bump, 1, 64);
    ScalarField spike(d);
    spike[128] = 1.0 / d->cell_volume();
    const WeakL1Report r = weak_l1_check(spike, standard(k, quadratic_eta(d, 0.1, k), 1), {1e-3, 1e-1, 1e1, 1e3});
    checks.push_back(make_check("weak L1 violations", static_cast<double>(r.violations), 0.0));
  });

  section("operator norm", [&] {
    const DomainPtr d = unit(1, 257);
    const Kernel k = make_kernel(Profile::Bump, 1, 64);
    const OperatorNormReport r = l1_operator_norm(standard(k, quadratic_eta(d, 0.1, k), 1));
    checks.push_back(make_check("L1 operator norm bound", r.estimate, 1.1 * r.bound));
  });

  section("convergence", [&] {
    const DomainPtr d = unit(1, 257);
    const Kernel k = make_kernel(Profile::Bump, 1, 64);
    const EtaProfile q = quadratic_eta(d, 0.1, k);
    const StudyReport r = convergence_study(
        "sin", make_fixture("sin", d), [&](int n) { return standard(k, q, n); }, {1, 2, 4, 8, 16},
        {parse_norm("L2"), parse_norm("W12")});
    for (const auto& c : r.checks) checks.push_back(c);
  });

  section("bv", [&] {
    const DomainPtr d = unit(1, 513);
    const ScalarField f = make_fixture("step", d);
    const ScalarField g = Mollifier(modified_config(d, 16, 64)).apply(f);
    checks.push_back(make_check("strict TV n=16", std::abs(norm(g, {NormKind::TV, 1.0}) - 1.0), 0.1));
  });

  section("composite", [&] {
    const DomainPtr d = unit(1, 257);
    NodeMask delta(d->node_count(), 0);
    delta[128] = 1;
    const DomainPtr dd = std::make_shared<Domain>(d->with_delta(delta));
    const Kernel k = make_kernel(Profile::Bump, 1, 64);
    const EtaProfile e1 = build_whitney_eta(dd, dd->theta_mask(), 0.25);
    const EtaProfile e0 = build_whitney_eta(d, d->theta_mask(), 0.25);
    const ScalarField f = sample(d, [](const Point& p) { return std::sin(3.0 * p[0]) + p[0] * p[0]; });
    const VectorField psi = psi_field(f, e1, e0, std::nullopt, k);
    checks.push_back(make_check("psi vanishes on delta", std::abs(psi.components[0][128]), 0.0));
    const ScalarField t = mollify_composite(f, e1, e0, 16, k);
    checks.push_back(make_check("composite fixes delta within oscillation", std::abs(t[128] - f[128]),
                                std::abs(std::sin(3.0 * (0.5 + e0.field[128] / 16)) - std::sin(1.5)) + e0.field[128]));
  });

  section("feasible", [&] {
    const DomainPtr d = unit(1, 257);
    const ScalarField alpha = sample(d, [](const Point& p) { return std::min(p[0], 1.0 - p[0]); });
    const ConstraintSpec spec = ConstraintSpec::from_alpha(alpha, ConstraintMode::Value);
    const EtaProfile base = build_whitney_eta(spec.domain, spec.theta(), 0.5);
    const EtaProfile eta = calibrated_eta(spec.domain, spec.alpha, estimate_modulus(spec.alpha, 64, 0), base);
    ScalarField f(d);
    for (std::size_t i = 0; i < f.size(); ++i) f[i] = 0.9 * alpha[i];
    const StudyReport r = density_study("0.9 alpha", f, spec, eta, make_kernel(Profile::Bump, 1, 64), {1, 4, 16});
    for (const auto& c : r.checks) checks.push_back(c);
  });

  section("counterexample", [&] {
    const CounterexampleReport r = counterexample_run({257});
    for (const auto& c : r.checks) checks.push_back(c);
  });

  json cj = json::array();
  bool pass = true;
  for (const auto& c : checks) {
    cj.push_back(to_json(c));
    pass = pass && c.pass;
  }
  return {{"checks", cj}, {"errors", errors}, {"pass", pass}};
}

}  // namespace mollikit::cli
