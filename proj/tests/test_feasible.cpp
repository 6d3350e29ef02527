#include <doctest.h>

#include <cmath>

#include "mollikit/feasible.hpp"

using namespace mollikit;

namespace {

DomainPtr unit(int dim, int nodes) { return std::make_shared<Domain>(Domain::unit_box(dim, nodes)); }

struct Setup {
  ConstraintSpec spec;
  EtaProfile eta;
  Kernel kernel;
};

Setup tent(ConstraintMode mode, int nodes = 257) {
  const DomainPtr d = unit(1, nodes);
  const ScalarField alpha = sample(d, [](const Point& p) { return std::min(p[0], 1.0 - p[0]); });
  Setup s{ConstraintSpec::from_alpha(alpha, mode), {}, make_kernel(Profile::Bump, 1, 32)};
  const EtaProfile base = build_whitney_eta(s.spec.domain, s.spec.theta(), 0.5);
  s.eta = calibrated_eta(s.spec.domain, s.spec.alpha, estimate_modulus(s.spec.alpha, 64, 0), base);
  return s;
}

}  // namespace

TEST_CASE("alpha zero set becomes the interior set") {
  const DomainPtr d = unit(1, 11);
  ScalarField alpha(d, 1.0);
  alpha[5] = 0.0;
  const ConstraintSpec spec = ConstraintSpec::from_alpha(alpha, ConstraintMode::Value);
  CHECK(spec.delta[5] == 1);
  CHECK(spec.delta[4] == 0);
  CHECK(spec.theta()[5] == 1);
  CHECK(spec.theta()[0] == 1);
  CHECK(spec.alpha_lipschitz == doctest::Approx(10.0));
}

TEST_CASE("membership margins") {
  const Setup s = tent(ConstraintMode::Value, 11);
  ScalarField f(s.spec.domain, 0.0);
  CHECK(membership(f, s.spec).member);
  f[3] = 0.35;  // α = 0.3 there
  const Membership m = membership(f, s.spec);
  CHECK(!m.member);
  CHECK(m.worst_node == 3);
  CHECK(m.margin == doctest::Approx(0.05));
}

TEST_CASE("convergence factor is at least one and tends to one") {
  const Setup s = tent(ConstraintMode::Value);
  double prev = std::numeric_limits<double>::infinity();
  for (int n : {1, 4, 16, 64}) {
    const ConvergenceFactor m = convergence_factor(s.spec, s.eta, s.kernel, n);
    for (std::size_t i = 0; i < m.m.size(); ++i) CHECK(m.m[i] >= 1.0);
    CHECK(m.sup_excess <= prev);
    prev = m.sup_excess;
  }
  CHECK(prev < 0.05);
}

TEST_CASE("smoothed iterates stay in the value constraint set") {
  const Setup s = tent(ConstraintMode::Value);
  ScalarField f(s.spec.domain);
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = (i % 2 ? 1.0 : -1.0) * s.spec.alpha[i];
  for (int n : {1, 8, 64}) {
    const FeasibleResult r = feasible_smooth(f, s.spec, s.eta, s.kernel, n);
    CHECK(r.pass());
    CHECK(r.beta <= 1.0);
    CHECK(r.beta == doctest::Approx(1.0 / (1.0 + r.sup_excess)));
    CHECK(r.chain_margin <= 1e-12);
  }
}

TEST_CASE("infeasible input is rejected") {
  const Setup s = tent(ConstraintMode::Value);
  ScalarField f(s.spec.domain, 0.0);
  f[100] = 1.0;
  CHECK_THROWS_AS(feasible_smooth(f, s.spec, s.eta, s.kernel, 1), ConfigError);
}

TEST_CASE("gradient constraint") {
  const DomainPtr d = unit(1, 257);
  const ScalarField alpha = sample(d, [](const Point& p) { return 1.0 + p[0]; });
  const ConstraintSpec spec = ConstraintSpec::from_alpha(alpha, ConstraintMode::Gradient);
  const EtaProfile base = build_whitney_eta(spec.domain, spec.theta(), 0.5);
  const EtaProfile eta = calibrated_eta(spec.domain, alpha, estimate_modulus(alpha, 64, 0), base);
  const Kernel k = make_kernel(Profile::Bump, 1, 32);
  const ScalarField f = sample(d, [](const Point& p) { return 0.3 * std::sin(3.0 * p[0]); });
  for (int n : {1, 16}) {
    const FeasibleResult r = feasible_smooth(f, spec, eta, k, n);
    CHECK(r.pass());
  }
}

TEST_CASE("truncation zeroes a neighbourhood of theta") {
  const Setup s = tent(ConstraintMode::Value, 101);
  const ScalarField f(s.spec.domain, 1.0);
  const ScalarField t = truncate_near_theta(f, s.spec, 0.1);
  CHECK(t[5] == 0.0);
  CHECK(t[50] == 1.0);
  CHECK(t[95] == 0.0);
}

TEST_CASE("density study in value mode") {
  const Setup s = tent(ConstraintMode::Value);
  ScalarField f(s.spec.domain);
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = 0.9 * s.spec.alpha[i];
  const StudyReport r = density_study("tent", f, s.spec, s.eta, s.kernel, {1, 4, 16, 64});
  CHECK(r.pass());
  CHECK(r.rows.size() == 4);
}
