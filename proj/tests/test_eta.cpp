#include <doctest.h>

#include <cmath>

#include "mollikit/eta.hpp"

using namespace mollikit;

namespace {

DomainPtr unit(int dim, int nodes) { return std::make_shared<Domain>(Domain::unit_box(dim, nodes)); }

}  // namespace

TEST_CASE("whitney step in 1D: vanishes on theta, below eps*d, slope below eps") {
  const DomainPtr d = unit(1, 513);
  const double eps = 0.25;
  const EtaProfile e = build_whitney_eta(d, d->theta_mask(), eps);
  const ScalarField dist = distance_field(d, DistanceTarget::Theta);
  for (std::size_t i = 0; i < d->node_count(); ++i) {
    if (!d->inside(i)) {
      CHECK(e.field[i] == 0.0);
      continue;
    }
    CHECK(e.field[i] > 0.0);
    CHECK(e.field[i] <= eps * dist[i]);
  }
  CHECK(e.max_slope <= eps);
  CHECK(e.grad_bound <= eps);
  CHECK(e.violations.empty());
  CHECK(certify_flatness(e).pass);
  CHECK(e.decay == Decay::Linear);
}

TEST_CASE("whitney step vanishes on an interior set") {
  const DomainPtr base = unit(2, 65);
  NodeMask delta(base->node_count(), 0);
  const std::size_t centre = base->index({32, 32, 0});
  delta[centre] = 1;
  const DomainPtr d = std::make_shared<Domain>(base->with_delta(delta));
  const EtaProfile e = build_whitney_eta(d, d->theta_mask(), 0.25);
  CHECK(e.field[centre] == 0.0);
  CHECK(e.field[base->index({30, 32, 0})] > 0.0);
  CHECK(e.max_slope <= 0.25);
  CHECK(e.violations.empty());
}

TEST_CASE("whitney step rejects bad parameters") {
  const DomainPtr d = unit(1, 65);
  CHECK_THROWS_AS(build_whitney_eta(d, d->theta_mask(), 0.0), ConfigError);
  CHECK_THROWS_AS(build_whitney_eta(d, d->theta_mask(), 0.6), ConfigError);
  CHECK_THROWS_AS(build_whitney_eta(d, NodeMask(d->node_count(), 0), 0.25), ConfigError);
}

TEST_CASE("regularized distance is two-sided comparable to sigma") {
  for (double eps : {0.1, 0.25}) {
    const DomainPtr d = unit(1, 257);
    const Kernel k = make_kernel(Profile::Bump, 1, 64);
    const EtaProfile r = regularized_distance(d, eps, k);
    const ScalarField s = distance_field(d, DistanceTarget::Boundary);
    for (std::size_t i = 0; i < d->node_count(); ++i) {
      if (!d->inside(i)) continue;
      CHECK(r.field[i] >= (1.0 - eps) * s[i] * (1.0 - 1e-12));
      CHECK(r.field[i] <= (1.0 + eps) * s[i] * (1.0 + 1e-12));
    }
  }
}

TEST_CASE("quadratic step bounds and kappa") {
  const DomainPtr d = unit(2, 65);
  const Kernel k = make_kernel(Profile::Bump, 2, 16);
  const EtaProfile q = quadratic_eta(d, 0.1, k);
  REQUIRE(q.kappa.has_value());
  CHECK(*q.kappa == doctest::Approx(std::pow(0.9 / 1.1, 2)).epsilon(1e-15));
  CHECK(q.decay == Decay::Quadratic);
  const ScalarField s = distance_field(d, DistanceTarget::Boundary);
  for (std::size_t i = 0; i < d->node_count(); ++i) {
    if (!d->inside(i)) {
      CHECK(q.field[i] == 0.0);
      continue;
    }
    const double s2 = s[i] * s[i];
    CHECK(q.field[i] >= *q.kappa * s2 * (1.0 - 1e-12));
    CHECK(q.field[i] <= s2 * (1.0 + 1e-12));
    CHECK(q.field[i] < s[i]);
  }
}

TEST_CASE("modified step bounds") {
  const DomainPtr d = unit(1, 257);
  const int n = 8;
  const Kernel k = make_kernel(Profile::Plateau, 1, 64, n);
  const EtaProfile e = modified_step_eta(d, n, k);
  const ScalarField s = distance_field(d, DistanceTarget::Boundary);
  for (std::size_t i = 0; i < d->node_count(); ++i) {
    if (!d->inside(i)) continue;
    const double lo = std::pow(1.0 - s[i] / n, 2) * s[i] * s[i];
    CHECK(e.field[i] >= lo * (1.0 - 1e-12));
    CHECK(e.field[i] <= s[i] * s[i] * (1.0 + 1e-12));
  }
}

TEST_CASE("user step takes its zero set as theta") {
  const DomainPtr d = unit(1, 11);
  ScalarField f = sample(d, [](const Point& p) { return 0.1 * p[0] * (1.0 - p[0]); });
  f[5] = 0.0;
  const EtaProfile e = eta_from_field(f);
  CHECK(e.theta[5] == 1);
  CHECK(e.theta[0] == 1);
  CHECK(e.theta[4] == 0);
  CHECK(e.grad_bound == doctest::Approx(central_gradient_bound(f)));
}

TEST_CASE("modulus of a linear field is close to the identity") {
  const DomainPtr d = unit(1, 129);
  const ScalarField a = sample(d, [](const Point& p) { return 2.0 * p[0]; });
  const ModulusOfContinuity w = estimate_modulus(a, 32, 0);
  for (double t : {0.05, 0.2, 0.5, 0.9}) {
    CHECK(w(t) >= 2.0 * t * 0.9);
    CHECK(w(t) <= 2.0 * t * 1.1);
    CHECK(w.inverse(w(t)) == doctest::Approx(t).epsilon(1e-9));
  }
  CHECK(w(0.0) == 0.0);
  CHECK(w(0.3) > w(0.2));
}

TEST_CASE("identity modulus") {
  const auto w = ModulusOfContinuity::identity(1.0);
  CHECK(w(0.25) == doctest::Approx(0.25).epsilon(1e-9));
  CHECK(w.inverse(0.5) == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("calibrated step keeps the modulus below alpha times the base step") {
  const DomainPtr d = unit(1, 257);
  const ScalarField alpha = sample(d, [](const Point& p) { return std::min(p[0], 1.0 - p[0]); });
  const EtaProfile base = build_whitney_eta(d, d->theta_mask(), 0.5);
  const ModulusOfContinuity w = estimate_modulus(alpha, 64, 0);
  const EtaProfile e = calibrated_eta(d, alpha, w, base);
  CHECK(e.decay == Decay::Calibrated);
  for (std::size_t i = 0; i < d->node_count(); ++i) {
    CHECK(e.field[i] <= base.field[i]);
    if (base.field[i] == 0.0) {
      CHECK(e.field[i] == 0.0);
      continue;
    }
    CHECK(w(e.field[i]) <= alpha[i] * base.field[i] * (1.0 + 1e-9));
  }
  CHECK(calibration_ratio(e, alpha, w, 4) <= calibration_ratio(e, alpha, w, 1));
}

TEST_CASE("discrete gradient bounds") {
  const DomainPtr d = unit(1, 11);
  const ScalarField f = sample(d, [](const Point& p) { return 3.0 * p[0]; });
  CHECK(central_gradient_bound(f) == doctest::Approx(3.0));
  CHECK(adjacent_slope_bound(f) == doctest::Approx(3.0));
}
