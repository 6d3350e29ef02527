#include <doctest.h>

#include <cmath>

#include "mollikit/mollify.hpp"

using namespace mollikit;

namespace {

DomainPtr unit(int dim, int nodes) { return std::make_shared<Domain>(Domain::unit_box(dim, nodes)); }

MollifierConfig config(const DomainPtr& d, int order, std::optional<int> n) {
  MollifierConfig cfg;
  cfg.kernel = make_kernel(Profile::Bump, d->dim(), order);
  cfg.eta = quadratic_eta(d, 0.1, cfg.kernel);
  cfg.n = n;
  return cfg;
}

double f1(const Point& p) { return std::sin(3.0 * p[0]) + p[0] * p[0]; }
Point df1(const Point& p) { return {3.0 * std::cos(3.0 * p[0]) + 2.0 * p[0], 0.0, 0.0}; }

}  // namespace

TEST_CASE("gradient formula agrees with finite differences of the operator") {
  const DomainPtr d = unit(1, 257);
  MollifierConfig cfg = config(d, 64, 2);
  cfg.subgrid_cutoff = 0.0;
  const Mollifier T(cfg);
  const double delta = 1e-6;
  for (std::size_t i = 8; i < d->node_count() - 8; i += 7) {
    const Point x = d->point(i);
    Point xp = x, xm = x;
    xp[0] += delta;
    xm[0] -= delta;
    const double fd = (T.apply_at(xp, f1) - T.apply_at(xm, f1)) / (2.0 * delta);
    const double an = T.gradient_node(i, df1)[0];
    CHECK(an == doctest::Approx(fd).epsilon(1e-5).scale(1.0));
  }
}

TEST_CASE("constants and affine functions are reproduced") {
  for (int dim : {1, 2}) {
    const DomainPtr d = unit(dim, dim == 1 ? 129 : 33);
    const Mollifier T(config(d, 16, std::nullopt));
    const ScalarField c(d, -2.5);
    const ScalarField tc = T.apply(c);
    const ScalarField a = sample(d, [](const Point& p) { return 1.0 + 2.0 * p[0] - p[1]; });
    const ScalarField ta = T.apply(a);
    for (std::size_t i = 0; i < d->node_count(); ++i) {
      CHECK(tc[i] == doctest::Approx(-2.5).epsilon(1e-14));
      CHECK(ta[i] == doctest::Approx(a[i]).epsilon(1e-12));
    }
  }
}

TEST_CASE("linearity, sup bound and identity outside the domain") {
  const DomainPtr d = unit(2, 33);
  const Mollifier T(config(d, 16, 2));
  const ScalarField f = sample(d, [](const Point& p) { return std::sin(6.0 * p[0]) * p[1]; });
  const ScalarField g = sample(d, [](const Point& p) { return std::exp(p[0] - p[1]); });
  ScalarField m(d);
  for (std::size_t i = 0; i < m.size(); ++i) m[i] = 3.0 * f[i] + 0.5 * g[i];
  const ScalarField tf = T.apply(f), tg = T.apply(g), tm = T.apply(m);
  double sup = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) sup = std::max(sup, std::abs(f[i]));
  for (std::size_t i = 0; i < f.size(); ++i) {
    CHECK(tm[i] == doctest::Approx(3.0 * tf[i] + 0.5 * tg[i]).epsilon(1e-12));
    CHECK(std::abs(tf[i]) <= sup);
    if (!d->inside(i)) CHECK(tf[i] == f[i]);
  }
}

TEST_CASE("positivity and support") {
  const DomainPtr d = unit(1, 513);
  const MollifierConfig cfg = config(d, 32, 1);
  const Mollifier T(cfg);
  const ScalarField f = sample(d, [](const Point& p) { return std::abs(p[0] - 0.5) < 0.1 ? 1.0 : 0.0; });
  const ScalarField tf = T.apply(f);
  for (std::size_t i = 0; i < d->node_count(); ++i) {
    CHECK(tf[i] >= 0.0);
    const double x = d->point(i)[0];
    if (std::abs(x - 0.5) > 0.1 + T.step()[i] + d->h()) CHECK(tf[i] == 0.0);
  }
}

TEST_CASE("identity statistics at the boundary") {
  const DomainPtr d = unit(1, 65);
  MollifyStats stats;
  mollify(sample(d, f1), config(d, 16, 1), &stats);
  CHECK(stats.identity_nodes + stats.flagged_subgrid_nodes >= 2);
  CHECK(stats.sup_ratio <= 1.0);
}

TEST_CASE("pointwise gradient bounds hold on smooth data") {
  const DomainPtr d = unit(1, 257);
  for (int n : {1, 4}) {
    const GradientBoundReport r = pointwise_gradient_bound_check(sample(d, f1), config(d, 32, n));
    CHECK(r.pass());
    CHECK(r.checked_nodes > 200);
  }
}

TEST_CASE("invalid configurations are rejected") {
  const DomainPtr d = unit(1, 65);
  MollifierConfig cfg = config(d, 16, 1);
  cfg.n = 0;
  CHECK_THROWS_AS(Mollifier{cfg}, ConfigError);

  cfg = config(d, 16, 1);
  cfg.kernel = make_kernel(Profile::Box, 1, 16);
  CHECK_THROWS_AS(Mollifier{cfg}, ConfigError);

  cfg = config(d, 16, 1);
  cfg.variant = Variant::Modified;
  CHECK_THROWS_AS(Mollifier{cfg}, ConfigError);

  cfg = config(d, 16, 1);
  cfg.kernel = make_kernel(Profile::Bump, 2, 16);
  CHECK_THROWS_AS(Mollifier{cfg}, ConfigError);

  // A step as large as σ reaches the boundary.
  cfg = config(d, 16, 1);
  cfg.eta = eta_from_field(distance_field(d, DistanceTarget::Boundary));
  CHECK_THROWS_AS(Mollifier{cfg}, ConfigError);
}

TEST_CASE("modified family keeps a step function's total variation") {
  const DomainPtr d = unit(1, 513);
  const ScalarField f = sample(d, [](const Point& p) { return p[0] < 0.5 ? 0.0 : 1.0; });
  const ScalarField g = Mollifier(modified_config(d, 16, 64)).apply(f);
  double tv = 0.0;
  for (std::size_t i = 1; i < g.size(); ++i) tv += std::abs(g[i] - g[i - 1]);
  CHECK(tv == doctest::Approx(1.0).epsilon(0.1));
}

TEST_CASE("composite operator keeps values on the interior set") {
  const DomainPtr base = unit(1, 257);
  NodeMask delta(base->node_count(), 0);
  delta[128] = 1;
  const DomainPtr d = std::make_shared<Domain>(base->with_delta(delta));
  const Kernel k = make_kernel(Profile::Bump, 1, 32);
  const EtaProfile e1 = build_whitney_eta(d, d->theta_mask(), 0.25);
  const EtaProfile e0 = build_whitney_eta(base, base->theta_mask(), 0.25);
  const ScalarField f = sample(base, f1);
  const VectorField psi = psi_field(f, e1, e0, std::nullopt, k);
  CHECK(psi.components[0][128] == 0.0);
  double prev = std::numeric_limits<double>::infinity();
  for (int n : {4, 16, 64}) {
    const ScalarField t = mollify_composite(f, e1, e0, n, k);
    double err = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) err = std::max(err, std::abs(t[i] - f[i]));
    CHECK(err < prev);
    prev = err;
  }
}

TEST_CASE("low-level constructor with an explicit step") {
  const DomainPtr d = unit(1, 33);
  const Kernel k = make_kernel(Profile::Bump, 1, 16);
  ScalarField s(d, 0.0);
  const Mollifier T(k, s, 0.0);
  const ScalarField f = sample(d, f1);
  const ScalarField tf = T.apply(f);
  for (std::size_t i = 0; i < f.size(); ++i) CHECK(tf[i] == f[i]);
}
