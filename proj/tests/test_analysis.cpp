#include <doctest.h>

#include <cmath>
#include <numbers>

#include "mollikit/analysis.hpp"

using namespace mollikit;

namespace {

DomainPtr unit(int dim, int nodes) { return std::make_shared<Domain>(Domain::unit_box(dim, nodes)); }

MollifierConfig config(const DomainPtr& d, int order, std::optional<int> n, double eps = 0.1) {
  MollifierConfig cfg;
  cfg.kernel = make_kernel(Profile::Bump, d->dim(), order);
  cfg.eta = quadratic_eta(d, eps, cfg.kernel);
  cfg.n = n;
  return cfg;
}

}  // namespace

TEST_CASE("closed-form norms of simple fields") {
  const DomainPtr d = unit(1, 1025);
  const ScalarField s = sample(d, [](const Point& p) { return std::sin(std::numbers::pi * p[0]); });
  CHECK(norm(s, parse_norm("L2")) == doctest::Approx(std::sqrt(0.5)).epsilon(1e-5));
  CHECK(norm(s, parse_norm("L1")) == doctest::Approx(2.0 / std::numbers::pi).epsilon(1e-5));
  CHECK(norm(s, parse_norm("Linf")) == doctest::Approx(1.0).epsilon(1e-6));
  // |s'|₂ = π/√2.
  CHECK(norm(s, parse_norm("H1")) == doctest::Approx(std::numbers::pi / std::sqrt(2.0)).epsilon(1e-3));
  CHECK(norm(s, parse_norm("W12")) ==
        doctest::Approx(std::sqrt(0.5 + std::numbers::pi * std::numbers::pi / 2.0)).epsilon(1e-3));
  CHECK(norm(make_fixture("step", d), parse_norm("TV")) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(norm(make_fixture("linear", d), parse_norm("W11")) == doctest::Approx(1.5).epsilon(1e-2));
}

TEST_CASE("norm names") {
  CHECK(to_string(parse_norm("W12")) == "W12");
  CHECK(parse_norm("TV").kind == NormKind::TV);
  CHECK(std::isinf(parse_norm("Linf").p));
  CHECK_THROWS_AS(parse_norm("L0"), ConfigError);
}

TEST_CASE("fixtures") {
  const DomainPtr d = unit(2, 5);
  const std::size_t mid = d->index({2, 2, 0});
  CHECK(make_fixture("sin", d)[mid] == doctest::Approx(1.0));
  CHECK(make_fixture("poly", d)[mid] == doctest::Approx(1.0));
  CHECK(make_fixture("const", d)[0] == 1.0);
  CHECK_THROWS_AS(make_fixture("nope", d), ConfigError);
}

TEST_CASE("weak L1 constant and a spike") {
  const DomainPtr d = unit(1, 513);
  MollifierConfig cfg = config(d, 200, 1);
  ScalarField spike(d);
  spike[256] = 1.0 / d->cell_volume();
  const WeakL1Report r = weak_l1_check(spike, cfg, {1e-3, 1e-1, 1e1, 1e3});
  CHECK(r.constant == doctest::Approx(5.0 * 2.0 * cfg.kernel.m_rho()));
  CHECK(r.constant == doctest::Approx(22.52).epsilon(1e-3));
  CHECK(r.l1_norm == doctest::Approx(1.0));
  CHECK(r.violations == 0);
  CHECK(r.rows.size() == 4);
}

TEST_CASE("constant step gives a unit operator-norm integral") {
  const DomainPtr d = unit(1, 1025);
  const Kernel k = make_kernel(Profile::Bump, 1, 64);
  const Mollifier T(k, ScalarField(d, 0.05), 0.0);
  CHECK(operator_norm_integral(T, Point{0.5, 0, 0}, 0.0) == doctest::Approx(1.0).epsilon(1e-2));
}

TEST_CASE("interpolant Lipschitz bound of a linear field") {
  const DomainPtr d = unit(2, 17);
  const ScalarField f = sample(d, [](const Point& p) { return 3.0 * p[0] + 4.0 * p[1]; });
  CHECK(interpolant_lipschitz(f) == doctest::Approx(5.0));
}

TEST_CASE("operator norm stays below the quadratic-decay bound") {
  const DomainPtr d = unit(1, 513);
  const MollifierConfig cfg = config(d, 64, 1);
  const OperatorNormReport r = l1_operator_norm(cfg);
  const double kappa = std::pow(0.9 / 1.1, 2);
  CHECK(r.bound == doctest::Approx(cfg.kernel.m_rho() * 2.0 * (1.0 + std::log(2.0 / kappa))));
  CHECK(r.limsup_bound == doctest::Approx(cfg.kernel.m_rho() * 2.0 * (1.0 + std::log(1.0 / kappa))));
  CHECK(r.estimate >= 0.99);
  CHECK(r.estimate <= 1.1 * r.bound);
  CHECK(r.pass);
  CHECK(r.probes > 100);
}

TEST_CASE("counterexample closed forms") {
  for (double x : {0.05, 0.1, 0.25, 0.4})
    CHECK(counterexample_tf0(x) == doctest::Approx(counterexample_tf0_closed(x)).epsilon(1e-8));
  CHECK(counterexample_tf0_closed(0.25) == doctest::Approx(1.0 / (0.5 * std::log(4.0))));
  CHECK(counterexample_f0(0.5) == doctest::Approx(1.0 / (0.5 * std::pow(std::log(4.0), 2))));
}

TEST_CASE("counterexample integral grows by half ln 2 per doubling of ln(1/delta)") {
  const CounterexampleReport r = counterexample_run({});
  REQUIRE(r.deltas.size() >= 5);
  CHECK(r.deltas[0] == std::ldexp(1.0, -4));
  CHECK(r.deltas[4] == std::ldexp(1.0, -8));
  CHECK(r.integrals[4] - r.integrals[0] == doctest::Approx(0.5 * std::log(2.0)).epsilon(1e-6));
  for (std::size_t k = 0; k < r.deltas.size(); ++k) {
    CHECK(r.integrals[k] == doctest::Approx(r.integrals_closed[k]).epsilon(1e-6));
    CHECK(r.f0_norms[k] == doctest::Approx(r.f0_norms_closed[k]).epsilon(1e-6));
  }
  CHECK(r.slope == doctest::Approx(0.5).epsilon(1e-6));
}

TEST_CASE("convergence study on a smooth fixture") {
  const DomainPtr d = unit(1, 257);
  const MollifierConfig base = config(d, 32, 1);
  const StudyReport r = convergence_study(
      "sin", make_fixture("sin", d),
      [&](int n) {
        MollifierConfig c = base;
        c.n = n;
        return c;
      },
      {1, 2, 4, 8}, {parse_norm("L2"), parse_norm("W12")});
  CHECK(r.rows.size() == 4);
  CHECK(r.pass());
  CHECK(r.rows.back().errors.at("L2") < r.rows.front().errors.at("L2"));
  const std::string csv = study_csv(r);
  CHECK(csv.rfind("n,L2,W12,TV\n", 0) == 0);
}

TEST_CASE("decay checks flag a stalled sequence") {
  StudyReport r;
  append_decay_checks(r, "L2", {1.0, 0.9, 0.85, 0.8});
  CHECK(!r.pass());
  StudyReport ok;
  append_decay_checks(ok, "L2", {1.0, 0.5, 0.2, 0.1});
  CHECK(ok.pass());
}

TEST_CASE("trace error shrinks with the shell") {
  const DomainPtr d = unit(1, 513);
  const TraceReport r = trace_check(make_fixture("sin", d), config(d, 32, 1));
  CHECK(r.pass());
  REQUIRE(r.rows.size() == 3);
  for (const auto& row : r.rows) CHECK(row.max_error <= row.oscillation + 1e-12);
}

TEST_CASE("bound checks") {
  CHECK(make_check("a", 1.0, 1.0).pass);
  CHECK(!make_check("a", 1.0 + 1e-9, 1.0).pass);
  CHECK(make_check("a", 1.0 + 1e-9, 1.0, 1e-8).pass);
  const auto j = to_json(make_check("x", 0.5, 1.0));
  CHECK(j["pass"] == true);
}
