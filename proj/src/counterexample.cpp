#include <cmath>
#include <limits>
#include <memory>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "mollikit/analysis.hpp"

namespace mollikit {

namespace {

// In u = ln(2/y) the integrand f₀(y) dy becomes du/u², which is smooth on [ln 2, ∞).
double f0_integral(double a, double b) {
  const double ub = std::log(2.0 / b);
  auto g = [](double u) { return 1.0 / (u * u); };
  if (a <= 0.0) {
    boost::math::quadrature::exp_sinh<double> q;
    return q.integrate(g, ub, std::numeric_limits<double>::infinity());
  }
  boost::math::quadrature::tanh_sinh<double> q;
  return q.integrate(g, ub, std::log(2.0 / a));
}

}  // namespace

double counterexample_f0(double y) {
  const double l = std::log(2.0 / y);
  return 1.0 / (y * l * l);
}

double counterexample_tf0_closed(double x) { return 1.0 / (2.0 * x * std::log(1.0 / x)); }

double counterexample_tf0(double x) {
  if (!(x > 0.0 && x < 1.0)) throw ConfigError("counterexample point must lie in (0,1)");
  const double s = std::min(x, 1.0 - x);
  return f0_integral(x - s, x + s) / (2.0 * s);
}

CounterexampleReport counterexample_run(const std::vector<int>& resolutions) {
  CounterexampleReport r;
  for (int k = 4; k <= 12; ++k) r.deltas.push_back(std::ldexp(1.0, -k));

  boost::math::quadrature::tanh_sinh<double> outer;
  for (double delta : r.deltas) {
    // x = e^{-t} turns ∫_δ^{1/2} Tf₀(x) dx into a smooth integral over [ln 2, ln 1/δ].
    const double I = outer.integrate(
        [](double t) {
          const double x = std::exp(-t);
          return counterexample_tf0(x) * x;
        },
        std::log(2.0), std::log(1.0 / delta));
    r.integrals.push_back(I);
    r.integrals_closed.push_back(0.5 * (std::log(std::log(1.0 / delta)) - std::log(std::log(2.0))));
    r.f0_norms.push_back(f0_integral(delta, 1.0));
    r.f0_norms_closed.push_back(1.0 / std::log(2.0) - 1.0 / std::log(2.0 / delta));
  }

  // Least-squares slope of I(δ) against ln ln(1/δ).
  {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double m = static_cast<double>(r.deltas.size());
    for (std::size_t k = 0; k < r.deltas.size(); ++k) {
      const double x = std::log(std::log(1.0 / r.deltas[k]));
      sx += x;
      sy += r.integrals[k];
      sxx += x * x;
      sxy += x * r.integrals[k];
    }
    r.slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  }
  r.tf_quarter = counterexample_tf0(0.25);

  double norm_err = 0.0, integral_err = 0.0;
  for (std::size_t k = 0; k < r.deltas.size(); ++k) {
    norm_err = std::max(norm_err, std::abs(r.f0_norms[k] / r.f0_norms_closed[k] - 1.0));
    integral_err = std::max(integral_err, std::abs(r.integrals[k] / r.integrals_closed[k] - 1.0));
  }
  bool shrinking = true;
  double first_step = 0.0, last_step = 0.0;
  for (std::size_t k = 1; k < r.f0_norms.size(); ++k) {
    const double step = std::abs(r.f0_norms[k] - r.f0_norms[k - 1]);
    if (k == 1) first_step = step;
    else shrinking = shrinking && step < last_step;
    last_step = step;
  }
  r.checks.push_back(make_check("f0 L1 norm vs closed form (relative)", norm_err, 0.01));
  r.checks.push_back(make_check("Tf0(1/4) vs closed form (relative)",
                                std::abs(r.tf_quarter / counterexample_tf0_closed(0.25) - 1.0), 0.005));
  r.checks.push_back(make_check("I(delta) vs closed form (relative)", integral_err, 1e-6));
  r.checks.push_back(BoundCheck{"f0 L1 Cauchy increments shrink", last_step, 0.25 * first_step,
                                shrinking && last_step <= 0.25 * first_step});
  r.checks.push_back(make_check("divergence slope >= 0.8", 0.8, r.slope));
  r.checks.push_back(make_check("divergence slope <= 1.2", r.slope, 1.2));

  // Grid pipeline cross-check (report only: the singularity lives below any grid scale).
  for (int res : resolutions) {
    auto domain = std::make_shared<Domain>(Domain::unit_box(1, res));
    ScalarField f(domain);
    for (std::size_t i = 1; i < domain->node_count(); ++i) f[i] = counterexample_f0(domain->point(i)[0]);
    MollifierConfig cfg;
    cfg.kernel = make_kernel(Profile::Box, 1, 256);
    cfg.eta = eta_from_field(distance_field(domain, DistanceTarget::Boundary));
    cfg.allow_boundary_step = true;
    cfg.subgrid_cutoff = 0.0;
    const Mollifier T(cfg);
    const std::size_t node = static_cast<std::size_t>(std::lround(0.25 * (res - 1)));
    CounterexampleGridRow row;
    row.resolution = res;
    row.x = domain->point(node)[0];
    row.tf_quarter = T.apply_node(node, [&](const Point& p) { return f.at(p); });
    row.closed = counterexample_tf0_closed(row.x);
    r.grid.push_back(row);
  }
  return r;
}

bool CounterexampleReport::pass() const {
  for (const auto& c : checks)
    if (!c.pass) return false;
  return true;
}

}  // namespace mollikit
