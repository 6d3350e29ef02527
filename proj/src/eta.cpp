#include "mollikit/eta.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <random>
#include <sstream>

#include "mollikit/mollify.hpp"
#include "mollikit/parallel.hpp"

namespace mollikit {

std::string to_string(Decay d) {
  switch (d) {
    case Decay::Linear: return "linear";
    case Decay::Quadratic: return "quadratic";
    case Decay::Calibrated: return "calibrated";
  }
  return "linear";
}

namespace {

std::string node_label(const Domain& d, std::size_t i) {
  const Point p = d.point(i);
  std::ostringstream os;
  os << "node " << i << " at (";
  for (int a = 0; a < d.dim(); ++a) os << (a ? "," : "") << p[a];
  os << ")";
  return os.str();
}

NodeMask outside_nodes(const Domain& d) {
  NodeMask m(d.node_count(), 0);
  for (std::size_t i = 0; i < d.node_count(); ++i) m[i] = d.inside(i) ? 0 : 1;
  return m;
}

/// σ at node values plus a sampler for off-grid points (closed form when available).
struct Sigma {
  ScalarField nodes;
  bool exact = false;
  double operator()(const Point& p) const {
    return exact ? nodes.domain().sigma_at(p) : nodes.at(p);
  }
};

Sigma make_sigma(const DomainPtr& domain) {
  return Sigma{distance_field(domain, DistanceTarget::Boundary), domain->has_exact_sigma()};
}

/// Indices of nodes within `shells` Chebyshev grid steps of a marked node.
NodeMask dilate(const Domain& d, const NodeMask& seed, int shells) {
  NodeMask cur = seed;
  for (int s = 0; s < shells; ++s) {
    NodeMask next = cur;
    for (std::size_t i = 0; i < d.node_count(); ++i) {
      if (!cur[i]) continue;
      const auto c = d.coords(i);
      const int span[3] = {1, d.dim() > 1 ? 1 : 0, d.dim() > 2 ? 1 : 0};
      for (int dx = -span[0]; dx <= span[0]; ++dx)
        for (int dy = -span[1]; dy <= span[1]; ++dy)
          for (int dz = -span[2]; dz <= span[2]; ++dz) {
            std::array<int, kMaxDim> n{c[0] + dx, c[1] + dy, c[2] + dz};
            bool ok = true;
            for (int a = 0; a < d.dim(); ++a) ok = ok && n[a] >= 0 && n[a] < d.shape(a);
            if (ok) next[d.index(n)] = 1;
          }
    }
    cur = std::move(next);
  }
  return cur;
}

double second_difference(const ScalarField& f, std::size_t i, int axis) {
  const Domain& d = f.domain();
  const auto c = d.coords(i);
  if (c[axis] == 0 || c[axis] == d.shape(axis) - 1) return 0.0;
  const double h = d.spacing(axis);
  const std::size_t st = d.stride(axis);
  return (f[i + st] - 2.0 * f[i] + f[i - st]) / (h * h);
}

/// Flat-band scale c for g(t) = t·exp(-c/t): the smallest c (in steps of t_max/4) such that
/// ε·g, ε·g' and ε·g'' stay below half the flatness tolerance up to t_max.
double flat_scale(double epsilon, double t_max, double tolerance) {
  for (double u = 1.0; u < 200.0; u += 0.25) {
    const double e = std::exp(-u);
    const double g = t_max * e;
    const double g1 = e * (1.0 + u);
    const double g2 = e * u * u / t_max;
    if (epsilon * std::max({g, g1, g2}) <= 0.5 * tolerance) return u * t_max;
  }
  return 200.0 * t_max;
}

void measure(EtaProfile& p) {
  p.grad_bound = central_gradient_bound(p.field);
  p.max_slope = adjacent_slope_bound(p.field);
  const Domain& d = p.field.domain();
  double sec = 0.0;
  for (std::size_t i = 0; i < d.node_count(); ++i) {
    if (!d.inside(i)) continue;
    for (int a = 0; a < d.dim(); ++a) sec = std::max(sec, std::abs(second_difference(p.field, i, a)));
  }
  p.second_difference_bound = sec;
}

/// Zero set and strict positivity invariants shared by every builder.
void check_zero_set(EtaProfile& p, const ScalarField& dist_theta) {
  const Domain& d = p.field.domain();
  for (std::size_t i = 0; i < d.node_count(); ++i) {
    const double v = p.field[i];
    if (p.theta[i]) {
      if (v != 0.0) p.violations.push_back("nonzero on Θ at " + node_label(d, i));
    } else if (!(v > 0.0)) {
      p.violations.push_back("not positive off Θ at " + node_label(d, i));
    } else if (!(v < dist_theta[i])) {
      p.violations.push_back("not below dist(·,Θ) at " + node_label(d, i));
    }
    if (p.violations.size() > 16) return;
  }
}

}  // namespace

double central_gradient_bound(const ScalarField& f) {
  const Domain& d = f.domain();
  double best = 0.0;
  for (std::size_t i = 0; i < d.node_count(); ++i) {
    if (!d.inside(i)) continue;
    double s = 0.0;
    for (int a = 0; a < d.dim(); ++a) {
      const double g = f.derivative(i, a);
      s += g * g;
    }
    best = std::max(best, std::sqrt(s));
  }
  return best;
}

double adjacent_slope_bound(const ScalarField& f) {
  const Domain& d = f.domain();
  double best = 0.0;
  for (std::size_t i = 0; i < d.node_count(); ++i) {
    const auto c = d.coords(i);
    for (int a = 0; a < d.dim(); ++a) {
      if (c[a] + 1 >= d.shape(a)) continue;
      const std::size_t j = i + d.stride(a);
      if (!d.inside(i) && !d.inside(j)) continue;
      best = std::max(best, std::abs(f[j] - f[i]) / d.spacing(a));
    }
  }
  return best;
}

EtaProfile build_whitney_eta(const DomainPtr& domain, const NodeMask& theta, double epsilon,
                             const WhitneyOptions& options) {
  const Domain& d = *domain;
  if (!(epsilon > 0.0 && epsilon <= 0.5))
    throw ConfigError("whitney epsilon must lie in (0, 1/2]");
  if (theta.size() != d.node_count()) throw ConfigError("theta mask does not match the grid");
  for (std::size_t i = 0; i < d.node_count(); ++i)
    if (!d.inside(i) && !theta[i])
      throw ConfigError("theta must contain every boundary node; missing " + node_label(d, i));

  NodeMask delta(d.node_count(), 0);
  for (std::size_t i = 0; i < d.node_count(); ++i) delta[i] = d.inside(i) && theta[i];
  auto with_theta = std::make_shared<Domain>(d.with_delta(delta));
  ScalarField dist(domain);
  {
    const ScalarField raw = distance_field(with_theta, DistanceTarget::Theta);
    for (std::size_t i = 0; i < d.node_count(); ++i) dist[i] = theta[i] ? 0.0 : raw[i];
  }

  // Two passes of a fixed-shape mollification with step ε·dist/2 smooth the distance kinks.
  const Kernel smoother = make_kernel(Profile::Bump, d.dim(), options.smoothing_order);
  ScalarField step(domain);
  for (std::size_t i = 0; i < d.node_count(); ++i) step[i] = 0.5 * epsilon * dist[i];
  const Mollifier pass(smoother, step, 0.0);
  ScalarField s1(domain), s2(domain);
  parallel_for(d.node_count(), [&](std::size_t i) {
    s1[i] = pass.apply_node(i, [&](const Point& p) { return dist.at(p); });
  });
  parallel_for(d.node_count(), [&](std::size_t i) {
    s2[i] = pass.apply_node(i, [&](const Point& p) { return s1.at(p); });
  });

  // A flat factor t·exp(-c/t) makes η and its discrete derivatives negligible near Θ.
  const double h = d.h();
  const double tol = 10.0 * h;
  const double t_max = (2.0 * std::sqrt(static_cast<double>(d.dim())) + 1.0) * h;
  const double c = flat_scale(epsilon, t_max, tol);
  const double shrink = (1.0 + 0.5 * epsilon) * (1.0 + 0.5 * epsilon);

  EtaProfile out;
  out.field = ScalarField(domain);
  out.theta = theta;
  out.builder = "whitney";
  out.epsilon = epsilon;
  out.decay = Decay::Linear;
  for (std::size_t i = 0; i < d.node_count(); ++i) {
    if (theta[i]) continue;
    const double t = s2[i] / shrink;
    const double v = t > 0.0 ? epsilon * t * std::exp(-c / t) : 0.0;
    out.field[i] = std::min(v, epsilon * dist[i] * (1.0 - 1e-6));
  }

  // Enforce the slope bound by a global rescale when the smoothing overshoots.
  const double slope = std::max(central_gradient_bound(out.field), adjacent_slope_bound(out.field));
  if (slope > epsilon) {
    const double k = epsilon / slope * (1.0 - 1e-12);
    for (auto& v : out.field.values()) v *= k;
  }
  measure(out);
  check_zero_set(out, dist);
  if (out.grad_bound > epsilon || out.max_slope > epsilon)
    out.violations.push_back("gradient bound exceeds epsilon");
  const FlatnessCertificate flat = certify_flatness(out);
  if (!flat.pass) {
    std::ostringstream os;
    os << "not flat near Θ: value " << flat.max_value << ", first " << flat.max_first
       << ", second " << flat.max_second << " > " << flat.tolerance;
    out.violations.push_back(os.str());
  }
  return out;
}

FlatnessCertificate certify_flatness(const EtaProfile& eta) {
  const ScalarField& f = eta.field;
  const Domain& d = f.domain();
  FlatnessCertificate cert;
  cert.tolerance = 10.0 * d.h();
  const NodeMask band = dilate(d, eta.theta, 2);
  for (std::size_t i = 0; i < d.node_count(); ++i) {
    if (!band[i] || !d.inside(i)) continue;
    cert.max_value = std::max(cert.max_value, std::abs(f[i]));
    for (int a = 0; a < d.dim(); ++a) {
      cert.max_first = std::max(cert.max_first, std::abs(f.derivative(i, a)));
      cert.max_second = std::max(cert.max_second, std::abs(second_difference(f, i, a)));
    }
  }
  cert.pass = cert.max_value <= cert.tolerance && cert.max_first <= cert.tolerance &&
              cert.max_second <= cert.tolerance;
  return cert;
}

EtaProfile regularized_distance(const DomainPtr& domain, double epsilon, const Kernel& kernel) {
  const Domain& d = *domain;
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw ConfigError("epsilon must lie in (0, 1)");
  if (!kernel.smooth()) throw ConfigError("regularized distance needs a smooth kernel");
  if (kernel.dim() != d.dim()) throw ConfigError("kernel dimension does not match the domain");

  const NodeMask boundary = outside_nodes(d);
  MollifierConfig cfg;
  cfg.kernel = kernel;
  cfg.eta = build_whitney_eta(domain, boundary, std::min(epsilon, 0.5));
  if (!cfg.eta.violations.empty())
    throw CertificationError("whitney base step failed: " + cfg.eta.violations.front());
  const Mollifier T(cfg);
  const Sigma sigma = make_sigma(domain);

  EtaProfile out;
  out.field = ScalarField(domain);
  parallel_for(d.node_count(), [&](std::size_t i) {
    out.field[i] = d.inside(i) ? T.apply_node(i, sigma) : 0.0;
  });

  double worst = 0.0;
  std::size_t worst_node = 0;
  for (std::size_t i = 0; i < d.node_count(); ++i) {
    if (!d.inside(i)) continue;
    const double s = sigma.nodes[i];
    const double v = out.field[i];
    const double excess = std::max((1.0 - epsilon) * s - v, v - (1.0 + epsilon) * s);
    if (excess > worst) {
      worst = excess;
      worst_node = i;
    }
  }
  if (worst > 0.0) {
    std::ostringstream os;
    os << "regularized distance outside (1±ε)σ by " << worst << " at " << node_label(d, worst_node);
    throw CertificationError(os.str());
  }
  out.theta = boundary;
  out.builder = "regdist";
  out.epsilon = epsilon;
  out.decay = Decay::Linear;
  measure(out);
  return out;
}

EtaProfile quadratic_eta(const DomainPtr& domain, double epsilon, const Kernel& kernel) {
  const Domain& d = *domain;
  const EtaProfile reg = regularized_distance(domain, epsilon, kernel);
  const ScalarField sigma = distance_field(domain, DistanceTarget::Boundary);
  const double kappa = std::pow((1.0 - epsilon) / (1.0 + epsilon), 2);

  EtaProfile out;
  out.field = ScalarField(domain);
  for (std::size_t i = 0; i < d.node_count(); ++i) {
    const double q = reg.field[i] / (1.0 + epsilon);
    out.field[i] = d.inside(i) ? q * q : 0.0;
  }
  for (std::size_t i = 0; i < d.node_count(); ++i) {
    if (!d.inside(i)) continue;
    const double s = sigma[i];
    const double v = out.field[i];
    if (!(kappa * s * s <= v && v <= s * s && v < s)) {
      std::ostringstream os;
      os << "quadratic step violates κσ² <= η <= σ², η < σ at " << node_label(d, i) << " (η=" << v
         << ", σ=" << s << ")";
      throw CertificationError(os.str());
    }
  }
  out.theta = reg.theta;
  out.builder = "quadratic";
  out.epsilon = epsilon;
  out.decay = Decay::Quadratic;
  out.kappa = kappa;
  measure(out);
  return out;
}

EtaProfile modified_step_eta(const DomainPtr& domain, int n, const Kernel& kernel) {
  const Domain& d = *domain;
  if (n < 1) throw ConfigError("modified step needs n >= 1");
  if (!kernel.smooth()) throw ConfigError("modified step needs a smooth kernel");
  const Sigma sigma = make_sigma(domain);
  ScalarField step(domain);
  for (std::size_t i = 0; i < d.node_count(); ++i)
    step[i] = d.inside(i) ? sigma.nodes[i] * sigma.nodes[i] / n : 0.0;
  const Mollifier T(kernel, step);

  EtaProfile out;
  out.field = ScalarField(domain);
  parallel_for(d.node_count(), [&](std::size_t i) {
    if (!d.inside(i)) return;
    const double t = T.apply_node(i, sigma);
    const double s = sigma.nodes[i];
    out.field[i] = std::min(t * t, s * s);
  });
  for (std::size_t i = 0; i < d.node_count(); ++i) {
    if (!d.inside(i)) continue;
    const double s = sigma.nodes[i];
    const double lo = (1.0 - s / n) * (1.0 - s / n) * s * s;
    if (!(lo <= out.field[i] && out.field[i] <= s * s && out.field[i] > 0.0)) {
      std::ostringstream os;
      os << "modified step violates (1-σ/n)²σ² <= η_n <= σ² at " << node_label(d, i);
      throw CertificationError(os.str());
    }
  }
  out.theta = outside_nodes(d);
  out.builder = "modified";
  out.decay = Decay::Quadratic;
  measure(out);
  return out;
}

EtaProfile eta_from_field(ScalarField field, Decay decay) {
  const Domain& d = field.domain();
  EtaProfile out;
  out.theta.assign(d.node_count(), 0);
  for (std::size_t i = 0; i < d.node_count(); ++i) {
    if (!(field[i] >= 0.0) || !std::isfinite(field[i]))
      throw ConfigError("step field must be finite and nonnegative; bad " + node_label(d, i));
    out.theta[i] = field[i] == 0.0 || !d.inside(i);
  }
  out.field = std::move(field);
  out.builder = "field";
  out.decay = decay;
  measure(out);
  return out;
}

// ---------------------------------------------------------------------------------------------
// Modulus of continuity

double ModulusOfContinuity::operator()(double t) const {
  if (t <= 0.0) return 0.0;
  double base;
  if (knots.empty()) {
    base = 0.0;
  } else if (t >= knots.back()) {
    base = values.back();
  } else {
    const auto it = std::upper_bound(knots.begin(), knots.end(), t);
    const std::size_t j = static_cast<std::size_t>(it - knots.begin());
    const double t0 = j == 0 ? 0.0 : knots[j - 1];
    const double v0 = j == 0 ? 0.0 : values[j - 1];
    base = v0 + (values[j] - v0) * (t - t0) / (knots[j] - t0);
  }
  return base + floor_slope * t;
}

double ModulusOfContinuity::inverse(double v) const {
  if (v <= 0.0) return 0.0;
  double t0 = 0.0;
  double w0 = 0.0;
  for (std::size_t j = 0; j < knots.size(); ++j) {
    const double t1 = knots[j];
    const double w1 = values[j] + floor_slope * t1;
    if (v <= w1) return t0 + (t1 - t0) * (v - w0) / (w1 - w0);
    t0 = t1;
    w0 = w1;
  }
  return t0 + (v - w0) / floor_slope;
}

ModulusOfContinuity ModulusOfContinuity::identity(double max_t) {
  ModulusOfContinuity m;
  m.knots = {max_t};
  m.values = {max_t};
  return m;
}

ModulusOfContinuity estimate_modulus(const ScalarField& alpha, int bins, std::uint64_t seed) {
  const Domain& d = alpha.domain();
  if (bins < 8) throw ConfigError("modulus estimation needs at least 8 bins");

  // Nodes of the closure: inside nodes and their axis neighbours.
  NodeMask keep(d.node_count(), 0);
  for (std::size_t i = 0; i < d.node_count(); ++i) {
    if (!d.inside(i)) continue;
    keep[i] = 1;
    const auto c = d.coords(i);
    for (int a = 0; a < d.dim(); ++a) {
      if (c[a] > 0) keep[i - d.stride(a)] = 1;
      if (c[a] + 1 < d.shape(a)) keep[i + d.stride(a)] = 1;
    }
  }
  std::vector<std::size_t> nodes;
  for (std::size_t i = 0; i < d.node_count(); ++i) {
    if (!keep[i]) continue;
    if (!std::isfinite(alpha[i])) throw ConfigError("alpha must be finite");
    nodes.push_back(i);
  }

  const double diam = d.diameter();
  std::vector<double> bin_t(bins, 0.0), bin_v(bins, 0.0);
  std::vector<std::uint8_t> used(bins, 0);
  auto record = [&](std::size_t i, std::size_t j) {
    const Point p = d.point(i), q = d.point(j);
    double r = 0.0;
    for (int a = 0; a < d.dim(); ++a) r += (p[a] - q[a]) * (p[a] - q[a]);
    r = std::sqrt(r);
    if (r <= 0.0) return;
    const int b = std::min(bins - 1, static_cast<int>(r / diam * bins));
    used[b] = 1;
    bin_t[b] = std::max(bin_t[b], r);
    bin_v[b] = std::max(bin_v[b], std::abs(alpha[i] - alpha[j]));
  };

  if (nodes.size() <= 2048) {
    for (std::size_t a = 0; a < nodes.size(); ++a)
      for (std::size_t b = a + 1; b < nodes.size(); ++b) record(nodes[a], nodes[b]);
  } else {
    // Local stencil captures small distances; random pairs cover the long range.
    constexpr int radius = 4;
    for (std::size_t i : nodes) {
      const auto c = d.coords(i);
      const int span[3] = {radius, d.dim() > 1 ? radius : 0, d.dim() > 2 ? radius : 0};
      for (int dx = 0; dx <= span[0]; ++dx)
        for (int dy = -span[1]; dy <= span[1]; ++dy)
          for (int dz = -span[2]; dz <= span[2]; ++dz) {
            std::array<int, kMaxDim> n{c[0] + dx, c[1] + dy, c[2] + dz};
            bool ok = true;
            for (int a = 0; a < d.dim(); ++a) ok = ok && n[a] >= 0 && n[a] < d.shape(a);
            if (!ok) continue;
            const std::size_t j = d.index(n);
            if (j <= i || !keep[j]) continue;
            record(i, j);
          }
    }
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> pick(0, nodes.size() - 1);
    const std::size_t pairs = std::min<std::size_t>(400000, nodes.size() * 8);
    for (std::size_t k = 0; k < pairs; ++k) record(nodes[pick(rng)], nodes[pick(rng)]);
  }

  ModulusOfContinuity m;
  double running = 0.0;
  for (int b = 0; b < bins; ++b) {
    if (!used[b]) continue;
    running = std::max(running, bin_v[b]);
    m.knots.push_back(bin_t[b]);
    m.values.push_back(running);
  }
  return m;
}

EtaProfile calibrated_eta(const DomainPtr& domain, const ScalarField& alpha,
                          const ModulusOfContinuity& modulus, const EtaProfile& base) {
  const Domain& d = *domain;
  if (alpha.size() != d.node_count() || base.field.size() != d.node_count())
    throw ConfigError("alpha and base step must live on the domain grid");
  for (std::size_t i = 0; i < d.node_count(); ++i) {
    if (!(alpha[i] >= 0.0)) throw ConfigError("alpha must be nonnegative; bad " + node_label(d, i));
    if (d.inside(i) && alpha[i] == 0.0 && !base.theta[i])
      throw ConfigError("base step must vanish where alpha does; " + node_label(d, i));
  }
  EtaProfile out;
  out.field = ScalarField(domain);
  for (std::size_t i = 0; i < d.node_count(); ++i) {
    if (base.theta[i]) continue;
    const double e0 = base.field[i];
    out.field[i] = std::min(e0, modulus.inverse(alpha[i] * e0));
  }
  out.theta = base.theta;
  out.builder = "calibrated";
  out.epsilon = base.epsilon;
  out.decay = Decay::Calibrated;
  measure(out);
  for (std::size_t i = 0; i < d.node_count(); ++i) {
    if (base.theta[i]) continue;
    if (!(out.field[i] > 0.0)) out.violations.push_back("not positive off Θ at " + node_label(d, i));
    if (modulus(out.field[i]) > alpha[i] * base.field[i] * (1.0 + 1e-9))
      out.violations.push_back("ω(η) exceeds α·η⁰ at " + node_label(d, i));
    if (out.violations.size() > 16) break;
  }
  return out;
}

double calibration_ratio(const EtaProfile& eta, const ScalarField& alpha,
                         const ModulusOfContinuity& modulus, int n) {
  const Domain& d = eta.field.domain();
  double best = 0.0;
  for (std::size_t i = 0; i < d.node_count(); ++i) {
    if (eta.theta[i] || !d.inside(i) || alpha[i] <= 0.0) continue;
    best = std::max(best, modulus(eta.field[i] / n) / alpha[i]);
  }
  return best;
}

}  // namespace mollikit
