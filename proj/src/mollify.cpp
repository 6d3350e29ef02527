#include "mollikit/mollify.hpp"

#include <cmath>
#include <sstream>

#include "mollikit/parallel.hpp"

namespace mollikit {

namespace {

void require_same_grid(const Domain& a, const Domain& b, const char* what) {
  if (a.node_count() != b.node_count() || a.dim() != b.dim() || a.shape() != b.shape())
    throw ConfigError(std::string(what) + " does not live on the mollifier grid");
}

double norm(const Point& p, int dim) {
  double s = 0.0;
  for (int a = 0; a < dim; ++a) s += p[a] * p[a];
  return std::sqrt(s);
}

}  // namespace

Mollifier::Mollifier(MollifierConfig config) : config_(std::move(config)) {
  const Kernel& k = config_.kernel;
  const bool composite = config_.composite.has_value();
  const EtaProfile& base = composite ? config_.composite->eta1 : config_.eta;
  if (base.field.domain_ptr() == nullptr) throw ConfigError("mollifier needs a step function");
  const DomainPtr& dom = base.field.domain_ptr();
  const Domain& d = *dom;
  if (k.dim() != d.dim()) throw ConfigError("kernel dimension does not match the domain");
  if (!k.smooth() && !config_.allow_boundary_step)
    throw ConfigError("the box kernel is reserved for the counterexample runner");
  if (config_.n && *config_.n < 1) throw ConfigError("n must be a positive integer");
  if (!(config_.step_scale > 0.0)) throw ConfigError("step scale must be positive");
  if (config_.variant == Variant::Modified) {
    if (k.profile() != Profile::Plateau || !config_.n || k.plateau_n() != *config_.n)
      throw ConfigError("the modified variant needs the plateau kernel with the same n");
  }
  if (composite) require_same_grid(d, config_.composite->eta0.field.domain(), "eta0");

  const double inv_n = config_.n ? 1.0 / *config_.n : 1.0;
  step_ = ScalarField(dom);
  for (std::size_t i = 0; i < d.node_count(); ++i) {
    double s;
    if (composite) {
      // Without n the composite collapses to the η¹ step (the n → ∞ limit).
      s = config_.composite->eta1.field[i];
      if (config_.n) s += config_.composite->eta0.field[i] * inv_n;
    } else {
      s = config_.eta.field[i] * inv_n;
    }
    step_[i] = d.inside(i) ? config_.step_scale * s : 0.0;
  }

  const ScalarField sigma = distance_field(dom, DistanceTarget::Boundary);
  for (std::size_t i = 0; i < d.node_count(); ++i) {
    if (!d.inside(i)) continue;
    const double s = step_[i];
    const bool ok = std::isfinite(s) && s >= 0.0 &&
                    (config_.allow_boundary_step ? s <= sigma[i] : s < sigma[i]);
    if (!ok) {
      const Point p = d.point(i);
      std::ostringstream os;
      os << "step " << s << " is not below σ=" << sigma[i] << " at node " << i << " (" << p[0];
      for (int a = 1; a < d.dim(); ++a) os << "," << p[a];
      os << ")";
      throw ConfigError(os.str());
    }
  }
  cutoff_ = config_.subgrid_cutoff < 0.0 ? d.h() : config_.subgrid_cutoff;
  build_step_gradient();
}

Mollifier::Mollifier(Kernel kernel, ScalarField step, double subgrid_cutoff) {
  config_.kernel = std::move(kernel);
  config_.subgrid_cutoff = subgrid_cutoff;
  step_ = std::move(step);
  if (config_.kernel.dim() != step_.domain().dim())
    throw ConfigError("kernel dimension does not match the domain");
  cutoff_ = subgrid_cutoff < 0.0 ? step_.domain().h() : subgrid_cutoff;
  build_step_gradient();
}

void Mollifier::build_step_gradient() { step_grad_ = gradient(step_); }

Point Mollifier::step_gradient(std::size_t node) const { return step_grad_.node(node); }

ScalarField Mollifier::apply(const ScalarField& f, MollifyStats* stats) const {
  const Domain& d = domain();
  require_same_grid(d, f.domain(), "input field");
  ScalarField out(step_.domain_ptr());
  auto sampler = [&f](const Point& p) { return f.at(p); };
  parallel_for(d.node_count(), [&](std::size_t i) {
    const double s = step_[i];
    out[i] = (!d.inside(i) || is_identity(s)) ? f[i] : average(d.point(i), s, sampler);
  });
  if (stats) {
    MollifyStats st;
    double fmax = 0.0, tmax = 0.0;
    for (std::size_t i = 0; i < d.node_count(); ++i) {
      if (!d.inside(i)) continue;
      const double s = step_[i];
      if (s <= 0.0) ++st.identity_nodes;
      else if (s < cutoff_) ++st.flagged_subgrid_nodes;
      fmax = std::max(fmax, std::abs(f[i]));
      tmax = std::max(tmax, std::abs(out[i]));
    }
    st.sup_ratio = fmax > 0.0 ? tmax / fmax : 0.0;
    *stats = st;
  }
  return out;
}

VectorField Mollifier::apply_gradient(const ScalarField& f, const VectorField& grad_f) const {
  const Domain& d = domain();
  require_same_grid(d, f.domain(), "input field");
  if (grad_f.dim() != d.dim()) throw ConfigError("gradient has the wrong number of components");
  VectorField out;
  for (int a = 0; a < d.dim(); ++a) out.components.emplace_back(step_.domain_ptr());
  auto sampler = [&grad_f](const Point& p) { return grad_f.at(p); };
  parallel_for(d.node_count(), [&](std::size_t i) {
    const double s = step_[i];
    const Point g = (!d.inside(i) || is_identity(s)) ? grad_f.node(i) : gradient_node(i, sampler);
    for (int a = 0; a < d.dim(); ++a) out.components[a][i] = g[a];
  });
  return out;
}

ScalarField mollify(const ScalarField& f, const MollifierConfig& cfg, MollifyStats* stats) {
  return Mollifier(cfg).apply(f, stats);
}

VectorField mollify_gradient(const ScalarField& f, const VectorField& grad_f,
                             const MollifierConfig& cfg) {
  return Mollifier(cfg).apply_gradient(f, grad_f);
}

GradientBoundReport pointwise_gradient_bound_check(const ScalarField& f, const MollifierConfig& cfg) {
  const Mollifier T(cfg);
  const Domain& d = T.domain();
  const int dim = d.dim();
  const ScalarField tf = T.apply(f);
  const VectorField grad_tf = gradient(tf);
  const VectorField grad_f = gradient(f);
  VectorField t_grad;
  for (int a = 0; a < dim; ++a) t_grad.components.push_back(T.apply(grad_f.components[a]));
  const ScalarField t_abs = T.apply(gradient_magnitude(f));

  GradientBoundReport r;
  r.slack = 1e-8 + 5.0 * d.h();
  for (std::size_t i = 0; i < d.node_count(); ++i) {
    if (!d.inside(i)) continue;
    ++r.checked_nodes;
    const Point a = grad_tf.node(i);
    const Point b = t_grad.node(i);
    Point diff{};
    for (int k = 0; k < dim; ++k) diff[k] = a[k] - b[k];
    const double gs = norm(T.step_gradient(i), dim);
    const double m_total = norm(a, dim) - (norm(b, dim) + gs * t_abs[i]);
    const double m_dev = norm(diff, dim) - gs * t_abs[i];
    if (m_total > r.slack) ++r.violations_total;
    if (m_dev > r.slack) ++r.violations_deviation;
    if (std::max(m_total, m_dev) > std::max(r.worst_margin_total, r.worst_margin_deviation))
      r.worst_node = i;
    r.worst_margin_total = std::max(r.worst_margin_total, m_total);
    r.worst_margin_deviation = std::max(r.worst_margin_deviation, m_dev);
  }
  return r;
}

MollifierConfig composite_config(const EtaProfile& eta1, const EtaProfile& eta0, int n,
                                 const Kernel& kernel) {
  MollifierConfig cfg;
  cfg.kernel = kernel;
  cfg.eta = eta1;
  cfg.n = n;
  cfg.composite = CompositeSteps{eta1, eta0};
  return cfg;
}

ScalarField mollify_composite(const ScalarField& f, const EtaProfile& eta1, const EtaProfile& eta0,
                              int n, const Kernel& kernel) {
  return mollify(f, composite_config(eta1, eta0, n, kernel));
}

VectorField psi_field(const ScalarField& f, const EtaProfile& eta1, const EtaProfile& eta0,
                      std::optional<int> n, const Kernel& kernel) {
  MollifierConfig cfg;
  cfg.kernel = kernel;
  cfg.eta = eta1;
  cfg.n = n;
  cfg.composite = CompositeSteps{eta1, eta0};
  const Mollifier T(cfg);
  const Domain& d = T.domain();
  const VectorField grad_f = gradient(f);
  auto sampler = [&grad_f](const Point& p) { return grad_f.at(p); };
  VectorField out;
  for (int a = 0; a < d.dim(); ++a) out.components.emplace_back(T.domain_ptr());
  parallel_for(d.node_count(), [&](std::size_t i) {
    const Point g = T.correction_node(i, sampler);
    for (int a = 0; a < d.dim(); ++a) out.components[a][i] = g[a];
  });
  return out;
}

MollifierConfig modified_config(const DomainPtr& domain, int n, int order) {
  MollifierConfig cfg;
  cfg.kernel = make_kernel(Profile::Plateau, domain->dim(), order, n);
  cfg.eta = modified_step_eta(domain, n, make_kernel(Profile::Bump, domain->dim(), order));
  cfg.n = n;
  cfg.variant = Variant::Modified;
  return cfg;
}

}  // namespace mollikit
