#pragma once

#include <algorithm>
#include <cstddef>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "mollikit/eta.hpp"
#include "mollikit/geometry.hpp"
#include "mollikit/kernels.hpp"

namespace mollikit {

enum class Variant { Standard, Modified };

struct CompositeSteps {
  EtaProfile eta1;  ///< vanishes on ∂Ω ∪ Δ
  EtaProfile eta0;  ///< vanishes on ∂Ω only
};

/// Everything that fixes a variable-step mollifier.
///
/// The step at x is s(x) = step_scale·η(x)/n, or step_scale·(η¹(x) + η⁰(x)/n) for the
/// composite family. n = none means n = 1 (the operator T itself).
struct MollifierConfig {
  Kernel kernel;
  EtaProfile eta;
  std::optional<int> n;
  Variant variant = Variant::Standard;
  std::optional<CompositeSteps> composite;
  /// Nodes with 0 < s(x) < cutoff return f(x) unchanged and are flagged. Negative: one grid spacing.
  double subgrid_cutoff = -1.0;
  double step_scale = 1.0;
  /// Admits η = σ and the box kernel. Only the counterexample runner sets this.
  bool allow_boundary_step = false;
};

struct MollifyStats {
  std::size_t identity_nodes = 0;
  std::size_t flagged_subgrid_nodes = 0;
  /// max|Tf| / max|f| over inside nodes (0 when f vanishes).
  double sup_ratio = 0.0;
};

/// A validated mollifier with its step field and step gradient precomputed.
class Mollifier {
 public:
  /// Validates the configuration: s < σ at inside nodes (s <= σ with allow_boundary_step),
  /// a smooth kernel unless allow_boundary_step, and the plateau kernel for the modified variant.
  explicit Mollifier(MollifierConfig config);

  /// Low-level form used by η builders: explicit step field, no η certificate.
  Mollifier(Kernel kernel, ScalarField step, double subgrid_cutoff = -1.0);

  const MollifierConfig& config() const { return config_; }
  const Kernel& kernel() const { return config_.kernel; }
  const Domain& domain() const { return step_.domain(); }
  const DomainPtr& domain_ptr() const { return step_.domain_ptr(); }
  const ScalarField& step() const { return step_; }
  double cutoff() const { return cutoff_; }
  Point step_gradient(std::size_t node) const;
  /// Step at an arbitrary point via multilinear interpolation.
  double step_at(const Point& x) const { return step_.at(x); }
  bool is_identity(double s) const { return s <= 0.0 || s < cutoff_; }

  /// m_rho Σ_k w_k rho(z_k) f(x - s z_k), clamped to the sample range so round-off never
  /// leaves the convex hull of the samples.
  template <class F>
  double average(const Point& x, double s, F&& f) const {
    const auto& nodes = config_.kernel.nodes();
    const auto& coeffs = config_.kernel.coefficients();
    const int dim = domain().dim();
    double acc = 0.0;
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (std::size_t k = 0; k < nodes.size(); ++k) {
      Point p{};
      for (int a = 0; a < dim; ++a) p[a] = x[a] - s * nodes[k][a];
      check_sample(x, p, k);
      const double v = f(p);
      acc += coeffs[k] * v;
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    return std::clamp(acc, lo, hi);
  }

  /// Tf at node i for any sampler f: Point -> double.
  template <class F>
  double apply_node(std::size_t i, F&& f) const {
    const Point x = domain().point(i);
    const double s = step_[i];
    if (!domain().inside(i) || is_identity(s)) return f(x);
    return average(x, s, f);
  }

  /// Tf at an arbitrary point of Ω using the interpolated step.
  template <class F>
  double apply_at(const Point& x, F&& f) const {
    const double s = step_at(x);
    if (is_identity(s)) return f(x);
    return average(x, s, f);
  }

  /// ∇Tf at node i from a gradient sampler g: Point -> Point, in the z-substituted form
  /// T(∇f) + ∇s · m_rho Σ_k w_k rho(z_k) (-z_k)ᵀ∇f(x - s z_k).
  template <class G>
  Point gradient_node(std::size_t i, G&& g) const {
    const Point x = domain().point(i);
    const double s = step_[i];
    if (!domain().inside(i) || is_identity(s)) return g(x);
    Point t{};
    const double second = correction_sum(x, s, g, t);
    const Point gs = step_gradient(i);
    for (int a = 0; a < domain().dim(); ++a) t[a] += gs[a] * second;
    return t;
  }

  /// The correction term alone (ψ in the composite setting).
  template <class G>
  Point correction_node(std::size_t i, G&& g) const {
    const double s = step_[i];
    Point out{};
    if (!domain().inside(i) || is_identity(s)) return out;
    Point unused{};
    const double second = correction_sum(domain().point(i), s, g, unused);
    const Point gs = step_gradient(i);
    for (int a = 0; a < domain().dim(); ++a) out[a] = gs[a] * second;
    return out;
  }

  /// Largest |f(x - s z_k) - f(x)| over the quadrature samples; 0 at identity nodes.
  template <class F>
  double oscillation_node(std::size_t i, F&& f) const {
    const double s = step_[i];
    if (!domain().inside(i) || is_identity(s)) return 0.0;
    const Point x = domain().point(i);
    const double fx = f(x);
    double osc = 0.0;
    for (const auto& z : config_.kernel.nodes()) {
      Point p{};
      for (int a = 0; a < domain().dim(); ++a) p[a] = x[a] - s * z[a];
      osc = std::max(osc, std::abs(f(p) - fx));
    }
    return osc;
  }

  ScalarField apply(const ScalarField& f, MollifyStats* stats = nullptr) const;
  VectorField apply_gradient(const ScalarField& f, const VectorField& grad_f) const;

 private:
  void check_sample(const Point& x, const Point& p, std::size_t k) const {
    if (!domain().in_bbox(p)) {
      std::ostringstream os;
      os << "mollifier sample left the domain at x=(" << x[0] << "," << x[1] << "," << x[2]
         << ") quadrature node " << k;
      throw CertificationError(os.str());
    }
  }

  template <class G>
  double correction_sum(const Point& x, double s, G&& g, Point& smoothed) const {
    const auto& nodes = config_.kernel.nodes();
    const auto& coeffs = config_.kernel.coefficients();
    const int dim = domain().dim();
    double second = 0.0;
    for (std::size_t k = 0; k < nodes.size(); ++k) {
      Point p{};
      for (int a = 0; a < dim; ++a) p[a] = x[a] - s * nodes[k][a];
      check_sample(x, p, k);
      const Point gp = g(p);
      double dot = 0.0;
      for (int a = 0; a < dim; ++a) {
        smoothed[a] += coeffs[k] * gp[a];
        dot -= nodes[k][a] * gp[a];
      }
      second += coeffs[k] * dot;
    }
    return second;
  }

  void build_step_gradient();

  MollifierConfig config_;
  ScalarField step_;
  VectorField step_grad_;
  double cutoff_ = 0.0;
};

/// Tf (or T_n f, T̃_n f, Tⁿ f depending on the configuration) at every node.
ScalarField mollify(const ScalarField& f, const MollifierConfig& cfg, MollifyStats* stats = nullptr);

/// ∇Tf from the analytic gradient formula; grad_f is sampled by interpolation.
VectorField mollify_gradient(const ScalarField& f, const VectorField& grad_f,
                             const MollifierConfig& cfg);

struct GradientBoundReport {
  std::size_t checked_nodes = 0;
  std::size_t violations_total = 0;     ///< |∇T_n f| <= |T_n ∇f| + |∇s| T_n|∇f|
  std::size_t violations_deviation = 0; ///< |∇T_n f - T_n ∇f| <= |∇s| T_n|∇f|
  double worst_margin_total = -std::numeric_limits<double>::infinity();
  double worst_margin_deviation = -std::numeric_limits<double>::infinity();
  std::size_t worst_node = 0;
  double slack = 0.0;
  bool pass() const { return violations_total == 0 && violations_deviation == 0; }
};

/// Checks both pointwise gradient bounds with ∇T_n f from central differences of T_n f
/// and ∇f from central differences of f. Violations are reported, never thrown.
GradientBoundReport pointwise_gradient_bound_check(const ScalarField& f, const MollifierConfig& cfg);

/// Composite family step η¹ + η⁰/n.
MollifierConfig composite_config(const EtaProfile& eta1, const EtaProfile& eta0, int n,
                                 const Kernel& kernel);
ScalarField mollify_composite(const ScalarField& f, const EtaProfile& eta1, const EtaProfile& eta0,
                              int n, const Kernel& kernel);

/// ψ_n (n given) or its limit ψ (n = none, step η¹ alone, zero on Δ).
VectorField psi_field(const ScalarField& f, const EtaProfile& eta1, const EtaProfile& eta0,
                      std::optional<int> n, const Kernel& kernel);

/// Modified family: plateau kernel of index n and η_n stepped by η_n/n.
MollifierConfig modified_config(const DomainPtr& domain, int n, int order);

}  // namespace mollikit
