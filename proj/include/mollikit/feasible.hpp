#pragma once

#include <optional>
#include <vector>

#include "mollikit/analysis.hpp"
#include "mollikit/eta.hpp"
#include "mollikit/mollify.hpp"

namespace mollikit {

enum class ConstraintMode { Value, Gradient };

/// K = {|w| <= α} (value mode) or K_G = {|∇w| <= α} (gradient mode).
struct ConstraintSpec {
  ScalarField alpha;
  ConstraintMode mode = ConstraintMode::Value;
  /// Δ = inside nodes where α is exactly zero.
  NodeMask delta;
  NodeMask gamma;
  /// The domain with Δ attached, so dist(·, Θ) is available.
  DomainPtr domain;
  /// Largest adjacent-node slope of α.
  double alpha_lipschitz = 0.0;

  static ConstraintSpec from_alpha(ScalarField alpha, ConstraintMode mode);
  NodeMask theta() const { return domain->theta_mask(); }
};

struct Membership {
  bool member = true;
  std::size_t worst_node = 0;
  double margin = 0.0;  ///< max(|w| - α) or max(|∇w| - α) over inside nodes
};

Membership membership(const ScalarField& f, const ConstraintSpec& spec, double tolerance = 1e-12);

struct ConvergenceFactor {
  ScalarField m;             ///< M_n, 1 on Θ
  double sup_excess = 0.0;   ///< ‖M_n - 1‖_∞
};

/// M_n(x) = max of α over the T_n quadrature samples and the 2N axis extremes of the
/// step ball, divided by α(x).
ConvergenceFactor convergence_factor(const ConstraintSpec& spec, const EtaProfile& eta,
                                     const Kernel& kernel, int n);

struct FeasibleResult {
  ScalarField g;            ///< β_n T_n f
  double beta = 1.0;
  double sup_excess = 0.0;  ///< ‖M_n - 1‖_∞ (or of M̃_n in gradient mode)
  Membership membership;
  /// max over nodes of |T_n f| - M_n α (value mode; <= 0 up to round-off).
  double chain_margin = 0.0;
  double slack = 0.0;       ///< 1e-8 + 3h·Lip(α)
  bool pass() const { return membership.margin <= slack; }
};

/// β_n·T_n f with β_n = 1/(1 + ‖M_n - 1‖_∞). Throws ConfigError when f ∉ K.
FeasibleResult feasible_smooth(const ScalarField& f, const ConstraintSpec& spec,
                               const EtaProfile& eta, const Kernel& kernel, int n);

struct DensityOptions {
  /// Mode (i): zero f within 1/n of Θ before smoothing (the diagonal sequence).
  bool truncate = false;
  std::vector<NormSpec> norms;  ///< defaults: L2 (value) or W12 (gradient)
};

/// Errors ‖β_n T_n f - f‖ per n, feasibility of every iterate, β_n monotonicity and
/// the decay of ‖M_n - 1‖_∞.
StudyReport density_study(const std::string& fixture, const ScalarField& f,
                          const ConstraintSpec& spec, const EtaProfile& eta, const Kernel& kernel,
                          const std::vector<int>& n_list, const DensityOptions& opts = {});

/// f zeroed where dist(·, Θ) < width.
ScalarField truncate_near_theta(const ScalarField& f, const ConstraintSpec& spec, double width);

}  // namespace mollikit
