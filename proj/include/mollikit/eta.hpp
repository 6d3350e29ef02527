#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mollikit/geometry.hpp"
#include "mollikit/kernels.hpp"

namespace mollikit {

enum class Decay { Linear, Quadratic, Calibrated };

std::string to_string(Decay d);

/// An admissible step function η together with the properties certified for it.
struct EtaProfile {
  ScalarField field;
  /// Certified sup |∇η| from central differences.
  double grad_bound = 0.0;
  Decay decay = Decay::Linear;
  /// Lower constant κ of κσ² <= η <= σ² when decay is quadratic.
  std::optional<double> kappa;
  /// Zero set Θ as a node mask.
  NodeMask theta;

  std::string builder;
  double epsilon = 0.0;
  /// Largest |η(x) - η(y)| / |x - y| over axis-adjacent node pairs.
  double max_slope = 0.0;
  /// Largest central second difference; the discrete smoothness certificate.
  double second_difference_bound = 0.0;
  std::vector<std::string> violations;
};

struct WhitneyOptions {
  /// Quadrature order of the bump kernel used to smooth the distance field.
  int smoothing_order = 16;
};

/// η vanishing exactly on Θ with η <= ε·dist(·,Θ), discrete |∇η| <= ε and flat near Θ.
///
/// Θ must contain every node outside Ω; its inside nodes act as the interior set Δ.
/// Throws ConfigError for ε outside (0, 1/2] or a Θ that misses boundary nodes.
EtaProfile build_whitney_eta(const DomainPtr& domain, const NodeMask& theta, double epsilon,
                             const WhitneyOptions& options = {});

/// η̃ = Tσ with a Whitney step of parameter ε; certified (1-ε)σ <= η̃ <= (1+ε)σ.
/// Throws CertificationError naming the worst node when the bound fails.
EtaProfile regularized_distance(const DomainPtr& domain, double epsilon, const Kernel& kernel);

/// η = (η̃/(1+ε))² with κ = ((1-ε)/(1+ε))²; certified κσ² <= η <= σ² and η < σ.
EtaProfile quadratic_eta(const DomainPtr& domain, double epsilon, const Kernel& kernel);

/// η_n = (T σ)² where T steps by σ²/n; certified (1 - σ/n)²σ² <= η_n <= σ².
/// Used by the modified operator family with plateau kernels.
EtaProfile modified_step_eta(const DomainPtr& domain, int n, const Kernel& kernel);

/// Wraps a user-supplied η; Θ is its exact zero set and the gradient bound is measured.
EtaProfile eta_from_field(ScalarField field, Decay decay = Decay::Linear);

/// Monotone piecewise-linear modulus of continuity with a strictly increasing floor.
struct ModulusOfContinuity {
  std::vector<double> knots;   ///< increasing distances t_j (t_0 > 0; ω(0) = 0 is implicit)
  std::vector<double> values;  ///< nondecreasing ω(t_j) before the floor is added
  double floor_slope = 1e-12;

  double operator()(double t) const;
  /// Monotone inverse of operator().
  double inverse(double v) const;

  /// ω(t) = t (plus floor), handy for Lipschitz bounds.
  static ModulusOfContinuity identity(double max_t);
};

/// Empirical modulus of a field from node pairs binned by distance, then made monotone.
/// All pairs are used on small grids; otherwise a local stencil plus seeded random pairs.
ModulusOfContinuity estimate_modulus(const ScalarField& alpha, int bins, std::uint64_t seed = 0);

/// η = min(η⁰, ω⁻¹(α·η⁰)) so that ω(η) <= α·η⁰; zero on Θ of the base profile.
EtaProfile calibrated_eta(const DomainPtr& domain, const ScalarField& alpha,
                          const ModulusOfContinuity& modulus, const EtaProfile& base);

/// max over nodes off Θ of H_n(x) = ω(η(x)/n)/α(x).
double calibration_ratio(const EtaProfile& eta, const ScalarField& alpha,
                         const ModulusOfContinuity& modulus, int n);

/// Flatness of η at Θ: largest |η|, |Dη| and |D²η| over nodes within two grid shells of Θ.
struct FlatnessCertificate {
  double max_value = 0.0;
  double max_first = 0.0;
  double max_second = 0.0;
  double tolerance = 0.0;
  bool pass = true;
};
FlatnessCertificate certify_flatness(const EtaProfile& eta);

/// Discrete max |∇η| (central differences) and max adjacent-pair slope.
double central_gradient_bound(const ScalarField& f);
double adjacent_slope_bound(const ScalarField& f);

}  // namespace mollikit
