#pragma once

#include <array>
#include <string>
#include <vector>

#include "mollikit/geometry.hpp"

namespace mollikit {

enum class Profile {
  Bump,     ///< exp(-1/(1-|x|^2)) on the open unit ball.
  Box,      ///< Indicator of the open unit ball; non-smooth, counterexample use only.
  Plateau,  ///< Equal to 1 on |x| <= 1 - 1/n, smooth monotone bridge to 0 at |x| = 1.
};

std::string to_string(Profile p);
Profile parse_profile(const std::string& name);

/// Radial kernel with a symmetric midpoint quadrature rule on the open unit ball.
///
/// Nodes are the centres of a uniform lattice of spacing 2/order restricted to |z| < 1, so
/// z and -z always appear together with the same weight. m_rho is the reciprocal of the
/// discrete integral of rho under that same rule, which makes the rule reproduce constants.
class Kernel {
 public:
  Profile profile() const { return profile_; }
  int dim() const { return dim_; }
  int order() const { return order_; }
  int plateau_n() const { return plateau_n_; }
  bool smooth() const { return profile_ != Profile::Box; }

  /// Radial profile value at radius r >= 0.
  double profile_value(double r) const;
  double operator()(const Point& z) const;

  const std::vector<Point>& nodes() const { return nodes_; }
  const std::vector<double>& weights() const { return weights_; }
  /// m_rho * w_k * rho(z_k) for each node; these sum to one.
  const std::vector<double>& coefficients() const { return coeffs_; }
  double m_rho() const { return m_rho_; }
  /// Largest |z_k| over the rule.
  double quadrature_radius() const { return radius_; }

 private:
  friend Kernel make_kernel(Profile, int, int, int);
  Profile profile_ = Profile::Bump;
  int dim_ = 1;
  int order_ = 2;
  int plateau_n_ = 0;
  std::vector<Point> nodes_;
  std::vector<double> weights_;
  std::vector<double> coeffs_;
  double m_rho_ = 0.0;
  double radius_ = 0.0;
};

/// Builds a kernel; `plateau_n` is only read for the plateau profile and must be >= 1.
Kernel make_kernel(Profile profile, int dim, int order, int plateau_n = 0);

/// Σ_k w_k rho(z_k) z_k^alpha for a multi-index of total degree <= 4.
double kernel_moment(const Kernel& kernel, const std::array<int, kMaxDim>& multi_index);

/// Volume of the unit ball: 2, π, 4π/3.
double unit_ball_volume(int dim);

}  // namespace mollikit
