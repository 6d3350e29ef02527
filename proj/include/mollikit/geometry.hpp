#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace mollikit {

constexpr int kMaxDim = 3;

/// A point in R^N; coordinates beyond the domain dimension are ignored and kept at 0.
using Point = std::array<double, kMaxDim>;
using NodeMask = std::vector<std::uint8_t>;

/// Invalid user input or configuration (maps to CLI exit code 2).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A certified property did not hold (maps to CLI exit code 1).
class CertificationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Interval {
  double lo = 0.0;
  double hi = 1.0;
};

enum class BoundaryKind { Box, Ball, Mask };

/// Which closed set a distance is measured to: the boundary, or Θ = ∂Ω ∪ Δ.
enum class DistanceTarget { Boundary, Theta };

enum class DistanceMethod { Auto, BruteForce, Propagation };

/// Bounded open domain sampled on a uniform Cartesian grid spanning its bounding box.
///
/// Nodes are stored row-major (last axis fastest). Every field lives on all nodes of the
/// bounding box; operators only write inside nodes, which are the nodes of Ω itself.
/// For box domains the bounding box is the closure of Ω, so boundary nodes lie on its faces.
class Domain {
 public:
  static Domain box(int dim, std::vector<Interval> bbox, std::vector<int> resolution);
  /// Ball centred in the bounding box with radius equal to the smallest half-width.
  static Domain ball(int dim, std::vector<Interval> bbox, std::vector<int> resolution);
  static Domain mask(int dim, std::vector<Interval> bbox, std::vector<int> resolution,
                     NodeMask inside);

  /// Unit box (0,1)^dim with `nodes` grid nodes per axis.
  static Domain unit_box(int dim, int nodes);

  /// Copy with the interior set Δ replaced. Nodes outside Ω are ignored.
  [[nodiscard]] Domain with_delta(NodeMask delta) const;
  /// Copy with the boundary subset Γ replaced (only nodes outside Ω are kept).
  [[nodiscard]] Domain with_gamma(NodeMask gamma) const;

  int dim() const { return dim_; }
  BoundaryKind kind() const { return kind_; }
  std::size_t node_count() const { return stride_[0] * static_cast<std::size_t>(shape_[0]); }
  int shape(int axis) const { return shape_[axis]; }
  const std::array<int, kMaxDim>& shape() const { return shape_; }
  const Interval& bbox(int axis) const { return bbox_[axis]; }
  double spacing(int axis) const { return spacing_[axis]; }
  /// Largest grid spacing; used as "h" in every tolerance budget.
  double h() const;
  double cell_diagonal() const;
  double cell_volume() const;
  double diameter() const;
  std::size_t stride(int axis) const { return stride_[axis]; }

  bool inside(std::size_t node) const { return inside_[node] != 0; }
  const NodeMask& inside_mask() const { return inside_; }
  std::size_t inside_count() const;
  bool has_delta() const;
  bool in_delta(std::size_t node) const { return !delta_.empty() && delta_[node] != 0; }
  const NodeMask& delta_mask() const { return delta_; }
  bool in_gamma(std::size_t node) const { return !gamma_.empty() && gamma_[node] != 0; }
  const NodeMask& gamma_mask() const { return gamma_; }
  /// Θ = (nodes outside Ω) ∪ Δ as a node mask.
  NodeMask theta_mask() const;

  std::array<int, kMaxDim> coords(std::size_t node) const;
  std::size_t index(const std::array<int, kMaxDim>& c) const;
  Point point(std::size_t node) const;
  /// True when p lies in the closed bounding box (with a round-off allowance).
  bool in_bbox(const Point& p) const;

  /// Closed-form σ for box and ball domains; throws for mask domains.
  double sigma_at(const Point& p) const;
  bool has_exact_sigma() const { return kind_ != BoundaryKind::Mask; }

 private:
  Domain() = default;
  void finish_layout();

  int dim_ = 1;
  BoundaryKind kind_ = BoundaryKind::Box;
  std::array<Interval, kMaxDim> bbox_{};
  std::array<int, kMaxDim> shape_{1, 1, 1};
  std::array<double, kMaxDim> spacing_{1.0, 1.0, 1.0};
  std::array<std::size_t, kMaxDim> stride_{1, 1, 1};
  NodeMask inside_;
  NodeMask delta_;
  NodeMask gamma_;
};

using DomainPtr = std::shared_ptr<const Domain>;

/// Real values on every grid node with multilinear interpolation in between.
class ScalarField {
 public:
  ScalarField() = default;
  explicit ScalarField(DomainPtr domain, double fill = 0.0);
  ScalarField(DomainPtr domain, std::vector<double> values);

  const Domain& domain() const { return *domain_; }
  const DomainPtr& domain_ptr() const { return domain_; }
  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }
  double& operator[](std::size_t i) { return values_[i]; }
  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }

  /// Multilinear interpolant at p; throws ConfigError outside the closed bounding box.
  double at(const Point& p) const;

  /// Central-difference partial derivative at a node (one-sided on bounding-box faces).
  double derivative(std::size_t node, int axis) const;

 private:
  DomainPtr domain_;
  std::vector<double> values_;
};

struct VectorField {
  std::vector<ScalarField> components;

  int dim() const { return static_cast<int>(components.size()); }
  Point at(const Point& p) const;
  Point node(std::size_t i) const;
};

/// Central-difference gradient of a field.
VectorField gradient(const ScalarField& f);
/// |∇f| at every node from central differences.
ScalarField gradient_magnitude(const ScalarField& f);

/// Sample a callable on every node of the domain.
template <class F>
ScalarField sample(const DomainPtr& domain, F&& fn) {
  ScalarField out(domain);
  for (std::size_t i = 0; i < domain->node_count(); ++i) out[i] = fn(domain->point(i));
  return out;
}

/// σ = dist(·, ∂Ω) (target Boundary) or dist(·, ∂Ω ∪ Δ) (target Theta) on every node.
/// Zero on nodes outside Ω.
ScalarField distance_field(const DomainPtr& domain, DistanceTarget target,
                           DistanceMethod method = DistanceMethod::Auto);

/// Inside nodes with σ ≤ width.
std::vector<std::size_t> boundary_shell(const Domain& domain, const ScalarField& sigma,
                                        double width);
std::vector<std::size_t> boundary_shell(const DomainPtr& domain, double width);

}  // namespace mollikit
