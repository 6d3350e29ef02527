#include "mollikit/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>

#include "mollikit/parallel.hpp"

namespace mollikit {

namespace {

constexpr std::size_t kBruteForceNodeLimit = 1'000'000;

double dist(const Point& a, const Point& b, int dim) {
  double s = 0.0;
  for (int k = 0; k < dim; ++k) s += (a[k] - b[k]) * (a[k] - b[k]);
  return std::sqrt(s);
}

void check_layout(int dim, const std::vector<Interval>& bbox, const std::vector<int>& res) {
  if (dim < 1 || dim > kMaxDim) throw ConfigError("unsupported dimension " + std::to_string(dim));
  if (static_cast<int>(bbox.size()) != dim || static_cast<int>(res.size()) != dim)
    throw ConfigError("bbox/resolution size does not match dimension");
  for (int k = 0; k < dim; ++k) {
    if (!(bbox[k].hi > bbox[k].lo)) throw ConfigError("empty bounding-box interval");
    if (res[k] < 3) throw ConfigError("resolution must be at least 3 nodes per axis");
  }
}

// Nearest-seed propagation in the spirit of a fast-marching sweep: every node carries the
// seed that reached it first, and neighbours inherit candidates in distance order.
std::vector<double> propagate_seeds(const Domain& d, const std::vector<Point>& seeds,
                                    const std::vector<std::size_t>& seed_nodes) {
  const std::size_t n = d.node_count();
  std::vector<double> best(n, std::numeric_limits<double>::infinity());
  std::vector<std::int64_t> owner(n, -1);
  using Entry = std::pair<double, std::size_t>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> queue;

  for (std::size_t s = 0; s < seeds.size(); ++s) {
    std::size_t node = seed_nodes[s];
    double dd = dist(d.point(node), seeds[s], d.dim());
    if (dd < best[node]) {
      best[node] = dd;
      owner[node] = static_cast<std::int64_t>(s);
      queue.emplace(dd, node);
    }
  }

  const int dim = d.dim();
  std::vector<std::array<int, kMaxDim>> offsets;
  for (int a = -1; a <= 1; ++a)
    for (int b = (dim > 1 ? -1 : 0); b <= (dim > 1 ? 1 : 0); ++b)
      for (int c = (dim > 2 ? -1 : 0); c <= (dim > 2 ? 1 : 0); ++c)
        if (a != 0 || b != 0 || c != 0) offsets.push_back({a, b, c});

  while (!queue.empty()) {
    auto [dd, node] = queue.top();
    queue.pop();
    if (dd > best[node]) continue;
    const auto c = d.coords(node);
    const Point& seed = seeds[static_cast<std::size_t>(owner[node])];
    for (const auto& off : offsets) {
      std::array<int, kMaxDim> nc{};
      bool ok = true;
      for (int k = 0; k < kMaxDim; ++k) {
        nc[k] = c[k] + off[k];
        if (nc[k] < 0 || nc[k] >= d.shape(k)) ok = false;
      }
      if (!ok) continue;
      std::size_t nb = d.index(nc);
      double cand = dist(d.point(nb), seed, dim);
      if (cand < best[nb]) {
        best[nb] = cand;
        owner[nb] = owner[node];
        queue.emplace(cand, nb);
      }
    }
  }
  return best;
}

std::vector<double> brute_force_seeds(const Domain& d, const std::vector<Point>& seeds) {
  std::vector<double> best(d.node_count(), std::numeric_limits<double>::infinity());
  parallel_for(d.node_count(), [&](std::size_t i) {
    const Point p = d.point(i);
    double m = std::numeric_limits<double>::infinity();
    for (const auto& s : seeds) m = std::min(m, dist(p, s, d.dim()));
    best[i] = m;
  });
  return best;
}

std::vector<double> seed_distance(const Domain& d, const std::vector<Point>& seeds,
                                  const std::vector<std::size_t>& seed_nodes,
                                  DistanceMethod method) {
  if (seeds.empty())
    return std::vector<double>(d.node_count(), std::numeric_limits<double>::infinity());
  if (method == DistanceMethod::Auto)
    method = d.node_count() <= kBruteForceNodeLimit ? DistanceMethod::BruteForce
                                                    : DistanceMethod::Propagation;
  return method == DistanceMethod::BruteForce ? brute_force_seeds(d, seeds)
                                              : propagate_seeds(d, seeds, seed_nodes);
}

}  // namespace

Domain Domain::box(int dim, std::vector<Interval> bbox, std::vector<int> resolution) {
  check_layout(dim, bbox, resolution);
  Domain d;
  d.dim_ = dim;
  d.kind_ = BoundaryKind::Box;
  for (int k = 0; k < dim; ++k) {
    d.bbox_[k] = bbox[k];
    d.shape_[k] = resolution[k];
  }
  d.finish_layout();
  d.inside_.assign(d.node_count(), 0);
  for (std::size_t i = 0; i < d.node_count(); ++i) {
    auto c = d.coords(i);
    bool in = true;
    for (int k = 0; k < dim; ++k) in = in && c[k] > 0 && c[k] < d.shape_[k] - 1;
    d.inside_[i] = in ? 1 : 0;
  }
  return d;
}

Domain Domain::ball(int dim, std::vector<Interval> bbox, std::vector<int> resolution) {
  check_layout(dim, bbox, resolution);
  Domain d;
  d.dim_ = dim;
  d.kind_ = BoundaryKind::Ball;
  for (int k = 0; k < dim; ++k) {
    d.bbox_[k] = bbox[k];
    d.shape_[k] = resolution[k];
  }
  d.finish_layout();
  d.inside_.assign(d.node_count(), 0);
  for (std::size_t i = 0; i < d.node_count(); ++i) d.inside_[i] = d.sigma_at(d.point(i)) > 0.0;
  if (d.inside_count() == 0) throw ConfigError("ball domain has no inside nodes");
  return d;
}

Domain Domain::mask(int dim, std::vector<Interval> bbox, std::vector<int> resolution,
                    NodeMask inside) {
  check_layout(dim, bbox, resolution);
  Domain d;
  d.dim_ = dim;
  d.kind_ = BoundaryKind::Mask;
  for (int k = 0; k < dim; ++k) {
    d.bbox_[k] = bbox[k];
    d.shape_[k] = resolution[k];
  }
  d.finish_layout();
  if (inside.size() != d.node_count()) throw ConfigError("inside mask size mismatch");
  d.inside_ = std::move(inside);
  for (std::size_t i = 0; i < d.node_count(); ++i) {
    if (!d.inside_[i]) continue;
    auto c = d.coords(i);
    for (int k = 0; k < dim; ++k)
      if (c[k] == 0 || c[k] == d.shape_[k] - 1)
        throw ConfigError("mask domain must be closed off on the bounding-box faces");
  }
  if (d.inside_count() == 0) throw ConfigError("mask domain is empty");
  return d;
}

Domain Domain::unit_box(int dim, int nodes) {
  return box(dim, std::vector<Interval>(dim, Interval{0.0, 1.0}), std::vector<int>(dim, nodes));
}

void Domain::finish_layout() {
  for (int k = 0; k < kMaxDim; ++k) {
    if (k >= dim_) {
      shape_[k] = 1;
      bbox_[k] = Interval{0.0, 0.0};
      spacing_[k] = 0.0;
    } else {
      spacing_[k] = (bbox_[k].hi - bbox_[k].lo) / (shape_[k] - 1);
    }
  }
  stride_[2] = 1;
  stride_[1] = static_cast<std::size_t>(shape_[2]);
  stride_[0] = stride_[1] * static_cast<std::size_t>(shape_[1]);
}

Domain Domain::with_delta(NodeMask delta) const {
  if (!delta.empty() && delta.size() != node_count()) throw ConfigError("delta mask size mismatch");
  Domain d = *this;
  for (std::size_t i = 0; i < delta.size(); ++i)
    if (!inside_[i]) delta[i] = 0;
  d.delta_ = std::move(delta);
  return d;
}

Domain Domain::with_gamma(NodeMask gamma) const {
  if (!gamma.empty() && gamma.size() != node_count()) throw ConfigError("gamma mask size mismatch");
  Domain d = *this;
  for (std::size_t i = 0; i < gamma.size(); ++i)
    if (inside_[i]) gamma[i] = 0;
  d.gamma_ = std::move(gamma);
  return d;
}

double Domain::h() const {
  double m = 0.0;
  for (int k = 0; k < dim_; ++k) m = std::max(m, spacing_[k]);
  return m;
}

double Domain::cell_diagonal() const {
  double s = 0.0;
  for (int k = 0; k < dim_; ++k) s += spacing_[k] * spacing_[k];
  return std::sqrt(s);
}

double Domain::cell_volume() const {
  double v = 1.0;
  for (int k = 0; k < dim_; ++k) v *= spacing_[k];
  return v;
}

double Domain::diameter() const {
  double s = 0.0;
  for (int k = 0; k < dim_; ++k) s += std::pow(bbox_[k].hi - bbox_[k].lo, 2);
  if (kind_ == BoundaryKind::Ball) {
    double r = std::numeric_limits<double>::infinity();
    for (int k = 0; k < dim_; ++k) r = std::min(r, 0.5 * (bbox_[k].hi - bbox_[k].lo));
    return 2.0 * r;
  }
  return std::sqrt(s);
}

std::size_t Domain::inside_count() const {
  return static_cast<std::size_t>(std::count(inside_.begin(), inside_.end(), 1));
}

bool Domain::has_delta() const { return std::find(delta_.begin(), delta_.end(), 1) != delta_.end(); }

NodeMask Domain::theta_mask() const {
  NodeMask theta(node_count(), 0);
  for (std::size_t i = 0; i < node_count(); ++i) theta[i] = (!inside(i) || in_delta(i)) ? 1 : 0;
  return theta;
}

std::array<int, kMaxDim> Domain::coords(std::size_t node) const {
  std::array<int, kMaxDim> c{};
  c[0] = static_cast<int>(node / stride_[0]);
  std::size_t rem = node % stride_[0];
  c[1] = static_cast<int>(rem / stride_[1]);
  c[2] = static_cast<int>(rem % stride_[1]);
  return c;
}

std::size_t Domain::index(const std::array<int, kMaxDim>& c) const {
  return static_cast<std::size_t>(c[0]) * stride_[0] + static_cast<std::size_t>(c[1]) * stride_[1] +
         static_cast<std::size_t>(c[2]);
}

Point Domain::point(std::size_t node) const {
  auto c = coords(node);
  Point p{};
  for (int k = 0; k < dim_; ++k) p[k] = bbox_[k].lo + c[k] * spacing_[k];
  return p;
}

bool Domain::in_bbox(const Point& p) const {
  for (int k = 0; k < dim_; ++k) {
    double tol = 1e-9 * spacing_[k];
    if (p[k] < bbox_[k].lo - tol || p[k] > bbox_[k].hi + tol) return false;
  }
  return true;
}

double Domain::sigma_at(const Point& p) const {
  switch (kind_) {
    case BoundaryKind::Box: {
      double s = std::numeric_limits<double>::infinity();
      for (int k = 0; k < dim_; ++k) s = std::min({s, p[k] - bbox_[k].lo, bbox_[k].hi - p[k]});
      return std::max(s, 0.0);
    }
    case BoundaryKind::Ball: {
      double r = std::numeric_limits<double>::infinity();
      double rr = 0.0;
      for (int k = 0; k < dim_; ++k) {
        r = std::min(r, 0.5 * (bbox_[k].hi - bbox_[k].lo));
        double c = 0.5 * (bbox_[k].lo + bbox_[k].hi);
        rr += (p[k] - c) * (p[k] - c);
      }
      return std::max(r - std::sqrt(rr), 0.0);
    }
    case BoundaryKind::Mask:
      break;
  }
  throw ConfigError("closed-form distance is only available for box and ball domains");
}

// --- fields -------------------------------------------------------------------

ScalarField::ScalarField(DomainPtr domain, double fill)
    : domain_(std::move(domain)), values_(domain_->node_count(), fill) {}

ScalarField::ScalarField(DomainPtr domain, std::vector<double> values)
    : domain_(std::move(domain)), values_(std::move(values)) {
  if (values_.size() != domain_->node_count()) throw ConfigError("field size does not match grid");
}

double ScalarField::at(const Point& p) const {
  const Domain& d = *domain_;
  if (!d.in_bbox(p)) throw ConfigError("interpolation point outside the closed bounding box");
  const int dim = d.dim();
  std::array<std::size_t, kMaxDim> base{};
  std::array<double, kMaxDim> frac{};
  for (int k = 0; k < dim; ++k) {
    double t = (p[k] - d.bbox(k).lo) / d.spacing(k);
    int i = static_cast<int>(std::floor(t));
    i = std::clamp(i, 0, d.shape(k) - 2);
    frac[k] = std::clamp(t - i, 0.0, 1.0);
    base[k] = static_cast<std::size_t>(i) * d.stride(k);
  }
  const std::size_t o = base[0] + base[1] + base[2];
  const double* v = values_.data();
  switch (dim) {
    case 1:
      return v[o] + frac[0] * (v[o + 1] - v[o]);
    case 2: {
      const std::size_t s0 = d.stride(0);
      double a = v[o] + frac[1] * (v[o + 1] - v[o]);
      double b = v[o + s0] + frac[1] * (v[o + s0 + 1] - v[o + s0]);
      return a + frac[0] * (b - a);
    }
    default: {
      const std::size_t s0 = d.stride(0), s1 = d.stride(1);
      auto bilerp = [&](std::size_t q) {
        double a = v[q] + frac[2] * (v[q + 1] - v[q]);
        double b = v[q + s1] + frac[2] * (v[q + s1 + 1] - v[q + s1]);
        return a + frac[1] * (b - a);
      };
      double a = bilerp(o);
      double b = bilerp(o + s0);
      return a + frac[0] * (b - a);
    }
  }
}

double ScalarField::derivative(std::size_t node, int axis) const {
  const Domain& d = *domain_;
  const auto c = d.coords(node);
  const std::size_t s = d.stride(axis);
  const double h = d.spacing(axis);
  if (c[axis] == 0) return (values_[node + s] - values_[node]) / h;
  if (c[axis] == d.shape(axis) - 1) return (values_[node] - values_[node - s]) / h;
  return (values_[node + s] - values_[node - s]) / (2.0 * h);
}

Point VectorField::at(const Point& p) const {
  Point g{};
  for (std::size_t k = 0; k < components.size(); ++k) g[k] = components[k].at(p);
  return g;
}

Point VectorField::node(std::size_t i) const {
  Point g{};
  for (std::size_t k = 0; k < components.size(); ++k) g[k] = components[k][i];
  return g;
}

VectorField gradient(const ScalarField& f) {
  VectorField g;
  const Domain& d = f.domain();
  for (int k = 0; k < d.dim(); ++k) {
    ScalarField c(f.domain_ptr());
    for (std::size_t i = 0; i < d.node_count(); ++i) c[i] = f.derivative(i, k);
    g.components.push_back(std::move(c));
  }
  return g;
}

ScalarField gradient_magnitude(const ScalarField& f) {
  const Domain& d = f.domain();
  ScalarField out(f.domain_ptr());
  for (std::size_t i = 0; i < d.node_count(); ++i) {
    double s = 0.0;
    for (int k = 0; k < d.dim(); ++k) s += std::pow(f.derivative(i, k), 2);
    out[i] = std::sqrt(s);
  }
  return out;
}

// --- distances ----------------------------------------------------------------

ScalarField distance_field(const DomainPtr& domain, DistanceTarget target, DistanceMethod method) {
  const Domain& d = *domain;
  if (d.inside_count() == 0) throw ConfigError("empty domain");
  const int dim = d.dim();
  ScalarField out(domain);

  if (d.has_exact_sigma()) {
    for (std::size_t i = 0; i < d.node_count(); ++i)
      out[i] = d.inside(i) ? d.sigma_at(d.point(i)) : 0.0;
  } else {
    // ∂Ω is resolved at the midpoints of faces between inside and outside nodes.
    std::vector<Point> seeds;
    std::vector<std::size_t> seed_nodes;
    for (std::size_t i = 0; i < d.node_count(); ++i) {
      if (!d.inside(i)) continue;
      auto c = d.coords(i);
      for (int k = 0; k < dim; ++k) {
        for (int dir : {-1, 1}) {
          auto nc = c;
          nc[k] += dir;
          std::size_t nb = d.index(nc);
          if (d.inside(nb)) continue;
          Point a = d.point(i), b = d.point(nb), m{};
          for (int q = 0; q < dim; ++q) m[q] = 0.5 * (a[q] + b[q]);
          seeds.push_back(m);
          seed_nodes.push_back(i);
        }
      }
    }
    auto best = seed_distance(d, seeds, seed_nodes, method);
    for (std::size_t i = 0; i < d.node_count(); ++i) out[i] = d.inside(i) ? best[i] : 0.0;
  }

  if (target == DistanceTarget::Theta && d.has_delta()) {
    // Distance to a closed node set equals distance to its outer layer for points off it.
    std::vector<Point> seeds;
    std::vector<std::size_t> seed_nodes;
    for (std::size_t i = 0; i < d.node_count(); ++i) {
      if (!d.in_delta(i)) continue;
      auto c = d.coords(i);
      bool rim = false;
      for (int k = 0; k < dim && !rim; ++k)
        for (int dir : {-1, 1}) {
          auto nc = c;
          nc[k] += dir;
          if (nc[k] < 0 || nc[k] >= d.shape(k) || !d.in_delta(d.index(nc))) rim = true;
        }
      if (rim) {
        seeds.push_back(d.point(i));
        seed_nodes.push_back(i);
      }
    }
    auto best = seed_distance(d, seeds, seed_nodes, method);
    for (std::size_t i = 0; i < d.node_count(); ++i) {
      if (!d.inside(i)) continue;
      out[i] = d.in_delta(i) ? 0.0 : std::min(out[i], best[i]);
    }
  }
  return out;
}

std::vector<std::size_t> boundary_shell(const Domain& domain, const ScalarField& sigma,
                                        double width) {
  std::vector<std::size_t> nodes;
  if (!(width > 0.0)) return nodes;
  for (std::size_t i = 0; i < domain.node_count(); ++i)
    if (domain.inside(i) && sigma[i] <= width) nodes.push_back(i);
  return nodes;
}

std::vector<std::size_t> boundary_shell(const DomainPtr& domain, double width) {
  return boundary_shell(*domain, distance_field(domain, DistanceTarget::Boundary), width);
}

}  // namespace mollikit
