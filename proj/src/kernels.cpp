#include "mollikit/kernels.hpp"

#include <cmath>
#include <numbers>

namespace mollikit {

std::string to_string(Profile p) {
  switch (p) {
    case Profile::Bump: return "bump";
    case Profile::Box: return "box";
    case Profile::Plateau: return "plateau";
  }
  return "unknown";
}

Profile parse_profile(const std::string& name) {
  if (name == "bump") return Profile::Bump;
  if (name == "box") return Profile::Box;
  if (name == "plateau") return Profile::Plateau;
  throw ConfigError("unknown kernel profile '" + name + "'");
}

double unit_ball_volume(int dim) {
  switch (dim) {
    case 1: return 2.0;
    case 2: return std::numbers::pi;
    case 3: return 4.0 * std::numbers::pi / 3.0;
    default: throw ConfigError("unsupported dimension " + std::to_string(dim));
  }
}

double Kernel::profile_value(double r) const {
  if (r >= 1.0) return 0.0;
  switch (profile_) {
    case Profile::Bump:
      return std::exp(-1.0 / (1.0 - r * r));
    case Profile::Box:
      return 1.0;
    case Profile::Plateau: {
      const double flat = 1.0 - 1.0 / plateau_n_;
      if (r <= flat) return 1.0;
      // Smooth step from 1 at the plateau edge to 0 at the unit sphere; every derivative
      // vanishes at both ends.
      const double t = (r - flat) / (1.0 - flat);
      const double a = std::exp(-1.0 / t);
      const double b = std::exp(-1.0 / (1.0 - t));
      return b / (a + b);
    }
  }
  return 0.0;
}

double Kernel::operator()(const Point& z) const {
  double s = 0.0;
  for (int k = 0; k < dim_; ++k) s += z[k] * z[k];
  return profile_value(std::sqrt(s));
}

Kernel make_kernel(Profile profile, int dim, int order, int plateau_n) {
  if (dim < 1 || dim > kMaxDim) throw ConfigError("unsupported kernel dimension " + std::to_string(dim));
  if (order < 2) throw ConfigError("kernel order must be at least 2");
  if (profile == Profile::Plateau && plateau_n < 1)
    throw ConfigError("plateau kernel needs n >= 1");

  Kernel k;
  k.profile_ = profile;
  k.dim_ = dim;
  k.order_ = order;
  k.plateau_n_ = profile == Profile::Plateau ? plateau_n : 0;

  const double step = 2.0 / order;
  const double weight = std::pow(step, dim);
  std::array<int, kMaxDim> extent{1, 1, 1};
  for (int a = 0; a < dim; ++a) extent[a] = order;

  double total = 0.0;
  for (int i = 0; i < extent[0]; ++i)
    for (int j = 0; j < extent[1]; ++j)
      for (int l = 0; l < extent[2]; ++l) {
        const std::array<int, kMaxDim> idx{i, j, l};
        Point z{};
        double r2 = 0.0;
        for (int a = 0; a < dim; ++a) {
          // Integer numerator keeps z and -z exact negatives of each other.
          z[a] = static_cast<double>(2 * idx[a] + 1 - order) / order;
          r2 += z[a] * z[a];
        }
        if (r2 >= 1.0) continue;
        const double rho = k.profile_value(std::sqrt(r2));
        if (rho <= 0.0) continue;
        k.nodes_.push_back(z);
        k.weights_.push_back(weight);
        k.coeffs_.push_back(weight * rho);
        k.radius_ = std::max(k.radius_, std::sqrt(r2));
        total += weight * rho;
      }
  k.m_rho_ = 1.0 / total;
  for (double& c : k.coeffs_) c *= k.m_rho_;
  return k;
}

double kernel_moment(const Kernel& kernel, const std::array<int, kMaxDim>& multi_index) {
  int degree = 0;
  for (int a = 0; a < kMaxDim; ++a) {
    if (multi_index[a] < 0) throw ConfigError("negative multi-index");
    if (a >= kernel.dim() && multi_index[a] != 0)
      throw ConfigError("multi-index exceeds kernel dimension");
    degree += multi_index[a];
  }
  if (degree > 4) throw ConfigError("moments are limited to total degree 4");

  const auto& nodes = kernel.nodes();
  const auto& w = kernel.weights();
  auto mono = [&](const Point& z) {
    double m = 1.0;
    for (int a = 0; a < kernel.dim(); ++a) m *= std::pow(z[a], multi_index[a]);
    return m;
  };
  // Nodes are stored so that position p and n-1-p hold z and -z; summing each pair first
  // makes odd moments cancel exactly rather than to round-off.
  const std::size_t n = nodes.size();
  double sum = 0.0;
  for (std::size_t p = 0; p < n / 2; ++p) {
    const std::size_t q = n - 1 - p;
    sum += w[p] * kernel(nodes[p]) * (mono(nodes[p]) + mono(nodes[q]));
  }
  if (n % 2 == 1) sum += w[n / 2] * kernel(nodes[n / 2]) * mono(nodes[n / 2]);
  return sum;
}

}  // namespace mollikit
