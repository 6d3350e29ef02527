#include <doctest.h>

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>
#include <numbers>
#include <numeric>

#include "mollikit/kernels.hpp"

using namespace mollikit;

namespace {

// Oracle: ∫_{|x|<1} rho(|x|) dx by tanh-sinh quadrature in polar form.
double continuous_mass(const Kernel& k) {
  boost::math::quadrature::tanh_sinh<double> q;
  const double shell = k.dim() == 1 ? 2.0 : k.dim() == 2 ? 2.0 * std::numbers::pi : 4.0 * std::numbers::pi;
  return shell * q.integrate([&](double r) { return std::pow(r, k.dim() - 1) * k.profile_value(r); }, 0.0, 1.0);
}

}  // namespace

TEST_CASE("bump normalisation matches quadrature of the profile") {
  const Kernel k1 = make_kernel(Profile::Bump, 1, 200);
  CHECK(k1.m_rho() == doctest::Approx(1.0 / continuous_mass(k1)).epsilon(1e-6));
  CHECK(k1.m_rho() == doctest::Approx(2.2523).epsilon(1e-4));
  const Kernel k2 = make_kernel(Profile::Bump, 2, 64);
  CHECK(k2.m_rho() == doctest::Approx(1.0 / continuous_mass(k2)).epsilon(1e-4));
}

TEST_CASE("box kernel normalisation is the reciprocal ball volume") {
  const Kernel k = make_kernel(Profile::Box, 1, 256);
  CHECK(k.m_rho() == doctest::Approx(0.5).epsilon(1e-12));
  const Kernel k2 = make_kernel(Profile::Box, 2, 256);
  CHECK(k2.m_rho() == doctest::Approx(1.0 / std::numbers::pi).epsilon(1e-3));
  CHECK(!k.smooth());
}

TEST_CASE("plateau profile values") {
  const Kernel k = make_kernel(Profile::Plateau, 1, 64, 8);
  CHECK(k.plateau_n() == 8);
  CHECK(k.profile_value(0.0) == 1.0);
  CHECK(k.profile_value(1.0 - 1.0 / 8.0 - 1e-9) == 1.0);
  CHECK(k.profile_value(1.0) == 0.0);
  CHECK(k.profile_value(1.5) == 0.0);
  double prev = 1.0;
  for (double r = 0.875; r < 1.0; r += 1e-3) {
    const double v = k.profile_value(r);
    CHECK(v <= prev);
    CHECK(v >= 0.0);
    prev = v;
  }
  // Close to the indicator: m_rho near 1/|B| when the bridge is thin.
  const Kernel thin = make_kernel(Profile::Plateau, 1, 512, 64);
  CHECK(thin.m_rho() == doctest::Approx(0.5).epsilon(1e-2));
}

TEST_CASE("quadrature rule is symmetric and coefficients sum to one") {
  for (int dim : {1, 2, 3}) {
    const Kernel k = make_kernel(Profile::Bump, dim, dim == 3 ? 8 : 16);
    const auto& c = k.coefficients();
    CHECK(std::accumulate(c.begin(), c.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(kernel_moment(k, {1, 0, 0}) == 0.0);
    if (dim > 1) CHECK(std::abs(kernel_moment(k, {1, 1, 0})) < 1e-15);
    CHECK(kernel_moment(k, {2, 0, 0}) > 0.0);
    CHECK(k.quadrature_radius() < 1.0);
    for (const Point& z : k.nodes()) {
      double r2 = 0.0;
      for (int a = 0; a < dim; ++a) r2 += z[a] * z[a];
      CHECK(r2 < 1.0);
    }
  }
}

TEST_CASE("second moment converges under refinement") {
  // Oracle: ∫ x² rho / ∫ rho for the 1D bump.
  boost::math::quadrature::tanh_sinh<double> q;
  auto rho = [](double x) { return std::exp(-1.0 / (1.0 - x * x)); };
  const double exact = q.integrate([&](double x) { return x * x * rho(x); }, -1.0, 1.0) /
                       q.integrate(rho, -1.0, 1.0);
  double prev = 1.0;
  for (int order : {16, 64, 256}) {
    const Kernel k = make_kernel(Profile::Bump, 1, order);
    const double err = std::abs(kernel_moment(k, {2, 0, 0}) * k.m_rho() - exact);
    CHECK(err < prev);
    prev = err;
  }
  CHECK(prev < 1e-6);
}

TEST_CASE("unit ball volumes") {
  CHECK(unit_ball_volume(1) == 2.0);
  CHECK(unit_ball_volume(2) == doctest::Approx(std::numbers::pi));
  CHECK(unit_ball_volume(3) == doctest::Approx(4.0 * std::numbers::pi / 3.0));
}

TEST_CASE("kernel construction rejects bad parameters") {
  CHECK_THROWS_AS(make_kernel(Profile::Bump, 4, 16), ConfigError);
  CHECK_THROWS_AS(make_kernel(Profile::Bump, 1, 1), ConfigError);
  CHECK_THROWS_AS(make_kernel(Profile::Plateau, 1, 16, 0), ConfigError);
  CHECK(parse_profile("bump") == Profile::Bump);
  CHECK(to_string(Profile::Plateau) == "plateau");
  CHECK_THROWS_AS(parse_profile("gauss"), ConfigError);
}
