#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "mollikit/field_io.hpp"
#include "mollikit/geometry.hpp"
#include "mollikit/parallel.hpp"

using namespace mollikit;

namespace {

// Oracle: distance to the nearest boundary-face midpoint between an inside and an outside node.
double brute_distance(const Domain& d, std::size_t node) {
  const Point x = d.point(node);
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < d.node_count(); ++i) {
    if (!d.inside(i)) continue;
    const auto c = d.coords(i);
    for (int a = 0; a < d.dim(); ++a) {
      for (int s : {-1, 1}) {
        const int k = c[a] + s;
        if (k < 0 || k >= d.shape(a)) continue;
        const std::size_t j = s > 0 ? i + d.stride(a) : i - d.stride(a);
        if (d.inside(j)) continue;
        Point m = d.point(i);
        m[a] += 0.5 * s * d.spacing(a);
        double r = 0.0;
        for (int b = 0; b < d.dim(); ++b) r += (m[b] - x[b]) * (m[b] - x[b]);
        best = std::min(best, std::sqrt(r));
      }
    }
  }
  return best;
}

DomainPtr unit(int dim, int nodes) { return std::make_shared<Domain>(Domain::unit_box(dim, nodes)); }

std::size_t node_at(const Domain& d, std::initializer_list<double> x) {
  std::array<int, kMaxDim> c{};
  int a = 0;
  for (double v : x) {
    c[a] = static_cast<int>(std::lround((v - d.bbox(a).lo) / d.spacing(a)));
    ++a;
  }
  return d.index(c);
}

}  // namespace

TEST_CASE("box distance examples") {
  auto d1 = unit(1, 11);
  const ScalarField s1 = distance_field(d1, DistanceTarget::Boundary);
  CHECK(s1[node_at(*d1, {0.3})] == doctest::Approx(0.3).epsilon(1e-15));

  auto d2 = unit(2, 11);
  const ScalarField s2 = distance_field(d2, DistanceTarget::Boundary);
  CHECK(s2[node_at(*d2, {0.5, 0.2})] == doctest::Approx(0.2).epsilon(1e-15));
}

TEST_CASE("distance to theta with an interior point") {
  auto d = unit(1, 11);
  NodeMask delta(d->node_count(), 0);
  delta[node_at(*d, {0.5})] = 1;
  auto dd = std::make_shared<Domain>(d->with_delta(delta));
  const ScalarField t = distance_field(dd, DistanceTarget::Theta);
  CHECK(t[node_at(*dd, {0.4})] == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(t[node_at(*dd, {0.5})] == 0.0);
  const ScalarField s = distance_field(dd, DistanceTarget::Boundary);
  for (std::size_t i = 0; i < dd->node_count(); ++i) CHECK(t[i] <= s[i] + 1e-15);
}

TEST_CASE("box sigma next to the boundary is the coordinate distance") {
  auto d = unit(1, 101);
  const ScalarField s = distance_field(d, DistanceTarget::Boundary);
  CHECK(s[1] == d->point(1)[0]);
  CHECK(s[0] == 0.0);
  for (std::size_t i = 1; i + 1 < d->node_count(); ++i) CHECK(s[i] > 0.0);
}

TEST_CASE("mask distance agrees with brute force and propagation stays within a cell diagonal") {
  const int n = 41;
  auto ball = Domain::ball(2, {{0.0, 1.0}, {0.0, 1.0}}, {n, n});
  auto mask = std::make_shared<Domain>(
      Domain::mask(2, {{0.0, 1.0}, {0.0, 1.0}}, {n, n}, ball.inside_mask()));
  const ScalarField exact = distance_field(mask, DistanceTarget::Boundary, DistanceMethod::BruteForce);
  const ScalarField prop = distance_field(mask, DistanceTarget::Boundary, DistanceMethod::Propagation);
  for (std::size_t i = 0; i < mask->node_count(); ++i) {
    if (!mask->inside(i)) continue;
    CHECK(exact[i] == doctest::Approx(brute_distance(*mask, i)).epsilon(1e-14));
    CHECK(std::abs(prop[i] - exact[i]) <= mask->cell_diagonal());
  }
}

TEST_CASE("sigma is 1-Lipschitz on random node pairs") {
  auto d = std::make_shared<Domain>(Domain::ball(2, {{-1.0, 1.0}, {0.0, 2.0}}, {33, 33}));
  const ScalarField s = distance_field(d, DistanceTarget::Boundary);
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<std::size_t> pick(0, d->node_count() - 1);
  for (int k = 0; k < 2000; ++k) {
    const std::size_t i = pick(rng), j = pick(rng);
    const Point p = d->point(i), q = d->point(j);
    CHECK(std::abs(s[i] - s[j]) <= std::hypot(p[0] - q[0], p[1] - q[1]) + 1e-14);
  }
}

TEST_CASE("boundary shell") {
  auto d = unit(1, 101);
  const auto shell = boundary_shell(d, 0.1);
  std::vector<std::size_t> expect;
  for (std::size_t i = 1; i <= 10; ++i) expect.push_back(i);
  for (std::size_t i = 90; i <= 99; ++i) expect.push_back(i);
  CHECK(shell == expect);
  CHECK(boundary_shell(d, 0.5).size() == d->inside_count());
  CHECK(boundary_shell(d, 0.001).empty());
  const auto wider = boundary_shell(d, 0.2);
  for (std::size_t i : shell) CHECK(std::find(wider.begin(), wider.end(), i) != wider.end());
}

TEST_CASE("multilinear interpolation is exact on bilinear functions and rejects outside points") {
  auto d = std::make_shared<Domain>(Domain::box(2, {{-1.0, 2.0}, {0.0, 1.0}}, {7, 5}));
  auto fn = [](const Point& p) { return 1.0 + 2.0 * p[0] - 3.0 * p[1] + 0.5 * p[0] * p[1]; };
  const ScalarField f = sample(d, fn);
  for (const Point& p : {Point{0.13, 0.77, 0}, Point{-1.0, 0.0, 0}, Point{2.0, 1.0, 0}, Point{1.9, 0.01, 0}})
    CHECK(f.at(p) == doctest::Approx(fn(p)).epsilon(1e-13));
  CHECK_THROWS_AS(f.at(Point{2.5, 0.5, 0}), ConfigError);
}

TEST_CASE("central differences are exact on quadratics in the interior") {
  auto d = unit(1, 21);
  const ScalarField f = sample(d, [](const Point& p) { return p[0] * p[0]; });
  const VectorField g = gradient(f);
  for (std::size_t i = 1; i + 1 < d->node_count(); ++i)
    CHECK(g.components[0][i] == doctest::Approx(2.0 * d->point(i)[0]).epsilon(1e-12));
}

TEST_CASE("field CSV round trip and header validation") {
  auto d = std::make_shared<Domain>(Domain::box(2, {{0.0, 1.0}, {0.0, 2.0}}, {5, 9}));
  const ScalarField f = sample(d, [](const Point& p) { return std::sin(p[0]) + 1.0 / 3.0 * p[1]; });
  const auto path = std::filesystem::temp_directory_path() / "mollikit_roundtrip.csv";
  write_field_csv(path, f);
  const ScalarField g = read_field_csv(path, d);
  for (std::size_t i = 0; i < f.size(); ++i) CHECK(g[i] == f[i]);
  const ScalarField h = read_field_csv(path);
  CHECK(h.domain().shape() == d->shape());
  auto other = std::make_shared<Domain>(Domain::unit_box(2, 5));
  CHECK_THROWS_AS(read_field_csv(path, other), ConfigError);
  CHECK_THROWS_AS(read_field_csv("/nonexistent/field.csv"), ConfigError);
  std::filesystem::remove(path);
}

TEST_CASE("domain spec with delta and gamma") {
  auto base = std::make_shared<Domain>(Domain::unit_box(1, 11));
  ScalarField delta(base, 1.0);
  delta[5] = 0.0;
  const auto path = std::filesystem::temp_directory_path() / "mollikit_delta.csv";
  write_field_csv(path, delta);
  const std::string spec = R"({"kind":"box","bbox":[0,1],"resolution":[11],"delta":")" + path.string() +
                           R"(","gamma":[{"axis":0,"side":"lo"}]})";
  const DomainPtr d = parse_domain_spec(spec);
  CHECK(d->in_delta(5));
  CHECK(!d->in_delta(4));
  CHECK(d->in_gamma(0));
  CHECK(!d->in_gamma(10));
  CHECK(d->theta_mask()[5] == 1);
  CHECK_THROWS_AS(parse_domain_spec(R"({"kind":"torus"})"), ConfigError);
  std::filesystem::remove(path);
}

TEST_CASE("mask domains must be closed off on the bounding box") {
  NodeMask inside(5, 1);
  CHECK_THROWS_AS(Domain::mask(1, {{0.0, 1.0}}, {5}, inside), ConfigError);
}

TEST_CASE("parallel_for visits every index once and reports the first failure by index") {
  set_thread_count(4);
  std::vector<int> hits(1000, 0);
  parallel_for(hits.size(), [&](std::size_t i) { hits[i] += 1; });
  CHECK(std::count(hits.begin(), hits.end(), 1) == 1000);
  try {
    parallel_for(1000, [](std::size_t i) {
      if (i == 700 || i == 300) throw std::runtime_error(std::to_string(i));
    });
    FAIL("expected an exception");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()) == "300");
  }
  set_thread_count(1);
}
