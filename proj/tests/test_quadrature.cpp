#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <numbers>

#include "qlap/geometry.hpp"
#include "qlap/quadrature.hpp"

using namespace qlap;

namespace {

double beta_fs(int k, int m) {
  // ∫ s^k (1-s)^{m-k} ds = k!(m-k)!/(m+1)!
  double binom = 1.0;
  for (int i = 1; i <= k; ++i) binom = binom * double(m - k + i) / double(i);
  return 1.0 / (double(m + 1) * binom);
}

}  // namespace

TEST_CASE("gauss_legendre_exactness") {
  for (int n : {1, 2, 5, 18, 40}) {
    const auto [t, w] = gauss_legendre(n);
    REQUIRE(int(t.size()) == n);
    for (int k = 0; k <= 2 * n - 1; ++k) {
      double sum = 0.0;
      for (int i = 0; i < n; ++i) sum += w[i] * std::pow(t[i], k);
      CHECK(sum == doctest::Approx(1.0 / (k + 1)).epsilon(1e-13));
    }
    for (double x : t) {
      CHECK(x > 0.0);
      CHECK(x < 1.0);
    }
  }
  CHECK_THROWS(gauss_legendre(0));
}

TEST_CASE("grid_sizes_and_weights") {
  const Grid g = build_grid(1);
  CHECK(g.ns == 18);
  CHECK(g.ntheta == 20);
  const Grid h = build_grid(8);
  CHECK(h.ns == 32);
  CHECK(h.ntheta == 48);
  const Grid o = build_grid(8, {10, 0});
  CHECK(o.ns == 10);
  CHECK(o.ntheta == 48);
  double sum = 0.0;
  for (double w : h.weights) sum += w;
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(h.size() == std::size_t(32 * 48));
  CHECK_THROWS(build_grid(0));
  CHECK_THROWS(build_grid(4, -1, 8));
}

TEST_CASE("fourier_modes_integrate_to_zero") {
  const Grid g = build_grid(4);
  Eigen::VectorXcd f(Eigen::Index(g.size()));
  for (int mode = 1; mode < g.ntheta; ++mode) {
    for (std::size_t i = 0; i < g.size(); ++i) f[Eigen::Index(i)] = std::pow(g.nodes[i] / std::abs(g.nodes[i]), mode);
    CHECK(std::abs(integrate(KahlerStructure(), g, f)) < 1e-14);
  }
}

TEST_CASE("beta_integrals_exact_at_fs") {
  for (int m : {1, 4, 8, 16, 32}) {
    const Grid g = build_grid(m);
    for (int k = 0; k <= m; ++k) {
      Eigen::VectorXcd f(Eigen::Index(g.size()));
      for (std::size_t i = 0; i < g.size(); ++i) {
        const double r2 = std::norm(g.nodes[i]);
        const double s = r2 / (1 + r2);
        f[Eigen::Index(i)] = std::pow(s, k) * std::pow(1 - s, m - k);
      }
      const double exact = beta_fs(k, m);
      CHECK(std::abs(integrate(KahlerStructure(), g, f) - exact) < 1e-13 * exact);
    }
  }
}

TEST_CASE("l2_norm_of_u1") {
  const Grid g = build_grid(4);
  const Eigen::VectorXcd u = DictionaryFunction::harmonic(1).sample(g.nodes).value;
  CHECK(l2_inner(KahlerStructure(), g, u, u).real() == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
  CHECK(std::abs(l2_inner(KahlerStructure(), g, u, Eigen::VectorXcd::Ones(u.size()))) < 1e-15);
}

TEST_CASE("perturbed_integrals_converge_under_grid_doubling") {
  const KahlerStructure K = KahlerStructure::parse("fs+0.1*u1");
  const int m = 16;
  auto integral = [&](const Grid& g) {
    Eigen::VectorXcd f(Eigen::Index(g.size()));
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double psi = DictionaryFunction::harmonic(1).jet<1>(g.nodes[i]).value().real();
      f[Eigen::Index(i)] = std::exp(-m * 0.1 * psi) * std::pow(1 + std::norm(g.nodes[i]), -m / 2.0);
    }
    return integrate(K, g, f);
  };
  const Grid g = build_grid(m);
  const Grid g2 = build_grid(m, 2 * g.ns, 2 * g.ntheta);
  CHECK(std::abs(integral(g) - integral(g2)) < 1e-9 * std::abs(integral(g2)));
}

TEST_CASE("measure_and_integration_errors") {
  const Grid g = build_grid(4);
  const Eigen::VectorXd mu = measure(KahlerStructure::parse("fs+0.2*u2"), g);
  CHECK((mu.array() > 0.0).all());
  CHECK(mu.sum() == doctest::Approx(1.0).epsilon(1e-10));
  CHECK_THROWS_AS(integrate(g, mu, Eigen::VectorXcd::Ones(3)), std::invalid_argument);
}
