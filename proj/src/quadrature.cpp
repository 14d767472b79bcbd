#include "qlap/quadrature.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "qlap/parallel.hpp"

namespace qlap {

namespace {

// (P_n(t), P_n'(t)) by the three-term recurrence.
std::pair<double, double> legendre(int n, double t) {
  double p0 = 1.0, p1 = t;
  for (int k = 2; k <= n; ++k) {
    const double p2 = ((2.0 * k - 1.0) * t * p1 - (k - 1.0) * p0) / k;
    p0 = p1;
    p1 = p2;
  }
  return {p1, n * (t * p1 - p0) / (t * t - 1.0)};
}

}  // namespace

std::pair<std::vector<double>, std::vector<double>> gauss_legendre(int n) {
  if (n < 1) throw std::invalid_argument("gauss_legendre: n must be positive");
  std::vector<double> x(n), w(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double t = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    for (int it = 0; it < 100; ++it) {
      const auto [p, dp] = legendre(n, t);
      const double step = p / dp;
      t -= step;
      if (std::abs(step) < 1e-16) break;
    }
    const double dp = legendre(n, t).second;
    const double weight = 1.0 / ((1.0 - t * t) * dp * dp);  // half of the [-1,1] weight
    // t is the i-th largest root on [-1,1].
    x[n - 1 - i] = 0.5 * (1.0 + t);
    x[i] = 0.5 * (1.0 - t);
    w[n - 1 - i] = weight;
    w[i] = weight;
  }
  return {x, w};
}

Grid build_grid(int m, int ns, int ntheta) {
  if (m < 1) throw std::invalid_argument("build_grid: level m must be >= 1");
  if (ns < 0 || ntheta < 0) throw std::invalid_argument("build_grid: grid sizes must be positive");
  Grid g;
  g.ns = ns == 0 ? 2 * m + 16 : ns;
  g.ntheta = ntheta == 0 ? 4 * m + 16 : ntheta;
  auto [s, w] = gauss_legendre(g.ns);
  g.s = std::move(s);
  g.radial_weights = std::move(w);
  g.nodes.resize(std::size_t(g.ns) * g.ntheta);
  g.weights.resize(g.nodes.size());
  for (int j = 0; j < g.ns; ++j) {
    const double r = std::sqrt(g.s[j] / (1.0 - g.s[j]));
    for (int k = 0; k < g.ntheta; ++k) {
      const double theta = 2.0 * std::numbers::pi * k / g.ntheta;
      g.nodes[g.index(j, k)] = std::polar(r, theta);
      g.weights[g.index(j, k)] = g.radial_weights[j] / g.ntheta;
    }
  }
  return g;
}

Grid build_grid(int m, GridSpec spec) { return build_grid(m, spec.ns, spec.ntheta); }

Eigen::VectorXd measure(const KahlerStructure& K, const Grid& grid) {
  Eigen::VectorXd mu(Eigen::Index(grid.size()));
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double ratio = K.is_fubini_study() ? 1.0 : K.density(grid.nodes[i]) / fubini_study_density(grid.nodes[i]);
    mu[Eigen::Index(i)] = grid.weights[i] * ratio;
  }
  return mu;
}

cplx integrate(const Grid& grid, const Eigen::VectorXd& mu, const Eigen::VectorXcd& f) {
  if (f.size() != Eigen::Index(grid.size()) || mu.size() != f.size())
    throw std::invalid_argument("integrate: grid mismatch (" + std::to_string(f.size()) + " samples, " +
                                std::to_string(grid.size()) + " nodes)");
  std::vector<cplx> ring(grid.ntheta), rings(grid.ns);
  for (int j = 0; j < grid.ns; ++j) {
    for (int k = 0; k < grid.ntheta; ++k) {
      const auto i = Eigen::Index(grid.index(j, k));
      ring[k] = mu[i] * f[i];
    }
    rings[j] = pairwise_sum<cplx>(ring);
  }
  return pairwise_sum<cplx>(rings);
}

cplx integrate(const KahlerStructure& K, const Grid& grid, const Eigen::VectorXcd& f) {
  return integrate(grid, measure(K, grid), f);
}

cplx l2_inner(const Grid& grid, const Eigen::VectorXd& mu, const Eigen::VectorXcd& f,
              const Eigen::VectorXcd& g) {
  if (f.size() != g.size()) throw std::invalid_argument("l2_inner: grid mismatch");
  return integrate(grid, mu, f.cwiseProduct(g.conjugate()));
}

cplx l2_inner(const KahlerStructure& K, const Grid& grid, const Eigen::VectorXcd& f,
              const Eigen::VectorXcd& g) {
  return l2_inner(grid, measure(K, grid), f, g);
}

}  // namespace qlap
