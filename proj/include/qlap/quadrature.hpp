#pragma once

// Quadrature for ∫_M · ω on CP¹ over the chart grid of grid.hpp.

#include <span>
#include <utility>
#include <vector>

#include "qlap/geometry.hpp"
#include "qlap/grid.hpp"

namespace qlap {

// Grid size overrides; 0 selects the automatic policy.
struct GridSpec {
  int ns = 0;
  int ntheta = 0;
};

// Gauss–Legendre nodes and weights on (0,1), nodes increasing.
std::pair<std::vector<double>, std::vector<double>> gauss_legendre(int n);

// Auto policy: Ns = 2m+16, Nθ = 4m+16. Throws std::invalid_argument for
// m < 1 or nonpositive overrides.
Grid build_grid(int m, GridSpec spec = {});
Grid build_grid(int m, int ns, int ntheta);

// Per-node measure of ω: grid weight times λ/λ_FS.
Eigen::VectorXd measure(const KahlerStructure& K, const Grid& grid);

// Σ_n μ_n f_n with ring-wise pairwise summation (radial outer, azimuthal inner).
cplx integrate(const Grid& grid, const Eigen::VectorXd& mu, const Eigen::VectorXcd& f);
cplx integrate(const KahlerStructure& K, const Grid& grid, const Eigen::VectorXcd& f);

// ⟨f, g⟩ = ∫ f ḡ ω.
cplx l2_inner(const Grid& grid, const Eigen::VectorXd& mu, const Eigen::VectorXcd& f,
              const Eigen::VectorXcd& g);
cplx l2_inner(const KahlerStructure& K, const Grid& grid, const Eigen::VectorXcd& f,
              const Eigen::VectorXcd& g);

}  // namespace qlap
