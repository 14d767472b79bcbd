#pragma once

#include <complex>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace qlap {

using cplx = std::complex<double>;

// Tensor-product quadrature grid on the affine chart of CP¹.
//
// Radial nodes are Gauss–Legendre points s_j in (0,1) of the variable
// s = |z|²/(1+|z|²), azimuthal nodes are θ_k = 2πk/Nθ. In (s, θ) the
// Fubini–Study area form is (1/2π) ds dθ, so weights[j*Nθ + k] =
// w_j / Nθ sum to one. Nodes are stored ring by ring (radial index outer).
struct Grid {
  int ns = 0;
  int ntheta = 0;
  std::vector<double> s;              // radial GL nodes in (0,1)
  std::vector<double> radial_weights; // GL weights on (0,1)
  std::vector<cplx> nodes;
  std::vector<double> weights;

  std::size_t size() const { return nodes.size(); }
  std::size_t index(int j, int k) const { return std::size_t(j) * ntheta + k; }
};

// Complex samples over a point set, optionally with the jet
// (∂_z, ∂_z̄, ∂_z∂_z̄) at every point.
struct GridFunction {
  Eigen::VectorXcd value;
  Eigen::VectorXcd dz;
  Eigen::VectorXcd dzb;
  Eigen::VectorXcd dzdzb;

  GridFunction() = default;
  explicit GridFunction(Eigen::VectorXcd v) : value(std::move(v)) {}

  Eigen::Index size() const { return value.size(); }
  bool has_jet() const {
    return dz.size() == value.size() && dzb.size() == value.size() && dzdzb.size() == value.size();
  }
};

}  // namespace qlap
