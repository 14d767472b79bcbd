#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <vector>

#include <Eigen/Dense>

namespace testing {

using cplx = std::complex<double>;

struct Wirtinger {
  cplx dz, dzb, dzdzb;
};

// Central differences for ∂_z = (∂_x - i∂_y)/2, ∂_z̄ = (∂_x + i∂_y)/2 and
// ∂_z∂_z̄ = (∂_x² + ∂_y²)/4.
inline Wirtinger finite_differences(const std::function<cplx(cplx)>& f, cplx z, double h = 1e-4) {
  const cplx hx{h, 0.0}, hy{0.0, h};
  const cplx f0 = f(z), fxp = f(z + hx), fxm = f(z - hx), fyp = f(z + hy), fym = f(z - hy);
  const cplx dx = (fxp - fxm) / (2.0 * h);
  const cplx dy = (fyp - fym) / (2.0 * h);
  const cplx lap = (fxp + fxm + fyp + fym - 4.0 * f0) / (h * h);
  return {0.5 * (dx - cplx{0, 1} * dy), 0.5 * (dx + cplx{0, 1} * dy), 0.25 * lap};
}

inline std::vector<cplx> sample_points() {
  return {{0.0, 0.0}, {0.3, -0.2}, {1.0, 0.0}, {-0.7, 1.1}, {2.5, 0.4}, {0.05, 3.0}};
}

inline double sup(const Eigen::VectorXcd& v) { return v.cwiseAbs().maxCoeff(); }

}  // namespace testing
