#include "qlap/sections.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "qlap/errors.hpp"
#include "qlap/parallel.hpp"
#include "qlap/quadrature.hpp"

namespace qlap {

MonomialTable monomial_table(const KahlerStructure& K, int m, std::span<const cplx> points) {
  const Eigen::Index n = Eigen::Index(points.size());
  MonomialTable t{Eigen::MatrixXcd::Zero(n, m + 1), Eigen::MatrixXcd::Zero(n, m + 1)};
  parallel_for(points.size(), [&](std::size_t i) {
    const cplx z = points[i];
    // z^j (1+|z|²)^{-m/2} = t^j c^{m-j} with |t|, c <= 1.
    const double c = 1.0 / std::sqrt(1.0 + std::norm(z));
    const cplx tz = z * c;
    const double pert = K.is_fubini_study() ? 1.0 : std::exp(-0.5 * m * K.epsilon() *
                                                             K.perturbation().jet<1>(z).value().real());
    std::vector<cplx> tp(m + 1);
    std::vector<double> cp(m + 2);
    tp[0] = 1.0;
    cp[0] = 1.0;
    for (int j = 1; j <= m; ++j) tp[j] = tp[j - 1] * tz;
    for (int j = 1; j <= m + 1; ++j) cp[j] = cp[j - 1] * c;
    const auto row = Eigen::Index(i);
    for (int j = 0; j <= m; ++j) {
      t.values(row, j) = tp[j] * cp[m - j] * pert;
      if (j > 0) t.dvalues(row, j) = double(j) * tp[j - 1] * cp[m - j + 1] * pert;
    }
  });
  return t;
}

Eigen::MatrixXcd ring_quadratic_form(const Grid& grid, const Eigen::VectorXcd& w,
                                     const Eigen::MatrixXcd& left, const Eigen::MatrixXcd& right) {
  if (w.size() != Eigen::Index(grid.size()) || left.rows() != w.size() || right.rows() != w.size())
    throw std::invalid_argument("ring_quadratic_form: grid mismatch");
  std::vector<Eigen::MatrixXcd> partial(grid.ns);
  parallel_for(std::size_t(grid.ns), [&](std::size_t j) {
    const Eigen::Index start = Eigen::Index(j) * grid.ntheta;
    const auto l = left.middleRows(start, grid.ntheta);
    const auto r = right.middleRows(start, grid.ntheta);
    partial[j].noalias() = l.adjoint() * (w.segment(start, grid.ntheta).asDiagonal() * r);
  });
  return pairwise_reduce(std::move(partial));
}

GramMatrix gram(const KahlerStructure& K, int m, const Grid& grid, const Eigen::VectorXd& mu) {
  if (m < 1) throw std::invalid_argument("gram: level must be >= 1");
  const MonomialTable mono = monomial_table(K, m, grid.nodes);
  GramMatrix G{m, ring_quadratic_form(grid, mu.cast<cplx>(), mono.values, mono.values)};
  return G;
}

GramMatrix gram(const KahlerStructure& K, int m, const Grid& grid) { return gram(K, m, grid, measure(K, grid)); }

Eigen::MatrixXcd orthonormalize(const GramMatrix& G) {
  const Eigen::Index n = G.entries.rows();
  // Hermitian part only; the lower triangle is what LLT reads.
  const Eigen::MatrixXcd H = 0.5 * (G.entries + G.entries.adjoint());
  Eigen::LLT<Eigen::MatrixXcd> llt(H);
  if (llt.info() != Eigen::Success)
    throw NumericalError("Gram matrix at level " + std::to_string(G.m) +
                         " is not positive definite (perturbation too large or grid too coarse)");
  const Eigen::MatrixXcd R = llt.matrixU();
  for (Eigen::Index i = 0; i < n; ++i)
    if (!(R(i, i).real() > 0.0))
      throw NumericalError("Cholesky factor has a nonpositive pivot at level " + std::to_string(G.m));
  Eigen::MatrixXcd C = Eigen::MatrixXcd::Identity(n, n);
  R.triangularView<Eigen::Upper>().solveInPlace(C);
  C.triangularView<Eigen::StrictlyLower>().setZero();
  return C;
}

SectionTable evaluate_table(const KahlerStructure& K, int m, const Eigen::MatrixXcd& basis_change,
                            std::span<const cplx> points) {
  if (basis_change.rows() != m + 1 || basis_change.cols() != m + 1)
    throw std::invalid_argument("evaluate_table: basis change does not match level");
  const MonomialTable mono = monomial_table(K, m, points);
  SectionTable t;
  t.m = m;
  t.basis_change = basis_change;
  t.values = mono.values * basis_change;
  t.dvalues = mono.dvalues * basis_change;
  t.dphi.resize(Eigen::Index(points.size()));
  t.lambda.resize(Eigen::Index(points.size()));
  for (std::size_t i = 0; i < points.size(); ++i) {
    const PotentialJet p = K.potential_jet(points[i]);
    t.dphi[Eigen::Index(i)] = p.phi_z;
    t.lambda[Eigen::Index(i)] = p.lambda;
  }
  return t;
}

}  // namespace qlap
