#pragma once

// H_m = H⁰(CP¹, O(m)) as polynomials of degree <= m in the chart, monomial
// order z⁰, z¹, …, z^m.

#include <span>

#include "qlap/geometry.hpp"
#include "qlap/grid.hpp"

namespace qlap {

// entries(j, k) = ∫ conj(z^j) z^k e^{-mφ} ω = b_m(z^k, z^j). Hermitian, PD.
struct GramMatrix {
  int m = 0;
  Eigen::MatrixXcd entries;
};

// Sections evaluated on a point set. Every table entry carries the factor
// e^{-mφ/2}, so h^m(s_α, s_β)(z_n) = values(n,α)·conj(values(n,β)) without
// ever forming |z|^{2m} or e^{-mφ} separately (both overflow at large m).
struct SectionTable {
  int m = 0;
  Eigen::MatrixXcd basis_change;  // upper-triangular C, s_α = Σ_j C(j,α) z^j
  Eigen::MatrixXcd values;        // s_α(z_n) e^{-mφ/2}
  Eigen::MatrixXcd dvalues;       // s_α'(z_n) e^{-mφ/2}
  Eigen::VectorXcd dphi;          // φ_z
  Eigen::VectorXd lambda;         // φ_zz̄

  int dim() const { return m + 1; }
  Eigen::Index points() const { return values.rows(); }
};

// Monomials z^j e^{-mφ/2} and j z^{j-1} e^{-mφ/2} at each point.
struct MonomialTable {
  Eigen::MatrixXcd values;
  Eigen::MatrixXcd dvalues;
};
MonomialTable monomial_table(const KahlerStructure& K, int m, std::span<const cplx> points);

// Gram matrix of monomials by quadrature with measure mu (see quadrature.hpp).
GramMatrix gram(const KahlerStructure& K, int m, const Grid& grid, const Eigen::VectorXd& mu);
GramMatrix gram(const KahlerStructure& K, int m, const Grid& grid);

// Cholesky G = R*R (no pivoting) and returns C = R⁻¹, upper-triangular with
// positive real diagonal. Throws NumericalError when G is not PD, which
// signals ε too large or a grid too coarse for the level.
Eigen::MatrixXcd orthonormalize(const GramMatrix& G);

SectionTable evaluate_table(const KahlerStructure& K, int m, const Eigen::MatrixXcd& basis_change,
                            std::span<const cplx> points);

// left* · diag(w) · right accumulated ring by ring with a pairwise reduction
// over rings; bit-identical for any worker count.
Eigen::MatrixXcd ring_quadratic_form(const Grid& grid, const Eigen::VectorXcd& w,
                                     const Eigen::MatrixXcd& left, const Eigen::MatrixXcd& right);

}  // namespace qlap
