#pragma once

// The quantized Laplacian Δ_m = e_m* ∘ e_m on V_m = End(H_m).
//
// e_m(A) is the g_m-gradient of the Berezin symbol u_A = T*_m(A)/ρ_m, where
// g_m is the metric induced by the Kodaira embedding, ω_m = mω + (i/2π)∂∂̄ log ρ_m.
// Two routes compute Δ_m and are cross-checked:
//   - projective: the Hermitian form ⟨Δ_m E_ab, E_cd⟩ = ∫ i ∂u_ab ∧ ∂̄ conj(u_cd),
//     assembled densely over the matrix units of V_m;
//   - Toeplitz: Δ_m(A) = T_m((ω_m/(ρ_m ω)) Δ_{g_m} u_A), which only needs
//     O(m²·|grid|) work and is the path used at large m.
// Vector fields are paired with half the Riemannian metric ω(·, J·), the
// normalization under which ∫ Δf ḡ ω = ∫ i∂f ∧ ∂̄ḡ for the Laplacian of
// geometry.hpp. With it tr Δ_m = 2π m ∫ω.

#include <vector>

#include "qlap/quantization.hpp"

namespace qlap {

struct InducedMetric {
  int m = 0;
  Eigen::VectorXd lambda_m;   // density of ω_m
  Eigen::VectorXd ratio;      // ω_m / ω
  Eigen::VectorXd ratio_rho;  // ω_m / (ρ_m ω)
};

// λ_m = ∂∂̄ log(ρ_m e^{mφ}). Throws NumericalError if λ_m <= 0 somewhere.
InducedMetric induced_metric(const SectionTable& table);
InducedMetric induced_metric(const QuantizedLevel& L);

// Components in the (∂_z, ∂_z̄) frame.
struct VectorField {
  Eigen::VectorXcd dz_component;
  Eigen::VectorXcd dzb_component;
};

// e_m(A) = (2π/λ_m) (∂_z̄ u_A ∂_z + ∂_z u_A ∂_z̄).
VectorField e_field(const SectionTable& table, const VmOperator& A);
VectorField e_field(const SectionTable& table, const InducedMetric& g, const VmOperator& A);

// (e_m(A), e_m(B))_m = ∫ g_m(e_m A, conj e_m B) ω_m.
cplx dirichlet_pair(const QuantizedLevel& L, const VmOperator& A, const VmOperator& B);

VmOperator qlap_apply_toeplitz(const QuantizedLevel& L, const VmOperator& A);

// Δ_m as a matrix on vec(A), vec index a*(m+1)+b for the matrix unit E_ab.
struct QlapDense {
  int m = 0;
  Eigen::MatrixXcd matrix;

  Eigen::VectorXcd apply(const Eigen::VectorXcd& v) const { return matrix * v; }
};

inline constexpr int kDefaultDenseCap = 4096;

// Throws std::length_error above the cap; use qlap_apply_toeplitz there.
QlapDense qlap_assemble_projective(const QuantizedLevel& L, int dense_cap = kDefaultDenseCap);

Eigen::VectorXcd flatten(const VmOperator& A);
VmOperator unflatten(int m, const Eigen::VectorXcd& v);

struct BalancedCheck {
  VmOperator lhs;  // Δ_m(A)
  VmOperator rhs;  // C · T_m Δ T*_m(A)
  double constant = 0.0;
  double defect = 0.0;  // ‖lhs - rhs‖ / ‖lhs‖ in operator norm
};

// C = m^{n-1} Vol² / dim(H_m)²; exact identity when ρ_m is constant.
BalancedCheck balanced_identity_check(const QuantizedLevel& L, const VmOperator& A);

// Sorted eigenvalues of the Hermitian operator. Throws NumericalError when
// the matrix is not Hermitian to 1e-9 relative.
// tr Δ_m = Σ_ab ‖e_m(E_ab)‖², which factorizes pointwise; no dense assembly.
double qlap_trace(const QuantizedLevel& L);

std::vector<double> spectrum(const QlapDense& Q);

// Number of eigenvalues with |λ| <= rel_tol · max|λ|.
int kernel_dimension(const std::vector<double>& eigenvalues, double rel_tol = 1e-8);

double operator_norm(const Eigen::MatrixXcd& M);

}  // namespace qlap
