#pragma once

// Berezin–Toeplitz quantization at a fixed level m.

#include <span>

#include "qlap/geometry.hpp"
#include "qlap/quadrature.hpp"
#include "qlap/sections.hpp"

namespace qlap {

// Element of V_m = End(H_m) as a matrix in the orthonormal basis {s_α}:
// A s_α = Σ_β matrix(β, α) s_β. The V_m adjoint is the conjugate transpose.
struct VmOperator {
  int level = 0;
  Eigen::MatrixXcd matrix;

  int dim() const { return level + 1; }
  static VmOperator identity(int m) { return {m, Eigen::MatrixXcd::Identity(m + 1, m + 1)}; }
  static VmOperator zero(int m) { return {m, Eigen::MatrixXcd::Zero(m + 1, m + 1)}; }
  VmOperator adjoint() const { return {level, matrix.adjoint()}; }
};

// ⟨A, B⟩ = tr(A B*).
cplx hs_inner(const VmOperator& A, const VmOperator& B);

// Everything needed to work at one level on its quadrature grid.
struct QuantizedLevel {
  KahlerStructure geometry;
  int m = 0;
  Grid grid;
  Eigen::VectorXd mu;  // per-node measure of ω
  GramMatrix gram;
  SectionTable table;  // sections on grid.nodes

  static QuantizedLevel build(const KahlerStructure& K, int m, GridSpec spec = {});
  int dim() const { return m + 1; }
};

struct ToeplitzDiagnostics {
  bool symmetrized = false;
  double symmetrization_defect = 0.0;  // max |T - T*| before symmetrization
};

// T_m(f)(β, α) = ∫ f h^m(s_α, s_β) ω. Real input is symmetrized to (T+T*)/2.
VmOperator toeplitz(const QuantizedLevel& L, const Eigen::VectorXcd& f, ToeplitzDiagnostics* diag = nullptr);
VmOperator toeplitz(const QuantizedLevel& L, const DictionaryFunction& f, ToeplitzDiagnostics* diag = nullptr);

// T*_m(A)(z) = Σ_{αβ} A(β,α) s_β(z) conj(s_α(z)) e^{-mφ(z)} on the points of
// `table`, with its jet assembled from the polynomial derivative tables.
GridFunction adjoint_symbol(const SectionTable& table, const VmOperator& A, bool with_jet = true);
GridFunction adjoint_symbol(const QuantizedLevel& L, const VmOperator& A, bool with_jet = true);

// ρ_m = T*_m(I) = Σ_α |s_α|²_{h^m}, with jet.
GridFunction bergman_rho(const SectionTable& table);
GridFunction bergman_rho(const QuantizedLevel& L);

// u_A = T*_m(A)/ρ_m, with jet by the quotient rule.
GridFunction berezin_symbol(const SectionTable& table, const VmOperator& A);

// Unweighted kernel sum F_A = Σ A(β,α) s_β conj(s_α) and its jet, all
// multiplied by the common factor e^{-mφ}. Ratios and log-derivatives of
// these are exact; see qlaplacian.
struct KernelJets {
  Eigen::VectorXcd F, Fz, Fzb, Fzzb;
};
KernelJets kernel_jets(const SectionTable& table, const VmOperator& A, bool with_jet = true);

}  // namespace qlap
