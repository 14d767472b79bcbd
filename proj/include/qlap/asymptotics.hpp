#pragma once

// Large-m expansions recovered by per-node least squares in powers of m.
//
// Every check evaluates an m-indexed family on one fixed set of chart points,
// fits it against the asserted powers plus one nuisance power (the first
// omitted order, which absorbs truncation error), and compares the asserted
// coefficients with closed forms. The order gate measures how the truncation
// remainder S(m) - Σ_asserted c_p m^p decays across the ladder and a held-out
// level; its log-log slope should match the nuisance power.

#include <string>
#include <vector>

#include "qlap/geometry.hpp"
#include "qlap/quadrature.hpp"

namespace qlap {

struct ExpansionLadder {
  std::vector<int> levels{16, 24, 32, 48, 64};
  int holdout = 96;  // 0 disables the out-of-sample level
  GridSpec grid;     // per-level quadrature overrides
  int eval_size = 32;
};

struct MSeries {
  std::string label;
  std::vector<cplx> points;
  std::vector<int> m_values;
  std::vector<Eigen::VectorXcd> samples;
};

struct CoefficientFit {
  std::vector<int> powers;
  std::vector<Eigen::VectorXcd> coefficients;  // one per power
  std::vector<Eigen::VectorXcd> residual;      // per fitted level
  double residual_sup = 0.0;
  double condition = 0.0;  // of the column-scaled design matrix
};

// Throws std::invalid_argument with fewer than #powers+1 levels and
// NumericalError when the design is ill-conditioned (m-range too narrow).
CoefficientFit richardson_fit(const MSeries& series, const std::vector<int>& powers);

struct OrderGate {
  std::vector<int> levels;
  std::vector<double> remainder_sup;
  double slope = 0.0;
  double expected = 0.0;
  bool exact = false;  // remainder vanished to rounding; no slope measurable
};

// Remainder after the first `asserted` powers of `fit`, on every level of
// `series` (which may include levels not used in the fit).
OrderGate order_gate(const MSeries& series, const CoefficientFit& fit, int asserted);

struct Reference {
  std::string name;
  int power = 0;
  Eigen::VectorXcd values;
  double relative_error = 0.0;  // sup|c_p - ref| / sup|ref| (absolute when ref ≡ 0)
};

struct ExpansionReport {
  std::string target;  // rho | tt | qlap
  std::vector<cplx> points;
  MSeries series;      // ladder followed by the held-out level
  CoefficientFit fit;  // on the ladder only
  std::vector<Reference> references;
  OrderGate gate;

  const Reference& reference(const std::string& name) const;
};

// Fixed evaluation set: the coarsest level's grid subsampled to eval_size²
// nodes (fewer when that grid is smaller).
std::vector<cplx> evaluation_points(int coarsest_level, int eval_size, GridSpec spec = {});

// ρ_m against (m, 1; nuisance 1/m): references a_0 = 1, a_1 = scal/8π.
ExpansionReport rho_expansion_check(const KahlerStructure& K, const ExpansionLadder& ladder);

// T*_m T_m f against (m, 1; nuisance 1/m). References "b0" = f and
// "b1" = scal/8π f - Δf/2π. The coefficient of Δf is -1/4π when written with
// the Riemannian Laplacian of ω(·,J·), which is 2Δ; "b1_stated" carries the
// same formula with Δ itself, for comparison.
ExpansionReport tt_expansion_check(const KahlerStructure& K, const DictionaryFunction& f,
                                   const ExpansionLadder& ladder);

// T*_m Δ_m T_m f against (1, 1/m; nuisance 1/m²), through the Toeplitz
// route. References "P0" = Δf and "P1" = -Δ²f/π, the value implied by "b1"
// above; "P1_stated" = -Δ²f/2π is the value obtained with "b1_stated".
ExpansionReport qlap_expansion_check(const KahlerStructure& K, const DictionaryFunction& f,
                                     const ExpansionLadder& ladder);

}  // namespace qlap
