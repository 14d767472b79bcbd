#include "qlap/quantization.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

#include "qlap/parallel.hpp"

namespace qlap {

namespace {

constexpr Eigen::Index kRowBlock = 512;

void check_level(const SectionTable& table, const VmOperator& A) {
  if (A.level != table.m || A.matrix.rows() != table.dim() || A.matrix.cols() != table.dim())
    throw std::invalid_argument("operator level " + std::to_string(A.level) +
                                " does not match section table level " + std::to_string(table.m));
}

}  // namespace

cplx hs_inner(const VmOperator& A, const VmOperator& B) {
  if (A.level != B.level) throw std::invalid_argument("hs_inner: level mismatch");
  return (A.matrix.array() * B.matrix.array().conjugate()).sum();
}

QuantizedLevel QuantizedLevel::build(const KahlerStructure& K, int m, GridSpec spec) {
  QuantizedLevel L;
  L.geometry = K;
  L.m = m;
  L.grid = build_grid(m, spec);
  L.mu = measure(K, L.grid);
  L.gram = qlap::gram(K, m, L.grid, L.mu);
  L.table = evaluate_table(K, m, orthonormalize(L.gram), L.grid.nodes);
  return L;
}

VmOperator toeplitz(const QuantizedLevel& L, const Eigen::VectorXcd& f, ToeplitzDiagnostics* diag) {
  if (f.size() != Eigen::Index(L.grid.size()))
    throw std::invalid_argument("toeplitz: function sampled on " + std::to_string(f.size()) +
                                " points, grid has " + std::to_string(L.grid.size()));
  const Eigen::VectorXcd w = L.mu.cast<cplx>().cwiseProduct(f);
  VmOperator T{L.m, ring_quadratic_form(L.grid, w, L.table.values, L.table.values)};
  const bool real_input = (f.imag().array() == 0.0).all();
  ToeplitzDiagnostics d;
  if (real_input) {
    d.symmetrized = true;
    d.symmetrization_defect = (T.matrix - T.matrix.adjoint()).cwiseAbs().maxCoeff();
    T.matrix = 0.5 * (T.matrix + T.matrix.adjoint()).eval();
  }
  if (diag) *diag = d;
  return T;
}

VmOperator toeplitz(const QuantizedLevel& L, const DictionaryFunction& f, ToeplitzDiagnostics* diag) {
  Eigen::VectorXcd v(Eigen::Index(L.grid.size()));
  for (std::size_t i = 0; i < L.grid.size(); ++i) v[Eigen::Index(i)] = f.jet<1>(L.grid.nodes[i]).value().real();
  return toeplitz(L, v, diag);
}

KernelJets kernel_jets(const SectionTable& table, const VmOperator& A, bool with_jet) {
  check_level(table, A);
  const Eigen::Index n = table.points();
  KernelJets k;
  k.F.resize(n);
  if (with_jet) {
    k.Fz.resize(n);
    k.Fzb.resize(n);
    k.Fzzb.resize(n);
  }
  const Eigen::MatrixXcd At = A.matrix.transpose();
  const std::size_t blocks = std::size_t((n + kRowBlock - 1) / kRowBlock);
  parallel_for(blocks, [&](std::size_t b) {
    const Eigen::Index start = Eigen::Index(b) * kRowBlock;
    const Eigen::Index rows = std::min(kRowBlock, n - start);
    const auto S = table.values.middleRows(start, rows);
    // Y(n, β) = Σ_α conj(s_α) A(β, α)
    const Eigen::MatrixXcd Y = S.conjugate() * At;
    k.F.segment(start, rows) = S.cwiseProduct(Y).rowwise().sum();
    if (!with_jet) return;
    const auto dS = table.dvalues.middleRows(start, rows);
    const Eigen::MatrixXcd dY = dS.conjugate() * At;
    k.Fz.segment(start, rows) = dS.cwiseProduct(Y).rowwise().sum();
    k.Fzb.segment(start, rows) = S.cwiseProduct(dY).rowwise().sum();
    k.Fzzb.segment(start, rows) = dS.cwiseProduct(dY).rowwise().sum();
  });
  return k;
}

GridFunction adjoint_symbol(const SectionTable& table, const VmOperator& A, bool with_jet) {
  KernelJets k = kernel_jets(table, A, with_jet);
  GridFunction g(std::move(k.F));
  if (!with_jet) return g;
  // Product rule with the weight e^{-mφ}; F-values already carry it.
  const double m = table.m;
  const Eigen::Index n = g.size();
  g.dz.resize(n);
  g.dzb.resize(n);
  g.dzdzb.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const cplx pz = table.dphi[i];
    const cplx pzb = std::conj(pz);
    const cplx F = g.value[i];
    g.dz[i] = k.Fz[i] - m * pz * F;
    g.dzb[i] = k.Fzb[i] - m * pzb * F;
    g.dzdzb[i] = k.Fzzb[i] - m * pzb * k.Fz[i] - m * pz * k.Fzb[i] +
                 (m * m * std::norm(pz) - m * table.lambda[i]) * F;
  }
  return g;
}

GridFunction adjoint_symbol(const QuantizedLevel& L, const VmOperator& A, bool with_jet) {
  return adjoint_symbol(L.table, A, with_jet);
}

GridFunction bergman_rho(const SectionTable& table) {
  GridFunction rho = adjoint_symbol(table, VmOperator::identity(table.m));
  rho.value = rho.value.real().cast<cplx>();
  rho.dzdzb = rho.dzdzb.real().cast<cplx>();
  return rho;
}

GridFunction bergman_rho(const QuantizedLevel& L) { return bergman_rho(L.table); }

GridFunction berezin_symbol(const SectionTable& table, const VmOperator& A) {
  const KernelJets a = kernel_jets(table, A);
  const KernelJets e = kernel_jets(table, VmOperator::identity(table.m));
  const Eigen::Index n = table.points();
  GridFunction u;
  u.value.resize(n);
  u.dz.resize(n);
  u.dzb.resize(n);
  u.dzdzb.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    // Both jets share the factor e^{-mφ}, which cancels in the quotient.
    const Jet<1> P = Jet<1>::from_derivatives(a.F[i], a.Fz[i], a.Fzb[i], a.Fzzb[i]);
    const Jet<1> Q = Jet<1>::from_derivatives(e.F[i].real(), e.Fz[i], e.Fzb[i], e.Fzzb[i].real());
    const Jet<1> q = P / Q;
    u.value[i] = q.value();
    u.dz[i] = q.dz();
    u.dzb[i] = q.dzb();
    u.dzdzb[i] = q.dzdzb();
  }
  return u;
}

}  // namespace qlap
