#include "qlap/qlaplacian.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "qlap/errors.hpp"
#include "qlap/parallel.hpp"

namespace qlap {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr Eigen::Index kColumnBlock = 64;

}  // namespace

InducedMetric induced_metric(const SectionTable& table) {
  const KernelJets k = kernel_jets(table, VmOperator::identity(table.m));
  const Eigen::Index n = table.points();
  InducedMetric g;
  g.m = table.m;
  g.lambda_m.resize(n);
  g.ratio.resize(n);
  g.ratio_rho.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double F = k.F[i].real();
    const double lm = (F * k.Fzzb[i].real() - std::norm(k.Fz[i])) / (F * F);
    if (!(lm > 0.0))
      throw NumericalError("induced metric is not positive at level " + std::to_string(table.m));
    g.lambda_m[i] = lm;
    g.ratio[i] = lm / table.lambda[i];
    g.ratio_rho[i] = g.ratio[i] / F;
  }
  return g;
}

InducedMetric induced_metric(const QuantizedLevel& L) { return induced_metric(L.table); }

VectorField e_field(const SectionTable& table, const InducedMetric& g, const VmOperator& A) {
  const GridFunction u = berezin_symbol(table, A);
  const Eigen::ArrayXd scale = kTwoPi / g.lambda_m.array();
  return {(scale * u.dzb.array()).matrix(), (scale * u.dz.array()).matrix()};
}

VectorField e_field(const SectionTable& table, const VmOperator& A) {
  return e_field(table, induced_metric(table), A);
}

cplx dirichlet_pair(const QuantizedLevel& L, const VmOperator& A, const VmOperator& B) {
  const InducedMetric g = induced_metric(L);
  const VectorField ea = e_field(L.table, g, A);
  const VectorField eb = e_field(L.table, g, B);
  const Eigen::ArrayXd metric = g.lambda_m.array() / (2.0 * kTwoPi);  // ½ g_zz̄
  const Eigen::VectorXcd integrand =
      (metric * g.ratio.array() *
       (ea.dz_component.array() * eb.dz_component.array().conjugate() +
        ea.dzb_component.array() * eb.dzb_component.array().conjugate()))
          .matrix();
  return integrate(L.grid, L.mu, integrand);
}

VmOperator qlap_apply_toeplitz(const QuantizedLevel& L, const VmOperator& A) {
  if (A.level != L.m) throw std::invalid_argument("qlap_apply_toeplitz: level mismatch");
  const GridFunction u = berezin_symbol(L.table, A);
  const KernelJets e = kernel_jets(L.table, VmOperator::identity(L.m), false);
  // (ω_m/(ρ_m ω)) Δ_{g_m} u = -2π u_zz̄ / (ρ_m λ); λ_m cancels.
  const Eigen::VectorXcd g =
      (-kTwoPi * u.dzdzb.array() / (e.F.real().array() * L.table.lambda.array())).matrix();
  // Complex input: no symmetrization.
  const Eigen::VectorXcd w = L.mu.cast<cplx>().cwiseProduct(g);
  return {L.m, ring_quadratic_form(L.grid, w, L.table.values, L.table.values)};
}

Eigen::VectorXcd flatten(const VmOperator& A) {
  const int d = A.dim();
  Eigen::VectorXcd v(d * d);
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b) v[a * d + b] = A.matrix(a, b);
  return v;
}

VmOperator unflatten(int m, const Eigen::VectorXcd& v) {
  const int d = m + 1;
  if (v.size() != d * d) throw std::invalid_argument("unflatten: size mismatch");
  VmOperator A = VmOperator::zero(m);
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b) A.matrix(a, b) = v[a * d + b];
  return A;
}

QlapDense qlap_assemble_projective(const QuantizedLevel& L, int dense_cap) {
  const int d = L.dim();
  const Eigen::Index dd = Eigen::Index(d) * d;
  if (dd > dense_cap)
    throw std::length_error("dense assembly of level " + std::to_string(L.m) + " needs " + std::to_string(dd) +
                            " > " + std::to_string(dense_cap) +
                            " columns; use the Toeplitz apply route for this level");
  const SectionTable& t = L.table;
  const KernelJets e = kernel_jets(t, VmOperator::identity(L.m));
  const int ntheta = L.grid.ntheta;

  QlapDense Q{L.m, Eigen::MatrixXcd::Zero(dd, dd)};
  Eigen::MatrixXcd D(ntheta, dd);
  Eigen::VectorXcd c(ntheta);
  const std::size_t blocks = std::size_t((dd + kColumnBlock - 1) / kColumnBlock);

  // Rings are accumulated in order; column blocks of fixed width run in parallel.
  for (int j = 0; j < L.grid.ns; ++j) {
    const Eigen::Index start = Eigen::Index(j) * ntheta;
    for (int k = 0; k < ntheta; ++k) {
      const Eigen::Index i = start + k;
      const double F = e.F[i].real();
      const cplx Fz = e.Fz[i];
      // ∂_z (s_a conj(s_b) / F) for every matrix unit E_ab.
      for (int a = 0; a < d; ++a) {
        const cplx sa = t.values(i, a);
        const cplx dsa = t.dvalues(i, a);
        const cplx num = (dsa * F - sa * Fz) / (F * F);
        for (int b = 0; b < d; ++b) D(k, a * d + b) = num * std::conj(t.values(i, b));
      }
      c[k] = kTwoPi * L.mu[i] / t.lambda[i];
    }
    const Eigen::MatrixXcd left = c.asDiagonal() * D;
    parallel_for(blocks, [&](std::size_t b) {
      const Eigen::Index col = Eigen::Index(b) * kColumnBlock;
      const Eigen::Index width = std::min(kColumnBlock, dd - col);
      Q.matrix.middleCols(col, width).noalias() += D.adjoint() * left.middleCols(col, width);
    });
  }
  return Q;
}

double qlap_trace(const QuantizedLevel& L) {
  const SectionTable& t = L.table;
  const KernelJets e = kernel_jets(t, VmOperator::identity(L.m));
  const Eigen::Index n = t.points();
  Eigen::VectorXcd g(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double F = e.F[i].real();
    // Σ_ab |∂_z(s_a conj(s_b)/F)|² = Σ_a |∂_z(s_a/F)|² · Σ_b |s_b|²
    double grad = 0.0;
    for (int a = 0; a < L.dim(); ++a) grad += std::norm((t.dvalues(i, a) * F - t.values(i, a) * e.Fz[i]) / (F * F));
    g[i] = kTwoPi * grad * F / t.lambda[i];
  }
  return integrate(L.grid, L.mu, g).real();
}

double operator_norm(const Eigen::MatrixXcd& M) {
  if (M.size() == 0) return 0.0;
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(M);
  return svd.singularValues()(0);
}

BalancedCheck balanced_identity_check(const QuantizedLevel& L, const VmOperator& A) {
  BalancedCheck r;
  r.lhs = qlap_apply_toeplitz(L, A);
  const double vol = integrate(L.grid, L.mu, Eigen::VectorXcd::Ones(Eigen::Index(L.grid.size()))).real();
  const double dim = L.dim();
  // m^{n-1} with n = 1.
  r.constant = vol * vol / (dim * dim);
  const GridFunction sym = adjoint_symbol(L, A);
  const Eigen::VectorXcd lap = (-kTwoPi * sym.dzdzb.array() / L.table.lambda.array()).matrix();
  const Eigen::VectorXcd w = L.mu.cast<cplx>().cwiseProduct(lap);
  r.rhs = {L.m, r.constant * ring_quadratic_form(L.grid, w, L.table.values, L.table.values)};
  const double scale = operator_norm(r.lhs.matrix);
  const double diff = operator_norm(r.lhs.matrix - r.rhs.matrix);
  r.defect = scale > 0.0 ? diff / scale : diff;
  return r;
}

std::vector<double> spectrum(const QlapDense& Q) {
  const double scale = std::max(Q.matrix.cwiseAbs().maxCoeff(), 1e-300);
  const double defect = (Q.matrix - Q.matrix.adjoint()).cwiseAbs().maxCoeff();
  if (defect > 1e-9 * scale)
    throw NumericalError("spectrum: operator is not Hermitian (defect " + std::to_string(defect / scale) + ")");
  const Eigen::MatrixXcd H = 0.5 * (Q.matrix + Q.matrix.adjoint());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(H, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw NumericalError("spectrum: eigensolver failed");
  const Eigen::VectorXd& ev = es.eigenvalues();
  std::vector<double> out(ev.data(), ev.data() + ev.size());
  std::sort(out.begin(), out.end());
  return out;
}

int kernel_dimension(const std::vector<double>& eigenvalues, double rel_tol) {
  double top = 0.0;
  for (double v : eigenvalues) top = std::max(top, std::abs(v));
  return int(std::count_if(eigenvalues.begin(), eigenvalues.end(),
                           [&](double v) { return std::abs(v) <= rel_tol * top; }));
}

}  // namespace qlap
