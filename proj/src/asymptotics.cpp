#include "qlap/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <stdexcept>
#include <string>

#include "qlap/errors.hpp"
#include "qlap/qlaplacian.hpp"
#include "qlap/quantization.hpp"

namespace qlap {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kMaxCondition = 1e10;

double sup_norm(const Eigen::VectorXcd& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

Reference make_reference(std::string name, int power, Eigen::VectorXcd values, const CoefficientFit& fit) {
  Reference r{std::move(name), power, std::move(values), 0.0};
  const auto it = std::find(fit.powers.begin(), fit.powers.end(), power);
  if (it == fit.powers.end()) throw std::logic_error("reference power not in fit");
  const Eigen::VectorXcd& c = fit.coefficients[std::size_t(it - fit.powers.begin())];
  const double scale = sup_norm(r.values);
  const double diff = sup_norm(c - r.values);
  // A reference that vanishes up to rounding is compared in absolute terms.
  r.relative_error = scale > 1e-8 ? diff / scale : diff;
  return r;
}

using Sampler = std::function<Eigen::VectorXcd(const QuantizedLevel&, const SectionTable&)>;

ExpansionReport run_expansion(const std::string& target, const std::string& label, const KahlerStructure& K,
                              const ExpansionLadder& ladder, const std::vector<int>& powers, int asserted,
                              const Sampler& sample) {
  if (ladder.levels.empty()) throw std::invalid_argument("expansion: empty level ladder");
  ExpansionReport rep;
  rep.target = target;
  rep.points = evaluation_points(*std::min_element(ladder.levels.begin(), ladder.levels.end()), ladder.eval_size,
                                 ladder.grid);

  std::vector<int> all = ladder.levels;
  if (ladder.holdout > 0) all.push_back(ladder.holdout);
  rep.series.label = label;
  rep.series.points = rep.points;
  for (int m : all) {
    const QuantizedLevel L = QuantizedLevel::build(K, m, ladder.grid);
    const SectionTable eval = evaluate_table(K, m, L.table.basis_change, rep.points);
    rep.series.m_values.push_back(m);
    rep.series.samples.push_back(sample(L, eval));
  }

  MSeries fitted = rep.series;
  if (ladder.holdout > 0) {
    fitted.m_values.pop_back();
    fitted.samples.pop_back();
  }
  rep.fit = richardson_fit(fitted, powers);
  rep.gate = order_gate(rep.series, rep.fit, asserted);
  return rep;
}

}  // namespace

const Reference& ExpansionReport::reference(const std::string& name) const {
  for (const auto& r : references)
    if (r.name == name) return r;
  throw std::out_of_range("no reference named " + name);
}

CoefficientFit richardson_fit(const MSeries& series, const std::vector<int>& powers) {
  const std::size_t levels = series.m_values.size();
  if (powers.empty()) throw std::invalid_argument("richardson_fit: no powers");
  if (levels < powers.size() + 1)
    throw std::invalid_argument("richardson_fit: need at least " + std::to_string(powers.size() + 1) +
                                " levels, got " + std::to_string(levels));
  if (series.samples.size() != levels) throw std::invalid_argument("richardson_fit: samples/levels mismatch");
  const Eigen::Index nodes = series.samples.front().size();

  const Eigen::Index L = Eigen::Index(levels), P = Eigen::Index(powers.size());
  Eigen::MatrixXd V(L, P);
  for (Eigen::Index l = 0; l < L; ++l)
    for (Eigen::Index p = 0; p < P; ++p) V(l, p) = std::pow(double(series.m_values[l]), powers[p]);
  const Eigen::VectorXd col_scale = V.colwise().norm().cwiseInverse();
  const Eigen::MatrixXd Vs = V * col_scale.asDiagonal();

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(Vs, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  CoefficientFit fit;
  fit.powers = powers;
  fit.condition = sv(P - 1) > 0.0 ? sv(0) / sv(P - 1) : INFINITY;
  if (!(fit.condition < kMaxCondition))
    throw NumericalError("richardson_fit: ill-conditioned design (condition " + std::to_string(fit.condition) +
                         "); widen the m-range");

  Eigen::MatrixXcd Y(L, nodes);
  for (Eigen::Index l = 0; l < L; ++l) {
    if (series.samples[l].size() != nodes) throw std::invalid_argument("richardson_fit: samples on different grids");
    Y.row(l) = series.samples[l].transpose();
  }
  // Least squares with the SVD pseudo-inverse, applied to every node at once.
  const Eigen::MatrixXd pinv = svd.matrixV() * sv.cwiseInverse().asDiagonal() * svd.matrixU().transpose();
  const Eigen::MatrixXcd C = (col_scale.asDiagonal() * pinv).cast<cplx>() * Y;
  for (Eigen::Index p = 0; p < P; ++p) fit.coefficients.push_back(C.row(p).transpose());
  const Eigen::MatrixXcd R = Y - V.cast<cplx>() * C;
  for (Eigen::Index l = 0; l < L; ++l) {
    fit.residual.push_back(R.row(l).transpose());
    fit.residual_sup = std::max(fit.residual_sup, sup_norm(fit.residual.back()));
  }
  return fit;
}

OrderGate order_gate(const MSeries& series, const CoefficientFit& fit, int asserted) {
  if (asserted < 1 || asserted >= int(fit.powers.size()))
    throw std::invalid_argument("order_gate: need a nuisance power beyond the asserted ones");
  OrderGate g;
  g.expected = fit.powers[std::size_t(asserted)];
  double scale = 0.0;
  for (std::size_t l = 0; l < series.m_values.size(); ++l) {
    const double m = series.m_values[l];
    Eigen::VectorXcd r = series.samples[l];
    for (int p = 0; p < asserted; ++p) r -= std::pow(m, fit.powers[std::size_t(p)]) * fit.coefficients[std::size_t(p)];
    g.levels.push_back(series.m_values[l]);
    g.remainder_sup.push_back(sup_norm(r));
    scale = std::max(scale, sup_norm(series.samples[l]));
  }
  // Remainders at rounding level carry no order information.
  const double floor = 1e-11 * std::max(scale, 1.0);
  g.exact = std::all_of(g.remainder_sup.begin(), g.remainder_sup.end(), [&](double r) { return r <= floor; });
  if (g.exact) {
    g.slope = NAN;
    return g;
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = double(g.levels.size());
  for (std::size_t l = 0; l < g.levels.size(); ++l) {
    const double x = std::log(double(g.levels[l]));
    const double y = std::log(std::max(g.remainder_sup[l], 1e-300));
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  g.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  return g;
}

std::vector<cplx> evaluation_points(int coarsest_level, int eval_size, GridSpec spec) {
  if (eval_size < 1) throw std::invalid_argument("evaluation_points: eval_size must be positive");
  const Grid g = build_grid(coarsest_level, spec);
  const int nr = std::min(eval_size, g.ns);
  const int nt = std::min(eval_size, g.ntheta);
  std::vector<cplx> pts;
  pts.reserve(std::size_t(nr) * nt);
  for (int a = 0; a < nr; ++a) {
    const int j = nr == 1 ? 0 : int(std::lround(double(a) * (g.ns - 1) / (nr - 1)));
    for (int b = 0; b < nt; ++b) {
      const int k = int((long(b) * g.ntheta) / nt);
      pts.push_back(g.nodes[g.index(j, k)]);
    }
  }
  return pts;
}

ExpansionReport rho_expansion_check(const KahlerStructure& K, const ExpansionLadder& ladder) {
  ExpansionReport rep = run_expansion(
      "rho", "bergman kernel", K, ladder, {1, 0, -1}, 2,
      [](const QuantizedLevel&, const SectionTable& eval) { return adjoint_symbol(eval, VmOperator::identity(eval.m), false).value; });
  const Eigen::VectorXcd scal = scalar_curvature(K, rep.points).value;
  rep.references.push_back(make_reference("a0", 1, Eigen::VectorXcd::Ones(scal.size()), rep.fit));
  rep.references.push_back(make_reference("a1", 0, scal / (8.0 * kPi), rep.fit));
  return rep;
}

ExpansionReport tt_expansion_check(const KahlerStructure& K, const DictionaryFunction& f,
                                   const ExpansionLadder& ladder) {
  ExpansionReport rep = run_expansion("tt", "T*T(" + f.to_string() + ")", K, ladder, {1, 0, -1}, 2,
                                      [&](const QuantizedLevel& L, const SectionTable& eval) {
                                        return adjoint_symbol(eval, toeplitz(L, f), false).value;
                                      });
  const Eigen::VectorXcd fv = f.sample(rep.points).value;
  const Eigen::VectorXcd a1f = (scalar_curvature(K, rep.points).value.array() / (8.0 * kPi) * fv.array()).matrix();
  const Eigen::VectorXcd lap = laplacian(K, f, rep.points).value;
  rep.references.push_back(make_reference("b0", 1, fv, rep.fit));
  rep.references.push_back(make_reference("b1", 0, a1f - lap / (2.0 * kPi), rep.fit));
  rep.references.push_back(make_reference("b1_stated", 0, a1f - lap / (4.0 * kPi), rep.fit));
  return rep;
}

ExpansionReport qlap_expansion_check(const KahlerStructure& K, const DictionaryFunction& f,
                                     const ExpansionLadder& ladder) {
  ExpansionReport rep = run_expansion("qlap", "T*Δ_mT(" + f.to_string() + ")", K, ladder, {0, -1, -2}, 2,
                                      [&](const QuantizedLevel& L, const SectionTable& eval) {
                                        const VmOperator D = qlap_apply_toeplitz(L, toeplitz(L, f));
                                        return adjoint_symbol(eval, D, false).value;
                                      });
  const Eigen::VectorXcd lap = laplacian(K, f, rep.points).value;
  const Eigen::VectorXcd lap2 = laplacian_squared(K, f, rep.points).value;
  rep.references.push_back(make_reference("P0", 0, lap, rep.fit));
  rep.references.push_back(make_reference("P1", -1, -lap2 / kPi, rep.fit));
  rep.references.push_back(make_reference("P1_stated", -1, -lap2 / (2.0 * kPi), rep.fit));
  return rep;
}

}  // namespace qlap
