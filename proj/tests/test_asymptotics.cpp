#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <numbers>

#include "qlap/asymptotics.hpp"
#include "qlap/errors.hpp"
#include "qlap/qlaplacian.hpp"
#include "qlap/quantization.hpp"
#include "support.hpp"

using namespace qlap;
using testing::cplx;

namespace {

constexpr double kPi = std::numbers::pi;

MSeries synthetic(const std::vector<int>& levels, const std::function<cplx(double, int)>& value) {
  MSeries s;
  s.m_values = levels;
  for (int m : levels) {
    Eigen::VectorXcd v(3);
    for (int n = 0; n < 3; ++n) v[n] = value(m, n);
    s.samples.push_back(v);
  }
  return s;
}

ExpansionLadder light_ladder() {
  ExpansionLadder l;
  l.levels = {8, 12, 16, 24, 32};
  l.holdout = 48;
  l.eval_size = 12;
  return l;
}

}  // namespace

TEST_CASE("richardson_fit_recovers_exact_series") {
  const MSeries s = synthetic({16, 24, 32, 48, 64}, [](double m, int n) {
    return cplx(2.0 + n, 0) * m + cplx(3.0, n) - cplx(5.0, 0) / m;
  });
  const CoefficientFit fit = richardson_fit(s, {1, 0, -1});
  for (int n = 0; n < 3; ++n) {
    CHECK(std::abs(fit.coefficients[0][n] - (2.0 + n)) < 1e-10);
    CHECK(std::abs(fit.coefficients[1][n] - cplx(3.0, n)) < 1e-9);
    CHECK(std::abs(fit.coefficients[2][n] + 5.0) < 1e-7);
  }
  CHECK(fit.residual_sup < 1e-11);
  // The remainder after the asserted terms is exactly -5/m.
  const OrderGate g = order_gate(s, fit, 2);
  CHECK_FALSE(g.exact);
  CHECK(g.slope == doctest::Approx(-1.0).epsilon(1e-6));
}

TEST_CASE("richardson_fit_is_linear") {
  const std::vector<int> levels{10, 20, 30, 40, 50};
  const MSeries a = synthetic(levels, [](double m, int n) { return cplx(std::sin(m + n), 1.0 / (m * m)); });
  const MSeries b = synthetic(levels, [](double m, int n) { return cplx(std::log(m) * n, m); });
  const MSeries ab = synthetic(levels, [&](double m, int n) {
    return 2.0 * cplx(std::sin(m + n), 1.0 / (m * m)) - 3.0 * cplx(std::log(m) * n, m);
  });
  const auto fa = richardson_fit(a, {0, -1}), fb = richardson_fit(b, {0, -1}), fab = richardson_fit(ab, {0, -1});
  for (std::size_t p = 0; p < 2; ++p)
    CHECK(testing::sup(fab.coefficients[p] - (2.0 * fa.coefficients[p] - 3.0 * fb.coefficients[p])) < 1e-10);
}

TEST_CASE("order_gate_measures_next_power") {
  const MSeries s = synthetic({16, 24, 32, 48, 64, 96}, [](double m, int) { return cplx(m + 1.0 + 0.7 / m + 3.0 / (m * m)); });
  MSeries fitted = s;
  fitted.m_values.pop_back();
  fitted.samples.pop_back();
  const CoefficientFit fit = richardson_fit(fitted, {1, 0, -1});
  const OrderGate g = order_gate(s, fit, 2);
  CHECK_FALSE(g.exact);
  CHECK(g.expected == -1);
  CHECK(std::abs(g.slope + 1.0) < 0.4);
}

TEST_CASE("richardson_fit_rejects_bad_designs") {
  const MSeries few = synthetic({16, 24, 32}, [](double m, int) { return cplx(m); });
  CHECK_THROWS_AS(richardson_fit(few, {1, 0, -1}), std::invalid_argument);
  const MSeries flat = synthetic({16, 16, 16, 16}, [](double m, int) { return cplx(m); });
  CHECK_THROWS_AS(richardson_fit(flat, {1, 0, -1}), NumericalError);
}

TEST_CASE("evaluation_points_subsample_the_coarsest_grid") {
  const std::vector<cplx> pts = evaluation_points(16, 32);
  CHECK(pts.size() == 32 * 32);
  CHECK(evaluation_points(1, 32).size() == std::size_t(18 * 20));
  const Grid g = build_grid(16);
  CHECK(std::find(g.nodes.begin(), g.nodes.end(), pts[40]) != g.nodes.end());
}

TEST_CASE("rho_expansion_is_exact_at_fs") {
  const ExpansionReport r = rho_expansion_check(KahlerStructure(), light_ladder());
  CHECK(r.reference("a0").relative_error < 1e-9);
  CHECK(r.reference("a1").relative_error < 1e-9);
  CHECK(r.gate.exact);
}

TEST_CASE("berezin_transform_eigenvalue_oracle") {
  // T*T(u1) = m(m+1)/(m+2) u1 = (m - 1 + 2/m - ...) u1 at FS.
  for (int m : {3, 8, 20}) {
    const QuantizedLevel L = QuantizedLevel::build(KahlerStructure(), m);
    const Eigen::VectorXcd tt = adjoint_symbol(L, toeplitz(L, DictionaryFunction::harmonic(1)), false).value;
    const Eigen::VectorXcd u = DictionaryFunction::harmonic(1).sample(L.grid.nodes).value;
    CHECK(testing::sup(tt - double(m) * (m + 1) / (m + 2) * u) < 1e-11 * m);
    // T*Δ_m T(u1) = 4π m²/(m+2)² u1 = 4π(1 - 4/m + ...) u1.
    const VmOperator D = qlap_apply_toeplitz(L, toeplitz(L, DictionaryFunction::harmonic(1)));
    const Eigen::VectorXcd p = adjoint_symbol(L, D, false).value;
    CHECK(testing::sup(p - 4 * kPi * m * m / double((m + 2) * (m + 2)) * u) < 1e-10);
  }
}

TEST_CASE("tt_expansion_second_coefficient") {
  const ExpansionReport r = tt_expansion_check(KahlerStructure(), DictionaryFunction::harmonic(1), light_ladder());
  CHECK(r.reference("b0").relative_error < 0.01);
  // b1(u1) = -u1, recovered from the eigenvalue oracle above.
  CHECK(r.reference("b1").relative_error < 0.05);
  CHECK(r.reference("b1_stated").relative_error > 0.5);
  const ExpansionReport q =
      tt_expansion_check(KahlerStructure(), DictionaryFunction::parse("u1*u2"), ExpansionLadder{});
  // Quadratic harmonic: b1 = f - 6f = -5f.
  CHECK(q.reference("b1").relative_error < 0.05);
}

TEST_CASE("qlap_expansion_coefficients") {
  const ExpansionReport r = qlap_expansion_check(KahlerStructure(), DictionaryFunction::harmonic(1), ExpansionLadder{});
  CHECK(r.reference("P0").relative_error < 0.02);
  CHECK(r.reference("P1").relative_error < 0.05);
  CHECK(std::abs(r.gate.slope - r.gate.expected) < 0.4);
  const ExpansionReport c =
      qlap_expansion_check(KahlerStructure::parse("fs+0.1*u1"), DictionaryFunction::constant(2.0), light_ladder());
  // Δ_m kills the identity; what remains is rounding amplified by the fit.
  for (const auto& coeff : c.fit.coefficients) CHECK(testing::sup(coeff) < 1e-6);
}

TEST_CASE("qlap_expansion_leading_term_perturbed") {
  const ExpansionReport r =
      qlap_expansion_check(KahlerStructure::parse("fs+0.1*u2"), DictionaryFunction::harmonic(2), ExpansionLadder{});
  CHECK(r.reference("P0").relative_error < 0.02);
}
