#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <numbers>

#include "qlap/errors.hpp"
#include "qlap/geometry.hpp"
#include "qlap/quadrature.hpp"
#include "support.hpp"

using namespace qlap;
using testing::cplx;

namespace {

constexpr double kPi = std::numbers::pi;

const std::vector<cplx> kPoints = testing::sample_points();

}  // namespace

TEST_CASE("fs_potential_jet_at_unit_circle") {
  const PotentialJet p = potential_jet(KahlerStructure(), {1.0, 0.0});
  CHECK(p.phi == doctest::Approx(std::log(2.0)).epsilon(1e-15));
  CHECK(std::abs(p.phi_z - 0.5) < 1e-15);
  CHECK(p.lambda == doctest::Approx(0.25).epsilon(1e-15));
  const cplx z{0.0, 1.0};
  CHECK(std::abs(potential_jet(KahlerStructure(), z).phi_z - std::conj(z) / 2.0) < 1e-15);
  CHECK(fubini_study_density({3.0, 0.0}) == doctest::Approx(0.01));
}

TEST_CASE("potential_derivatives_match_finite_differences") {
  const KahlerStructure K = KahlerStructure::parse("fs+0.15*(u1*u2+u3)");
  for (cplx z0 : kPoints) {
    const PotentialJet p = K.potential_jet(z0);
    const auto fd = testing::finite_differences([&](cplx z) { return cplx(K.potential_jet(z).phi); }, z0);
    CHECK(std::abs(p.phi_z - fd.dz) < 1e-6);
    CHECK(std::abs(p.lambda - fd.dzdzb) < 1e-6);
    const Jet<1> lam = K.density_jet(z0);
    const auto fd_lam = testing::finite_differences([&](cplx z) { return cplx(K.density(z)); }, z0);
    CHECK(std::abs(lam.dz() - fd_lam.dz) < 1e-6);
    CHECK(std::abs(lam.dzdzb() - fd_lam.dzdzb) < 1e-5);
  }
}

TEST_CASE("dictionary_jets_match_finite_differences") {
  const DictionaryFunction f = DictionaryFunction::parse("u1*u2^2 - 0.5*u3 + 2");
  for (cplx z0 : kPoints) {
    const Jet<1> j = f.jet<1>(z0);
    const auto fd = testing::finite_differences([&](cplx z) { return f.jet<1>(z).value(); }, z0);
    CHECK(std::abs(j.dz() - fd.dz) < 1e-6);
    CHECK(std::abs(j.dzdzb() - fd.dzdzb) < 1e-6);
    CHECK(std::abs(j.value().imag()) < 1e-15);
  }
}

TEST_CASE("harmonics_lie_on_the_unit_sphere") {
  const GridFunction s = DictionaryFunction::parse("u1^2+u2^2+u3^2").sample(kPoints);
  for (Eigen::Index i = 0; i < s.size(); ++i) CHECK(std::abs(s.value[i] - 1.0) < 1e-14);
  const double x = 0.3, y = -0.2, q = 1 + x * x + y * y;
  const GridFunction u = DictionaryFunction::harmonic(2).sample(std::vector<cplx>{{x, y}});
  CHECK(u.value[0].real() == doctest::Approx(2 * x / q));
}

TEST_CASE("fs_laplacian_eigenfunctions") {
  const KahlerStructure fs;
  for (int i = 1; i <= 3; ++i) {
    const DictionaryFunction u = DictionaryFunction::harmonic(i);
    const Eigen::VectorXcd lap = laplacian(fs, u, kPoints).value;
    const Eigen::VectorXcd val = u.sample(kPoints).value;
    CHECK(testing::sup(lap - 4 * kPi * val) < 1e-12);
    CHECK(testing::sup(laplacian_squared(fs, u, kPoints).value - 16 * kPi * kPi * val) < 1e-10);
  }
  // Quadratic harmonics have eigenvalue 12π.
  const DictionaryFunction q = DictionaryFunction::parse("u1*u2");
  CHECK(testing::sup(laplacian(fs, q, kPoints).value - 12 * kPi * q.sample(kPoints).value) < 1e-11);
  CHECK(testing::sup(laplacian(fs, DictionaryFunction::constant(3.0), kPoints).value) < 1e-15);
}

TEST_CASE("laplacian_is_symmetric_and_nonnegative") {
  const KahlerStructure K = KahlerStructure::parse("fs+0.1*u1");
  const Grid g = build_grid(32);
  const DictionaryFunction f = DictionaryFunction::parse("u1*u2+u3");
  const DictionaryFunction h = DictionaryFunction::parse("u3+u1*u2-u1^2");
  const Eigen::VectorXcd fv = f.sample(g.nodes).value, hv = h.sample(g.nodes).value;
  const Eigen::VectorXcd lf = laplacian(K, f, g.nodes).value, lh = laplacian(K, h, g.nodes).value;
  const cplx a = l2_inner(K, g, lf, hv), b = l2_inner(K, g, fv, lh);
  CHECK(std::abs(a - b) < 1e-10 * std::abs(a));
  CHECK(l2_inner(K, g, lf, fv).real() > 0.0);
  // ∫Δf ω = 0.
  CHECK(std::abs(integrate(K, g, lf)) < 1e-10);
}

TEST_CASE("sampled_laplacian_requires_a_jet") {
  const KahlerStructure K;
  GridFunction bare(Eigen::VectorXcd::Ones(Eigen::Index(kPoints.size())));
  CHECK_THROWS_AS(laplacian(K, kPoints, bare), std::invalid_argument);
  const GridFunction u = DictionaryFunction::harmonic(1).sample(kPoints);
  CHECK(testing::sup(laplacian(K, kPoints, u).value - laplacian(K, DictionaryFunction::harmonic(1), kPoints).value) <
        1e-13);
}

TEST_CASE("scalar_curvature_fs_and_gauss_bonnet") {
  const Eigen::VectorXcd s = scalar_curvature(KahlerStructure(), kPoints).value;
  CHECK(testing::sup(s.array() - 8 * kPi) < 1e-11);
  for (const char* spec : {"fs+0.1*u1", "fs-0.2*u2", "fs+0.15*(u1*u3+u2)"}) {
    const KahlerStructure K = KahlerStructure::parse(spec);
    const Grid g = build_grid(48);
    CHECK(integrate(K, g, scalar_curvature(K, g.nodes).value).real() == doctest::Approx(8 * kPi).epsilon(1e-9));
  }
}

TEST_CASE("volume_is_one") {
  const Grid g = build_grid(16);
  CHECK(std::abs(volume(KahlerStructure(), g) - 1.0) < 1e-14);
  for (const char* spec : {"fs+0.1*u1", "fs+0.1*u2", "fs-0.2*u1", "fs+0.2*u3"})
    CHECK(std::abs(volume(KahlerStructure::parse(spec), g) - 1.0) < 1e-10);
}

TEST_CASE("geometry_parse_round_trip") {
  for (const char* spec : {"fs", "fs+0.1*u1", "fs-0.05*u2", "fs+0.2*(u1*u2+u3)"}) {
    const KahlerStructure K = KahlerStructure::parse(spec);
    CHECK(KahlerStructure::parse(K.to_string()).to_string() == K.to_string());
  }
  CHECK(KahlerStructure::parse("fs").is_fubini_study());
  CHECK(KahlerStructure::parse("fs+0.1*u2").epsilon() == 0.1);
  CHECK(KahlerStructure::parse("fs-0.1*u2").epsilon() == -0.1);
}

TEST_CASE("geometry_parse_errors") {
  CHECK_THROWS_AS(KahlerStructure::parse("fs+0.9*u1"), GeometryError);
  CHECK_THROWS_AS(KahlerStructure::parse("fs+0.1*u4"), GeometryError);
  CHECK_THROWS_AS(KahlerStructure::parse("sphere"), GeometryError);
  CHECK_THROWS_AS(KahlerStructure::parse("fs+*u1"), GeometryError);
  CHECK_THROWS_AS(KahlerStructure(0.25, DictionaryFunction::harmonic(1)), GeometryError);
}

TEST_CASE("dictionary_parse_and_algebra") {
  const DictionaryFunction f = DictionaryFunction::parse("(u1+u2)^2 - 2*u1*u2");
  CHECK(f == DictionaryFunction::parse("u1^2+u2^2"));
  CHECK(f.degree() == 2);
  CHECK(DictionaryFunction::parse(f.to_string()) == f);
  CHECK(DictionaryFunction::parse("3").to_string() == DictionaryFunction::constant(3).to_string());
  CHECK(DictionaryFunction::parse("u1-u1").is_zero());
  CHECK_THROWS(DictionaryFunction::parse("u1^-1"));
  CHECK_THROWS(DictionaryFunction::parse("u1+"));
  CHECK_THROWS(DictionaryFunction::parse("sin(u1)"));
}
