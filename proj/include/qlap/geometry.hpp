#pragma once

// Hodge geometry of (CP¹, O(1)) in the affine chart z.
//
// Conventions: the local weight of h is e^{-φ} with
//     φ(z) = log(1+|z|²) + ε ψ(z),
// the Kähler form is ω = (i/2π) λ dz∧dz̄ with λ = ∂_z∂_z̄ φ, and the positive
// Laplacian is Δf = -2π f_zz̄ / λ (so that Δf ω = -i∂∂̄f). With these
// conventions ∫ω = 1, the first spherical harmonics satisfy Δu = 4πu and
// the scalar curvature of the round metric is 8π.

#include <array>
#include <complex>
#include <map>
#include <span>
#include <string>
#include <string_view>

#include "qlap/grid.hpp"
#include "qlap/jet.hpp"

namespace qlap {

// Real polynomial in the first spherical harmonics
//     u1 = (1-|z|²)/(1+|z|²),  u2 = 2 Re z/(1+|z|²),  u3 = 2 Im z/(1+|z|²).
// Keys are exponent triples (a, b, c) of u1^a u2^b u3^c.
class DictionaryFunction {
 public:
  using Exponents = std::array<int, 3>;

  DictionaryFunction() = default;

  static DictionaryFunction constant(double c);
  static DictionaryFunction harmonic(int index);  // index 1, 2 or 3

  // Grammar: sums/differences of products of numbers, u1, u2, u3,
  // parenthesized sub-expressions and nonnegative integer powers `^k`.
  static DictionaryFunction parse(std::string_view text);
  // Canonical textual form; parse(to_string()) reproduces the function.
  std::string to_string() const;

  const std::map<Exponents, double>& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  int degree() const;

  DictionaryFunction& operator+=(const DictionaryFunction& o);
  DictionaryFunction& operator*=(double s);
  friend DictionaryFunction operator+(DictionaryFunction a, const DictionaryFunction& b) { return a += b; }
  friend DictionaryFunction operator*(const DictionaryFunction& a, const DictionaryFunction& b);
  friend DictionaryFunction operator*(double s, DictionaryFunction a) { return a *= s; }
  friend bool operator==(const DictionaryFunction&, const DictionaryFunction&) = default;

  template <int N>
  Jet<N> jet(cplx z) const;

  // Value, first derivatives and ∂∂̄ over a point set.
  GridFunction sample(std::span<const cplx> points) const;

 private:
  void add_term(const Exponents& e, double c);
  std::map<Exponents, double> terms_;
};

struct PotentialJet {
  double phi;
  cplx phi_z;
  double lambda;  // φ_zz̄
};

// The polarized geometry: Fubini–Study plus an ε-perturbation of the potential.
class KahlerStructure {
 public:
  static constexpr double kEpsilonBound = 0.2;

  // Fubini–Study.
  KahlerStructure() = default;
  // Throws GeometryError if |ε| exceeds the bound or λ fails to be positive.
  KahlerStructure(double epsilon, DictionaryFunction psi);

  // `fs` or `fs+<eps>*<dict-expr>` (also `fs-<eps>*...`).
  static KahlerStructure parse(std::string_view spec);
  std::string to_string() const;

  double epsilon() const { return epsilon_; }
  const DictionaryFunction& perturbation() const { return psi_; }
  bool is_fubini_study() const { return epsilon_ == 0.0 || psi_.is_zero(); }
  static constexpr int dimension() { return 1; }

  // Full jet of φ up to ∂²∂̄².
  Jet<2> potential(cplx z) const;
  PotentialJet potential_jet(cplx z) const;
  double density(cplx z) const;  // λ
  // Jet<1> of λ, i.e. (λ, λ_z, λ_z̄, λ_zz̄).
  Jet<1> density_jet(cplx z) const;

 private:
  double epsilon_ = 0.0;
  DictionaryFunction psi_;
};

// λ of the Fubini–Study metric, (1+|z|²)^{-2}.
double fubini_study_density(cplx z);

PotentialJet potential_jet(const KahlerStructure& K, cplx z);

// Δf for dictionary f, with the jet of Δf (needs derivatives of f to ∂²∂̄²).
GridFunction laplacian(const KahlerStructure& K, const DictionaryFunction& f,
                       std::span<const cplx> points);
// Δf for sampled f; throws std::invalid_argument when f carries no jet.
GridFunction laplacian(const KahlerStructure& K, std::span<const cplx> points,
                       const GridFunction& f);
// Δ(Δf) for dictionary f.
GridFunction laplacian_squared(const KahlerStructure& K, const DictionaryFunction& f,
                               std::span<const cplx> points);

// scal = -(4π/λ) ∂∂̄ log λ. Throws NumericalError if λ <= 0 at a point.
GridFunction scalar_curvature(const KahlerStructure& K, std::span<const cplx> points);

// ∫ω over the grid; cohomological, equal to 1 for every admissible ε.
double volume(const KahlerStructure& K, const Grid& grid);

}  // namespace qlap
