#pragma once

// Truncated bivariate Taylor jets in (z, z̄).
//
// A Jet<N> holds the normalized Taylor coefficients
//     c[j][k] = ∂_z^j ∂_z̄^k f / (j! k!),   0 <= j, k <= N,
// of a function at a point. Truncating each variable separately is closed
// under products, so arithmetic on jets yields exact mixed derivatives up to
// order N in each variable. Jet<1> carries (f, f_z, f_z̄, f_zz̄), which is all
// the operators in this library need; Jet<2> is used where a further ∂∂̄ is
// taken (scalar curvature, bi-Laplacian).

#include <array>
#include <complex>
#include <cmath>

namespace qlap {

using cplx = std::complex<double>;

template <int N>
class Jet {
  static_assert(N >= 0);

 public:
  static constexpr int order = N;

  Jet() { c_.fill(cplx{0.0, 0.0}); }

  static Jet constant(cplx v) {
    Jet j;
    j.c_[0] = v;
    return j;
  }
  // The coordinate function z around the point z0.
  static Jet z(cplx z0) {
    Jet j = constant(z0);
    if constexpr (N >= 1) j.at(1, 0) = 1.0;
    return j;
  }
  // The coordinate function z̄ around the point z0.
  static Jet zbar(cplx z0) {
    Jet j = constant(std::conj(z0));
    if constexpr (N >= 1) j.at(0, 1) = 1.0;
    return j;
  }
  // Build a Jet<1> from explicit derivative values.
  static Jet from_derivatives(cplx v, cplx dz, cplx dzb, cplx dzdzb)
    requires(N == 1)
  {
    Jet j;
    j.c_ = {v, dzb, dz, dzdzb};
    return j;
  }

  cplx& at(int j, int k) { return c_[j * (N + 1) + k]; }
  const cplx& at(int j, int k) const { return c_[j * (N + 1) + k]; }

  // ∂_z^j ∂_z̄^k f at the base point.
  cplx derivative(int j, int k) const { return factorial(j) * factorial(k) * at(j, k); }

  cplx value() const { return c_[0]; }
  cplx dz() const { return derivative(1, 0); }
  cplx dzb() const { return derivative(0, 1); }
  cplx dzdzb() const { return derivative(1, 1); }

  // Jet of ∂_z∂_z̄ f, one order lower.
  Jet<N - 1> mixed_derivative() const
    requires(N >= 1)
  {
    Jet<N - 1> r;
    for (int j = 0; j < N; ++j)
      for (int k = 0; k < N; ++k) r.at(j, k) = double((j + 1) * (k + 1)) * at(j + 1, k + 1);
    return r;
  }

  // Jet of the complex conjugate function: conj(f) has coefficients conj(c[k][j]).
  Jet conjugate() const {
    Jet r;
    for (int j = 0; j <= N; ++j)
      for (int k = 0; k <= N; ++k) r.at(j, k) = std::conj(at(k, j));
    return r;
  }

  Jet& operator+=(const Jet& o) {
    for (std::size_t i = 0; i < c_.size(); ++i) c_[i] += o.c_[i];
    return *this;
  }
  Jet& operator-=(const Jet& o) {
    for (std::size_t i = 0; i < c_.size(); ++i) c_[i] -= o.c_[i];
    return *this;
  }
  Jet& operator*=(cplx s) {
    for (auto& v : c_) v *= s;
    return *this;
  }
  Jet& operator+=(cplx s) {
    c_[0] += s;
    return *this;
  }

  friend Jet operator+(Jet a, const Jet& b) { return a += b; }
  friend Jet operator-(Jet a, const Jet& b) { return a -= b; }
  friend Jet operator-(Jet a) { return a *= -1.0; }
  friend Jet operator*(Jet a, cplx s) { return a *= s; }
  friend Jet operator*(cplx s, Jet a) { return a *= s; }
  friend Jet operator*(Jet a, double s) { return a *= cplx{s, 0.0}; }
  friend Jet operator*(double s, Jet a) { return a *= cplx{s, 0.0}; }
  friend Jet operator+(Jet a, double s) { return a += cplx{s, 0.0}; }
  friend Jet operator+(double s, Jet a) { return a += cplx{s, 0.0}; }
  friend Jet operator-(Jet a, double s) { return a += cplx{-s, 0.0}; }
  friend Jet operator-(double s, Jet a) { return (-a) += cplx{s, 0.0}; }

  friend Jet operator*(const Jet& a, const Jet& b) {
    Jet r;
    for (int j1 = 0; j1 <= N; ++j1)
      for (int k1 = 0; k1 <= N; ++k1) {
        const cplx av = a.at(j1, k1);
        if (av == cplx{}) continue;
        for (int j2 = 0; j1 + j2 <= N; ++j2)
          for (int k2 = 0; k1 + k2 <= N; ++k2) r.at(j1 + j2, k1 + k2) += av * b.at(j2, k2);
      }
    return r;
  }
  friend Jet operator/(const Jet& a, const Jet& b) { return a * reciprocal(b); }

  // g(f) for an analytic g given its scaled derivatives d[k] = g^{(k)}(f0)/k!.
  // The nilpotent part of f has total degree >= 1 and the jet keeps total
  // degree <= 2N, so 2N+1 terms are exact.
  template <class Coeffs>
  static Jet compose(const Jet& f, const Coeffs& d) {
    Jet delta = f;
    delta.at(0, 0) = 0.0;
    Jet result = constant(d[0]);
    Jet power = constant(1.0);
    for (int k = 1; k <= 2 * N; ++k) {
      power = power * delta;
      result += power * d[k];
    }
    return result;
  }

  friend Jet reciprocal(const Jet& f) {
    std::array<cplx, 2 * N + 1> d;
    const cplx inv = 1.0 / f.value();
    cplx p = inv;
    for (int k = 0; k <= 2 * N; ++k) {
      d[k] = p;
      p *= -inv;
    }
    return compose(f, d);
  }

  friend Jet log(const Jet& f) {
    std::array<cplx, 2 * N + 1> d;
    d[0] = std::log(f.value());
    const cplx inv = 1.0 / f.value();
    cplx p = inv;
    for (int k = 1; k <= 2 * N; ++k) {
      d[k] = p / double(k);
      p *= -inv;
    }
    return compose(f, d);
  }

  friend Jet exp(const Jet& f) {
    std::array<cplx, 2 * N + 1> d;
    const cplx e = std::exp(f.value());
    double fact = 1.0;
    for (int k = 0; k <= 2 * N; ++k) {
      if (k > 0) fact *= k;
      d[k] = e / fact;
    }
    return compose(f, d);
  }

 private:
  static constexpr double factorial(int k) {
    double r = 1.0;
    for (int i = 2; i <= k; ++i) r *= i;
    return r;
  }

  std::array<cplx, (N + 1) * (N + 1)> c_;
};

// Restrict a jet to a lower truncation order.
template <int M, int N>
Jet<M> truncate(const Jet<N>& f) {
  static_assert(M <= N);
  Jet<M> r;
  for (int j = 0; j <= M; ++j)
    for (int k = 0; k <= M; ++k) r.at(j, k) = f.at(j, k);
  return r;
}

}  // namespace qlap
