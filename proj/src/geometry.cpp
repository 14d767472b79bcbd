#include "qlap/geometry.hpp"

#include <charconv>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "qlap/errors.hpp"
#include "qlap/format.hpp"
#include "qlap/quadrature.hpp"

namespace qlap {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

class ExpressionParser {
 public:
  explicit ExpressionParser(std::string_view text) : text_(text) {}

  DictionaryFunction parse_all() {
    DictionaryFunction f = parse_sum();
    skip_space();
    if (pos_ != text_.size()) fail("unexpected '" + std::string(1, text_[pos_]) + "'");
    return f;
  }

  DictionaryFunction parse_sum() {
    skip_space();
    double sign = 1.0;
    if (accept('-')) sign = -1.0;
    else accept('+');
    DictionaryFunction f = sign * parse_product();
    for (;;) {
      skip_space();
      if (accept('+')) f += parse_product();
      else if (accept('-')) f += -1.0 * parse_product();
      else return f;
    }
  }

 private:
  DictionaryFunction parse_product() {
    DictionaryFunction f = parse_power();
    for (;;) {
      skip_space();
      if (!accept('*')) return f;
      f = f * parse_power();
    }
  }

  DictionaryFunction parse_power() {
    DictionaryFunction base = parse_atom();
    skip_space();
    if (!accept('^')) return base;
    skip_space();
    int k = 0;
    auto [ptr, ec] = std::from_chars(text_.data() + pos_, text_.data() + text_.size(), k);
    if (ec != std::errc{} || k < 0) fail("expected nonnegative integer exponent");
    pos_ = std::size_t(ptr - text_.data());
    DictionaryFunction r = DictionaryFunction::constant(1.0);
    for (int i = 0; i < k; ++i) r = r * base;
    return r;
  }

  DictionaryFunction parse_atom() {
    skip_space();
    if (accept('(')) {
      DictionaryFunction f = parse_sum();
      skip_space();
      if (!accept(')')) fail("missing ')'");
      return f;
    }
    if (pos_ + 1 < text_.size() && text_[pos_] == 'u') {
      const char d = text_[pos_ + 1];
      if (d >= '1' && d <= '3') {
        pos_ += 2;
        return DictionaryFunction::harmonic(d - '0');
      }
      fail("unknown dictionary symbol");
    }
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(text_.data() + pos_, text_.data() + text_.size(), v);
    if (ec != std::errc{}) fail("expected number, u1, u2, u3 or '('");
    pos_ = std::size_t(ptr - text_.data());
    return DictionaryFunction::constant(v);
  }

  void skip_space() {
    while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\t')) ++pos_;
  }
  bool accept(char c) {
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }
  [[noreturn]] void fail(const std::string& what) const {
    throw GeometryError("dictionary expression '" + std::string(text_) + "': " + what +
                        " at offset " + std::to_string(pos_));
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

template <int N>
std::array<Jet<N>, 3> harmonic_jets(cplx z) {
  const Jet<N> zj = Jet<N>::z(z);
  const Jet<N> zb = Jet<N>::zbar(z);
  const Jet<N> inv_q = reciprocal(1.0 + zj * zb);
  return {2.0 * inv_q - 1.0, (zj + zb) * inv_q, cplx{0.0, -1.0} * ((zj - zb) * inv_q)};
}

}  // namespace

DictionaryFunction DictionaryFunction::constant(double c) {
  DictionaryFunction f;
  f.add_term({0, 0, 0}, c);
  return f;
}

DictionaryFunction DictionaryFunction::harmonic(int index) {
  if (index < 1 || index > 3) throw GeometryError("harmonic index must be 1, 2 or 3");
  Exponents e{0, 0, 0};
  e[index - 1] = 1;
  DictionaryFunction f;
  f.add_term(e, 1.0);
  return f;
}

DictionaryFunction DictionaryFunction::parse(std::string_view text) {
  return ExpressionParser(text).parse_all();
}

std::string DictionaryFunction::to_string() const {
  if (terms_.empty()) return "0";
  std::string out;
  // Highest degree first, reads naturally: "u1^2+0.5*u2+1".
  for (auto it = terms_.rbegin(); it != terms_.rend(); ++it) {
    const auto& [e, c] = *it;
    const bool unit_monomial = e != Exponents{0, 0, 0};
    double mag = std::abs(c);
    if (out.empty()) {
      if (c < 0) out += '-';
    } else {
      out += c < 0 ? '-' : '+';
    }
    std::string mono;
    for (int i = 0; i < 3; ++i) {
      if (e[i] == 0) continue;
      if (!mono.empty()) mono += '*';
      mono += 'u';
      mono += char('1' + i);
      if (e[i] > 1) mono += '^' + std::to_string(e[i]);
    }
    if (!unit_monomial) out += format_double(mag);
    else if (mag == 1.0) out += mono;
    else out += format_double(mag) + '*' + mono;
  }
  return out;
}

int DictionaryFunction::degree() const {
  int d = 0;
  for (const auto& [e, c] : terms_) d = std::max(d, e[0] + e[1] + e[2]);
  return d;
}

void DictionaryFunction::add_term(const Exponents& e, double c) {
  auto [it, inserted] = terms_.try_emplace(e, 0.0);
  it->second += c;
  if (it->second == 0.0) terms_.erase(it);
}

DictionaryFunction& DictionaryFunction::operator+=(const DictionaryFunction& o) {
  for (const auto& [e, c] : o.terms_) add_term(e, c);
  return *this;
}

DictionaryFunction& DictionaryFunction::operator*=(double s) {
  if (s == 0.0) {
    terms_.clear();
    return *this;
  }
  for (auto& [e, c] : terms_) c *= s;
  return *this;
}

DictionaryFunction operator*(const DictionaryFunction& a, const DictionaryFunction& b) {
  DictionaryFunction r;
  for (const auto& [ea, ca] : a.terms_)
    for (const auto& [eb, cb] : b.terms_)
      r.add_term({ea[0] + eb[0], ea[1] + eb[1], ea[2] + eb[2]}, ca * cb);
  return r;
}

template <int N>
Jet<N> DictionaryFunction::jet(cplx z) const {
  const auto u = harmonic_jets<N>(z);
  Jet<N> total;
  for (const auto& [e, c] : terms_) {
    Jet<N> term = Jet<N>::constant(c);
    for (int i = 0; i < 3; ++i)
      for (int k = 0; k < e[i]; ++k) term = term * u[i];
    total += term;
  }
  return total;
}

template Jet<1> DictionaryFunction::jet<1>(cplx) const;
template Jet<2> DictionaryFunction::jet<2>(cplx) const;

GridFunction DictionaryFunction::sample(std::span<const cplx> points) const {
  const Eigen::Index n = Eigen::Index(points.size());
  GridFunction g;
  g.value.resize(n);
  g.dz.resize(n);
  g.dzb.resize(n);
  g.dzdzb.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Jet<1> j = jet<1>(points[i]);
    g.value[i] = j.value();
    g.dz[i] = j.dz();
    g.dzb[i] = j.dzb();
    g.dzdzb[i] = j.dzdzb();
  }
  return g;
}

KahlerStructure::KahlerStructure(double epsilon, DictionaryFunction psi)
    : epsilon_(epsilon), psi_(std::move(psi)) {
  if (!std::isfinite(epsilon_) || std::abs(epsilon_) > kEpsilonBound)
    throw GeometryError("perturbation amplitude " + format_double(epsilon_) +
                        " exceeds validity bound " + format_double(kEpsilonBound));
  if (psi_.is_zero()) epsilon_ = 0.0;
  if (epsilon_ == 0.0) psi_ = DictionaryFunction{};
  // Positivity probe over a fixed polar net covering the sphere.
  constexpr int kProbe = 64;
  for (int j = 0; j < kProbe; ++j) {
    const double s = (j + 0.5) / kProbe;
    const double r = std::sqrt(s / (1.0 - s));
    for (int k = 0; k < kProbe; ++k) {
      const cplx z = std::polar(r, kTwoPi * k / kProbe);
      if (!(density(z) > 0.0))
        throw GeometryError("Kahler density is not positive for " + to_string());
    }
  }
}

KahlerStructure KahlerStructure::parse(std::string_view spec) {
  auto trim = [](std::string_view v) {
    while (!v.empty() && v.front() == ' ') v.remove_prefix(1);
    while (!v.empty() && v.back() == ' ') v.remove_suffix(1);
    return v;
  };
  spec = trim(spec);
  if (!spec.starts_with("fs")) throw GeometryError("geometry spec must start with 'fs': " + std::string(spec));
  std::string_view rest = trim(spec.substr(2));
  if (rest.empty()) return KahlerStructure{};

  double sign = 1.0;
  if (rest.front() == '-') sign = -1.0;
  else if (rest.front() != '+') throw GeometryError("expected '+' or '-' after 'fs' in " + std::string(spec));
  rest = trim(rest.substr(1));

  double eps = 0.0;
  auto [ptr, ec] = std::from_chars(rest.data(), rest.data() + rest.size(), eps);
  if (ec != std::errc{}) throw GeometryError("expected perturbation amplitude in " + std::string(spec));
  rest = trim(rest.substr(std::size_t(ptr - rest.data())));
  if (rest.empty() || rest.front() != '*')
    throw GeometryError("expected '*<dict-expr>' after amplitude in " + std::string(spec));
  DictionaryFunction psi = DictionaryFunction::parse(rest.substr(1));
  if (psi.is_zero()) throw GeometryError("perturbation direction is zero in " + std::string(spec));
  return KahlerStructure(sign * eps, std::move(psi));
}

std::string KahlerStructure::to_string() const {
  if (is_fubini_study()) return "fs";
  const bool compound = psi_.terms().size() > 1;
  std::string dir = psi_.to_string();
  std::string out = "fs";
  out += epsilon_ < 0 ? '-' : '+';
  out += format_double(std::abs(epsilon_));
  out += '*';
  out += compound ? "(" + dir + ")" : dir;
  return out;
}

Jet<2> KahlerStructure::potential(cplx z) const {
  const Jet<2> zj = Jet<2>::z(z);
  const Jet<2> zb = Jet<2>::zbar(z);
  Jet<2> phi = log(1.0 + zj * zb);
  if (epsilon_ != 0.0) phi += epsilon_ * psi_.jet<2>(z);
  return phi;
}

PotentialJet KahlerStructure::potential_jet(cplx z) const {
  const double q = 1.0 + std::norm(z);
  PotentialJet p{std::log(q), std::conj(z) / q, 1.0 / (q * q)};
  if (epsilon_ != 0.0) {
    const Jet<1> j = psi_.jet<1>(z);
    p.phi += epsilon_ * j.value().real();
    p.phi_z += epsilon_ * j.dz();
    p.lambda += epsilon_ * j.dzdzb().real();
  }
  return p;
}

double KahlerStructure::density(cplx z) const { return potential_jet(z).lambda; }

Jet<1> KahlerStructure::density_jet(cplx z) const { return potential(z).mixed_derivative(); }

double fubini_study_density(cplx z) {
  const double q = 1.0 + std::norm(z);
  return 1.0 / (q * q);
}

PotentialJet potential_jet(const KahlerStructure& K, cplx z) { return K.potential_jet(z); }

GridFunction laplacian(const KahlerStructure& K, const DictionaryFunction& f,
                       std::span<const cplx> points) {
  const Eigen::Index n = Eigen::Index(points.size());
  GridFunction g;
  g.value.resize(n);
  g.dz.resize(n);
  g.dzb.resize(n);
  g.dzdzb.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Jet<1> fzz = f.jet<2>(points[i]).mixed_derivative();
    const Jet<1> lap = -kTwoPi * (fzz / K.density_jet(points[i]));
    g.value[i] = lap.value();
    g.dz[i] = lap.dz();
    g.dzb[i] = lap.dzb();
    g.dzdzb[i] = lap.dzdzb();
  }
  return g;
}

GridFunction laplacian(const KahlerStructure& K, std::span<const cplx> points, const GridFunction& f) {
  if (!f.has_jet()) throw std::invalid_argument("laplacian: grid function carries no derivative data");
  if (f.size() != Eigen::Index(points.size())) throw std::invalid_argument("laplacian: size mismatch");
  GridFunction g(Eigen::VectorXcd(f.size()));
  for (Eigen::Index i = 0; i < f.size(); ++i) g.value[i] = -kTwoPi * f.dzdzb[i] / K.density(points[i]);
  return g;
}

GridFunction laplacian_squared(const KahlerStructure& K, const DictionaryFunction& f,
                               std::span<const cplx> points) {
  const GridFunction lap = laplacian(K, f, points);
  return laplacian(K, points, lap);
}

GridFunction scalar_curvature(const KahlerStructure& K, std::span<const cplx> points) {
  GridFunction g(Eigen::VectorXcd(Eigen::Index(points.size())));
  for (std::size_t i = 0; i < points.size(); ++i) {
    const Jet<1> lam = K.density_jet(points[i]);
    const double l = lam.value().real();
    if (!(l > 0.0)) throw NumericalError("scalar_curvature: Kahler density not positive");
    g.value[Eigen::Index(i)] = -2.0 * kTwoPi / l * log(lam).dzdzb().real();
  }
  return g;
}

double volume(const KahlerStructure& K, const Grid& grid) {
  const Eigen::VectorXcd one = Eigen::VectorXcd::Ones(Eigen::Index(grid.size()));
  return integrate(K, grid, one).real();
}

}  // namespace qlap
