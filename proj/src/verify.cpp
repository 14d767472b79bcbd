#include "qlap/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <numbers>
#include <optional>
#include <random>
#include <stdexcept>

#include "qlap/asymptotics.hpp"
#include "qlap/format.hpp"
#include "qlap/parallel.hpp"
#include "qlap/qlaplacian.hpp"
#include "qlap/quantization.hpp"

namespace qlap {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

const char* const kNames[kCriterionCount] = {
    "fs gram oracle",
    "balanced bergman density",
    "toeplitz adjointness",
    "toeplitz oracle for u1",
    "kernel of the quantized laplacian",
    "trace formula",
    "route equivalence",
    "balanced identity",
    "expansion P0",
    "expansion P1",
    "bergman a1",
    "order gates",
    "determinism",
};

std::vector<KahlerStructure> both_geometries() {
  return {KahlerStructure(), KahlerStructure::parse("fs+0.1*u1")};
}

std::mt19937_64 stream(std::uint64_t seed, int criterion, int m, int geometry) {
  return seeded_stream(seed, {std::uint32_t(criterion), std::uint32_t(m), std::uint32_t(geometry)});
}

// Accumulates the worst error of a criterion and where it occurred.
struct Worst {
  double value = 0.0;
  std::string where;
  void update(double v, const std::string& at) {
    if (std::isnan(value)) return;
    if (!(v <= value)) {
      value = v;
      where = at;
    }
  }
};

CriterionResult finish(int id, const Worst& w, double tol, std::string extra = {}) {
  CriterionResult r;
  r.id = id;
  r.name = kNames[id - 1];
  r.value = w.value;
  r.tolerance = tol;
  r.passed = w.value <= tol;
  r.detail = "worst " + format_double(w.value) + (w.where.empty() ? "" : " at " + w.where);
  if (!extra.empty()) r.detail += "; " + extra;
  return r;
}

std::string at(const KahlerStructure& K, int m) { return K.to_string() + " m=" + std::to_string(m); }

CriterionResult gram_oracle(const AcceptanceOptions& o) {
  Worst w;
  for (int m : {1, 4, 8, 16, 32}) {
    const GramMatrix G = gram(KahlerStructure(), m, build_grid(m));
    double binom = 1.0;  // C(m, k)
    for (int k = 0; k <= m; ++k) {
      if (k > 0) binom = binom * double(m - k + 1) / double(k);
      const double exact = 1.0 / (double(m + 1) * binom);
      for (int j = 0; j <= m; ++j) {
        const cplx g = G.entries(j, k);
        const double err = j == k ? std::abs(g - exact) / exact : std::abs(g) / exact;
        w.update(err, "m=" + std::to_string(m) + " entry (" + std::to_string(j) + "," + std::to_string(k) + ")");
      }
    }
  }
  return finish(1, w, o.tol.gram_relative);
}

CriterionResult bergman_constant(const AcceptanceOptions& o) {
  Worst w;
  for (int m : {1, 2, 4, 8, 16, 32, 48, 64}) {
    const QuantizedLevel L = QuantizedLevel::build(KahlerStructure(), m);
    const Eigen::VectorXcd rho = adjoint_symbol(L, VmOperator::identity(m), false).value;
    w.update((rho.array() - double(m + 1)).abs().maxCoeff(), "m=" + std::to_string(m));
  }
  return finish(2, w, o.tol.bergman_deviation);
}

CriterionResult adjointness(const AcceptanceOptions& o) {
  Worst w;
  const auto geoms = both_geometries();
  for (std::size_t g = 0; g < geoms.size(); ++g)
    for (int m : {4, 8, 16}) {
      const QuantizedLevel L = QuantizedLevel::build(geoms[g], m);
      auto rng = stream(o.seed, 3, m, int(g));
      for (int draw = 0; draw < 20; ++draw) {
        Eigen::VectorXcd f(Eigen::Index(L.grid.size()));
        for (auto& v : f) v = random_complex(rng);
        const VmOperator A = random_operator(m, rng);
        const cplx lhs = hs_inner(toeplitz(L, f), A);
        const cplx rhs = l2_inner(L.grid, L.mu, f, adjoint_symbol(L, A, false).value);
        // Cauchy–Schwarz bound of both sides.
        const double scale = std::sqrt(l2_inner(L.grid, L.mu, f, f).real()) * A.matrix.norm();
        w.update(std::abs(lhs - rhs) / scale, at(geoms[g], m) + " draw " + std::to_string(draw));
      }
    }
  return finish(3, w, o.tol.adjointness);
}

CriterionResult toeplitz_u1(const AcceptanceOptions& o) {
  Worst w;
  for (int m : {4, 8, 16, 32}) {
    const QuantizedLevel L = QuantizedLevel::build(KahlerStructure(), m);
    const VmOperator T = toeplitz(L, DictionaryFunction::harmonic(1));
    for (int k = 0; k <= m; ++k)
      for (int j = 0; j <= m; ++j) {
        const double exact = j == k ? double(m - 2 * k) / double(m + 2) : 0.0;
        w.update(std::abs(T.matrix(j, k) - exact), "m=" + std::to_string(m));
      }
  }
  return finish(4, w, o.tol.toeplitz_oracle);
}

// Dense operators for m = 2..8 on both geometries, shared by criteria 5–7.
template <class Body>
void for_small_levels(Body body) {
  const auto geoms = both_geometries();
  for (std::size_t g = 0; g < geoms.size(); ++g)
    for (int m = 2; m <= 8; ++m) {
      const QuantizedLevel L = QuantizedLevel::build(geoms[g], m);
      body(int(g), L, qlap_assemble_projective(L));
    }
}

CriterionResult kernel_check(const AcceptanceOptions& o) {
  Worst w;
  int bad = 0;
  std::string where;
  for_small_levels([&](int, const QuantizedLevel& L, const QlapDense& Q) {
    const std::vector<double> ev = spectrum(Q);
    const double top = std::max(std::abs(ev.front()), std::abs(ev.back()));
    const int kernel = kernel_dimension(ev, o.tol.kernel_relative);
    // The smallest eigenvalue must be the kernel, the next one clearly positive.
    const bool ok = kernel == 1 && ev.size() > 1 && ev[1] > o.tol.kernel_relative * top;
    if (!ok && bad++ == 0) where = at(L.geometry, L.m) + " kernel_dim " + std::to_string(kernel);
    w.update(std::abs(ev.front()) / top, at(L.geometry, L.m));
  });
  CriterionResult r = finish(5, w, o.tol.kernel_relative,
                             "smallest positive gap checked; failures " + std::to_string(bad) +
                                 (where.empty() ? "" : " first " + where));
  r.passed = r.passed && bad == 0;
  return r;
}

CriterionResult trace_formula(const AcceptanceOptions& o) {
  Worst w;
  for_small_levels([&](int, const QuantizedLevel& L, const QlapDense& Q) {
    const double expected = kTwoPi * L.m;
    w.update(std::abs(Q.matrix.trace() - expected) / expected, at(L.geometry, L.m));
  });
  return finish(6, w, o.tol.trace_relative);
}

CriterionResult route_equivalence(const AcceptanceOptions& o) {
  Worst w;
  for_small_levels([&](int g, const QuantizedLevel& L, const QlapDense& Q) {
    auto rng = stream(o.seed, 7, L.m, g);
    for (int draw = 0; draw < 10; ++draw) {
      const VmOperator A = random_operator(L.m, rng);
      const Eigen::VectorXcd apply = flatten(qlap_apply_toeplitz(L, A));
      const Eigen::VectorXcd dense = Q.apply(flatten(A));
      w.update((dense - apply).norm() / apply.norm(), at(L.geometry, L.m) + " draw " + std::to_string(draw));
    }
  });
  return finish(7, w, o.tol.route_relative);
}

CriterionResult balanced_identity(const AcceptanceOptions& o) {
  Worst w;
  for (int m : {4, 8, 16}) {
    const QuantizedLevel L = QuantizedLevel::build(KahlerStructure(), m);
    auto rng = stream(o.seed, 8, m, 0);
    for (int draw = 0; draw < 5; ++draw)
      w.update(balanced_identity_check(L, random_operator(m, rng)).defect,
               "m=" + std::to_string(m) + " draw " + std::to_string(draw));
  }
  return finish(8, w, o.tol.balanced_relative);
}

// Expansion checks are shared by criteria 9–12 and computed at most once.
struct Expansions {
  const AcceptanceOptions& opts;
  std::optional<ExpansionReport> qlap_perturbed, qlap_fs, rho_perturbed;

  ExpansionLadder ladder() const {
    ExpansionLadder l;
    l.levels = opts.ladder;
    l.holdout = opts.holdout;
    return l;
  }
  const ExpansionReport& p0() {
    if (!qlap_perturbed)
      qlap_perturbed = qlap_expansion_check(KahlerStructure::parse("fs+0.1*u1"), DictionaryFunction::harmonic(1), ladder());
    return *qlap_perturbed;
  }
  const ExpansionReport& p1() {
    if (!qlap_fs) qlap_fs = qlap_expansion_check(KahlerStructure(), DictionaryFunction::harmonic(1), ladder());
    return *qlap_fs;
  }
  const ExpansionReport& a1() {
    if (!rho_perturbed) rho_perturbed = rho_expansion_check(KahlerStructure::parse("fs+0.1*u1"), ladder());
    return *rho_perturbed;
  }
};

CriterionResult reference_criterion(int id, const ExpansionReport& rep, const std::string& name, double tol,
                                    std::string extra = {}) {
  Worst w;
  w.update(rep.reference(name).relative_error, rep.target + " " + name);
  return finish(id, w, tol, std::move(extra));
}

CriterionResult order_gates(const AcceptanceOptions& o, Expansions& ex) {
  Worst w;
  std::string slopes;
  const std::pair<const char*, const ExpansionReport*> cases[] = {
      {"P0", &ex.p0()}, {"P1", &ex.p1()}, {"a1", &ex.a1()}};
  for (const auto& [label, rep] : cases) {
    const OrderGate& g = rep->gate;
    // An exact fit has no remainder to measure and cannot confirm the order.
    const double dev = g.exact ? INFINITY : std::abs(g.slope - g.expected);
    w.update(dev, label);
    if (!slopes.empty()) slopes += ", ";
    slopes += std::string(label) + " slope " + format_double(g.slope) + " expected " + format_double(g.expected);
  }
  return finish(12, w, o.tol.slope_window, slopes);
}

// Byte-level determinism across repeated runs and worker counts, on the
// exact criteria plus one small expansion.
nlohmann::ordered_json determinism_probe(const AcceptanceOptions& o) {
  nlohmann::ordered_json j = nlohmann::ordered_json::array();
  for (auto* c : {gram_oracle, bergman_constant, adjointness, toeplitz_u1, kernel_check, trace_formula,
                  route_equivalence, balanced_identity})
    j.push_back(to_json(c(o)));
  ExpansionLadder small;
  small.levels = {8, 12, 16, 24, 32};
  small.holdout = 0;
  const ExpansionReport rep = rho_expansion_check(KahlerStructure::parse("fs+0.1*u1"), small);
  nlohmann::ordered_json coeffs = nlohmann::ordered_json::array();
  for (const auto& c : rep.fit.coefficients)
    for (const cplx v : c) coeffs.push_back({v.real(), v.imag()});
  j.push_back({{"rho_fit", coeffs}});
  return j;
}

void max_relative_difference(const nlohmann::ordered_json& a, const nlohmann::ordered_json& b, double& worst,
                             bool& structural) {
  if (a.type() != b.type()) {
    structural = true;
    return;
  }
  if (a.is_number_float()) {
    const double x = a.get<double>(), y = b.get<double>();
    const double scale = std::max({std::abs(x), std::abs(y), 1e-300});
    worst = std::max(worst, x == y ? 0.0 : std::abs(x - y) / scale);
  } else if (a.is_array() || a.is_object()) {
    if (a.size() != b.size()) {
      structural = true;
      return;
    }
    auto ia = a.begin();
    auto ib = b.begin();
    for (; ia != a.end(); ++ia, ++ib) max_relative_difference(*ia, *ib, worst, structural);
  } else if (a != b && !a.is_string()) {
    // Detail strings quote numbers and are covered by the float comparison.
    structural = true;
  }
}

CriterionResult determinism(const AcceptanceOptions& o) {
  const int saved = worker_count();
  struct Restore {
    int w;
    ~Restore() { set_worker_count(w); }
  } restore{saved};

  set_worker_count(1);
  const std::string first = determinism_probe(o).dump();
  const std::string second = determinism_probe(o).dump();
  set_worker_count(4);
  const std::string parallel = determinism_probe(o).dump();

  double worst = 0.0;
  bool structural = false;
  max_relative_difference(nlohmann::ordered_json::parse(first), nlohmann::ordered_json::parse(parallel), worst,
                          structural);
  Worst w;
  w.update(worst, "workers 1 vs 4");
  CriterionResult r = finish(13, w, o.tol.determinism_relative,
                             std::string("repeat runs ") + (first == second ? "byte-identical" : "differ") +
                                 (structural ? "; report structure differs across worker counts" : ""));
  r.passed = r.passed && first == second && !structural;
  return r;
}

}  // namespace

std::mt19937_64 seeded_stream(std::uint64_t seed, std::initializer_list<std::uint32_t> tags) {
  std::vector<std::uint32_t> words{std::uint32_t(seed), std::uint32_t(seed >> 32)};
  words.insert(words.end(), tags.begin(), tags.end());
  std::seed_seq seq(words.begin(), words.end());
  return std::mt19937_64(seq);
}

cplx random_complex(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  const double re = n(rng);
  return {re, n(rng)};
}

VmOperator random_operator(int m, std::mt19937_64& rng) {
  VmOperator A = VmOperator::zero(m);
  for (int j = 0; j < A.dim(); ++j)
    for (int i = 0; i < A.dim(); ++i) A.matrix(i, j) = random_complex(rng);
  return A;
}

void Tolerances::set(const std::string& name, double value) {
  const std::map<std::string, double Tolerances::*> fields = {
      {"gram_relative", &Tolerances::gram_relative},
      {"bergman_deviation", &Tolerances::bergman_deviation},
      {"adjointness", &Tolerances::adjointness},
      {"toeplitz_oracle", &Tolerances::toeplitz_oracle},
      {"kernel_relative", &Tolerances::kernel_relative},
      {"trace_relative", &Tolerances::trace_relative},
      {"route_relative", &Tolerances::route_relative},
      {"balanced_relative", &Tolerances::balanced_relative},
      {"p0_relative", &Tolerances::p0_relative},
      {"p1_relative", &Tolerances::p1_relative},
      {"a1_relative", &Tolerances::a1_relative},
      {"slope_window", &Tolerances::slope_window},
      {"determinism_relative", &Tolerances::determinism_relative},
  };
  const auto it = fields.find(name);
  if (it == fields.end()) throw std::invalid_argument("unknown tolerance '" + name + "'");
  if (!(value > 0.0) || !std::isfinite(value))
    throw std::invalid_argument("tolerance '" + name + "' must be positive and finite");
  this->*(it->second) = value;
}

nlohmann::ordered_json Tolerances::to_json() const {
  return {{"gram_relative", gram_relative},
          {"bergman_deviation", bergman_deviation},
          {"adjointness", adjointness},
          {"toeplitz_oracle", toeplitz_oracle},
          {"kernel_relative", kernel_relative},
          {"trace_relative", trace_relative},
          {"route_relative", route_relative},
          {"balanced_relative", balanced_relative},
          {"p0_relative", p0_relative},
          {"p1_relative", p1_relative},
          {"a1_relative", a1_relative},
          {"slope_window", slope_window},
          {"determinism_relative", determinism_relative}};
}

std::string criterion_name(int id) {
  if (id < 1 || id > kCriterionCount) throw std::out_of_range("criterion id " + std::to_string(id));
  return kNames[id - 1];
}

std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& opts, std::vector<int> ids) {
  if (ids.empty())
    for (int i = 1; i <= kCriterionCount; ++i) ids.push_back(i);
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());

  Expansions ex{opts, {}, {}, {}};
  std::vector<CriterionResult> out;
  for (int id : ids) {
    try {
      switch (id) {
        case 1: out.push_back(gram_oracle(opts)); break;
        case 2: out.push_back(bergman_constant(opts)); break;
        case 3: out.push_back(adjointness(opts)); break;
        case 4: out.push_back(toeplitz_u1(opts)); break;
        case 5: out.push_back(kernel_check(opts)); break;
        case 6: out.push_back(trace_formula(opts)); break;
        case 7: out.push_back(route_equivalence(opts)); break;
        case 8: out.push_back(balanced_identity(opts)); break;
        case 9: out.push_back(reference_criterion(9, ex.p0(), "P0", opts.tol.p0_relative)); break;
        case 10: {
          const ExpansionReport& rep = ex.p1();
          out.push_back(reference_criterion(
              10, rep, "P1_stated", opts.tol.p1_relative,
              "target -Δ²f/2π; fitted coefficient is within " + format_double(rep.reference("P1").relative_error) +
                  " of -Δ²f/π"));
          break;
        }
        case 11: out.push_back(reference_criterion(11, ex.a1(), "a1", opts.tol.a1_relative)); break;
        case 12: out.push_back(order_gates(opts, ex)); break;
        case 13: out.push_back(determinism(opts)); break;
        default: throw std::out_of_range("criterion id " + std::to_string(id));
      }
    } catch (const std::out_of_range&) {
      throw;
    } catch (const std::exception& e) {
      CriterionResult r;
      r.id = id;
      r.name = kNames[id - 1];
      r.value = NAN;
      r.detail = std::string("error: ") + e.what();
      out.push_back(r);
    }
  }
  return out;
}

std::string format_result_line(const CriterionResult& r) {
  char head[32];
  std::snprintf(head, sizeof head, "%s [%2d] ", r.passed ? "PASS" : "FAIL", r.id);
  return head + r.name + ": " + format_double(r.value) + " (tol " + format_double(r.tolerance) + "); " + r.detail;
}

nlohmann::ordered_json to_json(const CriterionResult& r) {
  nlohmann::ordered_json j;
  j["id"] = r.id;
  j["name"] = r.name;
  j["passed"] = r.passed;
  j["value"] = std::isfinite(r.value) ? nlohmann::ordered_json(r.value) : nlohmann::ordered_json(nullptr);
  j["tolerance"] = r.tolerance;
  j["detail"] = r.detail;
  return j;
}

}  // namespace qlap
