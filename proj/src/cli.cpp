#include "qlap/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include <CLI11.hpp>

#include "qlap/asymptotics.hpp"
#include "qlap/errors.hpp"
#include "qlap/format.hpp"
#include "qlap/parallel.hpp"
#include "qlap/qlaplacian.hpp"
#include "qlap/quantization.hpp"

namespace qlap {

using json = nlohmann::ordered_json;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

const std::vector<std::string> kCommands = {"gram", "bergman", "toeplitz", "qlap", "expansion", "verify-all"};

// Flag storage; a value is applied only when its flag was given.
struct Flags {
  std::string geom, out, config, f, target;
  int m = 0, holdout = 0, ns = 0, ntheta = 0, dense_cap = 0, workers = 0;
  std::vector<int> m_list, criteria;
  std::uint64_t seed = 0;
  std::vector<std::string> tol;
  bool dense = false, spectrum = false, check_balanced = false, dump_gram = false;
};

void add_common(CLI::App* sub, Flags& fl) {
  sub->add_option("--geom", fl.geom, "geometry: fs or fs+<eps>*<expr>, |eps| <= 0.2");
  sub->add_option("--m", fl.m, "level m >= 1");
  sub->add_option("--m-list", fl.m_list, "comma-separated expansion ladder")->delimiter(',');
  sub->add_option("--holdout", fl.holdout, "held-out expansion level (0 disables)");
  sub->add_option("--ns", fl.ns, "radial quadrature nodes (0 = automatic)");
  sub->add_option("--ntheta", fl.ntheta, "angular quadrature nodes (0 = automatic)");
  sub->add_option("--dense-cap", fl.dense_cap, "largest (m+1)^2 for dense assembly");
  sub->add_option("--f", fl.f, "function in u1, u2, u3, e.g. u1*u2+0.5");
  sub->add_option("--out", fl.out, std::string("output directory (default $") + kOutDirEnv + " or .)");
  sub->add_option("--seed", fl.seed, "seed for random operators");
  sub->add_option("--workers", fl.workers, "worker threads");
  sub->add_option("--tol", fl.tol, "tolerance override name=value (repeatable)");
  sub->add_option("--config", fl.config, "JSON configuration file");
}

[[noreturn]] void config_error(const std::string& what) { throw ConfigError(what); }

template <class T>
T get_as(const json& v, const std::string& key) {
  try {
    return v.get<T>();
  } catch (const json::exception&) {
    config_error("config key '" + key + "' has the wrong type");
  }
}

void apply_config_file(RunConfig& cfg, const std::string& path) {
  std::ifstream in(path);
  if (!in) config_error("cannot read config file '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    config_error("config file '" + path + "' is not valid JSON: " + e.what());
  }
  if (!j.is_object()) config_error("config file '" + path + "' must hold a JSON object");
  for (const auto& [key, v] : j.items()) {
    if (key == "command") {
      if (get_as<std::string>(v, key) != cfg.command)
        config_error("config file is for command '" + v.get<std::string>() + "', not '" + cfg.command + "'");
    } else if (key == "geometry") cfg.geometry = get_as<std::string>(v, key);
    else if (key == "m") cfg.m = get_as<int>(v, key);
    else if (key == "m_list") cfg.m_list = get_as<std::vector<int>>(v, key);
    else if (key == "holdout") cfg.holdout = get_as<int>(v, key);
    else if (key == "ns") cfg.ns = get_as<int>(v, key);
    else if (key == "ntheta") cfg.ntheta = get_as<int>(v, key);
    else if (key == "dense_cap") cfg.dense_cap = get_as<int>(v, key);
    else if (key == "out_dir") cfg.out_dir = get_as<std::string>(v, key);
    else if (key == "dense") cfg.dense = get_as<bool>(v, key);
    else if (key == "spectrum") cfg.spectrum = get_as<bool>(v, key);
    else if (key == "check_balanced") cfg.check_balanced = get_as<bool>(v, key);
    else if (key == "dump_gram") cfg.dump_gram = get_as<bool>(v, key);
    else if (key == "f") cfg.f = get_as<std::string>(v, key);
    else if (key == "target") cfg.target = get_as<std::string>(v, key);
    else if (key == "seed") cfg.seed = get_as<std::uint64_t>(v, key);
    else if (key == "workers") cfg.workers = get_as<int>(v, key);
    else if (key == "criteria") cfg.criteria = get_as<std::vector<int>>(v, key);
    else if (key == "tolerances") {
      if (!v.is_object()) config_error("config key 'tolerances' must be an object");
      for (const auto& [name, t] : v.items()) {
        try {
          cfg.tol.set(name, get_as<double>(t, "tolerances." + name));
        } catch (const std::invalid_argument& e) {
          if (dynamic_cast<const ConfigError*>(&e)) throw;
          config_error(e.what());
        }
      }
    } else {
      config_error("unknown config key '" + key + "'");
    }
  }
}

void apply_tolerance_flag(RunConfig& cfg, const std::string& item) {
  const auto eq = item.find('=');
  if (eq == std::string::npos) config_error("--tol expects name=value, got '" + item + "'");
  const std::string name = item.substr(0, eq);
  double value = 0.0;
  try {
    std::size_t used = 0;
    value = std::stod(item.substr(eq + 1), &used);
    if (used != item.size() - eq - 1) throw std::invalid_argument("trailing characters");
  } catch (const std::exception&) {
    config_error("--tol value for '" + name + "' is not a number");
  }
  try {
    cfg.tol.set(name, value);
  } catch (const std::invalid_argument& e) {
    config_error(e.what());
  }
}

void validate(RunConfig& cfg) {
  try {
    cfg.geometry = KahlerStructure::parse(cfg.geometry).to_string();
  } catch (const std::invalid_argument& e) {
    config_error(std::string("geometry: ") + e.what());
  }
  try {
    cfg.f = DictionaryFunction::parse(cfg.f).to_string();
  } catch (const std::invalid_argument& e) {
    config_error(std::string("function: ") + e.what());
  }
  if (cfg.m < 1) config_error("m must be at least 1");
  if (cfg.m_list.empty()) config_error("m-list must not be empty");
  for (int m : cfg.m_list)
    if (m < 1) config_error("m-list entries must be at least 1");
  if (cfg.holdout < 0) config_error("holdout must be nonnegative");
  if (cfg.ns < 0 || cfg.ntheta < 0) config_error("grid sizes must be nonnegative");
  if (cfg.dense_cap < 1) config_error("dense cap must be positive");
  if (cfg.workers < 1) config_error("workers must be at least 1");
  if (cfg.target != "rho" && cfg.target != "tt" && cfg.target != "qlap")
    config_error("target must be rho, tt or qlap, got '" + cfg.target + "'");
  for (int c : cfg.criteria)
    if (c < 1 || c > kCriterionCount) config_error("criterion " + std::to_string(c) + " does not exist");
  std::sort(cfg.criteria.begin(), cfg.criteria.end());
  cfg.criteria.erase(std::unique(cfg.criteria.begin(), cfg.criteria.end()), cfg.criteria.end());
  // A spectrum needs the dense operator.
  if (cfg.spectrum) cfg.dense = true;
}

// Reports

class Csv {
 public:
  explicit Csv(const std::vector<std::string>& header) { line(header); }
  void line(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) os_ << (i ? "," : "") << cells[i];
    os_ << '\n';
  }
  std::string str() const { return os_.str(); }

 private:
  std::ostringstream os_;
};

std::string num(double v) { return format_double(v); }

void add_complex(std::vector<std::string>& cells, cplx v) {
  cells.push_back(num(v.real()));
  cells.push_back(num(v.imag()));
}

void add_complex_header(std::vector<std::string>& cells, const std::string& name) {
  cells.push_back("re_" + name);
  cells.push_back("im_" + name);
}

std::string matrix_csv(const Eigen::MatrixXcd& M, const std::string& name) {
  std::vector<std::string> header{"row", "col"};
  add_complex_header(header, name);
  Csv csv(header);
  for (Eigen::Index r = 0; r < M.rows(); ++r)
    for (Eigen::Index c = 0; c < M.cols(); ++c) {
      std::vector<std::string> cells{std::to_string(r), std::to_string(c)};
      add_complex(cells, M(r, c));
      csv.line(cells);
    }
  return csv.str();
}

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

class Report {
 public:
  explicit Report(const RunConfig& cfg) : cfg_(cfg) {
    env_["tool"] = "qlap";
    env_["command"] = cfg.command;
    env_["versions"] = {{"qlap", kVersion},
                        {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) +
                                      "." + std::to_string(EIGEN_MINOR_VERSION)}};
    env_["geometry"] = cfg.geometry;
    env_["seed"] = cfg.seed;
    env_["config"] = cfg.to_json(false);
    env_["grid"] = nullptr;
    env_["status"] = "ok";
    env_["failures"] = json::array();
    env_["result"] = json::object();
  }

  json& grid() { return env_["grid"]; }
  json& result() { return env_["result"]; }

  static json grid_json(const Grid& g, const RunConfig& cfg) {
    return {{"ns", g.ns},
            {"ntheta", g.ntheta},
            {"nodes", g.size()},
            {"ns_requested", cfg.ns},
            {"ntheta_requested", cfg.ntheta}};
  }

  // A failed check; the first one determines the exit code.
  void fail(int criterion, const std::string& check, const std::string& reason) {
    env_["status"] = "fail";
    env_["failures"].push_back({{"check", check}, {"criterion", criterion}, {"reason", reason}});
    if (code_ == kExitOk) code_ = exit_code_for_check(criterion);
  }

  void error(int code, const std::string& reason) {
    env_["status"] = "error";
    env_["failures"].push_back({{"check", "run"}, {"criterion", nullptr}, {"reason", reason}});
    code_ = code;
  }

  void write_file(const std::string& name, const std::string& text) {
    const std::filesystem::path p = std::filesystem::path(cfg_.out_dir) / name;
    std::ofstream out(p, std::ios::binary);
    out << text;
    if (!out) throw std::runtime_error("cannot write " + p.string());
    written_.push_back(p.string());
  }

  int finish(const std::string& json_name) {
    write_file(json_name, env_.dump(2) + "\n");
    for (const auto& w : written_) std::cout << "wrote " << w << '\n';
    for (const auto& f : env_["failures"]) std::cout << "FAIL " << f["check"].get<std::string>() << ": "
                                                      << f["reason"].get<std::string>() << '\n';
    return code_;
  }

 private:
  const RunConfig& cfg_;
  json env_;
  std::vector<std::string> written_;
  int code_ = kExitOk;
};

GridSpec grid_spec(const RunConfig& cfg) { return {cfg.ns, cfg.ntheta}; }

void run_gram(const RunConfig& cfg, Report& rep) {
  const KahlerStructure K = KahlerStructure::parse(cfg.geometry);
  const Grid grid = build_grid(cfg.m, grid_spec(cfg));
  rep.grid() = Report::grid_json(grid, cfg);
  const GramMatrix G = gram(K, cfg.m, grid, measure(K, grid));
  const double scale = G.entries.cwiseAbs().maxCoeff();
  const Eigen::MatrixXcd H = 0.5 * (G.entries + G.entries.adjoint());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(H, Eigen::EigenvaluesOnly);
  const Eigen::MatrixXcd C = orthonormalize(G);

  json& r = rep.result();
  r["level"] = cfg.m;
  r["dim"] = cfg.m + 1;
  r["hermitian_defect"] = (G.entries - G.entries.adjoint()).cwiseAbs().maxCoeff() / scale;
  r["min_eigenvalue"] = es.eigenvalues().minCoeff();
  r["max_eigenvalue"] = es.eigenvalues().maxCoeff();
  r["condition"] = es.eigenvalues().maxCoeff() / es.eigenvalues().minCoeff();
  json diag = json::array();
  for (int k = 0; k <= cfg.m; ++k) diag.push_back(G.entries(k, k).real());
  r["diagonal"] = diag;
  if (K.is_fubini_study()) {
    double err = 0.0, binom = 1.0;
    for (int k = 0; k <= cfg.m; ++k) {
      if (k > 0) binom = binom * double(cfg.m - k + 1) / double(k);
      const double exact = 1.0 / (double(cfg.m + 1) * binom);
      for (int j = 0; j <= cfg.m; ++j)
        err = std::max(err, std::abs(G.entries(j, k) - (j == k ? exact : 0.0)) / exact);
    }
    r["fs_oracle_relative_error"] = err;
    if (!(err <= cfg.tol.gram_relative))
      rep.fail(1, "fs gram oracle", "relative error " + num(err) + " exceeds " + num(cfg.tol.gram_relative));
  }
  if (cfg.dump_gram) {
    rep.write_file("gram.csv", matrix_csv(G.entries, "gram"));
    rep.write_file("basis_change.csv", matrix_csv(C, "basis_change"));
  }
}

void run_bergman(const RunConfig& cfg, Report& rep) {
  const KahlerStructure K = KahlerStructure::parse(cfg.geometry);
  const QuantizedLevel L = QuantizedLevel::build(K, cfg.m, grid_spec(cfg));
  rep.grid() = Report::grid_json(L.grid, cfg);
  const Eigen::VectorXcd rho = bergman_rho(L).value;

  std::vector<std::string> header{"node"};
  add_complex_header(header, "z");
  add_complex_header(header, "rho");
  Csv csv(header);
  for (Eigen::Index i = 0; i < rho.size(); ++i) {
    std::vector<std::string> cells{std::to_string(i)};
    add_complex(cells, L.grid.nodes[std::size_t(i)]);
    add_complex(cells, rho[i]);
    csv.line(cells);
  }
  rep.write_file("bergman.csv", csv.str());

  const double dim = L.dim();
  const double dev = (rho.array() - dim).abs().maxCoeff();
  json& r = rep.result();
  r["level"] = cfg.m;
  r["dim"] = L.dim();
  r["min"] = rho.real().minCoeff();
  r["max"] = rho.real().maxCoeff();
  r["max_deviation_from_dim"] = dev;
  r["integral"] = integrate(L.grid, L.mu, rho).real();
  if (K.is_fubini_study() && !(dev <= cfg.tol.bergman_deviation))
    rep.fail(2, "balanced bergman density", "deviation " + num(dev) + " exceeds " + num(cfg.tol.bergman_deviation));
}

void run_toeplitz(const RunConfig& cfg, Report& rep) {
  const KahlerStructure K = KahlerStructure::parse(cfg.geometry);
  const QuantizedLevel L = QuantizedLevel::build(K, cfg.m, grid_spec(cfg));
  rep.grid() = Report::grid_json(L.grid, cfg);
  ToeplitzDiagnostics diag;
  const VmOperator T = toeplitz(L, DictionaryFunction::parse(cfg.f), &diag);
  rep.write_file("toeplitz.csv", matrix_csv(T.matrix, "T"));
  json& r = rep.result();
  r["level"] = cfg.m;
  r["dim"] = L.dim();
  r["f"] = cfg.f;
  r["symmetrized"] = diag.symmetrized;
  r["symmetrization_defect"] = diag.symmetrization_defect;
  r["trace"] = T.matrix.trace().real();
  r["operator_norm"] = operator_norm(T.matrix);
}

void run_qlap(const RunConfig& cfg, Report& rep) {
  const KahlerStructure K = KahlerStructure::parse(cfg.geometry);
  const QuantizedLevel L = QuantizedLevel::build(K, cfg.m, grid_spec(cfg));
  rep.grid() = Report::grid_json(L.grid, cfg);
  json& r = rep.result();
  r["level"] = cfg.m;
  r["dim"] = L.dim();

  const double formula = kTwoPi * cfg.m;
  double trace = qlap_trace(L);
  r["trace_formula"] = formula;
  r["kernel_dim"] = nullptr;
  r["route_defect"] = nullptr;
  r["balanced_defect"] = nullptr;

  if (cfg.dense) {
    const QlapDense Q = qlap_assemble_projective(L, cfg.dense_cap);
    trace = Q.matrix.trace().real();
    auto rng = seeded_stream(cfg.seed, {7u, std::uint32_t(cfg.m)});
    double route = 0.0;
    for (int draw = 0; draw < 10; ++draw) {
      const VmOperator A = random_operator(cfg.m, rng);
      const Eigen::VectorXcd apply = flatten(qlap_apply_toeplitz(L, A));
      route = std::max(route, (Q.apply(flatten(A)) - apply).norm() / apply.norm());
    }
    r["route_defect"] = route;
    if (!(route <= cfg.tol.route_relative))
      rep.fail(7, "route equivalence", "defect " + num(route) + " exceeds " + num(cfg.tol.route_relative));

    if (cfg.spectrum) {
      const std::vector<double> ev = spectrum(Q);
      const double top = std::max(std::abs(ev.front()), std::abs(ev.back()));
      const int kernel = kernel_dimension(ev, cfg.tol.kernel_relative);
      r["kernel_dim"] = kernel;
      r["eigenvalues"] = ev;
      const bool ok = kernel == 1 && (ev.size() < 2 || ev[1] > cfg.tol.kernel_relative * top);
      if (!ok)
        rep.fail(5, "kernel", "kernel dimension " + std::to_string(kernel) + " with smallest eigenvalues " +
                                  num(ev.front()) + (ev.size() > 1 ? ", " + num(ev[1]) : ""));
    }
  }
  r["trace"] = trace;
  const double trace_err = std::abs(trace - formula) / formula;
  r["trace_relative_error"] = trace_err;
  if (!(trace_err <= cfg.tol.trace_relative))
    rep.fail(6, "trace formula", "relative error " + num(trace_err) + " exceeds " + num(cfg.tol.trace_relative));

  if (cfg.check_balanced) {
    auto rng = seeded_stream(cfg.seed, {8u, std::uint32_t(cfg.m)});
    double defect = 0.0, constant = 0.0;
    for (int draw = 0; draw < 5; ++draw) {
      const BalancedCheck b = balanced_identity_check(L, random_operator(cfg.m, rng));
      defect = std::max(defect, b.defect);
      constant = b.constant;
    }
    r["balanced_defect"] = defect;
    r["balanced_constant"] = constant;
    // The identity characterizes balanced metrics; only Fubini–Study is gated.
    if (K.is_fubini_study() && !(defect <= cfg.tol.balanced_relative))
      rep.fail(8, "balanced identity", "defect " + num(defect) + " exceeds " + num(cfg.tol.balanced_relative));
  }
}

std::string power_name(int p) { return p < 0 ? "c_n" + std::to_string(-p) : "c_p" + std::to_string(p); }

void run_expansion_cmd(const RunConfig& cfg, Report& rep) {
  const KahlerStructure K = KahlerStructure::parse(cfg.geometry);
  const DictionaryFunction f = DictionaryFunction::parse(cfg.f);
  ExpansionLadder ladder;
  ladder.levels = cfg.m_list;
  ladder.holdout = cfg.holdout;
  ladder.grid = grid_spec(cfg);
  const ExpansionReport ex = cfg.target == "rho"  ? rho_expansion_check(K, ladder)
                             : cfg.target == "tt" ? tt_expansion_check(K, f, ladder)
                                                  : qlap_expansion_check(K, f, ladder);

  json grids = json::array();
  for (int m : ex.series.m_values) {
    json g = Report::grid_json(build_grid(m, ladder.grid), cfg);
    g["level"] = m;
    grids.push_back(g);
  }
  rep.grid() = grids;

  std::vector<std::string> header{"node"};
  add_complex_header(header, "z");
  for (int p : ex.fit.powers) add_complex_header(header, power_name(p));
  for (const auto& ref : ex.references) add_complex_header(header, "ref_" + ref.name);
  header.push_back("residual");
  Csv csv(header);
  for (std::size_t i = 0; i < ex.points.size(); ++i) {
    const auto n = Eigen::Index(i);
    std::vector<std::string> cells{std::to_string(i)};
    add_complex(cells, ex.points[i]);
    for (const auto& c : ex.fit.coefficients) add_complex(cells, c[n]);
    for (const auto& ref : ex.references) add_complex(cells, ref.values[n]);
    double res = 0.0;
    for (const auto& lv : ex.fit.residual) res = std::max(res, std::abs(lv[n]));
    cells.push_back(num(res));
    csv.line(cells);
  }
  rep.write_file("expansion.csv", csv.str());

  json& r = rep.result();
  r["target"] = ex.target;
  r["series"] = ex.series.label;
  r["levels"] = cfg.m_list;
  r["holdout"] = cfg.holdout;
  r["points"] = ex.points.size();
  r["fit"] = {{"powers", ex.fit.powers}, {"condition", ex.fit.condition}, {"residual_sup", ex.fit.residual_sup}};
  json refs = json::array();
  for (const auto& ref : ex.references)
    refs.push_back({{"name", ref.name}, {"power", ref.power}, {"sup_relative_error", ref.relative_error}});
  r["references"] = refs;
  r["order_gate"] = {{"levels", ex.gate.levels},
                     {"remainder_sup", ex.gate.remainder_sup},
                     {"slope", number_or_null(ex.gate.slope)},
                     {"expected", ex.gate.expected},
                     {"exact", ex.gate.exact}};
}

void run_verify(const RunConfig& cfg, Report& rep) {
  AcceptanceOptions opts;
  opts.seed = cfg.seed;
  opts.tol = cfg.tol;
  opts.ladder = cfg.m_list;
  opts.holdout = cfg.holdout;
  const std::vector<CriterionResult> results = run_acceptance(opts, cfg.criteria);
  json list = json::array();
  json failed = json::array();
  for (const auto& c : results) {
    std::cout << format_result_line(c) << '\n';
    list.push_back(to_json(c));
    if (!c.passed) {
      failed.push_back(c.id);
      rep.fail(c.id, c.name, c.detail);
    }
  }
  json& r = rep.result();
  r["criteria"] = list;
  r["passed"] = results.size() - failed.size();
  r["failed"] = failed;
}

}  // namespace

json RunConfig::to_json(bool with_output) const {
  json j;
  j["command"] = command;
  j["geometry"] = geometry;
  j["m"] = m;
  j["m_list"] = m_list;
  j["holdout"] = holdout;
  j["ns"] = ns;
  j["ntheta"] = ntheta;
  j["dense_cap"] = dense_cap;
  if (with_output) j["out_dir"] = out_dir;
  j["dense"] = dense;
  j["spectrum"] = spectrum;
  j["check_balanced"] = check_balanced;
  j["dump_gram"] = dump_gram;
  j["f"] = f;
  j["target"] = target;
  j["seed"] = seed;
  j["workers"] = workers;
  j["tolerances"] = tol.to_json();
  j["criteria"] = criteria;
  return j;
}

std::string RunConfig::canonical() const { return to_json(true).dump(); }

RunConfig parse_config(const std::vector<std::string>& args) {
  RunConfig cfg;
  if (const char* env = std::getenv(kOutDirEnv); env && *env) cfg.out_dir = env;

  CLI::App app{"Numerical laboratory for the quantized Laplacian on the projective line", "qlap"};
  app.require_subcommand(1, 1);
  Flags fl;
  const std::map<std::string, std::string> about = {
      {"gram", "Gram matrix of monomials and the orthonormalizing basis change"},
      {"bergman", "density of states rho_m on the quadrature grid"},
      {"toeplitz", "Toeplitz operator T_m(f)"},
      {"qlap", "trace, spectrum and identities of the quantized Laplacian"},
      {"expansion", "large-m coefficient fit for rho, T*T or T*Delta_m T"},
      {"verify-all", "acceptance suite"},
  };
  for (const auto& name : kCommands) {
    CLI::App* sub = app.add_subcommand(name, about.at(name));
    add_common(sub, fl);
    if (name == "gram") sub->add_flag("--dump-gram", fl.dump_gram, "write gram.csv and basis_change.csv");
    if (name == "qlap") {
      sub->add_flag("--dense", fl.dense, "assemble the dense operator");
      sub->add_flag("--spectrum", fl.spectrum, "eigenvalues and kernel dimension (implies --dense)");
      sub->add_flag("--check-balanced", fl.check_balanced, "compare with the Toeplitz form of the Laplacian");
    }
    if (name == "expansion") sub->add_option("--target", fl.target, "rho, tt or qlap");
    if (name == "verify-all") sub->add_option("--criteria", fl.criteria, "comma-separated subset")->delimiter(',');
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    throw HelpRequested{app.help()};
  } catch (const CLI::ParseError& e) {
    config_error(e.what());
  }

  const CLI::App* sub = app.get_subcommands().front();
  cfg.command = sub->get_name();
  auto given = [&](const char* flag) { return sub->count(flag) > 0; };

  if (given("--config")) apply_config_file(cfg, fl.config);
  if (given("--geom")) cfg.geometry = fl.geom;
  if (given("--m")) cfg.m = fl.m;
  if (given("--m-list")) cfg.m_list = fl.m_list;
  if (given("--holdout")) cfg.holdout = fl.holdout;
  if (given("--ns")) cfg.ns = fl.ns;
  if (given("--ntheta")) cfg.ntheta = fl.ntheta;
  if (given("--dense-cap")) cfg.dense_cap = fl.dense_cap;
  if (given("--f")) cfg.f = fl.f;
  if (given("--out")) cfg.out_dir = fl.out;
  if (given("--seed")) cfg.seed = fl.seed;
  if (given("--workers")) cfg.workers = fl.workers;
  for (const auto& t : fl.tol) apply_tolerance_flag(cfg, t);
  if (cfg.command == "gram" && given("--dump-gram")) cfg.dump_gram = true;
  if (cfg.command == "qlap") {
    if (given("--dense")) cfg.dense = true;
    if (given("--spectrum")) cfg.spectrum = true;
    if (given("--check-balanced")) cfg.check_balanced = true;
  }
  if (cfg.command == "expansion" && given("--target")) cfg.target = fl.target;
  if (cfg.command == "verify-all" && given("--criteria")) cfg.criteria = fl.criteria;

  validate(cfg);
  return cfg;
}

int run_suite(const RunConfig& cfg) {
  set_worker_count(cfg.workers);
  try {
    std::filesystem::create_directories(cfg.out_dir);
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "qlap: cannot create output directory: " << e.what() << '\n';
    return kExitConfig;
  }
  Report rep(cfg);
  const std::string json_name = (cfg.command == "verify-all" ? std::string("verify") : cfg.command) + ".json";
  try {
    if (cfg.command == "gram") run_gram(cfg, rep);
    else if (cfg.command == "bergman") run_bergman(cfg, rep);
    else if (cfg.command == "toeplitz") run_toeplitz(cfg, rep);
    else if (cfg.command == "qlap") run_qlap(cfg, rep);
    else if (cfg.command == "expansion") run_expansion_cmd(cfg, rep);
    else if (cfg.command == "verify-all") run_verify(cfg, rep);
    else throw ConfigError("unknown command '" + cfg.command + "'");
  } catch (const NumericalError& e) {
    rep.error(kExitNumerical, e.what());
  } catch (const std::length_error& e) {
    // Dense cap exceeded: a configuration problem.
    rep.error(kExitConfig, e.what());
  } catch (const std::invalid_argument& e) {
    rep.error(kExitConfig, e.what());
  }
  try {
    return rep.finish(json_name);
  } catch (const std::exception& e) {
    std::cerr << "qlap: " << e.what() << '\n';
    return kExitNumerical;
  }
}

int run_cli(int argc, char** argv) {
  const std::vector<std::string> args(argv + 1, argv + argc);
  RunConfig cfg;
  try {
    cfg = parse_config(args);
  } catch (const HelpRequested& h) {
    std::cout << h.text;
    return kExitOk;
  } catch (const ConfigError& e) {
    std::cerr << "qlap: " << e.what() << '\n';
    return kExitConfig;
  }
  return run_suite(cfg);
}

}  // namespace qlap
