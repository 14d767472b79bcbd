#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "qlap/cli.hpp"
#include "qlap/errors.hpp"

using namespace qlap;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("qlap_cli_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

nlohmann::json read_json(const fs::path& p) {
  std::ifstream in(p);
  return nlohmann::json::parse(in);
}

}  // namespace

TEST_CASE("parse_minimal_flags") {
  const RunConfig c = parse_config({"qlap", "--geom", "fs", "--m", "8"});
  CHECK(c.command == "qlap");
  CHECK(c.geometry == "fs");
  CHECK(c.m == 8);
  CHECK(c.m_list == std::vector<int>{16, 24, 32, 48, 64});
  CHECK(c.seed == RunConfig{}.seed);
  CHECK_FALSE(c.dense);
}

TEST_CASE("parse_level_list") {
  const RunConfig c = parse_config({"expansion", "--geom", "fs+0.1*u1", "--m-list", "16,24", "--target", "rho"});
  CHECK(c.m_list == std::vector<int>{16, 24});
  CHECK(c.target == "rho");
  CHECK(c.geometry == "fs+0.1*u1");
}

TEST_CASE("parse_rejects_bad_input") {
  CHECK_THROWS_WITH_AS(parse_config({"qlap", "--geom", "fs+0.9*u1"}), doctest::Contains("0.2"), ConfigError);
  CHECK_THROWS_AS(parse_config({"qlap", "--bogus"}), ConfigError);
  CHECK_THROWS_AS(parse_config({"frobnicate"}), ConfigError);
  CHECK_THROWS_AS(parse_config({}), ConfigError);
  CHECK_THROWS_AS(parse_config({"qlap", "--m", "0"}), ConfigError);
  CHECK_THROWS_AS(parse_config({"qlap", "--f", "u1+"}), ConfigError);
  CHECK_THROWS_AS(parse_config({"expansion", "--target", "kernel"}), ConfigError);
  CHECK_THROWS_AS(parse_config({"qlap", "--tol", "trace_relative=-1"}), ConfigError);
  CHECK_THROWS_AS(parse_config({"qlap", "--tol", "nonsense=1"}), ConfigError);
  CHECK_THROWS_AS(parse_config({"verify-all", "--criteria", "14"}), ConfigError);
  // Flags belong to their own subcommand.
  CHECK_THROWS_AS(parse_config({"bergman", "--dense"}), ConfigError);
}

TEST_CASE("config_file_precedence_and_round_trip") {
  const fs::path dir = scratch("config");
  const fs::path file = dir / "cfg.json";
  {
    std::ofstream(file) << R"({"geometry": "fs+0.1*u2", "m": 5, "seed": 42, "tolerances": {"trace_relative": 1e-9}})";
  }
  const RunConfig c = parse_config({"qlap", "--config", file.string(), "--m", "7"});
  CHECK(c.geometry == "fs+0.1*u2");
  CHECK(c.m == 7);
  CHECK(c.seed == 42);
  CHECK(c.tol.trace_relative == 1e-9);

  {
    std::ofstream(file) << c.canonical();
  }
  const RunConfig back = parse_config({"qlap", "--config", file.string()});
  CHECK(back.canonical() == c.canonical());

  {
    std::ofstream(file) << R"({"m": 5, "colour": "red"})";
  }
  CHECK_THROWS_WITH_AS(parse_config({"qlap", "--config", file.string()}), doctest::Contains("colour"), ConfigError);
  {
    std::ofstream(file) << R"({"command": "gram"})";
  }
  CHECK_THROWS_AS(parse_config({"qlap", "--config", file.string()}), ConfigError);
  CHECK_THROWS_AS(parse_config({"qlap", "--config", (dir / "missing.json").string()}), ConfigError);
}

TEST_CASE("output_directory_from_environment") {
  ::setenv(kOutDirEnv, "/tmp/qlap_env_dir", 1);
  CHECK(parse_config({"bergman"}).out_dir == "/tmp/qlap_env_dir");
  CHECK(parse_config({"bergman", "--out", "elsewhere"}).out_dir == "elsewhere");
  ::unsetenv(kOutDirEnv);
  CHECK(parse_config({"bergman"}).out_dir == ".");
}

TEST_CASE("spectrum_implies_dense") {
  const RunConfig c = parse_config({"qlap", "--spectrum"});
  CHECK(c.dense);
  CHECK(c.spectrum);
}

TEST_CASE("qlap_command_reports_kernel") {
  const fs::path dir = scratch("qlap");
  const int code = run_suite(parse_config({"qlap", "--geom", "fs", "--m", "4", "--dense", "--spectrum", "--check-balanced",
                                           "--out", dir.string()}));
  CHECK(code == kExitOk);
  const auto j = read_json(dir / "qlap.json");
  CHECK(j["result"]["kernel_dim"] == 1);
  CHECK(j["status"] == "ok");
  CHECK(j["geometry"] == "fs");
  CHECK(j["grid"]["ns"] == 24);
  CHECK(j["versions"].contains("qlap"));
  CHECK(j["result"]["eigenvalues"].size() == 25);
}

TEST_CASE("bergman_command_writes_csv") {
  const fs::path dir = scratch("bergman");
  CHECK(run_suite(parse_config({"bergman", "--geom", "fs", "--m", "12", "--out", dir.string()})) == kExitOk);
  const auto j = read_json(dir / "bergman.json");
  CHECK(j["result"]["max_deviation_from_dim"].get<double>() <= 1e-10);
  std::ifstream csv(dir / "bergman.csv");
  std::string header;
  std::getline(csv, header);
  CHECK(header == "node,re_z,im_z,re_rho,im_rho");
}

TEST_CASE("failed_checks_map_to_exit_codes") {
  const fs::path dir = scratch("fail");
  const int code =
      run_suite(parse_config({"qlap", "--m", "3", "--tol", "trace_relative=1e-300", "--out", dir.string()}));
  CHECK(code == exit_code_for_check(6));
  const auto j = read_json(dir / "qlap.json");
  CHECK(j["status"] == "fail");
  CHECK(j["failures"][0]["criterion"] == 6);
  CHECK(run_suite(parse_config({"qlap", "--m", "80", "--dense", "--out", dir.string()})) == kExitConfig);
  CHECK(read_json(dir / "qlap.json")["status"] == "error");
}

TEST_CASE("gram_and_toeplitz_artifacts") {
  const fs::path dir = scratch("gram");
  CHECK(run_suite(parse_config({"gram", "--geom", "fs+0.1*u2", "--m", "3", "--dump-gram", "--out", dir.string()})) ==
        kExitOk);
  CHECK(fs::exists(dir / "gram.csv"));
  CHECK(fs::exists(dir / "basis_change.csv"));
  CHECK(run_suite(parse_config({"toeplitz", "--m", "4", "--f", "u1", "--out", dir.string()})) == kExitOk);
  const auto j = read_json(dir / "toeplitz.json");
  CHECK(j["result"]["symmetrization_defect"].get<double>() <= 1e-11);
}

TEST_CASE("expansion_command") {
  const fs::path dir = scratch("expansion");
  CHECK(run_suite(parse_config({"expansion", "--geom", "fs", "--target", "rho", "--m-list", "8,12,16,24",
                                "--holdout", "0", "--out", dir.string()})) == kExitOk);
  const auto j = read_json(dir / "expansion.json");
  CHECK(j["result"]["references"][1]["name"] == "a1");
  CHECK(j["result"]["references"][1]["sup_relative_error"].get<double>() < 1e-9);
  // Too few levels for the fit is a configuration problem.
  CHECK(run_suite(parse_config({"expansion", "--m-list", "16,24", "--out", dir.string()})) == kExitConfig);
}

TEST_CASE("reports_are_byte_identical_across_runs") {
  const fs::path a = scratch("det_a"), b = scratch("det_b");
  for (const auto& dir : {a, b})
    CHECK(run_suite(parse_config({"qlap", "--geom", "fs+0.1*u1", "--m", "5", "--dense", "--spectrum",
                                  "--check-balanced", "--out", dir.string()})) == kExitOk);
  auto slurp = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), {});
  };
  CHECK(slurp(a / "qlap.json") == slurp(b / "qlap.json"));
}
