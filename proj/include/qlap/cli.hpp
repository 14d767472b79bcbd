#pragma once

// Command-line front end: configuration, dispatch and report files.
//
// Exit codes: 0 success, 1 numerical failure (reason in the JSON report),
// 2 configuration error, 2+k when acceptance check k fails.

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "qlap/verify.hpp"

namespace qlap {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr const char* kOutDirEnv = "QLAP_OUT_DIR";

inline constexpr int kExitOk = 0;
inline constexpr int kExitNumerical = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int exit_code_for_check(int criterion) { return 2 + criterion; }

struct RunConfig {
  std::string command;  // gram | bergman | toeplitz | qlap | expansion | verify-all
  std::string geometry = "fs";
  int m = 8;
  std::vector<int> m_list{16, 24, 32, 48, 64};
  int holdout = 96;
  int ns = 0;  // 0 = automatic
  int ntheta = 0;
  int dense_cap = 4096;
  std::string out_dir = ".";
  bool dense = false;
  bool spectrum = false;
  bool check_balanced = false;
  bool dump_gram = false;
  std::string f = "u1";
  std::string target = "qlap";  // rho | tt | qlap
  std::uint64_t seed = 20100;
  int workers = 1;
  Tolerances tol;
  std::vector<int> criteria;  // verify-all selection; empty = all

  // Every field; with_output=false drops the output directory so reports
  // written to different places compare equal.
  nlohmann::ordered_json to_json(bool with_output = true) const;
  // Compact JSON form; fed back as a config file it reproduces the config.
  std::string canonical() const;
};

// Raised for --help; carries the help text.
struct HelpRequested {
  std::string text;
};

// Precedence: flags > config file (--config, JSON) > defaults, with the output
// directory defaulting to $QLAP_OUT_DIR. Throws ConfigError on unknown flags or
// keys, malformed geometry or function, or out-of-range values.
RunConfig parse_config(const std::vector<std::string>& args);

// Runs the subcommand, writes its artifacts into cfg.out_dir and returns the exit code.
int run_suite(const RunConfig& cfg);

int run_cli(int argc, char** argv);

}  // namespace qlap
