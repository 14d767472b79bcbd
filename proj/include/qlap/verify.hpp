#pragma once

// The acceptance suite: thirteen numbered checks with pinned tolerances,
// shared by `qlap verify-all` and the acceptance test binary.

#include <cstdint>
#include <initializer_list>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "qlap/quantization.hpp"

namespace qlap {

struct Tolerances {
  double gram_relative = 1e-12;
  double bergman_deviation = 1e-10;
  double adjointness = 1e-10;
  double toeplitz_oracle = 1e-10;
  double kernel_relative = 1e-8;
  double trace_relative = 1e-6;
  double route_relative = 1e-8;
  double balanced_relative = 1e-8;
  double p0_relative = 0.02;
  double p1_relative = 0.05;
  double a1_relative = 0.02;
  double slope_window = 0.4;
  double determinism_relative = 1e-14;

  // Throws std::invalid_argument for an unknown name or nonpositive value.
  void set(const std::string& name, double value);
  nlohmann::ordered_json to_json() const;
};

struct AcceptanceOptions {
  std::uint64_t seed = 20100;
  Tolerances tol;
  std::vector<int> ladder{16, 24, 32, 48, 64};
  int holdout = 96;
};

struct CriterionResult {
  int id = 0;
  std::string name;
  bool passed = false;
  double value = 0.0;      // worst observed error measure
  double tolerance = 0.0;
  std::string detail;
};

inline constexpr int kCriterionCount = 13;

// Reproducible stream derived from the run seed and a tag per use site.
std::mt19937_64 seeded_stream(std::uint64_t seed, std::initializer_list<std::uint32_t> tags);
// Entries with independent standard normal real and imaginary parts.
VmOperator random_operator(int m, std::mt19937_64& rng);
cplx random_complex(std::mt19937_64& rng);

std::string criterion_name(int id);

// Runs the selected criteria (all when `ids` is empty) in increasing order.
std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& opts, std::vector<int> ids = {});

// "PASS [ 6] trace formula: ..." line for console output.
std::string format_result_line(const CriterionResult& r);

nlohmann::ordered_json to_json(const CriterionResult& r);

}  // namespace qlap
