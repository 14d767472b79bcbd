#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <atomic>
#include <stdexcept>

#include "qlap/parallel.hpp"
#include "qlap/qlaplacian.hpp"
#include "qlap/quantization.hpp"
#include "qlap/verify.hpp"

using namespace qlap;

namespace {

struct Outputs {
  Eigen::MatrixXcd toeplitz, qlap, dense;
  Eigen::VectorXcd rho;
};

Outputs compute(int workers) {
  set_worker_count(workers);
  const QuantizedLevel L = QuantizedLevel::build(KahlerStructure::parse("fs+0.1*u1"), 7);
  auto rng = seeded_stream(1, {1});
  Outputs o;
  o.toeplitz = toeplitz(L, DictionaryFunction::parse("u1*u3+u2")).matrix;
  o.qlap = qlap_apply_toeplitz(L, random_operator(7, rng)).matrix;
  o.dense = qlap_assemble_projective(L).matrix;
  o.rho = bergman_rho(L).value;
  set_worker_count(1);
  return o;
}

}  // namespace

TEST_CASE("pairwise_sum_matches_exact_sum") {
  std::vector<double> v(1000);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = double(i);
  CHECK(pairwise_sum<double>(v) == 499500.0);
  CHECK(pairwise_sum<double>(std::span<const double>{}) == 0.0);
  CHECK(pairwise_reduce<double>({1.0, 2.0, 3.0}) == 6.0);
}

TEST_CASE("parallel_for_visits_every_unit_once") {
  set_worker_count(4);
  std::vector<std::atomic<int>> hits(257);
  parallel_for(hits.size(), [&](std::size_t i) { hits[i]++; });
  for (auto& h : hits) CHECK(h.load() == 1);
  CHECK_THROWS_AS(parallel_for(10, [](std::size_t i) {
                    if (i == 3) throw std::runtime_error("unit failed");
                  }),
                  std::runtime_error);
  set_worker_count(0);
  CHECK(worker_count() == 1);
}

TEST_CASE("results_do_not_depend_on_worker_count") {
  const Outputs one = compute(1);
  for (int w : {2, 3, 8}) {
    const Outputs many = compute(w);
    CHECK(one.toeplitz == many.toeplitz);
    CHECK(one.qlap == many.qlap);
    CHECK(one.dense == many.dense);
    CHECK(one.rho == many.rho);
  }
}
