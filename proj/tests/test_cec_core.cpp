#include <cmath>
#include <vector>

#include "cecbench/cec_core.hpp"
#include "cecbench/error.hpp"
#include "cecbench/rng.hpp"
#include "doctest.h"
#include "oracles/oracles.hpp"

using namespace cecbench;
using namespace cecbench::cec;

namespace {

CecConfig config(std::size_t n, double c0, double c = 1.0, std::size_t k = 200) {
  CecConfig cfg;
  cfg.n_tasks = n;
  cfg.c0 = c0;
  cfg.c = c;
  cfg.k_rbs = k;
  return cfg;
}

}  // namespace

TEST_SUITE("cec_core") {

TEST_CASE("compute_uc boundary values") {
  CHECK(compute_uc(0.7, 0.7) == doctest::Approx(0.5));
  CHECK(compute_uc(0.5, 0.0) == 0.0);
  CHECK(compute_uc(0.5, 1e-12) == doctest::Approx(1.0));
  CHECK(compute_uc(0.5, 2.0, 2.0) == 0.0);
  CHECK(compute_uc(0.5, 3.0, 2.0) == 0.0);
  CHECK_THROWS_AS(compute_uc(-1.0, 1.0), ValidationError);
}

TEST_CASE("compute_uc lies strictly inside the unit interval") {
  RngStream rng(2);
  for (int i = 0; i < 1000; ++i) {
    const double t_p = 0.1 + 10.0 * rng.uniform();
    const double t_cm = t_p * (0.001 + 0.998 * rng.uniform());
    const double t_cp = 1e-3 + rng.uniform();
    const double u = compute_uc(t_cp, t_cm, t_p);
    CHECK(u > 0.0);
    CHECK(u < 1.0);
  }
}

TEST_CASE("compute_urb examples") {
  RbAllocation full(1, 10);
  for (std::size_t j = 0; j < 10; ++j) full.assign(0, j);
  CHECK(compute_urb(full, 0, 1.0, 1.0) == doctest::Approx(1.0));

  RbAllocation two(2, 10);
  two.assign(0, 3);
  two.assign(0, 7);
  CHECK(compute_urb(two, 0, 0.5, 1.0) == doctest::Approx(0.1));
  CHECK(compute_urb(two, 1, 0.5, 1.0) == 0.0);
  CHECK_THROWS_AS(two.assign(1, 3), ValidationError);
}

TEST_CASE("compute_ucc sums products and flags infeasible utilizations") {
  CHECK(compute_ucc({}).value == 0.0);
  std::vector<TaskUtilization> t{{0, 0, 0, 0.3, 0.1}, {1, 0, 0, 0.2, 0.05}};
  const auto s = compute_ucc(t);
  CHECK(s.value == doctest::Approx(0.04));
  CHECK(s.feasible());
  std::vector<TaskUtilization> bad{{0, 0, 0, 0.8, 0.1}, {1, 0, 0, 0.8, 0.1}};
  CHECK(compute_ucc(bad).uc_sum_violated);
  std::vector<TaskUtilization> one{{0, 0, 0, 1.0, 1.5}};
  CHECK(compute_ucc(one).value == doctest::Approx(1.5));
}

TEST_CASE("case I bound") {
  CHECK(ucc_case1_bound(config(100, 1.5, 1.5)) == 1.5);
  const auto cfg = config(4, 1.0, 1.0, 8);
  std::vector<double> ones(4, 1.0);
  CHECK(ucc_case1(ones, ones, cfg) == doctest::Approx(cfg.c));
  RngStream rng(8);
  for (int trial = 0; trial < 10000; ++trial) {
    const auto n = 1 + static_cast<std::size_t>(rng.uniform() * 50);
    const auto k = n + 1 + static_cast<std::size_t>(rng.uniform() * 100);
    const auto c = (0.01 + 0.99 * rng.uniform()) * static_cast<double>(k - n);
    const auto cfg_r = config(n, 1.0, c, k);
    std::vector<double> u(n), mu(n);
    for (std::size_t i = 0; i < n; ++i) {
      u[i] = rng.uniform();
      mu[i] = rng.uniform();
    }
    REQUIRE(ucc_case1(u, mu, cfg_r) <= cfg_r.c * (1.0 + 1e-12));
  }
}

TEST_CASE("admissible c range") {
  CHECK_NOTHROW(config(100, 1.5, 99.0, 200).validate());
  CHECK_THROWS_AS(config(100, 1.5, 100.0, 200).validate(), ValidationError);
  CHECK_NOTHROW(config(300, 1.5, 1.0, 200).validate());
  CHECK_THROWS_AS(config(300, 1.5, 1.01, 200).validate(), ValidationError);
  CHECK_NOTHROW(config(8, 1.5, 1.0, 8).validate());
  CHECK_THROWS_AS(config(8, 1.5, 0.0, 8).validate(), ValidationError);
}

TEST_CASE("case II closed-form optimum") {
  CHECK(optimal_tcm_case2(0.005, config(100, 1.5)) == doctest::Approx(0.1));
  CHECK(optimal_tcm_case2(0.5, config(100, 1.5)) == doctest::Approx(5.0744).epsilon(1e-4));
  CHECK(optimal_tcm_case2(0.3, config(1, 0.0)) == doctest::Approx(0.3));
  const auto cfg = config(100, 1.5, 1.5);
  const auto grid = oracles::log_grid(1e-4, 10.0, 100001);
  const double best = oracles::grid_argmax(grid, [&](double t) { return ucc_case2(t, 0.005, cfg); });
  CHECK(best == doctest::Approx(0.1).epsilon(1e-3));
  CHECK(ucc_case2(1e-12, 0.005, cfg) < 1e-9);
  CHECK(ucc_case2(1e12, 0.005, cfg) < 1e-9);
}

TEST_CASE("case III closed-form optimum") {
  CHECK(optimal_tcm_case3(0.5, config(100, 1.5)).t_cm == doctest::Approx(std::sqrt(75.0)));
  CHECK(optimal_tcm_case3(0.005, config(100, 1.5)).t_cm == doctest::Approx(std::sqrt(0.75)));
  CHECK_FALSE(optimal_tcm_case3(0.5, config(100, 1.5)).degenerate);
  const auto d = optimal_tcm_case3(0.5, config(1, 0.5));
  CHECK(d.degenerate);
  CHECK(d.t_cm == doctest::Approx(0.5));
  CHECK(ucc_case3(1e-12, 0.5, config(100, 1.5)) < 1e-9);
  CHECK(ucc_case3(1e12, 0.5, config(100, 1.5)) < 1e-9);
}

TEST_CASE("closed-form optima dominate every grid point") {
  const auto grid = oracles::log_grid(1e-4, 1e3, 10000);
  for (int i = 0; i < 20; ++i) {
    const double t_cp = 1e-3 * std::pow(1e3, i / 19.0);
    for (int j = 0; j < 20; ++j) {
      const auto n = static_cast<std::size_t>(1 + j * 10);
      for (double c0 : {0.1, 0.5, 1.0, 1.5, 3.0}) {
        const auto cfg = config(n, c0);
        const double u2 = ucc_case2(optimal_tcm_case2(t_cp, cfg), t_cp, cfg);
        const double u3 = ucc_case3(optimal_tcm_case3(t_cp, cfg).t_cm, t_cp, cfg);
        for (std::size_t g = 0; g < grid.size(); g += 7) {
          REQUIRE(u2 >= ucc_case2(grid[g], t_cp, cfg) * (1.0 - 1e-12));
          REQUIRE(u3 >= ucc_case3(grid[g], t_cp, cfg) * (1.0 - 1e-12));
        }
      }
    }
  }
}

TEST_CASE("slot length follows the policy") {
  auto cfg = config(100, 1.5);
  CHECK(slot_length(2.0, 0.5, cfg) == doctest::Approx(152.0));
  cfg.slot_policy = SlotPolicy::AdaptiveSlot;
  CHECK(slot_length(2.0, 0.5, cfg) == doctest::Approx(1.5 + 2.0 + 50.0));
}

TEST_CASE("weighted packing objective") {
  TaskProfile empty{0, 1.0, 0.5, 0.5, {}};
  const std::vector<TaskProfile> single{empty};
  CHECK(weighted_objective(single, config(1, 1.0, 1.0, 4), 2.0) == 0.0);

  TaskProfile a{0, 1.0, 0.5, 0.25, {0, 1, 2, 3}};
  TaskProfile b{1, 1.0, 0.5, 0.25, {4, 5, 6, 7}};
  const double w = packing_weight(a, 8, 1.0);
  CHECK(w == doctest::Approx(1.0 / 8.0 / (4.0 + 2.0)));
  const std::vector<TaskProfile> pair{a, b};
  CHECK(weighted_objective(pair, config(2, 1.0, 1.0, 8), 1.0) == doctest::Approx(8.0 * w));

  RngStream rng(4);
  for (int i = 0; i < 1000; ++i) {
    TaskProfile t{0, 1.0, 1e-3 + rng.uniform(), 1e-3 + rng.uniform(), {}};
    const double t_p = t.t_cm + t.t_cp + rng.uniform();
    CHECK(packing_weight(t, 1, t_p) < 1.0);
  }
  TaskProfile zero{0, 1.0, 0.0, 0.5, {}};
  CHECK_THROWS_AS(packing_weight(zero, 4, 1.0), ValidationError);
}

TEST_CASE("equal RB split reaches the brute-force packing optimum for homogeneous tasks") {
  for (std::size_t n = 1; n <= 4; ++n) {
    for (std::size_t k = n; k <= 8; ++k) {
      if (k == n + 1) continue;  // c = 1 is inadmissible when K - N = 1
      const double t_p = 3.0;
      std::vector<TaskProfile> tasks(n, TaskProfile{0, 1.0, 0.7, 0.4, {}});
      const auto cfg = config(n, 1.0, 1.0, k);
      const auto alloc = allocate_rbs_equal(cfg);
      for (std::size_t i = 0; i < n; ++i) tasks[i].rb_set = alloc.rbs_of(i);
      CHECK(weighted_objective(tasks, cfg, t_p) ==
            doctest::Approx(oracles::rb_packing_bruteforce(tasks, k, t_p)).epsilon(1e-12));
    }
  }
}

TEST_CASE("equal RB allocation partitions the pool") {
  const auto eq = allocate_rbs_equal(config(8, 1.0, 1.0, 8));
  for (std::size_t i = 0; i < 8; ++i) CHECK(eq.rb_count(i) == 1);
  CHECK(eq.is_partition_of(8));

  const auto t2 = allocate_rbs_equal(config(100, 1.5, 1.0, 200));
  CHECK(t2.is_partition_of(200));
  for (std::size_t i = 0; i < 100; ++i) CHECK(t2.rb_count(i) == 2);

  const auto uneven = allocate_rbs_equal(config(7, 1.0, 1.0, 30));
  CHECK(uneven.is_partition_of(30));
  for (std::size_t i = 0; i < 7; ++i) {
    CHECK(uneven.rb_count(i) == (i < 5 ? 4u : 5u));
  }
}

TEST_CASE("gaussian traffic scaling") {
  const auto id = expected_times_gaussian({1.0, 0.7, 2.0, 0.5});
  CHECK(id.t_cm == 2.0);
  CHECK(id.t_cp == 0.5);
  const auto e = expected_times_gaussian({3.0, 0.1, 2.0, 0.5});
  CHECK(e.t_cm == doctest::Approx(6.0));
  CHECK(e.t_cp == doctest::Approx(1.5));
  CHECK_THROWS_AS(expected_times_gaussian({0.0, 0.1, 2.0, 0.5}), ValidationError);

  RngStream rng(77);
  const auto draws = sample_scaled_times({3.0, 0.5, 2.0, 0.5}, 1'000'000, rng);
  double sum_cm = 0.0, sum_cp = 0.0;
  for (const auto& d : draws) {
    sum_cm += d.t_cm;
    sum_cp += d.t_cp;
  }
  CHECK(sum_cm / 1e6 == doctest::Approx(6.0).epsilon(0.01));
  CHECK(sum_cp / 1e6 == doctest::Approx(1.5).epsilon(0.01));
}

}
