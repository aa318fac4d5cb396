#include <cmath>
#include <cstdlib>
#include <cstring>
#include <string>
#include <vector>

#include "cecbench/kernels.hpp"
#include "cecbench/rng.hpp"
#include "doctest.h"

using namespace cecbench;

TEST_SUITE("kernels") {

TEST_CASE("the scalar path can be forced from the environment") {
  const char* force = std::getenv("CECBENCH_FORCE_SCALAR");
  if (force && std::string(force) == "1") CHECK(kernels::active_isa() == kernels::Isa::Scalar);
  else if (kernels::avx2_supported()) CHECK(kernels::active_isa() == kernels::Isa::Avx2);
}

TEST_CASE("count_below matches a direct count for every tail length") {
  RngStream rng(11);
  for (std::size_t n = 0; n <= 37; ++n) {
    std::vector<double> v(n);
    for (auto& x : v) x = rng.exponential();
    const double threshold = 0.7;
    std::size_t expected = 0;
    for (double x : v) expected += x < threshold;
    CHECK(kernels::scalar::count_below(v, threshold) == expected);
    CHECK(kernels::count_below(v, threshold) == expected);
    if (kernels::avx2_supported()) CHECK(kernels::avx2::count_below(v, threshold) == expected);
  }
}

TEST_CASE("count_below treats the threshold as exclusive and NaN as not below") {
  std::vector<double> v{1.0, 1.0, 0.5, std::nan(""), 2.0};
  CHECK(kernels::scalar::count_below(v, 1.0) == 1);
  if (kernels::avx2_supported()) CHECK(kernels::avx2::count_below(v, 1.0) == 1);
}

TEST_CASE("harq decode rounds agree bitwise between scalar and avx2") {
  RngStream rng(5);
  for (std::size_t trials : {0u, 1u, 3u, 4u, 5u, 17u, 33u, 37u, 1000u}) {
    const std::size_t rounds = 7;
    const std::size_t branches = 2;
    std::vector<double> fades(rounds * branches * trials);
    for (auto& f : fades) f = rng.exponential();
    kernels::HarqBatch batch{fades, trials, rounds, branches, 0.01, std::exp2(0.01 * 2 * 250)};
    std::vector<std::uint8_t> a(trials), b(trials);
    kernels::scalar::harq_decode_rounds(batch, a);
    if (kernels::avx2_supported()) {
      kernels::avx2::harq_decode_rounds(batch, b);
      CHECK(a == b);
    }
    kernels::harq_decode_rounds(batch, b);
    CHECK(a == b);
  }
}

TEST_CASE("harq decode rounds follow the accumulated mutual information test") {
  RngStream rng(9);
  const std::size_t trials = 500, rounds = 4, branches = 2;
  std::vector<double> fades(rounds * branches * trials);
  for (auto& f : fades) f = rng.exponential();
  const double snr = 3.0;
  const double info_needed = 6.0;  // bits per channel use over all rounds
  kernels::HarqBatch batch{fades, trials, rounds, branches, snr, std::exp2(info_needed)};
  std::vector<std::uint8_t> out(trials);
  kernels::harq_decode_rounds(batch, out);
  for (std::size_t t = 0; t < trials; ++t) {
    double info = 0.0;
    std::size_t expected = rounds + 1;
    for (std::size_t q = 0; q < rounds && expected > rounds; ++q) {
      for (std::size_t l = 0; l < branches; ++l) info += std::log2(1.0 + snr * fades[(q * branches + l) * trials + t]);
      if (info > info_needed + 1e-9) expected = q + 1;
      else if (info > info_needed - 1e-9) expected = 0;  // too close to call
    }
    if (expected != 0) CHECK(out[t] == expected);
  }
}

TEST_CASE("rational curve evaluation is bitwise identical across paths") {
  kernels::RationalCurve curve{0.75, 0.5, 150.0};
  for (std::size_t n = 0; n <= 37; ++n) {
    std::vector<double> t(n);
    for (std::size_t i = 0; i < n; ++i) t[i] = 0.01 + 0.37 * static_cast<double>(i);
    std::vector<double> a(n), b(n);
    kernels::scalar::eval_rational_curve(curve, t, a);
    for (std::size_t i = 0; i < n; ++i) {
      CHECK(a[i] == doctest::Approx(0.75 * t[i] / ((t[i] + 0.5) * (150.0 + t[i]))).epsilon(1e-15));
    }
    if (kernels::avx2_supported()) {
      kernels::avx2::eval_rational_curve(curve, t, b);
      CHECK(std::memcmp(a.data(), b.data(), n * sizeof(double)) == 0);
    }
  }
}

TEST_CASE("argmax of the rational curve sits at sqrt(a b)") {
  kernels::RationalCurve curve{1.0, 0.5, 150.0};
  std::vector<double> grid(20001);
  for (std::size_t i = 0; i < grid.size(); ++i) grid[i] = 1e-3 * std::pow(1e7, static_cast<double>(i) / 20000.0);
  const auto idx = kernels::argmax_rational_curve(curve, grid);
  CHECK(grid[idx] == doctest::Approx(std::sqrt(75.0)).epsilon(1e-3));
  CHECK(kernels::argmax_rational_curve(curve, std::span<const double>{}) == 0);
}

TEST_CASE("argmax breaks ties toward the lowest index") {
  kernels::RationalCurve curve{1.0, 1.0, 1.0};
  std::vector<double> grid{0.5, 1.0, 1.0, 2.0};
  CHECK(kernels::argmax_rational_curve(curve, grid) == 1);
}

}
