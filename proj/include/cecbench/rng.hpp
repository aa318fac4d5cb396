/*
 * SPDX-License-Identifier: Apache-2.0
 */
#pragma once

#include <cstdint>
#include <limits>

namespace cecbench {

// Counter-based generator: output k of stream (seed, stream_id) is a pure
// function of (seed, stream_id, k). Child streams derived with split() are
// independent of the parent and of each other, so every link or run can own
// its stream without coordination.
class RngStream {
 public:
  using result_type = std::uint64_t;

  explicit RngStream(std::uint64_t seed, std::uint64_t stream_id = 0) noexcept;

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept;

  // Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept;
  // Exponential with unit mean.
  double exponential() noexcept;
  // Standard normal (Box-Muller, no cached second variate).
  double normal() noexcept;
  bool bernoulli(double p) noexcept { return uniform() < p; }

  RngStream split(std::uint64_t child) const noexcept;

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream_id() const noexcept { return stream_id_; }
  std::uint64_t counter() const noexcept { return counter_; }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

// Deterministic seed for sweep point `index` of job `tag` under `master`.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t tag, std::uint64_t index) noexcept;

}  // namespace cecbench
