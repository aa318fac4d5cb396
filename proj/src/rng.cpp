/*
 * SPDX-License-Identifier: Apache-2.0
 */
#include "cecbench/rng.hpp"

#include <cmath>
#include <numbers>

namespace cecbench {
namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

// SplitMix64 finalizer.
constexpr std::uint64_t mix(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_id) noexcept
    : seed_(seed), stream_id_(stream_id), key_(mix(mix(seed + kGolden) ^ (stream_id * kGolden + 0x632BE59BD9B4E019ULL))) {}

RngStream::result_type RngStream::operator()() noexcept {
  // Two rounds so that adjacent counters decorrelate fully.
  return mix(mix(key_ + (++counter_) * kGolden) ^ key_);
}

double RngStream::uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

double RngStream::exponential() noexcept { return -std::log1p(-uniform()); }

double RngStream::normal() noexcept {
  double u1 = uniform();
  while (u1 == 0.0) u1 = uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

RngStream RngStream::split(std::uint64_t child) const noexcept {
  return RngStream(mix(key_ ^ mix(child + kGolden)), child);
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t tag, std::uint64_t index) noexcept {
  return mix(mix(master ^ mix(tag + kGolden)) + index * kGolden);
}

}  // namespace cecbench
