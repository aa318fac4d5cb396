/*
 * SPDX-License-Identifier: Apache-2.0
 */
#include "cecbench/channel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "cecbench/error.hpp"
#include "cecbench/kernels.hpp"

namespace cecbench {

void ChannelParams::validate() const {
  detail::require(std::isfinite(snr_db), "snr_db", "must be finite");
  detail::require(std::isfinite(bandwidth_hz) && bandwidth_hz > 0.0, "bandwidth_hz", "must be positive");
  detail::require(std::isfinite(rate_bps) && rate_bps > 0.0, "rate_bps", "must be positive");
}

double db_to_linear(double db) noexcept { return std::pow(10.0, db / 10.0); }

double ChannelParams::snr_linear() const noexcept { return db_to_linear(snr_db); }

double outage_fade_threshold(const ChannelParams& params) {
  params.validate();
  return std::expm1(params.spectral_efficiency() * std::numbers::ln2) / params.snr_linear();
}

double outage_probability(const ChannelParams& params) {
  const double threshold = outage_fade_threshold(params);
  // -expm1(-x) keeps precision when the outage is tiny.
  return std::clamp(-std::expm1(-threshold), 0.0, 1.0);
}

LinkSample sample_fade(RngStream& rng) noexcept {
  LinkSample s;
  s.fade_power = rng.exponential();
  s.stream_id = rng.stream_id();
  s.draw_index = rng.counter();
  return s;
}

bool link_succeeds(const ChannelParams& params, double fade_power) {
  return !(fade_power < outage_fade_threshold(params));
}

OutageEstimate empirical_outage(const ChannelParams& params, std::size_t samples, RngStream& rng) {
  const double threshold = outage_fade_threshold(params);
  constexpr std::size_t kBatch = 1 << 14;
  std::vector<double> buffer(std::min(samples, kBatch));
  std::size_t hits = 0;
  for (std::size_t done = 0; done < samples;) {
    const std::size_t n = std::min(kBatch, samples - done);
    for (std::size_t i = 0; i < n; ++i) buffer[i] = rng.exponential();
    hits += kernels::count_below(std::span<const double>(buffer.data(), n), threshold);
    done += n;
  }
  OutageEstimate est;
  est.samples = samples;
  if (samples == 0) return est;
  est.probability = static_cast<double>(hits) / static_cast<double>(samples);
  est.std_error = std::sqrt(est.probability * (1.0 - est.probability) / static_cast<double>(samples));
  return est;
}

}  // namespace cecbench
