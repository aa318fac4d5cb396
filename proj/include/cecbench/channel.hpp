/*
 * SPDX-License-Identifier: Apache-2.0
 */
#pragma once

#include <cstddef>
#include <cstdint>

#include "cecbench/rng.hpp"

namespace cecbench {

// Link parameters for the Rayleigh block-fading outage model. SNR is carried in
// dB at every interface and converted to linear power internally.
struct ChannelParams {
  double snr_db = 40.0;
  double bandwidth_hz = 20e6;
  double rate_bps = 200e3;

  void validate() const;
  double snr_linear() const noexcept;
  double spectral_efficiency() const noexcept { return rate_bps / bandwidth_hz; }
  ChannelParams with_rate(double rate) const noexcept {
    ChannelParams c = *this;
    c.rate_bps = rate;
    return c;
  }
  ChannelParams with_snr_db(double snr) const noexcept {
    ChannelParams c = *this;
    c.snr_db = snr;
    return c;
  }
};

double db_to_linear(double db) noexcept;

// Outage probability P(W log2(1 + SNR |h|^2) < R) for |h|^2 ~ Exp(1):
//   1 - exp(-(2^(R/W) - 1) / SNR).
double outage_probability(const ChannelParams& params);

// Fade level below which the link is in outage: (2^(R/W) - 1) / SNR.
// outage_probability() equals P(|h|^2 < outage_fade_threshold()).
double outage_fade_threshold(const ChannelParams& params);

struct LinkSample {
  double fade_power = 0.0;
  // Identifies the draw: the stream's id and its counter after sampling.
  std::uint64_t stream_id = 0;
  std::uint64_t draw_index = 0;
};

LinkSample sample_fade(RngStream& rng) noexcept;

// True when a transmission at params.rate_bps survives the sampled fade.
bool link_succeeds(const ChannelParams& params, double fade_power);

struct OutageEstimate {
  double probability = 0.0;
  double std_error = 0.0;
  std::size_t samples = 0;
};

// Monte-Carlo frequency of outage over `samples` independent fades.
OutageEstimate empirical_outage(const ChannelParams& params, std::size_t samples, RngStream& rng);

}  // namespace cecbench
