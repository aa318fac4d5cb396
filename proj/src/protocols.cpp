/*
 * SPDX-License-Identifier: Apache-2.0
 */
#include "cecbench/protocols.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <vector>

#include "cecbench/error.hpp"
#include "cecbench/kernels.hpp"

namespace cecbench::protocols {

namespace {

constexpr std::array<std::pair<Protocol, std::string_view>, 4> kNames{{
    {Protocol::SelectiveRepeatArq, "srarq"},
    {Protocol::Harq, "harq"},
    {Protocol::OccupyCow, "occupycow"},
    {Protocol::ReFlexUp, "reflexup"},
}};

void require_probability(double p, const char* field) {
  detail::require(std::isfinite(p) && p >= 0.0 && p <= 1.0, field, "must lie in [0, 1]");
}

double link_failure(double p_timeout, double p_link) { return p_timeout + (1.0 - p_timeout) * p_link; }

// Expected airtime multiplier when every lost packet is resent together with
// its cached predecessor: 1 + 2 P / (1 - P).
double bundle_resend_factor(double p) {
  if (p >= 1.0) return std::numeric_limits<double>::infinity();
  return 1.0 + 2.0 * p / (1.0 - p);
}

}  // namespace

std::string_view protocol_name(Protocol p) noexcept {
  for (const auto& [proto, name] : kNames)
    if (proto == p) return name;
  return "unknown";
}

std::optional<Protocol> parse_protocol(std::string_view name) noexcept {
  for (const auto& [proto, canonical] : kNames)
    if (canonical == name) return proto;
  return std::nullopt;
}

NetworkShape NetworkShape::from_relay_ratio(std::size_t n_total, double relay_ratio, double packet_bits) {
  detail::require(n_total >= 2, "n_total", "needs at least one relay and one sensor");
  detail::require(std::isfinite(relay_ratio) && relay_ratio > 0.0, "relay_ratio", "must be positive");
  NetworkShape s;
  s.n_total = n_total;
  const double relays = std::round(static_cast<double>(n_total) * relay_ratio / (1.0 + relay_ratio));
  s.n_relays = std::clamp<std::size_t>(static_cast<std::size_t>(relays), 1, n_total - 1);
  s.n_sensors = n_total - s.n_relays;
  s.relay_fanout = (s.n_sensors + s.n_relays - 1) / s.n_relays;
  s.packet_bits = packet_bits;
  s.payload_bits_per_node = packet_bits;
  s.validate();
  return s;
}

void NetworkShape::validate() const {
  detail::require(n_total == n_sensors + n_relays, "n_total", "must equal n_sensors + n_relays");
  detail::require(n_relays >= 1, "n_relays", "must be at least 1");
  detail::require(relay_fanout * n_relays >= n_sensors, "relay_fanout", "relays cannot cover every sensor");
  detail::require(std::isfinite(packet_bits) && packet_bits > 0.0, "packet_bits", "must be positive");
  detail::require(std::isfinite(payload_bits_per_node) && payload_bits_per_node > 0.0, "payload_bits_per_node",
                  "must be positive");
}

Seconds srarq_latency(const NetworkShape& shape, const ChannelParams& chan) {
  shape.validate();
  const double p_l = outage_probability(chan);
  return static_cast<double>(shape.n_sensors) * shape.packet_bits * (3.0 - 2.0 * p_l) / chan.rate_bps;
}

double srarq_pfail(double p_timeout, double p_error) {
  require_probability(p_timeout, "p_timeout");
  require_probability(p_error, "p_error");
  return std::clamp(link_failure(p_timeout, p_error), 0.0, 1.0);
}

void HarqParams::validate() const {
  detail::require(max_rounds >= 1, "max_rounds", "Q must be at least 1");
  detail::require(max_rounds < 255, "max_rounds", "Q must be below 255");
  detail::require(diversity >= 1, "diversity", "L must be at least 1");
  detail::require(std::isfinite(rounds_estimate) && rounds_estimate >= 1.0 &&
                      rounds_estimate <= static_cast<double>(max_rounds),
                  "rounds_estimate", "d-hat must lie in [1, Q]");
}

HarqMonteCarlo harq_monte_carlo(const ChannelParams& chan, const HarqParams& params, std::size_t trials,
                                RngStream& rng) {
  chan.validate();
  params.validate();
  detail::require(trials >= kMinMonteCarloTrials, "trials", "needs at least 1e4 trials");

  constexpr std::size_t kBatch = 4096;
  const std::size_t q = params.max_rounds;
  const std::size_t l = params.diversity;
  kernels::HarqBatch batch;
  batch.rounds = q;
  batch.branches = l;
  batch.snr_linear = chan.snr_linear();
  batch.decode_threshold = std::exp2(chan.spectral_efficiency() * static_cast<double>(l));

  std::vector<double> fades(kBatch * q * l);
  std::vector<std::uint8_t> rounds(kBatch);
  std::size_t failures = 0;
  double sum = 0.0;
  double sum_sq = 0.0;
  for (std::size_t done = 0; done < trials;) {
    const std::size_t n = std::min(kBatch, trials - done);
    for (std::size_t row = 0; row < q * l; ++row)
      for (std::size_t t = 0; t < n; ++t) fades[row * n + t] = rng.exponential();
    batch.fades = std::span<const double>(fades.data(), n * q * l);
    batch.trials = n;
    kernels::harq_decode_rounds(batch, std::span<std::uint8_t>(rounds.data(), n));
    for (std::size_t t = 0; t < n; ++t) {
      const std::size_t r = rounds[t];
      if (r > q) ++failures;
      const double capped = static_cast<double>(std::min(r, q));
      sum += capped;
      sum_sq += capped * capped;
    }
    done += n;
  }

  const double n = static_cast<double>(trials);
  HarqMonteCarlo out;
  out.p_fail.value = static_cast<double>(failures) / n;
  out.p_fail.std_error = std::sqrt(out.p_fail.value * (1.0 - out.p_fail.value) / n);
  out.p_fail.trials = trials;
  out.rounds.value = sum / n;
  const double var = std::max(0.0, sum_sq / n - out.rounds.value * out.rounds.value);
  out.rounds.std_error = std::sqrt(var / n);
  out.rounds.trials = trials;
  return out;
}

Estimate harq_pfail(const ChannelParams& chan, const HarqParams& params, std::size_t trials, RngStream& rng) {
  return harq_monte_carlo(chan, params, trials, rng).p_fail;
}

Estimate harq_expected_rounds(const ChannelParams& chan, const HarqParams& params, std::size_t trials,
                              RngStream& rng) {
  return harq_monte_carlo(chan, params, trials, rng).rounds;
}

Seconds harq_latency(const NetworkShape& shape, const ChannelParams& chan, double d_hat) {
  shape.validate();
  chan.validate();
  detail::require(std::isfinite(d_hat) && d_hat >= 1.0, "d_hat", "must be at least 1");
  return d_hat * static_cast<double>(shape.n_total) * shape.packet_bits / chan.rate_bps;
}

void OccupyCowParams::validate() const {
  require_probability(p1, "p1");
  require_probability(p2, "p2");
  require_probability(p12, "p12");
  detail::require(std::isfinite(t1) && t1 > 0.0, "t1", "must be positive");
  detail::require(std::isfinite(t2) && t2 > 0.0, "t2", "must be positive");
}

OccupyCowParams occupycow_phase_probs(const NetworkShape& shape, const ChannelParams& chan, Seconds t1, Seconds t2) {
  shape.validate();
  detail::require(std::isfinite(t1) && t1 > 0.0, "t1", "must be positive");
  detail::require(std::isfinite(t2) && t2 > 0.0, "t2", "must be positive");
  const double bits = static_cast<double>(shape.n_sensors) * (shape.packet_bits + 1.0);
  OccupyCowParams p;
  p.t1 = t1;
  p.t2 = t2;
  p.p1 = outage_probability(chan.with_rate(bits / t1));
  p.p2 = outage_probability(chan.with_rate(bits / t2));
  p.p12 = p.p2 > 0.0 ? std::min(p.p1 / p.p2, 1.0) : 1.0;
  return p;
}

OccupyCowParams occupycow_default_phases(const NetworkShape& shape, const ChannelParams& chan, double phase1_share) {
  detail::require(phase1_share > 0.0 && phase1_share < 1.0, "phase1_share", "must lie in (0, 1)");
  shape.validate();
  chan.validate();
  const double total = 2.0 * static_cast<double>(shape.n_sensors) * (shape.packet_bits + 1.0) / chan.rate_bps;
  return occupycow_phase_probs(shape, chan, phase1_share * total, (1.0 - phase1_share) * total);
}

double occupycow_pfail(std::size_t n_nodes, const OccupyCowParams& params) {
  detail::require(n_nodes >= 2, "n_total", "needs at least two nodes");
  params.validate();
  const double n = static_cast<double>(n_nodes);
  const double log_p1 = std::log(params.p1);
  const double log_q1 = std::log1p(-params.p1);
  const double log_rescue = std::log1p(-params.p12);
  const double lg_n1 = std::lgamma(n + 1.0);
  double total = 0.0;
  for (std::size_t a = 1; a < n_nodes; ++a) {
    const double ad = static_cast<double>(a);
    const double rest = n - ad;
    const double log_term = lg_n1 - std::lgamma(ad + 1.0) - std::lgamma(rest + 1.0) + ad * log_q1 + rest * log_p1;
    if (log_term == -std::numeric_limits<double>::infinity()) continue;
    total += std::exp(log_term) * -std::expm1(rest * log_rescue);
  }
  total += std::exp(n * log_p1);
  return std::clamp(total, 0.0, 1.0);
}

double occupycow_pfail(const NetworkShape& shape, const OccupyCowParams& params) {
  shape.validate();
  return occupycow_pfail(shape.n_total, params);
}

Seconds default_relay_window(const NetworkShape& shape, const ChannelParams& chan) {
  shape.validate();
  chan.validate();
  return shape.packet_bits / chan.bandwidth_hz;
}

ReflexUpParams default_reflexup_params(const NetworkShape& shape, const ChannelParams& chan) {
  ReflexUpParams p;
  p.relay_window = default_relay_window(shape, chan);
  return p;
}

double reflexup_link_rate(const NetworkShape& shape, Seconds relay_window) {
  shape.validate();
  detail::require(std::isfinite(relay_window) && relay_window > 0.0, "relay_window", "must be positive");
  return shape.packet_bits * static_cast<double>(shape.relay_fanout + 1) / relay_window;
}

ReflexUpFailure reflexup_failure(const NetworkShape& shape, const ChannelParams& chan, const ReflexUpParams& params) {
  chan.validate();
  require_probability(params.p_timeout, "p_timeout");
  const double rate = reflexup_link_rate(shape, params.relay_window);
  const ChannelParams relay_hop = chan.with_rate(rate);
  const ChannelParams local_hop = params.local_snr_db ? relay_hop.with_snr_db(*params.local_snr_db) : relay_hop;
  ReflexUpFailure f;
  f.link_phase1 = outage_probability(local_hop);
  f.link_phase2 = outage_probability(relay_hop);
  f.phase1 = link_failure(params.p_timeout, f.link_phase1);
  f.phase2 = link_failure(params.p_timeout, f.link_phase2);
  f.p_fail = std::clamp(1.0 - (1.0 - f.phase1) * (1.0 - f.phase2), 0.0, 1.0);
  return f;
}

double reflexup_pfail(const NetworkShape& shape, const ChannelParams& chan, const ReflexUpParams& params) {
  return reflexup_failure(shape, chan, params).p_fail;
}

double reflexup_pfail(const NetworkShape& shape, const ChannelParams& chan, Seconds t_vs) {
  ReflexUpParams p;
  p.relay_window = t_vs;
  return reflexup_pfail(shape, chan, p);
}

ReflexUpLatency reflexup_latency(const NetworkShape& shape, const ChannelParams& chan, const cec::CecConfig& cfg,
                                 Seconds t_cp, const ReflexUpParams& params) {
  cfg.validate();
  detail::require(std::isfinite(t_cp) && t_cp > 0.0, "t_cp", "must be positive");
  const ReflexUpFailure f = reflexup_failure(shape, chan, params);
  const double rate = reflexup_link_rate(shape, params.relay_window);
  const double m = shape.packet_bits;
  const double phase1 = static_cast<double>(shape.n_sensors) * m / rate * bundle_resend_factor(f.phase1);
  const double phase2 =
      static_cast<double>(shape.n_relays * (shape.relay_fanout + 1)) * m / rate * bundle_resend_factor(f.phase2);
  ReflexUpLatency out;
  out.physical = phase1 + phase2;
  out.target = cec::optimal_tcm_case3(t_cp, cfg).t_cm;
  out.target_feasible = out.physical <= out.target;
  out.t_cm = std::min(out.physical, out.target);
  return out;
}

}  // namespace cecbench::protocols
