/*
 * SPDX-License-Identifier: Apache-2.0
 */
#pragma once

#include <cstddef>
#include <optional>
#include <string_view>

#include "cecbench/cec_core.hpp"
#include "cecbench/channel.hpp"
#include "cecbench/rng.hpp"

// Latency and reliability models of the four uplink protocols.
namespace cecbench::protocols {

using Seconds = double;

enum class Protocol { SelectiveRepeatArq, Harq, OccupyCow, ReFlexUp };
enum class Method { Analytic, MonteCarlo };

std::string_view protocol_name(Protocol p) noexcept;
// Accepts the canonical names ("srarq", "harq", "occupycow", "reflexup").
std::optional<Protocol> parse_protocol(std::string_view name) noexcept;

struct NetworkShape {
  std::size_t n_total = 0;
  std::size_t n_sensors = 0;
  std::size_t n_relays = 0;
  std::size_t relay_fanout = 0;  // sensors served by the largest relay cluster
  double packet_bits = 176.0;
  double payload_bits_per_node = 176.0;

  // Splits n_total into relays and sensors so that n_relays / n_sensors is as
  // close to relay_ratio as integer counts allow (at least one relay).
  static NetworkShape from_relay_ratio(std::size_t n_total, double relay_ratio, double packet_bits);
  void validate() const;
};

struct ProtocolOutcome {
  Seconds t_cm = 0.0;
  double p_fail = 0.0;
  double p_fail_std_error = 0.0;  // zero for closed forms
  Protocol protocol = Protocol::ReFlexUp;
  Method method = Method::Analytic;
};

struct Estimate {
  double value = 0.0;
  double std_error = 0.0;
  std::size_t trials = 0;
};

inline constexpr std::size_t kMinMonteCarloTrials = 10'000;

// --- Selective Repeat ARQ -------------------------------------------------

// N_v m (3 - 2 P_l) / R, with P_l the Rayleigh outage at the nominal rate.
Seconds srarq_latency(const NetworkShape& shape, const ChannelParams& chan);
// p_a + (1 - p_a) p_b.
double srarq_pfail(double p_timeout, double p_error);

// --- HARQ -------------------------------------------------------------------

struct HarqParams {
  std::size_t max_rounds = 7;    // Q
  std::size_t diversity = 2;     // L
  double rounds_estimate = 1.0;  // d-hat, expected rounds per packet

  void validate() const;
};

struct HarqMonteCarlo {
  Estimate p_fail;
  Estimate rounds;  // capped at Q
};

// Accumulated mutual information over up to Q rounds of L independent
// Rayleigh branches; decoding fails when the total stays at or below R/W.
HarqMonteCarlo harq_monte_carlo(const ChannelParams& chan, const HarqParams& params, std::size_t trials,
                                RngStream& rng);
Estimate harq_pfail(const ChannelParams& chan, const HarqParams& params, std::size_t trials, RngStream& rng);
Estimate harq_expected_rounds(const ChannelParams& chan, const HarqParams& params, std::size_t trials,
                              RngStream& rng);
// d-hat N_G m / R.
Seconds harq_latency(const NetworkShape& shape, const ChannelParams& chan, double d_hat);

// --- Occupy CoW -------------------------------------------------------------

struct OccupyCowParams {
  double p1 = 0.0;
  double p2 = 0.0;
  double p12 = 1.0;
  Seconds t1 = 0.0;
  Seconds t2 = 0.0;

  void validate() const;
};

// Phase failure probabilities at the rate n_v (m + 1) / T_phase, normalized by
// W like every other outage term; p12 = min(p1 / p2, 1), or 1 when p2 = 0.
OccupyCowParams occupycow_phase_probs(const NetworkShape& shape, const ChannelParams& chan, Seconds t1, Seconds t2);

// Default schedule: each phase long enough to carry n_v (m + 1) bits at the
// nominal rate, total split between the phases by `phase1_share`.
OccupyCowParams occupycow_default_phases(const NetworkShape& shape, const ChannelParams& chan,
                                         double phase1_share = 0.5);

// Probability that the two-phase round leaves at least one of n nodes
// undelivered: a >= 1 nodes succeed in phase 1 and not every one of the n - a
// others is rescued in phase 2, or no node succeeds in phase 1 at all (no
// relay is available). Accumulated in the log domain.
double occupycow_pfail(std::size_t n_nodes, const OccupyCowParams& params);
double occupycow_pfail(const NetworkShape& shape, const OccupyCowParams& params);

// --- ReFlexUp ---------------------------------------------------------------

struct ReflexUpParams {
  // T_{v->s}: window in which a relay moves its cluster's m (n_{i,v} + 1) bits.
  Seconds relay_window = 0.0;
  double p_timeout = 1e-4;
  // SNR of the sensor-to-relay hop; defaults to the relay-to-controller SNR.
  std::optional<double> local_snr_db;
};

// The window that spans m channel uses: T_{v->s} = m / W.
Seconds default_relay_window(const NetworkShape& shape, const ChannelParams& chan);
ReflexUpParams default_reflexup_params(const NetworkShape& shape, const ChannelParams& chan);

// Shared rate of both hops, m (n_{i,v} + 1) / T_{v->s}.
double reflexup_link_rate(const NetworkShape& shape, Seconds relay_window);

struct ReflexUpFailure {
  double link_phase1 = 0.0;  // Rayleigh outage, sensor -> relay
  double link_phase2 = 0.0;  // Rayleigh outage, relay -> controller
  double phase1 = 0.0;       // p_a + (1 - p_a) link_phase1
  double phase2 = 0.0;
  double p_fail = 0.0;       // 1 - (1 - phase1)(1 - phase2)
};

ReflexUpFailure reflexup_failure(const NetworkShape& shape, const ChannelParams& chan, const ReflexUpParams& params);
double reflexup_pfail(const NetworkShape& shape, const ChannelParams& chan, const ReflexUpParams& params);
double reflexup_pfail(const NetworkShape& shape, const ChannelParams& chan, Seconds t_vs);

struct ReflexUpLatency {
  Seconds t_cm = 0.0;      // min(physical, target)
  Seconds physical = 0.0;  // two-hop transfer with expected resend overhead
  Seconds target = 0.0;    // padded-slot optimum sqrt(N c0 T_cp)
  bool target_feasible = true;  // physical <= target at the current rate
};

ReflexUpLatency reflexup_latency(const NetworkShape& shape, const ChannelParams& chan, const cec::CecConfig& cfg,
                                 Seconds t_cp, const ReflexUpParams& params);

}  // namespace cecbench::protocols
