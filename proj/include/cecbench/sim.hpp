/*
 * SPDX-License-Identifier: Apache-2.0
 */
#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string_view>
#include <utility>
#include <vector>

#include "cecbench/cec_core.hpp"
#include "cecbench/channel.hpp"
#include "cecbench/protocols.hpp"

// Slotted simulation of one CEC loop: every task's flow collects one packet
// from each field node over Rayleigh links, tasks run in parallel on their own
// RBs, and C hands completed flows to the edge server M.
namespace cecbench::sim {

using Seconds = double;
using NodeId = std::uint32_t;
using Slot = std::uint64_t;

inline constexpr NodeId kController = 0;
inline constexpr NodeId kEdgeServer = 1;

struct RelayCluster {
  NodeId relay = 0;
  std::vector<NodeId> members;
};

struct Topology {
  std::vector<RelayCluster> clusters;  // empty: sensors talk to C directly
  std::vector<NodeId> sensors;
  Seconds c_to_m_latency = 0.0;

  // Balanced clusters: relay i serves ceil or floor of n_sensors / n_relays.
  static Topology clustered(const protocols::NetworkShape& shape);
  static Topology star(std::size_t n_nodes);

  bool is_star() const noexcept { return clusters.empty(); }
  std::size_t n_field_nodes() const noexcept { return sensors.size() + clusters.size(); }
  // Sensors followed by relays; the packet order of every flow.
  std::vector<NodeId> field_nodes() const;
  void validate() const;
};

struct FlowSpec {
  std::size_t task_id = 0;
  std::vector<NodeId> sources;
  std::size_t packets_required = 1;  // D(i)
  std::size_t fdd_required = 1;      // packets the detector needs
  double epsilon = 1.0;
  Seconds deadline = 0.0;            // T_p budget; 0 lets run_reflexup use its computed T_p

  void validate() const;
};

// One packet per field node per task; fdd_required = ceil(epsilon D).
std::vector<FlowSpec> make_flows(const Topology& topo, std::size_t n_tasks, double epsilon, Seconds deadline);

enum class EventType : std::uint8_t { Report, Inform, Transmit, Ack, Nack, RelayCache, Retransmit, FddDispatch };
enum class Outcome : std::uint8_t { Ok, Lost, Timeout, Expired };

std::string_view event_name(EventType t) noexcept;
std::string_view outcome_name(Outcome o) noexcept;

inline constexpr std::int64_t kNoPacket = -1;
inline constexpr std::uint32_t kNoTask = 0xffffffffu;

struct TraceEvent {
  Slot slot = 0;
  EventType type = EventType::Transmit;
  NodeId src = 0;
  NodeId dst = 0;
  std::uint32_t task_id = kNoTask;
  std::int64_t packet_id = kNoPacket;
  Outcome outcome = Outcome::Ok;
  // Packets carried: bundle size for retransmissions, list length for NACKs.
  std::uint32_t count = 1;
};

struct LinkStats {
  NodeId src = 0;
  NodeId dst = 0;
  std::uint64_t attempts = 0;
  std::uint64_t outages = 0;   // fade below the outage threshold
  std::uint64_t timeouts = 0;  // lost to p_timeout with a usable fade
  double outage_probability = 0.0;
};

struct TaskRecord {
  std::size_t task_id = 0;
  std::size_t packets_required = 0;
  std::size_t fdd_required = 0;
  std::size_t sent = 0;  // packets that left their source at least once
  std::size_t delivered = 0;
  std::size_t lost = 0;       // never reached C and not held by a relay
  std::size_t in_flight = 0;  // cached at a relay when the flow closed
  std::size_t transmissions = 0;
  std::size_t retransmissions = 0;
  std::size_t nack_rounds = 0;
  std::vector<std::uint8_t> first_pass_failed;  // per packet id
  Slot completion_slot = 0;
  Seconds t_cm = 0.0;
  bool dispatched = false;
  bool comm_failure = false;  // epsilon not reached within the deadline
  bool task_failure = false;  // fewer packets than the detector needs
};

struct SimTrace {
  protocols::Protocol protocol = protocols::Protocol::ReFlexUp;
  std::vector<TraceEvent> events;
  std::vector<TaskRecord> tasks;
  std::vector<LinkStats> links;
  Seconds slot_seconds = 0.0;
  Slot start_slot = 0;  // first data slot, after the control exchange
  Seconds t_p = 0.0;
  Seconds target_t_cm = 0.0;
  std::vector<std::size_t> rbs_per_task;
  bool control_failure = false;

  bool any_comm_failure() const noexcept;
};

struct SimOptions {
  double p_timeout = 1e-4;
  std::optional<double> local_snr_db;  // sensor -> relay hop
  Seconds relay_window = 0.0;          // T_{v->s}; 0 means m / W
  std::optional<double> link_rate_bps; // overrides m (n_{i,v} + 1) / T_{v->s}
  double packet_bits = 176.0;
  Seconds t_cp = 0.5;
  Seconds queue_delay = 0.0;
  Seconds feedback_delay = 0.0;
  std::size_t max_attempts = 32;  // per control message and NACK rounds per flow
  bool pace_to_target = true;
  bool record_events = true;
  // (task, packet) pairs whose first relay -> C transmission is dropped.
  std::vector<std::pair<std::size_t, std::size_t>> forced_drops;
  protocols::HarqParams harq;
  double occupy_phase1_share = 0.5;
};

SimTrace run_reflexup(const Topology& topo, const std::vector<FlowSpec>& flows, const ChannelParams& chan,
                      const cec::CecConfig& cfg, std::uint64_t seed, const SimOptions& opts = {});

SimTrace run_baseline(protocols::Protocol protocol, const Topology& topo, const std::vector<FlowSpec>& flows,
                      const ChannelParams& chan, std::uint64_t seed, const SimOptions& opts = {});

// Rebuilds the per-task schedule from a trace: T_cm from completion times,
// T_cp = t_cp_per_task unless the task misses its slot or the slot's compute
// budget is spent, then u_c, u_RB and U_cc.
cec::ScheduleResult measure_cec(const SimTrace& trace, const cec::CecConfig& cfg, Seconds t_cp_per_task);

enum class FailureMetric {
  FirstPass,      // one designated packet (or Occupy CoW round) fails its first delivery attempt
  Communication,  // some task misses epsilon within its deadline
};

struct Scenario {
  protocols::Protocol protocol = protocols::Protocol::ReFlexUp;
  protocols::NetworkShape shape;
  ChannelParams chan;
  cec::CecConfig cec;
  SimOptions options;
  FailureMetric metric = FailureMetric::FirstPass;
};

struct PfailEstimate {
  double probability = 0.0;
  double ci_halfwidth = 0.0;  // 99% normal-approximation binomial interval
  std::size_t runs = 0;
  std::size_t failures = 0;
};

inline constexpr std::size_t kMinPfailRuns = 1000;
inline constexpr double kZ99 = 2.5758293035489004;

double binomial_ci_halfwidth(double p, std::size_t n) noexcept;

PfailEstimate estimate_pfail(std::size_t runs, const Scenario& scenario, std::uint64_t seed);

// Line-delimited trace export: slot,event_type,src,dst,task_id,packet_id,outcome
void write_trace_csv(std::ostream& out, const SimTrace& trace);

}  // namespace cecbench::sim
