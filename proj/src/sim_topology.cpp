/*
 * SPDX-License-Identifier: Apache-2.0
 */
#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "cecbench/error.hpp"
#include "cecbench/sim.hpp"
#include "sim_internal.hpp"

namespace cecbench::sim {

Topology Topology::clustered(const protocols::NetworkShape& shape) {
  shape.validate();
  Topology t;
  const std::size_t n_s = shape.n_relays;
  const std::size_t n_v = shape.n_sensors;
  NodeId next = kEdgeServer + 1;
  t.clusters.resize(n_s);
  for (auto& c : t.clusters) c.relay = next++;
  for (std::size_t i = 0; i < n_v; ++i) t.sensors.push_back(next++);
  const std::size_t base = n_v / n_s;
  const std::size_t extra = n_v % n_s;
  std::size_t s = 0;
  for (std::size_t i = 0; i < n_s; ++i) {
    const std::size_t size = base + (i < extra ? 1 : 0);
    for (std::size_t j = 0; j < size; ++j) t.clusters[i].members.push_back(t.sensors[s++]);
  }
  return t;
}

Topology Topology::star(std::size_t n_nodes) {
  cecbench::detail::require(n_nodes >= 1, "n_nodes", "must be at least 1");
  Topology t;
  for (std::size_t i = 0; i < n_nodes; ++i) t.sensors.push_back(static_cast<NodeId>(kEdgeServer + 1 + i));
  return t;
}

std::vector<NodeId> Topology::field_nodes() const {
  std::vector<NodeId> out = sensors;
  for (const auto& c : clusters) out.push_back(c.relay);
  return out;
}

void Topology::validate() const {
  cecbench::detail::require(!sensors.empty() || !clusters.empty(), "topology", "has no field nodes");
  cecbench::detail::require(std::isfinite(c_to_m_latency) && c_to_m_latency >= 0.0, "c_to_m_latency",
                            "must be non-negative");
  std::unordered_set<NodeId> seen;
  for (NodeId s : sensors) {
    cecbench::detail::require(s > kEdgeServer, "sensors", "ids 0 and 1 are reserved for C and M");
    cecbench::detail::require(seen.insert(s).second, "sensors", "duplicate sensor id");
  }
  std::unordered_set<NodeId> covered;
  for (const auto& c : clusters) {
    cecbench::detail::require(c.relay > kEdgeServer, "relays", "ids 0 and 1 are reserved for C and M");
    cecbench::detail::require(seen.insert(c.relay).second, "relays", "relay id collides with another node");
    for (NodeId m : c.members) {
      cecbench::detail::require(std::find(sensors.begin(), sensors.end(), m) != sensors.end(), "clusters",
                                "member is not a sensor");
      cecbench::detail::require(covered.insert(m).second, "clusters", "sensor belongs to two relays");
    }
  }
  if (!clusters.empty())
    cecbench::detail::require(covered.size() == sensors.size(), "clusters", "every sensor needs a relay");
}

void FlowSpec::validate() const {
  cecbench::detail::require(packets_required >= 1, "packets_required", "must be at least 1");
  cecbench::detail::require(sources.size() == packets_required, "sources", "one source per required packet");
  cecbench::detail::require(epsilon > 0.0 && epsilon <= 1.0, "epsilon", "must lie in (0, 1]");
  cecbench::detail::require(fdd_required >= 1 && fdd_required <= packets_required, "fdd_required",
                            "must lie in [1, packets_required]");
  cecbench::detail::require(std::isfinite(deadline) && deadline >= 0.0, "deadline", "must be non-negative");
}

std::vector<FlowSpec> make_flows(const Topology& topo, std::size_t n_tasks, double epsilon, Seconds deadline) {
  topo.validate();
  cecbench::detail::require(n_tasks >= 1, "n_tasks", "must be at least 1");
  std::vector<FlowSpec> flows(n_tasks);
  const auto nodes = topo.field_nodes();
  for (std::size_t i = 0; i < n_tasks; ++i) {
    FlowSpec& f = flows[i];
    f.task_id = i;
    f.sources = nodes;
    f.packets_required = nodes.size();
    f.epsilon = epsilon;
    f.deadline = deadline;
    f.fdd_required = 1;
    f.validate();
    f.fdd_required = detail::required_packets(f);
  }
  return flows;
}

std::string_view event_name(EventType t) noexcept {
  switch (t) {
    case EventType::Report: return "report";
    case EventType::Inform: return "inform";
    case EventType::Transmit: return "transmit";
    case EventType::Ack: return "ack";
    case EventType::Nack: return "nack";
    case EventType::RelayCache: return "relay-cache";
    case EventType::Retransmit: return "retransmit";
    case EventType::FddDispatch: return "fdd-dispatch";
  }
  return "unknown";
}

std::string_view outcome_name(Outcome o) noexcept {
  switch (o) {
    case Outcome::Ok: return "ok";
    case Outcome::Lost: return "lost";
    case Outcome::Timeout: return "timeout";
    case Outcome::Expired: return "expired";
  }
  return "unknown";
}

bool SimTrace::any_comm_failure() const noexcept {
  return control_failure || std::any_of(tasks.begin(), tasks.end(), [](const TaskRecord& t) { return t.comm_failure; });
}

double binomial_ci_halfwidth(double p, std::size_t n) noexcept {
  if (n == 0) return 1.0;
  return kZ99 * std::sqrt(std::max(0.0, p * (1.0 - p)) / static_cast<double>(n));
}

namespace detail {

void validate_inputs(const Topology& topo, const std::vector<FlowSpec>& flows, const ChannelParams& chan,
                     const SimOptions& opts) {
  topo.validate();
  chan.validate();
  cecbench::detail::require(!flows.empty(), "flows", "must not be empty");
  for (const auto& f : flows) f.validate();
  cecbench::detail::require(opts.p_timeout >= 0.0 && opts.p_timeout <= 1.0, "p_timeout", "must lie in [0, 1]");
  cecbench::detail::require(opts.packet_bits > 0.0, "packet_bits", "must be positive");
  cecbench::detail::require(opts.relay_window >= 0.0, "relay_window", "must be non-negative");
  cecbench::detail::require(opts.max_attempts >= 1, "max_attempts", "must be at least 1");
  cecbench::detail::require(opts.queue_delay >= 0.0 && opts.feedback_delay >= 0.0, "delay", "must be non-negative");
  if (opts.link_rate_bps)
    cecbench::detail::require(*opts.link_rate_bps > 0.0, "link_rate_bps", "must be positive");
}

void close_task(TaskRecord& rec, const std::vector<std::uint8_t>& delivered, const std::vector<std::uint8_t>& cached) {
  rec.delivered = rec.lost = rec.in_flight = 0;
  for (std::size_t p = 0; p < delivered.size(); ++p) {
    if (delivered[p])
      ++rec.delivered;
    else if (cached[p])
      ++rec.in_flight;
  }
  // Packets that never left their source (e.g. after a failed control
  // exchange) are neither lost nor in flight.
  const std::size_t reached = rec.delivered + rec.in_flight;
  rec.lost = rec.sent > reached ? rec.sent - reached : 0;
  rec.task_failure = rec.comm_failure || rec.delivered < rec.fdd_required;
}

}  // namespace detail
}  // namespace cecbench::sim
