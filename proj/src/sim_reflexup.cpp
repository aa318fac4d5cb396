/*
 * SPDX-License-Identifier: Apache-2.0
 */
#include <algorithm>
#include <cmath>
#include <optional>
#include <tuple>

#include "cecbench/error.hpp"
#include "cecbench/sim.hpp"
#include "sim_internal.hpp"

namespace cecbench::sim {

namespace {

constexpr std::int64_t kDirect = -1;

struct NodeIndex {
  std::vector<std::int64_t> cluster;  // kDirect for star sensors
  std::vector<std::uint8_t> is_relay;
  std::vector<std::size_t> uplink;    // member -> relay, or star sensor -> C
  std::vector<std::size_t> downlink;  // C -> star sensor
  std::vector<std::size_t> relay_up;    // per cluster, relay -> C
  std::vector<std::size_t> relay_down;  // per cluster, C -> relay

  bool member(NodeId n) const { return cluster[n] != kDirect && !is_relay[n]; }
};

NodeId max_node_id(const Topology& topo) {
  NodeId top = kEdgeServer;
  for (NodeId s : topo.sensors) top = std::max(top, s);
  for (const auto& c : topo.clusters) top = std::max(top, c.relay);
  return top;
}

struct Schedule {
  std::vector<std::vector<std::size_t>> groups;  // packet ids per relay (or per star sensor)
  std::vector<std::size_t> group_of;
  std::vector<std::size_t> rank_in_group;
  std::vector<std::size_t> order;  // first-pass order, interleaved across groups
  std::size_t transmissions = 0;
};

Schedule plan_flow(const FlowSpec& f, const NodeIndex& idx, std::size_t n_clusters) {
  Schedule s;
  const std::size_t d = f.packets_required;
  s.groups.resize(n_clusters);
  s.group_of.resize(d);
  s.rank_in_group.resize(d);
  for (std::size_t p = 0; p < d; ++p) {
    const NodeId src = f.sources[p];
    std::size_t g;
    if (idx.cluster[src] == kDirect) {
      g = s.groups.size();
      s.groups.emplace_back();
    } else {
      g = static_cast<std::size_t>(idx.cluster[src]);
    }
    s.group_of[p] = g;
    s.rank_in_group[p] = s.groups[g].size();
    s.groups[g].push_back(p);
    s.transmissions += idx.member(src) ? 2 : 1;
  }
  std::size_t longest = 0;
  for (const auto& g : s.groups) longest = std::max(longest, g.size());
  s.order.reserve(d);
  for (std::size_t r = 0; r < longest; ++r)
    for (const auto& g : s.groups)
      if (r < g.size()) s.order.push_back(g[r]);
  return s;
}

bool forced(const SimOptions& opts, std::size_t task, std::size_t packet) {
  return std::find(opts.forced_drops.begin(), opts.forced_drops.end(), std::make_pair(task, packet)) !=
         opts.forced_drops.end();
}

}  // namespace

SimTrace run_reflexup(const Topology& topo, const std::vector<FlowSpec>& flows, const ChannelParams& chan,
                      const cec::CecConfig& cfg, std::uint64_t seed, const SimOptions& opts) {
  detail::validate_inputs(topo, flows, chan, opts);
  cfg.validate();
  cecbench::detail::require(flows.size() == cfg.n_tasks, "flows", "need one flow per task of the CEC configuration");
  cecbench::detail::require(opts.t_cp > 0.0, "t_cp", "must be positive");

  const double m = opts.packet_bits;
  std::size_t fanout = 0;
  for (const auto& c : topo.clusters) fanout = std::max(fanout, c.members.size());
  const Seconds window = opts.relay_window > 0.0 ? opts.relay_window : m / chan.bandwidth_hz;
  const double rate = opts.link_rate_bps.value_or(m * static_cast<double>(fanout + 1) / window);
  const ChannelParams relay_hop = chan.with_rate(rate);
  const ChannelParams local_hop = opts.local_snr_db ? relay_hop.with_snr_db(*opts.local_snr_db) : relay_hop;

  SimTrace trace;
  trace.protocol = protocols::Protocol::ReFlexUp;
  trace.slot_seconds = m / rate;
  const Seconds slot_s = trace.slot_seconds;
  detail::LinkTable links;
  detail::EventLog log(opts.record_events);
  RngStream rng(seed, 0x7265'666c'7875'70ULL);

  NodeIndex idx;
  const std::size_t id_space = static_cast<std::size_t>(max_node_id(topo)) + 1;
  idx.cluster.assign(id_space, kDirect);
  idx.is_relay.assign(id_space, 0);
  idx.uplink.assign(id_space, 0);
  idx.downlink.assign(id_space, 0);
  for (std::size_t i = 0; i < topo.clusters.size(); ++i) {
    const auto& c = topo.clusters[i];
    idx.cluster[c.relay] = static_cast<std::int64_t>(i);
    idx.is_relay[c.relay] = 1;
    idx.relay_up.push_back(links.add(c.relay, kController, relay_hop, opts.p_timeout));
    idx.relay_down.push_back(links.add(kController, c.relay, relay_hop, opts.p_timeout));
    for (NodeId s : c.members) {
      idx.cluster[s] = static_cast<std::int64_t>(i);
      idx.uplink[s] = links.add(s, c.relay, local_hop, opts.p_timeout);
    }
  }
  for (NodeId s : topo.sensors) {
    if (idx.cluster[s] != kDirect) continue;
    idx.uplink[s] = links.add(s, kController, relay_hop, opts.p_timeout);
    idx.downlink[s] = links.add(kController, s, relay_hop, opts.p_timeout);
  }
  for (const auto& f : flows)
    for (NodeId s : f.sources)
      cecbench::detail::require(s < id_space && (idx.cluster[s] != kDirect || std::find(topo.sensors.begin(),
                                                                                        topo.sensors.end(), s) !=
                                                                                  topo.sensors.end()),
                                "sources", "flow source is not a field node");

  // Control exchange: relays report their flows and M informs them of the schedule.
  Slot control_end = 0;
  for (std::size_t i = 0; i < topo.clusters.size() && !trace.control_failure; ++i) {
    const NodeId relay = topo.clusters[i].relay;
    const auto members = static_cast<std::uint32_t>(topo.clusters[i].members.size() + 1);
    Slot t = 0;
    for (const auto& [link, type, src, dst] :
         {std::tuple{idx.relay_up[i], EventType::Report, relay, kController},
          std::tuple{idx.relay_down[i], EventType::Inform, kController, relay}}) {
      bool ok = false;
      for (std::size_t a = 0; a < opts.max_attempts && !ok; ++a) {
        const Outcome o = links.attempt(link, rng);
        log.emit(t++, type, src, dst, kNoTask, kNoPacket, o, members);
        ok = o == Outcome::Ok;
      }
      if (!ok) {
        trace.control_failure = true;
        break;
      }
    }
    control_end = std::max(control_end, t);
  }

  const cec::RbAllocation alloc = cec::allocate_rbs_equal(cfg);
  for (std::size_t i = 0; i < cfg.n_tasks; ++i) trace.rbs_per_task.push_back(alloc.rb_count(i));
  trace.target_t_cm = cec::optimal_tcm_case3(opts.t_cp, cfg).t_cm;
  trace.t_p = cec::slot_length(trace.target_t_cm, opts.t_cp, cfg);
  trace.start_slot = control_end;
  const Slot start = control_end;
  const Slot fb_slots = detail::seconds_to_slots(opts.feedback_delay, slot_s);
  const Slot c2m_slots = detail::seconds_to_slots(topo.c_to_m_latency, slot_s);
  const Slot target_slots = detail::seconds_to_slots(trace.target_t_cm, slot_s);

  trace.tasks.reserve(flows.size());
  for (const FlowSpec& f : flows) {
    const std::size_t task = f.task_id;
    const std::size_t d = f.packets_required;
    const std::size_t required = detail::required_packets(f);
    TaskRecord rec;
    rec.task_id = task;
    rec.packets_required = d;
    rec.fdd_required = f.fdd_required;
    rec.first_pass_failed.assign(d, 1);
    std::vector<std::uint8_t> delivered(d, 0), cached(d, 0);

    if (trace.control_failure) {
      rec.comm_failure = true;
      detail::close_task(rec, delivered, cached);
      trace.tasks.push_back(std::move(rec));
      continue;
    }

    const Seconds deadline = f.deadline > 0.0 ? f.deadline : trace.t_p;
    const Slot deadline_slot = start + static_cast<Slot>(std::floor(deadline / slot_s));
    const Schedule plan = plan_flow(f, idx, topo.clusters.size());

    std::size_t count = 0;
    bool expired = false;
    auto deliver = [&](std::size_t p, Slot end) {
      if (delivered[p] || end > deadline_slot) return;
      delivered[p] = 1;
      if (++count >= required && !rec.dispatched) {
        rec.dispatched = true;
        rec.completion_slot = end;
      }
    };
    auto relay_of = [&](std::size_t p) { return topo.clusters[plan.group_of[p]].relay; };

    // First pass, paced over the scheduled window.
    const Slot window_slots =
        opts.pace_to_target ? std::max<Slot>(plan.transmissions, target_slots) : plan.transmissions;
    const Slot spacing = window_slots / plan.transmissions;
    Slot pos = 0;
    auto next_slot = [&] { return start + spacing * pos++; };
    for (std::size_t p : plan.order) {
      const NodeId src = f.sources[p];
      ++rec.sent;
      if (idx.cluster[src] == kDirect) {
        const Slot s = next_slot();
        const Outcome o = links.attempt(idx.uplink[src], rng);
        log.emit(s, EventType::Transmit, src, kController, task, static_cast<std::int64_t>(p), o);
        ++rec.transmissions;
        if (o == Outcome::Ok) deliver(p, s + 1);
      } else {
        const NodeId relay = relay_of(p);
        const std::size_t c = plan.group_of[p];
        if (idx.member(src)) {
          const Slot s = next_slot();
          const Outcome o = links.attempt(idx.uplink[src], rng);
          log.emit(s, EventType::Transmit, src, relay, task, static_cast<std::int64_t>(p), o);
          ++rec.transmissions;
          if (o == Outcome::Ok) {
            cached[p] = 1;
            log.emit(s + 1, EventType::RelayCache, relay, relay, task, static_cast<std::int64_t>(p), o);
          }
        } else {
          cached[p] = 1;
          log.emit(start, EventType::RelayCache, relay, relay, task, static_cast<std::int64_t>(p), Outcome::Ok);
        }
        const Slot s = next_slot();
        if (cached[p]) {
          Outcome o = links.attempt(idx.relay_up[c], rng);
          if (forced(opts, task, p)) o = Outcome::Lost;
          log.emit(s, EventType::Transmit, relay, kController, task, static_cast<std::int64_t>(p), o);
          ++rec.transmissions;
          if (o == Outcome::Ok) deliver(p, s + 1);
        }
      }
      rec.first_pass_failed[p] = delivered[p] ? 0 : 1;
    }

    // NACK rounds with cached-predecessor bundles.
    Slot t = start + window_slots + fb_slots;
    while (!rec.dispatched && !expired && rec.nack_rounds < opts.max_attempts) {
      ++rec.nack_rounds;
      for (std::size_t g = 0; g < plan.groups.size() && !rec.dispatched && !expired; ++g) {
        std::vector<std::size_t> missing;
        for (std::size_t p : plan.groups[g])
          if (!delivered[p]) missing.push_back(p);
        if (missing.empty()) continue;

        const bool direct = g >= topo.clusters.size();
        const NodeId target = direct ? f.sources[missing.front()] : topo.clusters[g].relay;
        const std::size_t down = direct ? idx.downlink[target] : idx.relay_down[g];
        bool informed = false;
        for (std::size_t a = 0; a < opts.max_attempts && !informed; ++a) {
          if (t + 1 > deadline_slot) {
            expired = true;
            break;
          }
          const Outcome o = links.attempt(down, rng);
          log.emit(t++, EventType::Nack, kController, target, task, static_cast<std::int64_t>(missing.front()), o,
                   static_cast<std::uint32_t>(missing.size()));
          informed = o == Outcome::Ok;
        }
        if (!informed) continue;

        for (std::size_t p : missing) {
          if (delivered[p]) continue;
          const NodeId src = f.sources[p];
          if (direct) {
            if (t + 1 > deadline_slot) {
              expired = true;
              break;
            }
            const Outcome o = links.attempt(idx.uplink[src], rng);
            log.emit(t++, EventType::Retransmit, src, kController, task, static_cast<std::int64_t>(p), o);
            ++rec.transmissions;
            ++rec.retransmissions;
            if (o == Outcome::Ok) deliver(p, t);
            continue;
          }
          const NodeId relay = topo.clusters[g].relay;
          if (!cached[p]) {
            if (t + 1 > deadline_slot) {
              expired = true;
              break;
            }
            const Outcome o = links.attempt(idx.uplink[src], rng);
            log.emit(t++, EventType::Retransmit, src, relay, task, static_cast<std::int64_t>(p), o);
            ++rec.transmissions;
            ++rec.retransmissions;
            if (o != Outcome::Ok) continue;
            cached[p] = 1;
            log.emit(t, EventType::RelayCache, relay, relay, task, static_cast<std::int64_t>(p), o);
          }
          std::optional<std::size_t> pred;
          for (std::size_t r = plan.rank_in_group[p]; r-- > 0;) {
            const std::size_t q = plan.groups[g][r];
            if (cached[q]) {
              pred = q;
              break;
            }
          }
          const Slot cost = pred ? 2 : 1;
          if (t + cost > deadline_slot) {
            expired = true;
            break;
          }
          const Outcome o = links.attempt(idx.relay_up[g], rng);
          log.emit(t, EventType::Retransmit, relay, kController, task, static_cast<std::int64_t>(p), o,
                   static_cast<std::uint32_t>(cost));
          t += cost;
          ++rec.transmissions;
          ++rec.retransmissions;
          if (o == Outcome::Ok) {
            deliver(p, t);
            if (pred) deliver(*pred, t);
          }
          if (rec.dispatched) break;
        }
      }
      t += fb_slots;
    }

    // Hand the flow to the detector on M.
    if (rec.dispatched) {
      log.emit(rec.completion_slot + c2m_slots, EventType::FddDispatch, kController, kEdgeServer, task, kNoPacket,
               Outcome::Ok, static_cast<std::uint32_t>(count));
    } else {
      rec.comm_failure = true;
      rec.completion_slot = std::min(t, deadline_slot);
    }
    rec.t_cm = static_cast<double>(rec.completion_slot - start) * slot_s +
               (topo.clusters.empty() ? 0.0 : opts.queue_delay);
    detail::close_task(rec, delivered, cached);
    trace.tasks.push_back(std::move(rec));
  }

  trace.links = links.export_stats();
  trace.events = log.finish();
  return trace;
}

}  // namespace cecbench::sim
