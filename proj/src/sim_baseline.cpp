/*
 * SPDX-License-Identifier: Apache-2.0
 */
#include <algorithm>
#include <cmath>

#include "cecbench/error.hpp"
#include "cecbench/sim.hpp"
#include "sim_internal.hpp"

namespace cecbench::sim {

namespace {

using protocols::Protocol;

// Every baseline sends each packet straight to C.
struct DirectSetup {
  detail::LinkTable links;
  std::vector<std::size_t> link_of;  // indexed by node id
};

DirectSetup direct_links(const std::vector<FlowSpec>& flows, const ChannelParams& hop, double p_timeout) {
  DirectSetup d;
  NodeId top = 0;
  for (const auto& f : flows)
    for (NodeId s : f.sources) top = std::max(top, s);
  d.link_of.assign(static_cast<std::size_t>(top) + 1, SIZE_MAX);
  for (const auto& f : flows)
    for (NodeId s : f.sources)
      if (d.link_of[s] == SIZE_MAX) d.link_of[s] = d.links.add(s, kController, hop, p_timeout);
  return d;
}

Slot deadline_slot_of(const FlowSpec& f, Seconds slot_s) {
  if (f.deadline <= 0.0) return UINT64_MAX;
  return static_cast<Slot>(std::floor(f.deadline / slot_s));
}

void finish_task(TaskRecord& rec, std::size_t count, std::size_t required, Slot last, Slot deadline, Seconds slot_s,
                 const std::vector<std::uint8_t>& delivered, detail::EventLog& log, Slot c2m) {
  rec.dispatched = count >= required && rec.completion_slot <= deadline;
  if (rec.dispatched) {
    log.emit(rec.completion_slot + c2m, EventType::FddDispatch, kController, kEdgeServer, rec.task_id, kNoPacket,
             Outcome::Ok, static_cast<std::uint32_t>(count));
  } else {
    rec.comm_failure = true;
    rec.completion_slot = std::min(last, deadline);
  }
  rec.t_cm = static_cast<double>(rec.completion_slot) * slot_s;
  const std::vector<std::uint8_t> nothing_cached(delivered.size(), 0);
  detail::close_task(rec, delivered, nothing_cached);
}

// Data, ACK and turnaround each take one packet time.
void run_srarq(SimTrace& trace, const std::vector<FlowSpec>& flows, const ChannelParams& chan, std::uint64_t seed,
               const SimOptions& opts, Slot c2m) {
  trace.slot_seconds = opts.packet_bits / chan.rate_bps;
  DirectSetup net = direct_links(flows, chan, opts.p_timeout);
  detail::EventLog log(opts.record_events);
  RngStream rng(seed, 0x7372'6172'7100ULL);
  constexpr Slot kCycle = 3;

  for (const FlowSpec& f : flows) {
    const std::size_t d = f.packets_required;
    const std::size_t required = detail::required_packets(f);
    const Slot deadline = deadline_slot_of(f, trace.slot_seconds);
    TaskRecord rec;
    rec.task_id = f.task_id;
    rec.packets_required = d;
    rec.fdd_required = f.fdd_required;
    rec.first_pass_failed.assign(d, 0);
    std::vector<std::uint8_t> delivered(d, 0);
    std::size_t count = 0;
    Slot t = 0;
    auto send = [&](std::size_t p, EventType type) {
      const NodeId src = f.sources[p];
      const Outcome o = net.links.attempt(net.link_of[src], rng);
      log.emit(t, type, src, kController, f.task_id, static_cast<std::int64_t>(p), o);
      ++rec.transmissions;
      if (o == Outcome::Ok) {
        log.emit(t + 1, EventType::Ack, kController, src, f.task_id, static_cast<std::int64_t>(p), o);
        if (t + kCycle <= deadline) {
          delivered[p] = 1;
          if (++count == required) rec.completion_slot = t + kCycle;
        }
      }
      t += kCycle;
      return o == Outcome::Ok;
    };

    for (std::size_t p = 0; p < d && t + kCycle <= deadline; ++p) {
      ++rec.sent;
      rec.first_pass_failed[p] = send(p, EventType::Transmit) ? 0 : 1;
    }
    for (std::size_t p = 0; p < d; ++p)
      if (p >= rec.sent) rec.first_pass_failed[p] = 1;
    while (count < required && rec.nack_rounds < opts.max_attempts && t + kCycle <= deadline) {
      ++rec.nack_rounds;
      for (std::size_t p = 0; p < d && count < required && t + kCycle <= deadline; ++p) {
        if (delivered[p]) continue;
        log.emit(t, EventType::Nack, kController, f.sources[p], f.task_id, static_cast<std::int64_t>(p), Outcome::Ok);
        ++rec.retransmissions;
        send(p, EventType::Retransmit);
      }
    }
    finish_task(rec, count, required, t, deadline, trace.slot_seconds, delivered, log, c2m);
    trace.tasks.push_back(std::move(rec));
  }
  trace.links = net.links.export_stats();
  trace.events = log.finish();
}

// Incremental redundancy: each round adds L fades to the accumulated mutual
// information; a packet still undecoded after Q rounds is dropped.
void run_harq(SimTrace& trace, const std::vector<FlowSpec>& flows, const ChannelParams& chan, std::uint64_t seed,
              const SimOptions& opts, Slot c2m) {
  opts.harq.validate();
  trace.slot_seconds = opts.packet_bits / chan.rate_bps;
  DirectSetup net = direct_links(flows, chan, 0.0);
  detail::EventLog log(opts.record_events);
  RngStream rng(seed, 0x6861'7271ULL);
  const std::size_t q_max = opts.harq.max_rounds;
  const std::size_t branches = opts.harq.diversity;
  const double snr = chan.snr_linear();
  const double threshold = std::exp2(chan.spectral_efficiency() * static_cast<double>(branches));
  const double single_threshold = outage_fade_threshold(chan);

  for (const FlowSpec& f : flows) {
    const std::size_t d = f.packets_required;
    const std::size_t required = detail::required_packets(f);
    const Slot deadline = deadline_slot_of(f, trace.slot_seconds);
    TaskRecord rec;
    rec.task_id = f.task_id;
    rec.packets_required = d;
    rec.fdd_required = f.fdd_required;
    rec.first_pass_failed.assign(d, 1);
    rec.sent = d;
    std::vector<std::uint8_t> delivered(d, 0);
    std::size_t count = 0;
    Slot t = 0;
    for (std::size_t p = 0; p < d && t < deadline; ++p) {
      const NodeId src = f.sources[p];
      LinkStats& stats = net.links.stats(net.link_of[src]);
      double acc = 1.0;
      for (std::size_t q = 0; q < q_max && t < deadline; ++q) {
        for (std::size_t l = 0; l < branches; ++l) {
          const double h = rng.exponential();
          ++stats.attempts;
          if (h < single_threshold) ++stats.outages;
          acc *= 1.0 + snr * h;
        }
        const bool decoded = acc > threshold;
        const Outcome o = decoded ? Outcome::Ok : Outcome::Lost;
        if (q > 0) {
          log.emit(t, EventType::Nack, kController, src, f.task_id, static_cast<std::int64_t>(p), Outcome::Ok);
          ++rec.retransmissions;
          rec.nack_rounds = std::max(rec.nack_rounds, q);
        }
        log.emit(t, q == 0 ? EventType::Transmit : EventType::Retransmit, src, kController, f.task_id,
                 static_cast<std::int64_t>(p), o);
        ++rec.transmissions;
        ++t;
        if (decoded) {
          log.emit(t, EventType::Ack, kController, src, f.task_id, static_cast<std::int64_t>(p), o);
          if (t <= deadline) {
            delivered[p] = 1;
            rec.first_pass_failed[p] = 0;
            if (++count == required) rec.completion_slot = t;
          }
          break;
        }
      }
    }
    finish_task(rec, count, required, t, deadline, trace.slot_seconds, delivered, log, c2m);
    trace.tasks.push_back(std::move(rec));
  }
  trace.links = net.links.export_stats();
  trace.events = log.finish();
}

// Two fixed phases: every node broadcasts once, then each node that was heard
// forwards the data of one node that was not. A round with no successful
// phase-1 node has no relay and fails.
void run_occupycow(SimTrace& trace, const Topology& topo, const std::vector<FlowSpec>& flows,
                   const ChannelParams& chan, std::uint64_t seed, const SimOptions& opts, Slot c2m) {
  cecbench::detail::require(opts.occupy_phase1_share > 0.0 && opts.occupy_phase1_share < 1.0,
                            "occupy_phase1_share", "must lie in (0, 1)");
  const double n_v = static_cast<double>(topo.sensors.size());
  const double bits = n_v * (opts.packet_bits + 1.0);
  const Seconds total = 2.0 * bits / chan.rate_bps;
  const Seconds t1 = opts.occupy_phase1_share * total;
  const Seconds t2 = total - t1;
  const ChannelParams hop1 = chan.with_rate(bits / t1);
  const double p1 = outage_probability(hop1);
  const double p2 = outage_probability(chan.with_rate(bits / t2));
  const double p12 = p2 > 0.0 ? std::min(p1 / p2, 1.0) : 1.0;

  DirectSetup net = direct_links(flows, hop1, 0.0);
  detail::EventLog log(opts.record_events);
  RngStream rng(seed, 0x6f63'6f77ULL);

  for (const FlowSpec& f : flows) {
    const std::size_t n = f.packets_required;
    const std::size_t required = detail::required_packets(f);
    trace.slot_seconds = total / (2.0 * static_cast<double>(n));
    const Slot deadline = deadline_slot_of(f, trace.slot_seconds);
    TaskRecord rec;
    rec.task_id = f.task_id;
    rec.packets_required = n;
    rec.fdd_required = f.fdd_required;
    rec.sent = n;
    rec.first_pass_failed.assign(n, 1);
    std::vector<std::uint8_t> heard(n, 0), delivered(n, 0);
    std::size_t a = 0;
    for (std::size_t p = 0; p < n; ++p) {
      const NodeId src = f.sources[p];
      const Outcome o = net.links.attempt(net.link_of[src], rng);
      log.emit(p, EventType::Transmit, src, kController, f.task_id, static_cast<std::int64_t>(p), o);
      ++rec.transmissions;
      if (o == Outcome::Ok) {
        heard[p] = 1;
        ++a;
      }
    }
    std::size_t count = 0;
    if (a > 0) {
      for (std::size_t p = 0; p < n; ++p) {
        if (heard[p]) {
          delivered[p] = 1;
          ++count;
          continue;
        }
        std::size_t helper = (p + 1) % n;
        while (!heard[helper]) helper = (helper + 1) % n;
        const Outcome o = rng.bernoulli(p12) ? Outcome::Lost : Outcome::Ok;
        log.emit(n + p, EventType::Transmit, f.sources[helper], kController, f.task_id, static_cast<std::int64_t>(p),
                 o);
        ++rec.transmissions;
        if (o == Outcome::Ok) {
          delivered[p] = 1;
          ++count;
        }
      }
    }
    const bool round_ok = count == n;
    for (std::size_t p = 0; p < n; ++p) rec.first_pass_failed[p] = round_ok ? 0 : 1;
    rec.completion_slot = 2 * n;
    if (2 * n > deadline) {
      std::fill(delivered.begin(), delivered.end(), 0);
      count = 0;
    }
    finish_task(rec, count, required, 2 * n, deadline, trace.slot_seconds, delivered, log, c2m);
    trace.tasks.push_back(std::move(rec));
  }
  trace.links = net.links.export_stats();
  trace.events = log.finish();
}

}  // namespace

SimTrace run_baseline(Protocol protocol, const Topology& topo, const std::vector<FlowSpec>& flows,
                      const ChannelParams& chan, std::uint64_t seed, const SimOptions& opts) {
  detail::validate_inputs(topo, flows, chan, opts);
  SimTrace trace;
  trace.protocol = protocol;
  const Seconds packet_time = opts.packet_bits / chan.rate_bps;
  const Slot c2m = detail::seconds_to_slots(topo.c_to_m_latency, packet_time);
  switch (protocol) {
    case Protocol::SelectiveRepeatArq:
      run_srarq(trace, flows, chan, seed, opts, c2m);
      break;
    case Protocol::Harq:
      run_harq(trace, flows, chan, seed, opts, c2m);
      break;
    case Protocol::OccupyCow:
      cecbench::detail::require(flows.front().packets_required >= 2, "flows", "Occupy CoW needs two or more nodes");
      run_occupycow(trace, topo, flows, chan, seed, opts, c2m);
      break;
    case Protocol::ReFlexUp:
      throw ValidationError("protocol", "ReFlexUp runs through run_reflexup");
  }
  return trace;
}

}  // namespace cecbench::sim
