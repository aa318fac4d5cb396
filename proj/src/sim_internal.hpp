/*
 * SPDX-License-Identifier: Apache-2.0
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "cecbench/rng.hpp"
#include "cecbench/sim.hpp"

namespace cecbench::sim::detail {

// Directed links with their outage threshold and running loss counters.
class LinkTable {
 public:
  std::size_t add(NodeId src, NodeId dst, const ChannelParams& chan, double p_timeout) {
    Entry e;
    e.stats.src = src;
    e.stats.dst = dst;
    e.stats.outage_probability = outage_probability(chan);
    e.threshold = outage_fade_threshold(chan);
    e.p_timeout = p_timeout;
    entries_.push_back(e);
    return entries_.size() - 1;
  }

  // One fade draw and one timeout draw per attempt, whatever the outcome, so
  // the stream position only depends on the number of attempts.
  Outcome attempt(std::size_t link, RngStream& rng) {
    Entry& e = entries_[link];
    const double fade = rng.exponential();
    const bool timeout = rng.bernoulli(e.p_timeout);
    ++e.stats.attempts;
    if (fade < e.threshold) {
      ++e.stats.outages;
      return Outcome::Lost;
    }
    if (timeout) {
      ++e.stats.timeouts;
      return Outcome::Timeout;
    }
    return Outcome::Ok;
  }

  LinkStats& stats(std::size_t link) { return entries_[link].stats; }

  std::vector<LinkStats> export_stats() const {
    std::vector<LinkStats> out;
    out.reserve(entries_.size());
    for (const Entry& e : entries_) out.push_back(e.stats);
    return out;
  }

 private:
  struct Entry {
    LinkStats stats;
    double threshold = 0.0;
    double p_timeout = 0.0;
  };
  std::vector<Entry> entries_;
};

class EventLog {
 public:
  explicit EventLog(bool enabled) : enabled_(enabled) {}

  void emit(Slot slot, EventType type, NodeId src, NodeId dst, std::size_t task, std::int64_t packet,
            Outcome outcome, std::uint32_t count = 1) {
    if (!enabled_) return;
    events_.push_back(TraceEvent{slot, type, src, dst, static_cast<std::uint32_t>(task), packet, outcome, count});
  }

  // Tasks overlap in time, so the per-task emission order is merged by slot.
  std::vector<TraceEvent> finish() {
    std::stable_sort(events_.begin(), events_.end(),
                     [](const TraceEvent& a, const TraceEvent& b) { return a.slot < b.slot; });
    return std::move(events_);
  }

 private:
  bool enabled_;
  std::vector<TraceEvent> events_;
};

inline Slot seconds_to_slots(Seconds t, Seconds slot_seconds) {
  if (t <= 0.0) return 0;
  return static_cast<Slot>(std::ceil(t / slot_seconds - 1e-9));
}

inline std::size_t required_packets(const FlowSpec& f) {
  const double need = std::ceil(f.epsilon * static_cast<double>(f.packets_required) - 1e-9);
  return std::clamp<std::size_t>(static_cast<std::size_t>(need), 1, f.packets_required);
}

void validate_inputs(const Topology& topo, const std::vector<FlowSpec>& flows, const ChannelParams& chan,
                     const SimOptions& opts);

void close_task(TaskRecord& rec, const std::vector<std::uint8_t>& delivered, const std::vector<std::uint8_t>& cached);

}  // namespace cecbench::sim::detail
