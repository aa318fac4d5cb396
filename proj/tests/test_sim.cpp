#include <cmath>
#include <sstream>
#include <string>

#include "cecbench/error.hpp"
#include "cecbench/sim.hpp"
#include "doctest.h"
#include "oracles/oracles.hpp"

using namespace cecbench;
using namespace cecbench::sim;
using protocols::NetworkShape;
using protocols::Protocol;

namespace {

const ChannelParams kPerfect{500.0, 20e6, 200e3};

cec::CecConfig cec_for(std::size_t n_tasks) {
  cec::CecConfig cfg;
  cfg.n_tasks = n_tasks;
  cfg.k_rbs = 2 * n_tasks + 2;
  return cfg;
}

SimOptions quiet_channel() {
  SimOptions o;
  o.p_timeout = 0.0;
  return o;
}

std::string csv_of(const SimTrace& t) {
  std::ostringstream os;
  write_trace_csv(os, t);
  return os.str();
}

void check_conservation(const SimTrace& trace) {
  for (const auto& t : trace.tasks) {
    CHECK(t.delivered + t.lost + t.in_flight == t.sent);
    CHECK(t.delivered <= t.packets_required);
  }
}

void check_nack_precedes_retransmit(const SimTrace& trace) {
  std::vector<std::size_t> nacks(trace.tasks.size() + 1, 0);
  Slot last = 0;
  for (const auto& e : trace.events) {
    CHECK(e.slot >= last);
    last = e.slot;
    if (e.type == EventType::Nack && e.count > 0 && e.task_id != kNoTask) ++nacks[e.task_id];
    if (e.type == EventType::Retransmit) CHECK(nacks[e.task_id] > 0);
  }
}

}  // namespace

TEST_SUITE("sim") {

TEST_CASE("clustered topology layout") {
  const auto shape = NetworkShape::from_relay_ratio(12, 0.2, 176);
  const auto topo = Topology::clustered(shape);
  CHECK(topo.clusters.size() == 2);
  CHECK(topo.sensors.size() == 10);
  CHECK(topo.clusters[0].relay == 2);
  CHECK(topo.clusters[0].members.size() == 5);
  CHECK(topo.n_field_nodes() == 12);
  CHECK_NOTHROW(topo.validate());
  const auto flows = make_flows(topo, 3, 0.5, 0.0);
  CHECK(flows.size() == 3);
  CHECK(flows[0].packets_required == 12);
  CHECK(flows[0].fdd_required == 6);
  Topology bad = topo;
  bad.sensors.push_back(1);
  CHECK_THROWS_AS(bad.validate(), ValidationError);
}

TEST_CASE("perfect channel needs no retransmissions") {
  const auto shape = NetworkShape::from_relay_ratio(30, 0.2, 176);
  const auto topo = Topology::clustered(shape);
  const auto cfg = cec_for(5);
  const auto flows = make_flows(topo, 5, 1.0, 0.0);
  const auto trace = run_reflexup(topo, flows, kPerfect, cfg, 1, quiet_channel());
  CHECK_FALSE(trace.any_comm_failure());
  for (const auto& t : trace.tasks) {
    CHECK(t.retransmissions == 0);
    CHECK(t.nack_rounds == 0);
    CHECK(t.delivered == t.packets_required);
    CHECK(t.dispatched);
  }
  check_conservation(trace);
}

TEST_CASE("one forced drop costs exactly one NACK round with a bundled predecessor") {
  const auto shape = NetworkShape::from_relay_ratio(12, 0.2, 176);
  const auto topo = Topology::clustered(shape);
  const auto flows = make_flows(topo, 1, 1.0, 0.0);
  const NodeId second_member = topo.clusters[0].members[1];
  std::size_t packet = 0;
  while (flows[0].sources[packet] != second_member) ++packet;

  SimOptions opts = quiet_channel();
  opts.forced_drops = {{0, packet}};
  const auto trace = run_reflexup(topo, flows, kPerfect, cec_for(1), 3, opts);
  const auto& task = trace.tasks[0];
  CHECK(task.nack_rounds == 1);
  CHECK(task.retransmissions == 1);
  CHECK(task.dispatched);
  CHECK(task.first_pass_failed[packet] == 1);

  std::size_t nacks = 0, retx = 0;
  for (const auto& e : trace.events) {
    if (e.type == EventType::Nack) {
      ++nacks;
      CHECK(e.count == 1);
      CHECK(e.dst == topo.clusters[0].relay);
      CHECK(e.packet_id == static_cast<std::int64_t>(packet));
    }
    if (e.type == EventType::Retransmit) {
      ++retx;
      CHECK(e.count == 2);
      CHECK(e.src == topo.clusters[0].relay);
      CHECK(e.outcome == Outcome::Ok);
    }
  }
  CHECK(nacks == 1);
  CHECK(retx == 1);
  check_nack_precedes_retransmit(trace);
}

TEST_CASE("runs are deterministic per seed") {
  const auto shape = NetworkShape::from_relay_ratio(40, 0.2, 176);
  const auto topo = Topology::clustered(shape);
  const auto flows = make_flows(topo, 4, 1.0, 0.0);
  const ChannelParams noisy{3.0, 20e6, 200e3};
  SimOptions opts;
  opts.relay_window = 176.0 / 20e6 * 4.0;
  const auto a = run_reflexup(topo, flows, noisy, cec_for(4), 9, opts);
  const auto b = run_reflexup(topo, flows, noisy, cec_for(4), 9, opts);
  const auto c = run_reflexup(topo, flows, noisy, cec_for(4), 10, opts);
  CHECK(csv_of(a) == csv_of(b));
  CHECK(csv_of(a) != csv_of(c));
  const auto sa = run_baseline(Protocol::SelectiveRepeatArq, Topology::star(20), make_flows(Topology::star(20), 2, 1.0, 0.0),
                               noisy, 4, opts);
  const auto sb = run_baseline(Protocol::SelectiveRepeatArq, Topology::star(20), make_flows(Topology::star(20), 2, 1.0, 0.0),
                               noisy, 4, opts);
  CHECK(csv_of(sa) == csv_of(sb));
}

TEST_CASE("lossy runs conserve packets and follow the NACK order") {
  const auto shape = NetworkShape::from_relay_ratio(60, 0.2, 176);
  const auto topo = Topology::clustered(shape);
  const auto flows = make_flows(topo, 6, 0.9, 0.0);
  for (double snr : {-5.0, 5.0, 15.0}) {
    SimOptions opts;
    opts.p_timeout = 0.01;
    opts.local_snr_db = snr + 3.0;
    const auto trace = run_reflexup(topo, flows, {snr, 20e6, 200e3}, cec_for(6), 17, opts);
    check_conservation(trace);
    check_nack_precedes_retransmit(trace);
  }
  for (auto p : {Protocol::SelectiveRepeatArq, Protocol::Harq, Protocol::OccupyCow}) {
    const auto trace = run_baseline(p, topo, flows, {0.0, 20e6, 2e6}, 5, SimOptions{});
    check_conservation(trace);
    check_nack_precedes_retransmit(trace);
  }
}

TEST_CASE("per-link loss frequency matches the outage probability") {
  const auto shape = NetworkShape::from_relay_ratio(8, 0.5, 176);
  const auto topo = Topology::clustered(shape);
  const std::size_t tasks = 3000;
  const auto flows = make_flows(topo, tasks, 1.0, 0.0);
  SimOptions opts = quiet_channel();
  opts.pace_to_target = false;
  opts.record_events = false;
  const ChannelParams chan{25.0, 20e6, 200e3};
  const auto trace = run_reflexup(topo, flows, chan, cec_for(tasks), 23, opts);
  std::size_t checked = 0;
  for (const auto& l : trace.links) {
    if (l.attempts < 500) continue;
    ++checked;
    const double p = l.outage_probability;
    CHECK(p > 0.01);
    const double freq = static_cast<double>(l.outages) / static_cast<double>(l.attempts);
    CHECK(std::abs(freq - p) <= 3.0 * std::sqrt(p * (1.0 - p) / static_cast<double>(l.attempts)));
  }
  CHECK(checked >= topo.sensors.size() + topo.clusters.size());
}

TEST_CASE("selective repeat on a perfect channel takes three packet times per packet") {
  const auto topo = Topology::star(50);
  const auto flows = make_flows(topo, 1, 1.0, 0.0);
  const auto trace = run_baseline(Protocol::SelectiveRepeatArq, topo, flows, kPerfect, 1, quiet_channel());
  CHECK(trace.tasks[0].t_cm == doctest::Approx(3.0 * 50.0 * 176.0 / 200e3));
  CHECK(trace.tasks[0].retransmissions == 0);
  CHECK(protocols::srarq_latency(NetworkShape{51, 50, 1, 50}, kPerfect) ==
        doctest::Approx(trace.tasks[0].t_cm));
}

TEST_CASE("harq at very high SNR decodes in the first round") {
  const auto topo = Topology::star(30);
  const auto flows = make_flows(topo, 2, 1.0, 0.0);
  const auto trace = run_baseline(Protocol::Harq, topo, flows, kPerfect, 1, SimOptions{});
  for (const auto& t : trace.tasks) {
    CHECK(t.retransmissions == 0);
    CHECK(t.transmissions == 30);
    CHECK(t.t_cm == doctest::Approx(30.0 * 176.0 / 200e3));
  }
}

TEST_CASE("occupy cow simulation matches the enumeration oracle") {
  const auto topo = Topology::star(4);
  const std::size_t runs = 100000;
  const auto flows = make_flows(topo, runs, 1.0, 0.0);
  SimOptions opts;
  opts.record_events = false;
  opts.occupy_phase1_share = 0.7;
  const ChannelParams chan{10.0, 1e6, 1e6};
  const auto trace = run_baseline(Protocol::OccupyCow, topo, flows, chan, 31, opts);
  std::size_t failed = 0;
  for (const auto& t : trace.tasks) failed += t.first_pass_failed[0];

  const double bits = 4.0 * 177.0;
  const double total = 2.0 * bits / chan.rate_bps;
  const double p1 = outage_probability(chan.with_rate(bits / (0.7 * total)));
  const double p2 = outage_probability(chan.with_rate(bits / (0.3 * total)));
  const double p12 = std::min(p1 / p2, 1.0);
  CHECK(p12 < 1.0);
  const double expected = oracles::occupycow_bruteforce(4, p1, p12);
  const double freq = static_cast<double>(failed) / static_cast<double>(runs);
  CHECK(std::abs(freq - expected) <= 3.0 * std::sqrt(expected * (1.0 - expected) / static_cast<double>(runs)));
}

TEST_CASE("measure_cec bound and slot rule") {
  SimTrace trace;
  trace.t_p = 10.0;
  const std::size_t n = 4;
  for (std::size_t i = 0; i < n; ++i) {
    TaskRecord r;
    r.task_id = i;
    r.t_cm = 1e-9;
    trace.tasks.push_back(r);
  }
  cec::CecConfig cfg = cec_for(n);
  cfg.k_rbs = 8;
  cfg.c = 1.0;
  const auto fast = measure_cec(trace, cfg, 2.0);
  CHECK(fast.u_cc <= cfg.c);
  CHECK(fast.u_cc >= 0.0);

  trace.tasks[2].t_cm = 10.0;
  const auto full = measure_cec(trace, cfg, 0.5);
  CHECK(full.per_task[2].u_c == 0.0);
  CHECK(full.per_task[2].t_cp == 0.0);
  CHECK(full.per_task[0].u_c > 0.0);

  trace.tasks[2].t_cm = 1.0;
  trace.tasks[2].comm_failure = true;
  trace.tasks[2].task_failure = true;
  CHECK(measure_cec(trace, cfg, 0.5).per_task[2].u_c == 0.0);
}

TEST_CASE("measured efficiency tracks the padded-slot optimum on a clean channel") {
  const auto shape = NetworkShape::from_relay_ratio(250, 0.2, 176);
  const auto topo = Topology::clustered(shape);
  cec::CecConfig cfg;
  const auto flows = make_flows(topo, cfg.n_tasks, 1.0, 0.0);
  SimOptions opts;
  opts.record_events = false;
  const ChannelParams chan{40.0, 20e6, 200e3};
  const auto trace = run_reflexup(topo, flows, chan, cfg, 5, opts);
  const auto sched = measure_cec(trace, cfg, 0.5);
  const double bound = cec::ucc_case3(std::sqrt(75.0), 0.5, cfg);
  CHECK(sched.u_cc <= bound * (1.0 + 1e-9));
}

TEST_CASE("estimate_pfail edge cases") {
  Scenario sc;
  sc.shape = NetworkShape::from_relay_ratio(50, 0.2, 176);
  sc.chan = kPerfect;
  sc.options.p_timeout = 0.0;
  for (auto p : {Protocol::ReFlexUp, Protocol::SelectiveRepeatArq, Protocol::Harq, Protocol::OccupyCow}) {
    sc.protocol = p;
    sc.chan = kPerfect;
    auto est = estimate_pfail(1000, sc, 1);
    CHECK(est.probability == 0.0);
    CHECK(est.ci_halfwidth == 0.0);
    sc.chan = ChannelParams{-400.0, 20e6, 200e3};
    est = estimate_pfail(1000, sc, 1);
    CHECK(est.probability == 1.0);
    CHECK(est.ci_halfwidth == 0.0);
  }
  CHECK_THROWS_AS(estimate_pfail(999, sc, 1), ValidationError);
}

TEST_CASE("first-pass failure of the baselines agrees with the analytic models at low SNR") {
  Scenario sc;
  sc.shape = NetworkShape::from_relay_ratio(50, 0.2, 176);
  sc.chan = ChannelParams{-30.0, 20e6, 200e3};
  const std::size_t runs = 20000;

  sc.protocol = Protocol::Harq;
  RngStream rng(3);
  const double harq = protocols::harq_pfail(sc.chan, sc.options.harq, 1'000'000, rng).value;
  CHECK(harq > 0.01);
  const auto h = estimate_pfail(runs, sc, 4);
  CHECK(std::abs(h.probability - harq) <= binomial_ci_halfwidth(harq, runs));

  sc.protocol = Protocol::SelectiveRepeatArq;
  sc.chan = ChannelParams{10.0, 20e6, 4e6};
  const double sr = protocols::srarq_pfail(sc.options.p_timeout, outage_probability(sc.chan));
  const auto s = estimate_pfail(runs, sc, 5);
  CHECK(std::abs(s.probability - sr) <= binomial_ci_halfwidth(sr, runs));
}

TEST_CASE("trace csv header and row layout") {
  const auto topo = Topology::star(2);
  const auto trace = run_baseline(Protocol::SelectiveRepeatArq, topo, make_flows(topo, 1, 1.0, 0.0), kPerfect, 1,
                                  quiet_channel());
  std::istringstream in(csv_of(trace));
  std::string line;
  std::getline(in, line);
  CHECK(line == "slot,event_type,src,dst,task_id,packet_id,outcome");
  std::getline(in, line);
  CHECK(line == "0,transmit,2,0,0,0,ok");
}

}
