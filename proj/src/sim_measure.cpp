/*
 * SPDX-License-Identifier: Apache-2.0
 */
#include <algorithm>
#include <cmath>
#include <numeric>

#include "cecbench/error.hpp"
#include "cecbench/sim.hpp"
#include "sim_internal.hpp"

namespace cecbench::sim {

cec::ScheduleResult measure_cec(const SimTrace& trace, const cec::CecConfig& cfg, Seconds t_cp_per_task) {
  cfg.validate();
  cecbench::detail::require(trace.tasks.size() == cfg.n_tasks, "trace", "task count differs from the configuration");
  cecbench::detail::require(std::isfinite(t_cp_per_task) && t_cp_per_task >= 0.0, "t_cp", "must be non-negative");

  Seconds t_p = trace.t_p;
  if (t_p <= 0.0) {
    Seconds longest = 0.0;
    for (const auto& t : trace.tasks) longest = std::max(longest, t.t_cm);
    t_p = cec::slot_length(longest, t_cp_per_task, cfg);
  }

  const cec::RbAllocation alloc = cec::allocate_rbs_equal(cfg);
  const std::size_t n = trace.tasks.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  auto t_cm_of = [&](std::size_t i) {
    const TaskRecord& r = trace.tasks[i];
    return r.comm_failure ? t_p : std::min(r.t_cm, t_p);
  };
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return t_cm_of(a) < t_cm_of(b); });

  cec::ScheduleResult result;
  result.t_p = t_p;
  result.per_task.resize(n);
  Seconds compute_budget = t_p;
  for (std::size_t i : order) {
    const Seconds t_cm = t_cm_of(i);
    Seconds t_cp = t_cp_per_task;
    if (trace.tasks[i].task_failure || t_cm >= t_p || t_cp > compute_budget) t_cp = 0.0;
    compute_budget -= t_cp;
    cec::TaskUtilization& u = result.per_task[i];
    u.task_id = trace.tasks[i].task_id;
    u.t_cm = t_cm;
    u.t_cp = t_cp;
    u.u_c = cec::compute_uc(t_cp, t_cm, t_p);
    u.u_rb = cec::compute_urb(alloc, i, t_cm, t_p);
  }
  const cec::UccSum sum = cec::compute_ucc(result.per_task);
  result.u_cc = sum.value;
  result.uc_sum_violated = sum.uc_sum_violated;
  result.urb_sum_violated = sum.urb_sum_violated;
  return result;
}

namespace {

using protocols::Protocol;

bool first_pass_run(const Scenario& sc, std::uint64_t seed) {
  SimOptions opts = sc.options;
  opts.record_events = false;
  opts.pace_to_target = false;
  const protocols::NetworkShape& shape = sc.shape;
  switch (sc.protocol) {
    case Protocol::ReFlexUp: {
      // One relay serving one sensor, at the rate the full network's relay window implies.
      Topology topo;
      topo.sensors = {kEdgeServer + 2};
      topo.clusters = {RelayCluster{kEdgeServer + 1, {kEdgeServer + 2}}};
      const Seconds window =
          opts.relay_window > 0.0 ? opts.relay_window : protocols::default_relay_window(shape, sc.chan);
      opts.link_rate_bps = opts.link_rate_bps.value_or(protocols::reflexup_link_rate(shape, window));
      cec::CecConfig cfg = sc.cec;
      cfg.n_tasks = 1;
      cfg.c = std::min(cfg.c, 1.0);
      const auto flows = make_flows(topo, 1, 1.0, 0.0);
      const SimTrace tr = run_reflexup(topo, flows, sc.chan, cfg, seed, opts);
      return tr.tasks[0].first_pass_failed[0] != 0;
    }
    case Protocol::SelectiveRepeatArq:
    case Protocol::Harq: {
      const Topology topo = Topology::star(1);
      const auto flows = make_flows(topo, 1, 1.0, 0.0);
      const SimTrace tr = run_baseline(sc.protocol, topo, flows, sc.chan, seed, opts);
      return tr.tasks[0].first_pass_failed[0] != 0;
    }
    case Protocol::OccupyCow: {
      const Topology topo = Topology::clustered(shape);
      const auto flows = make_flows(topo, 1, 1.0, 0.0);
      const SimTrace tr = run_baseline(sc.protocol, topo, flows, sc.chan, seed, opts);
      return tr.tasks[0].first_pass_failed[0] != 0;
    }
  }
  return false;
}

bool communication_run(const Scenario& sc, std::uint64_t seed) {
  SimOptions opts = sc.options;
  opts.record_events = false;
  const Topology topo = Topology::clustered(sc.shape);
  const Seconds target = cec::optimal_tcm_case3(opts.t_cp, sc.cec).t_cm;
  const Seconds t_p = cec::slot_length(target, opts.t_cp, sc.cec);
  const auto flows = make_flows(topo, sc.cec.n_tasks, sc.cec.epsilon, t_p);
  const SimTrace tr = sc.protocol == Protocol::ReFlexUp ? run_reflexup(topo, flows, sc.chan, sc.cec, seed, opts)
                                                        : run_baseline(sc.protocol, topo, flows, sc.chan, seed, opts);
  return tr.any_comm_failure();
}

}  // namespace

PfailEstimate estimate_pfail(std::size_t runs, const Scenario& scenario, std::uint64_t seed) {
  cecbench::detail::require(runs >= kMinPfailRuns, "runs", "needs at least 1000 runs");
  scenario.shape.validate();
  scenario.chan.validate();
  scenario.cec.validate();
  const std::uint64_t tag = static_cast<std::uint64_t>(scenario.protocol) * 2 +
                            (scenario.metric == FailureMetric::Communication ? 1 : 0);
  PfailEstimate est;
  est.runs = runs;
  for (std::size_t r = 0; r < runs; ++r) {
    const std::uint64_t run_seed = derive_seed(seed, tag, r);
    const bool failed = scenario.metric == FailureMetric::FirstPass ? first_pass_run(scenario, run_seed)
                                                                     : communication_run(scenario, run_seed);
    if (failed) ++est.failures;
  }
  est.probability = static_cast<double>(est.failures) / static_cast<double>(runs);
  est.ci_halfwidth = binomial_ci_halfwidth(est.probability, runs);
  return est;
}

}  // namespace cecbench::sim
