/*
 * SPDX-License-Identifier: Apache-2.0
 */
#include "cecbench/cec_core.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "cecbench/error.hpp"

namespace cecbench::cec {

using detail::require;

void CecConfig::validate() const {
  require(n_tasks >= 1, "n_tasks", "need at least one task");
  require(k_rbs >= 1, "k_rbs", "need at least one resource block");
  require(std::isfinite(c) && c > 0.0, "c", "must be positive");
  if (n_tasks < k_rbs) {
    require(c < static_cast<double>(k_rbs - n_tasks), "c",
            "must be below K - N = " + std::to_string(k_rbs - n_tasks) + " when N < K");
  } else {
    require(c <= 1.0, "c", "must not exceed 1 when N >= K");
  }
  require(std::isfinite(c0) && c0 >= 0.0, "c0", "must be non-negative");
  require(epsilon >= 0.0 && epsilon <= 1.0, "epsilon", "must lie in [0, 1]");
}

RbAllocation::RbAllocation(std::size_t n_tasks, std::size_t k_rbs)
    : n_tasks_(n_tasks), k_rbs_(k_rbs), indicator_(n_tasks * k_rbs, 0), owner_(k_rbs, -1) {}

bool RbAllocation::assigned(std::size_t task, std::size_t rb) const {
  require(task < n_tasks_ && rb < k_rbs_, "rb_set", "index out of range");
  return indicator_[task * k_rbs_ + rb] != 0;
}

void RbAllocation::assign(std::size_t task, std::size_t rb) {
  require(task < n_tasks_ && rb < k_rbs_, "rb_set", "index out of range");
  const auto current = owner_[rb];
  if (current == static_cast<std::int64_t>(task)) return;
  require(current < 0, "rb_set", "RB " + std::to_string(rb) + " already assigned to task " + std::to_string(current));
  owner_[rb] = static_cast<std::int64_t>(task);
  indicator_[task * k_rbs_ + rb] = 1;
}

std::size_t RbAllocation::rb_count(std::size_t task) const {
  require(task < n_tasks_, "task", "index out of range");
  const auto row = indicator_.begin() + static_cast<std::ptrdiff_t>(task * k_rbs_);
  return static_cast<std::size_t>(std::accumulate(row, row + static_cast<std::ptrdiff_t>(k_rbs_), 0));
}

std::size_t RbAllocation::total_assigned() const noexcept {
  std::size_t total = 0;
  for (auto o : owner_) total += o >= 0 ? 1 : 0;
  return total;
}

std::vector<std::size_t> RbAllocation::rbs_of(std::size_t task) const {
  std::vector<std::size_t> out;
  for (std::size_t j = 0; j < k_rbs_; ++j) {
    if (assigned(task, j)) out.push_back(j);
  }
  return out;
}

double compute_uc(Seconds t_cp, Seconds t_cm) {
  require(t_cp >= 0.0, "t_cp", "must be non-negative");
  require(t_cm >= 0.0, "t_cm", "must be non-negative");
  if (t_cm == 0.0) return 0.0;
  return t_cp / (t_cp + t_cm);
}

double compute_uc(Seconds t_cp, Seconds t_cm, Seconds t_p) {
  require(t_p > 0.0, "t_p", "must be positive");
  if (t_cm >= t_p) return 0.0;
  return compute_uc(t_cp, t_cm);
}

double compute_urb(const RbAllocation& alloc, std::size_t task, Seconds t_cm, Seconds t_p) {
  require(t_p > 0.0, "t_p", "must be positive");
  require(t_cm >= 0.0, "t_cm", "must be non-negative");
  require(t_cm <= t_p, "t_cm", "communication time exceeds the slot");
  return static_cast<double>(alloc.rb_count(task)) / static_cast<double>(alloc.k_rbs()) * (t_cm / t_p);
}

UccSum compute_ucc(std::span<const TaskUtilization> tasks) {
  UccSum out;
  double uc_sum = 0.0;
  double urb_sum = 0.0;
  for (const auto& t : tasks) {
    out.value += t.u_c * t.u_rb;
    uc_sum += t.u_c;
    urb_sum += t.u_rb;
  }
  constexpr double kSlack = 1e-12;
  out.uc_sum_violated = uc_sum > 1.0 + kSlack;
  out.urb_sum_violated = urb_sum > 1.0 + kSlack;
  return out;
}

double ucc_case1_bound(const CecConfig& cfg) {
  cfg.validate();
  return cfg.c;
}

double ucc_case1(std::span<const double> u_c, std::span<const double> mu, const CecConfig& cfg) {
  require(u_c.size() == mu.size(), "mu", "one entry per task required");
  const double share = cfg.c / static_cast<double>(cfg.n_tasks);
  double total = 0.0;
  for (std::size_t i = 0; i < u_c.size(); ++i) {
    require(u_c[i] >= 0.0 && u_c[i] <= 1.0, "u_c", "must lie in [0, 1]");
    require(mu[i] >= 0.0 && mu[i] <= 1.0, "mu", "must lie in [0, 1]");
    total += u_c[i] * share * mu[i];
  }
  return total;
}

namespace {

void require_times(Seconds t_cm, Seconds t_cp) {
  require(std::isfinite(t_cm) && t_cm > 0.0, "t_cm", "must be positive");
  require(std::isfinite(t_cp) && t_cp > 0.0, "t_cp", "must be positive");
}

}  // namespace

double ucc_case2(Seconds t_cm, Seconds t_cp, const CecConfig& cfg) {
  require_times(t_cm, t_cp);
  const double n = static_cast<double>(cfg.n_tasks);
  return cfg.c * t_cp * t_cm / ((t_cm + t_cp) * (cfg.c0 + t_cm + n * t_cp));
}

Seconds optimal_tcm_case2(Seconds t_cp, const CecConfig& cfg) {
  require(std::isfinite(t_cp) && t_cp > 0.0, "t_cp", "must be positive");
  return std::sqrt(t_cp * (static_cast<double>(cfg.n_tasks) * t_cp + cfg.c0));
}

double ucc_case3(Seconds t_cm, Seconds t_cp, const CecConfig& cfg) {
  require_times(t_cm, t_cp);
  const double n = static_cast<double>(cfg.n_tasks);
  return cfg.c * t_cp * t_cm / ((t_cm + t_cp) * (n * cfg.c0 + t_cm));
}

Case3Optimum optimal_tcm_case3(Seconds t_cp, const CecConfig& cfg) {
  require(std::isfinite(t_cp) && t_cp > 0.0, "t_cp", "must be positive");
  const double padding = static_cast<double>(cfg.n_tasks) * cfg.c0;
  require(padding > 0.0, "c0", "padded slot needs N * c0 > 0");
  Case3Optimum opt;
  opt.t_cm = std::sqrt(padding * t_cp);
  opt.degenerate = std::abs(padding - t_cp) <= 1e-12 * std::max(padding, t_cp);
  return opt;
}

Seconds slot_length(Seconds t_cm, Seconds t_cp, const CecConfig& cfg) {
  const double n = static_cast<double>(cfg.n_tasks);
  return cfg.slot_policy == SlotPolicy::AdaptiveSlot ? cfg.c0 + t_cm + n * t_cp : n * cfg.c0 + t_cm;
}

double packing_weight(const TaskProfile& task, std::size_t k_rbs, Seconds t_p) {
  require_times(task.t_cm, task.t_cp);
  require(t_p > 0.0, "t_p", "must be positive");
  require(k_rbs >= 1, "k_rbs", "need at least one resource block");
  return 1.0 / static_cast<double>(k_rbs) / (t_p / task.t_cm + t_p / task.t_cp);
}

double weighted_objective(std::span<const TaskProfile> tasks, const CecConfig& cfg, Seconds t_p) {
  double total = 0.0;
  for (const auto& t : tasks) {
    for (auto rb : t.rb_set) require(rb < cfg.k_rbs, "rb_set", "index out of range");
    total += packing_weight(t, cfg.k_rbs, t_p) * static_cast<double>(t.rb_set.size());
  }
  return total;
}

ExpectedTimes expected_times_gaussian(const TrafficScaling& scaling) {
  require(std::isfinite(scaling.mean) && scaling.mean > 0.0, "mean", "must be positive");
  require(scaling.stddev >= 0.0, "stddev", "must be non-negative");
  return {scaling.t_cm0 * scaling.mean, scaling.t_cp0 * scaling.mean};
}

std::vector<ExpectedTimes> sample_scaled_times(const TrafficScaling& scaling, std::size_t n, RngStream& rng) {
  expected_times_gaussian(scaling);
  std::vector<ExpectedTimes> out(n);
  for (auto& s : out) {
    const double a = scaling.mean + scaling.stddev * rng.normal();
    s = {scaling.t_cm0 * a, scaling.t_cp0 * a};
  }
  return out;
}

RbAllocation allocate_rbs_equal(const CecConfig& cfg) {
  cfg.validate();
  const double exact = cfg.c * static_cast<double>(cfg.k_rbs);
  const auto pool = static_cast<std::size_t>(std::llround(exact));
  require(pool <= cfg.k_rbs, "c", "c * K = " + std::to_string(exact) + " exceeds the RB pool");
  const std::size_t n = cfg.n_tasks;
  const std::size_t base = pool / n;
  const std::size_t extra = pool % n;
  if (n <= cfg.k_rbs) require(base >= 1, "c", "some task would receive no RB");

  RbAllocation alloc(n, cfg.k_rbs);
  std::size_t next = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t count = base + (i >= n - extra ? 1 : 0);
    for (std::size_t j = 0; j < count; ++j) alloc.assign(i, next++);
  }
  return alloc;
}

}  // namespace cecbench::cec
