/*
 * SPDX-License-Identifier: Apache-2.0
 */
#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "cecbench/rng.hpp"

// Communication/edge-computing efficiency model: per-task compute and RB
// utilizations, the aggregate efficiency U_cc, and the closed-form optima of
// the restricted (equal-RB, homogeneous task) cases.
namespace cecbench::cec {

using Seconds = double;

enum class SlotPolicy {
  AdaptiveSlot,  // T_p = c0 + T_cm + N * T_cp
  PaddedSlot,    // T_p = N * c0 + T_cm
};

struct CecConfig {
  std::size_t n_tasks = 100;
  std::size_t k_rbs = 200;
  double c = 1.0;
  Seconds c0 = 1.5;
  double epsilon = 1.0;
  SlotPolicy slot_policy = SlotPolicy::PaddedSlot;

  // Enforces the admissible range of c: 0 < c < K - N when N < K, and
  // 0 < c <= 1 otherwise.
  void validate() const;
};

struct TaskProfile {
  std::size_t task_id = 0;
  double data_bits = 1.0;
  Seconds t_cp = 0.0;
  Seconds t_cm = 0.0;
  std::vector<std::size_t> rb_set;  // 0-based RB indices
};

// Binary N x K assignment of resource blocks to tasks, stored row-major.
class RbAllocation {
 public:
  RbAllocation(std::size_t n_tasks, std::size_t k_rbs);

  std::size_t n_tasks() const noexcept { return n_tasks_; }
  std::size_t k_rbs() const noexcept { return k_rbs_; }

  bool assigned(std::size_t task, std::size_t rb) const;
  // Throws if the RB already belongs to another task.
  void assign(std::size_t task, std::size_t rb);
  std::size_t rb_count(std::size_t task) const;
  std::size_t total_assigned() const noexcept;
  std::vector<std::size_t> rbs_of(std::size_t task) const;

  // No RB is held by two tasks (enforced by assign) and the assigned total
  // equals `pool` (K for a full partition).
  bool is_partition_of(std::size_t pool) const noexcept { return total_assigned() == pool; }

 private:
  std::size_t n_tasks_;
  std::size_t k_rbs_;
  std::vector<std::uint8_t> indicator_;
  std::vector<std::int64_t> owner_;
};

struct TaskUtilization {
  std::size_t task_id = 0;
  Seconds t_cm = 0.0;
  Seconds t_cp = 0.0;
  double u_c = 0.0;
  double u_rb = 0.0;
};

struct ScheduleResult {
  std::vector<TaskUtilization> per_task;
  double u_cc = 0.0;
  Seconds t_p = 0.0;
  bool uc_sum_violated = false;
  bool urb_sum_violated = false;
};

struct UccSum {
  double value = 0.0;
  bool uc_sum_violated = false;
  bool urb_sum_violated = false;
  bool feasible() const noexcept { return !uc_sum_violated && !urb_sum_violated; }
};

// T_cp / (T_cp + T_cm); zero when there is no communication.
double compute_uc(Seconds t_cp, Seconds t_cm);
// Slot-aware variant: zero as well when the communication fills the slot.
double compute_uc(Seconds t_cp, Seconds t_cm, Seconds t_p);

double compute_urb(const RbAllocation& alloc, std::size_t task, Seconds t_cm, Seconds t_p);

UccSum compute_ucc(std::span<const TaskUtilization> tasks);

// Case I: with every u_c and mu at most one the efficiency cannot exceed c.
double ucc_case1_bound(const CecConfig& cfg);
double ucc_case1(std::span<const double> u_c, std::span<const double> mu, const CecConfig& cfg);

double ucc_case2(Seconds t_cm, Seconds t_cp, const CecConfig& cfg);
Seconds optimal_tcm_case2(Seconds t_cp, const CecConfig& cfg);

double ucc_case3(Seconds t_cm, Seconds t_cp, const CecConfig& cfg);

struct Case3Optimum {
  Seconds t_cm = 0.0;
  // N * c0 == T_cp: the derivative test is inconclusive as stated for the
  // model, although sqrt(N c0 T_cp) is still the maximizer numerically.
  bool degenerate = false;
};
Case3Optimum optimal_tcm_case3(Seconds t_cp, const CecConfig& cfg);

// Slot length implied by the configured policy at communication time t_cm.
Seconds slot_length(Seconds t_cm, Seconds t_cp, const CecConfig& cfg);

// Weighted set-packing objective sum_i W(i) |k(i)| with
// W(i) = (1/K) (T_p/T_cm(i) + T_p/T_cp(i))^-1.
double packing_weight(const TaskProfile& task, std::size_t k_rbs, Seconds t_p);
double weighted_objective(std::span<const TaskProfile> tasks, const CecConfig& cfg, Seconds t_p);

struct TrafficScaling {
  double mean = 1.0;
  double stddev = 0.0;
  Seconds t_cm0 = 0.0;
  Seconds t_cp0 = 0.0;
};

struct ExpectedTimes {
  Seconds t_cm = 0.0;
  Seconds t_cp = 0.0;
};

ExpectedTimes expected_times_gaussian(const TrafficScaling& scaling);
// Draws of (a_i T_cm(0), a_i T_cp(0)) with a_i ~ N(mean, stddev^2).
std::vector<ExpectedTimes> sample_scaled_times(const TrafficScaling& scaling, std::size_t n, RngStream& rng);

// Equal split of round(c K) RBs: the first N - r tasks get floor(cK/N), the
// last r get one more.
RbAllocation allocate_rbs_equal(const CecConfig& cfg);

}  // namespace cecbench::cec
