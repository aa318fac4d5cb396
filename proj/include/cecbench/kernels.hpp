/*
 * SPDX-License-Identifier: Apache-2.0
 */
#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>

// Data-parallel inner loops. Each kernel has a scalar reference in
// kernels::scalar and an AVX2 variant in kernels::avx2 that returns bitwise
// identical results; the unqualified entry points dispatch at runtime.
namespace cecbench::kernels {

enum class Isa { Scalar, Avx2 };

// Fixed for the process after the first call. Setting CECBENCH_FORCE_SCALAR=1
// in the environment pins the scalar path.
Isa active_isa() noexcept;
std::string_view isa_name(Isa isa) noexcept;
bool avx2_supported() noexcept;

// HARQ decode rounds. `fades` holds |h|^2 in round-branch-major order:
// fades[(q * branches + l) * trials + t] for round q, branch l, trial t.
// A trial decodes at the first round q where
//   prod_{i<=q, l} (1 + snr * h_il) > decode_threshold
// which is the accumulated-mutual-information test with the logs folded into
// decode_threshold = 2^(rate_norm * branches). Undecoded trials get rounds + 1.
struct HarqBatch {
  std::span<const double> fades;
  std::size_t trials = 0;
  std::size_t rounds = 0;
  std::size_t branches = 0;
  double snr_linear = 0.0;
  double decode_threshold = 1.0;
};

// Objective t * numerator / ((t + a) * (b + t)) over a batch of t. Both the
// ideal-scheduling and padded-slot efficiency curves have this form.
struct RationalCurve {
  double numerator = 0.0;
  double a = 0.0;
  double b = 0.0;
};

namespace scalar {
std::size_t count_below(std::span<const double> values, double threshold) noexcept;
void harq_decode_rounds(const HarqBatch& batch, std::span<std::uint8_t> rounds_out) noexcept;
void eval_rational_curve(const RationalCurve& curve, std::span<const double> t, std::span<double> out) noexcept;
}  // namespace scalar

namespace avx2 {
std::size_t count_below(std::span<const double> values, double threshold) noexcept;
void harq_decode_rounds(const HarqBatch& batch, std::span<std::uint8_t> rounds_out) noexcept;
void eval_rational_curve(const RationalCurve& curve, std::span<const double> t, std::span<double> out) noexcept;
}  // namespace avx2

std::size_t count_below(std::span<const double> values, double threshold) noexcept;
void harq_decode_rounds(const HarqBatch& batch, std::span<std::uint8_t> rounds_out);
void eval_rational_curve(const RationalCurve& curve, std::span<const double> t, std::span<double> out);

// Index of the first maximum of the curve over t (ties resolve to the lowest
// index). Returns 0 for an empty grid.
std::size_t argmax_rational_curve(const RationalCurve& curve, std::span<const double> t);

}  // namespace cecbench::kernels
