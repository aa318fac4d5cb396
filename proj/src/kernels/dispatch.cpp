/*
 * SPDX-License-Identifier: Apache-2.0
 */
#include <cstdlib>
#include <cstring>
#include <stdexcept>
#include <vector>

#include "cecbench/kernels.hpp"

namespace cecbench::kernels {
namespace {

Isa detect() noexcept {
  if (const char* force = std::getenv("CECBENCH_FORCE_SCALAR"); force && std::strcmp(force, "0") != 0) {
    return Isa::Scalar;
  }
  return avx2_supported() ? Isa::Avx2 : Isa::Scalar;
}

}  // namespace

bool avx2_supported() noexcept {
#if defined(CECBENCH_HAVE_AVX2_TU) && (defined(__GNUC__) || defined(__clang__))
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

Isa active_isa() noexcept {
  static const Isa isa = detect();
  return isa;
}

std::string_view isa_name(Isa isa) noexcept { return isa == Isa::Avx2 ? "avx2" : "scalar"; }

std::size_t count_below(std::span<const double> values, double threshold) noexcept {
  return active_isa() == Isa::Avx2 ? avx2::count_below(values, threshold) : scalar::count_below(values, threshold);
}

void harq_decode_rounds(const HarqBatch& batch, std::span<std::uint8_t> rounds_out) {
  if (batch.fades.size() < batch.trials * batch.rounds * batch.branches || rounds_out.size() < batch.trials) {
    throw std::invalid_argument("harq_decode_rounds: buffer sizes do not match batch shape");
  }
  if (batch.rounds > 254) throw std::invalid_argument("harq_decode_rounds: at most 254 rounds");
  if (active_isa() == Isa::Avx2) {
    avx2::harq_decode_rounds(batch, rounds_out);
  } else {
    scalar::harq_decode_rounds(batch, rounds_out);
  }
}

void eval_rational_curve(const RationalCurve& curve, std::span<const double> t, std::span<double> out) {
  if (out.size() < t.size()) throw std::invalid_argument("eval_rational_curve: output too small");
  if (active_isa() == Isa::Avx2) {
    avx2::eval_rational_curve(curve, t, out);
  } else {
    scalar::eval_rational_curve(curve, t, out);
  }
}

std::size_t argmax_rational_curve(const RationalCurve& curve, std::span<const double> t) {
  if (t.empty()) return 0;
  std::vector<double> values(t.size());
  eval_rational_curve(curve, t, values);
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return best;
}

}  // namespace cecbench::kernels
