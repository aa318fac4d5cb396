/*
 * SPDX-License-Identifier: Apache-2.0
 */
#include "cecbench/kernels.hpp"

namespace cecbench::kernels::scalar {

std::size_t count_below(std::span<const double> values, double threshold) noexcept {
  std::size_t n = 0;
  for (double v : values) n += v < threshold ? 1 : 0;
  return n;
}

void harq_decode_rounds(const HarqBatch& batch, std::span<std::uint8_t> rounds_out) noexcept {
  const std::size_t trials = batch.trials;
  for (std::size_t t = 0; t < trials; ++t) {
    double product = 1.0;
    std::uint8_t decoded_at = static_cast<std::uint8_t>(batch.rounds + 1);
    for (std::size_t q = 0; q < batch.rounds; ++q) {
      for (std::size_t l = 0; l < batch.branches; ++l) {
        const double h = batch.fades[(q * batch.branches + l) * trials + t];
        product = product * (1.0 + batch.snr_linear * h);
      }
      if (product > batch.decode_threshold) {
        decoded_at = static_cast<std::uint8_t>(q + 1);
        break;
      }
    }
    rounds_out[t] = decoded_at;
  }
}

void eval_rational_curve(const RationalCurve& curve, std::span<const double> t, std::span<double> out) noexcept {
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double x = t[i];
    out[i] = (curve.numerator * x) / ((x + curve.a) * (curve.b + x));
  }
}

}  // namespace cecbench::kernels::scalar
