/*
 * SPDX-License-Identifier: Apache-2.0
 */
#include "cecbench/kernels.hpp"

#if defined(CECBENCH_HAVE_AVX2_TU)
#include <immintrin.h>
#endif

namespace cecbench::kernels::avx2 {

#if defined(CECBENCH_HAVE_AVX2_TU)

std::size_t count_below(std::span<const double> values, double threshold) noexcept {
  const std::size_t n = values.size();
  const double* p = values.data();
  const __m256d thr = _mm256_set1_pd(threshold);
  std::size_t count = 0;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d v = _mm256_loadu_pd(p + i);
    const int mask = _mm256_movemask_pd(_mm256_cmp_pd(v, thr, _CMP_LT_OQ));
    count += static_cast<std::size_t>(__builtin_popcount(static_cast<unsigned>(mask)));
  }
  for (; i < n; ++i) count += p[i] < threshold ? 1 : 0;
  return count;
}

void harq_decode_rounds(const HarqBatch& batch, std::span<std::uint8_t> rounds_out) noexcept {
  const std::size_t trials = batch.trials;
  const __m256d one = _mm256_set1_pd(1.0);
  const __m256d snr = _mm256_set1_pd(batch.snr_linear);
  const __m256d thr = _mm256_set1_pd(batch.decode_threshold);
  const auto undecoded = static_cast<std::uint8_t>(batch.rounds + 1);

  std::size_t t = 0;
  for (; t + 4 <= trials; t += 4) {
    __m256d product = one;
    int settled = 0;  // bit k set once lane k has decoded
    std::uint8_t lane_round[4] = {undecoded, undecoded, undecoded, undecoded};
    for (std::size_t q = 0; q < batch.rounds && settled != 0xF; ++q) {
      for (std::size_t l = 0; l < batch.branches; ++l) {
        const __m256d h = _mm256_loadu_pd(batch.fades.data() + (q * batch.branches + l) * trials + t);
        product = _mm256_mul_pd(product, _mm256_add_pd(one, _mm256_mul_pd(snr, h)));
      }
      const int passed = _mm256_movemask_pd(_mm256_cmp_pd(product, thr, _CMP_GT_OQ));
      const int fresh = passed & ~settled;
      for (int k = 0; k < 4; ++k) {
        if (fresh & (1 << k)) lane_round[k] = static_cast<std::uint8_t>(q + 1);
      }
      settled |= passed;
    }
    for (int k = 0; k < 4; ++k) rounds_out[t + k] = lane_round[k];
  }
  if (t < trials) {
    // Tail: rerun the scalar loop on the remaining trials in place.
    for (; t < trials; ++t) {
      double product = 1.0;
      std::uint8_t decoded_at = undecoded;
      for (std::size_t q = 0; q < batch.rounds; ++q) {
        for (std::size_t l = 0; l < batch.branches; ++l) {
          product = product * (1.0 + batch.snr_linear * batch.fades[(q * batch.branches + l) * trials + t]);
        }
        if (product > batch.decode_threshold) {
          decoded_at = static_cast<std::uint8_t>(q + 1);
          break;
        }
      }
      rounds_out[t] = decoded_at;
    }
  }
}

void eval_rational_curve(const RationalCurve& curve, std::span<const double> t, std::span<double> out) noexcept {
  const std::size_t n = t.size();
  const __m256d num = _mm256_set1_pd(curve.numerator);
  const __m256d a = _mm256_set1_pd(curve.a);
  const __m256d b = _mm256_set1_pd(curve.b);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d x = _mm256_loadu_pd(t.data() + i);
    const __m256d den = _mm256_mul_pd(_mm256_add_pd(x, a), _mm256_add_pd(b, x));
    _mm256_storeu_pd(out.data() + i, _mm256_div_pd(_mm256_mul_pd(num, x), den));
  }
  for (; i < n; ++i) {
    const double x = t[i];
    out[i] = (curve.numerator * x) / ((x + curve.a) * (curve.b + x));
  }
}

#else

std::size_t count_below(std::span<const double> values, double threshold) noexcept {
  return scalar::count_below(values, threshold);
}
void harq_decode_rounds(const HarqBatch& batch, std::span<std::uint8_t> rounds_out) noexcept {
  scalar::harq_decode_rounds(batch, rounds_out);
}
void eval_rational_curve(const RationalCurve& curve, std::span<const double> t, std::span<double> out) noexcept {
  scalar::eval_rational_curve(curve, t, out);
}

#endif

}  // namespace cecbench::kernels::avx2
