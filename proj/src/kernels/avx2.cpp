// AVX2 variants. This translation unit is the only one compiled with -mavx2;
// nothing here may be called unless the CPU reports AVX2 support.
//
// Multiplies and adds are issued separately (no FMA) so that axpy and
// multiply round exactly like the scalar reference.

#include <immintrin.h>

#include <cmath>
#include <limits>

#include "trialmed/kernels.hpp"

namespace trialmed::kernels::avx2 {
namespace {

constexpr std::size_t kLanes = 4;

void axpy(double a, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    __m256d vy = _mm256_loadu_pd(y + i);
    vy = _mm256_add_pd(vy, _mm256_mul_pd(va, _mm256_loadu_pd(x + i)));
    _mm256_storeu_pd(y + i, vy);
  }
  for (; i < n; ++i) y[i] += a * x[i];
}

void multiply(const double* x, const double* z, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    _mm256_storeu_pd(out + i, _mm256_mul_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(z + i)));
  }
  for (; i < n; ++i) out[i] = x[i] * z[i];
}

// exp(x) = 2^n * exp(r), n = round(x / ln 2), |r| <= ln2 / 2, with exp(r)
// from a degree-13 Taylor polynomial. 2^n is applied as two halves so that
// results in the subnormal range are still produced.
constexpr double kExpHi = 709.782712893383973096;   // above: +inf
constexpr double kExpLo = -745.133219101941108420;  // below: 0
constexpr double kLog2e = 1.44269504088896338700;
constexpr double kLn2Hi = 6.93147180369123816490e-01;
constexpr double kLn2Lo = 1.90821492927058770002e-10;

inline __m256d pow2_int(__m256d k) {
  // k is an integral double in [-1022, 1023].
  const __m256d magic = _mm256_set1_pd(4503599627370496.0);  // 2^52
  const __m256d biased = _mm256_add_pd(k, _mm256_set1_pd(1023.0 + 4503599627370496.0));
  __m256i bits = _mm256_sub_epi64(_mm256_castpd_si256(biased), _mm256_castpd_si256(magic));
  bits = _mm256_slli_epi64(bits, 52);
  return _mm256_castsi256_pd(bits);
}

inline __m256d exp4(__m256d x) {
  const __m256d hi = _mm256_set1_pd(kExpHi);
  const __m256d lo = _mm256_set1_pd(kExpLo);
  const __m256d xc = _mm256_max_pd(_mm256_min_pd(x, hi), lo);

  const __m256d n = _mm256_round_pd(_mm256_mul_pd(xc, _mm256_set1_pd(kLog2e)),
                                    _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
  __m256d r = _mm256_sub_pd(xc, _mm256_mul_pd(n, _mm256_set1_pd(kLn2Hi)));
  r = _mm256_sub_pd(r, _mm256_mul_pd(n, _mm256_set1_pd(kLn2Lo)));

  static constexpr double kCoef[] = {
      1.0 / 6227020800.0, 1.0 / 479001600.0, 1.0 / 39916800.0, 1.0 / 3628800.0,
      1.0 / 362880.0,     1.0 / 40320.0,     1.0 / 5040.0,     1.0 / 720.0,
      1.0 / 120.0,        1.0 / 24.0,        1.0 / 6.0,        0.5,
      1.0,                1.0};
  __m256d p = _mm256_set1_pd(kCoef[0]);
  for (std::size_t j = 1; j < sizeof(kCoef) / sizeof(kCoef[0]); ++j) {
    p = _mm256_add_pd(_mm256_mul_pd(p, r), _mm256_set1_pd(kCoef[j]));
  }

  const __m256d n1 = _mm256_floor_pd(_mm256_mul_pd(n, _mm256_set1_pd(0.5)));
  const __m256d n2 = _mm256_sub_pd(n, n1);
  __m256d y = _mm256_mul_pd(_mm256_mul_pd(p, pow2_int(n1)), pow2_int(n2));

  const __m256d over = _mm256_cmp_pd(x, hi, _CMP_GT_OQ);
  const __m256d under = _mm256_cmp_pd(x, lo, _CMP_LT_OQ);
  y = _mm256_blendv_pd(y, _mm256_set1_pd(std::numeric_limits<double>::infinity()), over);
  y = _mm256_blendv_pd(y, _mm256_setzero_pd(), under);
  return y;
}

void exp(const double* x, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) _mm256_storeu_pd(out + i, exp4(_mm256_loadu_pd(x + i)));
  if (i < n) {
    alignas(32) double tail[kLanes] = {0.0, 0.0, 0.0, 0.0};
    for (std::size_t j = 0; i + j < n; ++j) tail[j] = x[i + j];
    _mm256_store_pd(tail, exp4(_mm256_load_pd(tail)));
    for (std::size_t j = 0; i + j < n; ++j) out[i + j] = tail[j];
  }
}

inline __m256d logistic4(__m256d x) {
  const __m256d one = _mm256_set1_pd(1.0);
  const __m256d e = exp4(_mm256_sub_pd(_mm256_setzero_pd(), x));
  return _mm256_div_pd(one, _mm256_add_pd(one, e));
}

void logistic(const double* x, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) _mm256_storeu_pd(out + i, logistic4(_mm256_loadu_pd(x + i)));
  if (i < n) {
    alignas(32) double tail[kLanes] = {0.0, 0.0, 0.0, 0.0};
    for (std::size_t j = 0; i + j < n; ++j) tail[j] = x[i + j];
    _mm256_store_pd(tail, logistic4(_mm256_load_pd(tail)));
    for (std::size_t j = 0; i + j < n; ++j) out[i + j] = tail[j];
  }
}

void bernoulli(const double* u, const double* p, double* out, std::size_t n) {
  const __m256d one = _mm256_set1_pd(1.0);
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    const __m256d lt = _mm256_cmp_pd(_mm256_loadu_pd(u + i), _mm256_loadu_pd(p + i), _CMP_LT_OQ);
    _mm256_storeu_pd(out + i, _mm256_and_pd(lt, one));
  }
  for (; i < n; ++i) out[i] = u[i] < p[i] ? 1.0 : 0.0;
}

double sum(const double* x, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) acc = _mm256_add_pd(acc, _mm256_loadu_pd(x + i));
  alignas(32) double lanes[kLanes];
  _mm256_store_pd(lanes, acc);
  double s = (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
  for (; i < n; ++i) s += x[i];
  return s;
}

}  // namespace

const KernelTable kTable{axpy, multiply, exp, logistic, bernoulli, sum};

}  // namespace trialmed::kernels::avx2
