// AVX2 int8 micro-kernels. Compiled with -mavx2 in its own translation unit;
// only reachable through the dispatch table after a runtime cpuid check.
//
// All arithmetic is exact: int8 products are at most 127*127 = 16129, the
// madd pair-sums fit easily in int32, and lanes accumulate k/8 pair-sums each,
// so results are bit-identical to the scalar reference for any feasible k.

#include "qconv/kernels/microkernels.hpp"

#if defined(QCONV_WITH_AVX2)

#include <immintrin.h>

namespace qconv::avx2 {

static inline int32_t hsum_epi32(__m256i v) {
    __m128i lo = _mm256_castsi256_si128(v);
    __m128i hi = _mm256_extracti128_si256(v, 1);
    __m128i s = _mm_add_epi32(lo, hi);
    s = _mm_add_epi32(s, _mm_shuffle_epi32(s, _MM_SHUFFLE(1, 0, 3, 2)));
    s = _mm_add_epi32(s, _mm_shuffle_epi32(s, _MM_SHUFFLE(2, 3, 0, 1)));
    return _mm_cvtsi128_si32(s);
}

int32_t dot_i8(const int8_t* a, const int8_t* b, size_t k) {
    __m256i acc = _mm256_setzero_si256();
    size_t i = 0;
    for (; i + 32 <= k; i += 32) {
        __m256i va = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(a + i));
        __m256i vb = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(b + i));
        __m256i a_lo = _mm256_cvtepi8_epi16(_mm256_castsi256_si128(va));
        __m256i a_hi = _mm256_cvtepi8_epi16(_mm256_extracti128_si256(va, 1));
        __m256i b_lo = _mm256_cvtepi8_epi16(_mm256_castsi256_si128(vb));
        __m256i b_hi = _mm256_cvtepi8_epi16(_mm256_extracti128_si256(vb, 1));
        acc = _mm256_add_epi32(acc, _mm256_madd_epi16(a_lo, b_lo));
        acc = _mm256_add_epi32(acc, _mm256_madd_epi16(a_hi, b_hi));
    }
    for (; i + 16 <= k; i += 16) {
        __m128i va = _mm_loadu_si128(reinterpret_cast<const __m128i*>(a + i));
        __m128i vb = _mm_loadu_si128(reinterpret_cast<const __m128i*>(b + i));
        __m256i a16 = _mm256_cvtepi8_epi16(va);
        __m256i b16 = _mm256_cvtepi8_epi16(vb);
        acc = _mm256_add_epi32(acc, _mm256_madd_epi16(a16, b16));
    }
    int32_t sum = hsum_epi32(acc);
    for (; i < k; i += 4) sum += dot4_i8(a + i, b + i);
    return sum;
}

void mmla_4x4_i8(const int8_t* a, const int8_t* b, size_t k, int32_t* out) {
    for (int i = 0; i < 4; ++i) {
        const int8_t* ai = a + size_t(i) * k;
        for (int j = 0; j < 4; ++j) out[i * 4 + j] = dot_i8(ai, b + size_t(j) * k, k);
    }
}

} // namespace qconv::avx2

#endif // QCONV_WITH_AVX2
