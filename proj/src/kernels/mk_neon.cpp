// NEON int8 micro-kernels built on the vmull/vpadal widening idiom:
// int8 x int8 -> int16 products, pairwise-accumulated into int32 lanes.
// Exact integer arithmetic, bit-identical to the scalar reference.

#include "qconv/kernels/microkernels.hpp"

#if defined(QCONV_WITH_NEON)

#include <arm_neon.h>

namespace qconv::neon {

static inline int32_t hsum_s32(int32x4_t v) {
#if defined(__aarch64__)
    return vaddvq_s32(v);
#else
    int32x2_t s = vadd_s32(vget_low_s32(v), vget_high_s32(v));
    s = vpadd_s32(s, s);
    return vget_lane_s32(s, 0);
#endif
}

int32_t dot_i8(const int8_t* a, const int8_t* b, size_t k) {
    int32x4_t acc = vdupq_n_s32(0);
    size_t i = 0;
    for (; i + 16 <= k; i += 16) {
        int8x16_t va = vld1q_s8(a + i);
        int8x16_t vb = vld1q_s8(b + i);
        int16x8_t p_lo = vmull_s8(vget_low_s8(va), vget_low_s8(vb));
        int16x8_t p_hi = vmull_s8(vget_high_s8(va), vget_high_s8(vb));
        acc = vpadalq_s16(acc, p_lo);
        acc = vpadalq_s16(acc, p_hi);
    }
    for (; i + 8 <= k; i += 8) {
        int8x8_t va = vld1_s8(a + i);
        int8x8_t vb = vld1_s8(b + i);
        acc = vpadalq_s16(acc, vmull_s8(va, vb));
    }
    int32_t sum = hsum_s32(acc);
    for (; i < k; i += 4) sum += dot4_i8(a + i, b + i);
    return sum;
}

void mmla_4x4_i8(const int8_t* a, const int8_t* b, size_t k, int32_t* out) {
    for (int i = 0; i < 4; ++i) {
        const int8_t* ai = a + size_t(i) * k;
        for (int j = 0; j < 4; ++j) out[i * 4 + j] = dot_i8(ai, b + size_t(j) * k, k);
    }
}

} // namespace qconv::neon

#endif // QCONV_WITH_NEON
