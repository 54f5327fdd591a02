#include "qconv/kernels/microkernels.hpp"

namespace qconv::scalar {

int32_t dot_i8(const int8_t* a, const int8_t* b, size_t k) {
    int32_t acc = 0;
    for (size_t i = 0; i < k; i += 4) acc += dot4_i8(a + i, b + i);
    return acc;
}

// Composed of dot4_i8 over k/4 chunks; C[i][j] = sum_k A[i][k] * B[j][k].
void mmla_4x4_i8(const int8_t* a, const int8_t* b, size_t k, int32_t* out) {
    for (int i = 0; i < 4; ++i) {
        const int8_t* ai = a + size_t(i) * k;
        for (int j = 0; j < 4; ++j) {
            const int8_t* bj = b + size_t(j) * k;
            int32_t acc = 0;
            for (size_t c = 0; c < k; c += 4) acc += dot4_i8(ai + c, bj + c);
            out[i * 4 + j] = acc;
        }
    }
}

} // namespace qconv::scalar
