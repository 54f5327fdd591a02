#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "qconv/tensor.hpp"

namespace qconv {

// Widening 4-lane int8 multiply-accumulate: sum of a[i]*b[i] in exact 32-bit
// arithmetic. |codes| <= 127 so the largest magnitude is 4*127^2 = 64516; no
// overflow or saturation is possible. This is the mathematical contract the
// vmlal-style hardware instruction realizes.
inline int32_t dot4_i8(const int8_t* a, const int8_t* b) {
    return int32_t(a[0]) * int32_t(b[0]) + int32_t(a[1]) * int32_t(b[1]) +
           int32_t(a[2]) * int32_t(b[2]) + int32_t(a[3]) * int32_t(b[3]);
}

using DotI8Fn = int32_t (*)(const int8_t*, const int8_t*, size_t);
using Mmla4x4Fn = void (*)(const int8_t*, const int8_t*, size_t, int32_t*);

enum class MicrokernelBackend : uint8_t { Auto, Scalar, Avx2, Neon };

const char* backend_name(MicrokernelBackend b);

struct MicrokernelTable {
    const char* name;
    DotI8Fn dot_i8;        // length-k int8 dot product, k % 4 == 0
    Mmla4x4Fn mmla_4x4_i8; // A[4][k] * B[4][k]^T -> 4x4 int32 tile, row-major out[16]
};

// Runtime selection. Auto picks the widest backend the CPU supports; Scalar is
// always available. All backends produce bit-identical results (exact integer
// arithmetic), which the equivalence tests enforce.
const MicrokernelTable& active_microkernels();
void set_microkernel_backend(MicrokernelBackend b);
std::vector<MicrokernelBackend> available_microkernel_backends();

// Dispatched entry points.
inline int32_t dot_i8(const int8_t* a, const int8_t* b, size_t k) {
    return active_microkernels().dot_i8(a, b, k);
}
inline void mmla_4x4_i8(const int8_t* a, const int8_t* b, size_t k, int32_t* out) {
    active_microkernels().mmla_4x4_i8(a, b, k, out);
}

// Tensor-level wrapper over the 4x4 panel product: A and B are InterleavedPanel
// tensors of shape (4, K) holding int8 codes with the same K (a multiple of 4;
// pad shorter panels with zero codes). Returns the 4x4 int32 tile.
Tensor mmla_4x4_i8(const Tensor& a, const Tensor& b);

// Scalar reference implementations, always compiled; the oracle the SIMD
// variants are equivalence-tested against.
namespace scalar {
int32_t dot_i8(const int8_t* a, const int8_t* b, size_t k);
void mmla_4x4_i8(const int8_t* a, const int8_t* b, size_t k, int32_t* out);
} // namespace scalar

} // namespace qconv
