#pragma once

#include "qconv/tensor.hpp"

namespace qconv {

// Symmetric per-tensor quantization parameters. The zero point is fixed at 0;
// the scale is stored and applied at fp32 precision, never narrowed.
struct QuantParams {
    float scale = 1.0f;
};

// scale = max|x| / 127 over all elements; all-zero tensors get scale 1.0.
QuantParams calibrate_maxabs(const Tensor& t);

// q = clamp(round_half_to_even(x / scale), -127, +127). -128 is never produced,
// which keeps the code range symmetric for the int8 dot-product kernels.
Tensor quantize(const Tensor& t, QuantParams qp);

// x = q * scale at fp32 precision.
Tensor dequantize(const Tensor& t, QuantParams qp);

// Converts int32 conv/dense accumulators back to fp32 intermediates:
// x = acc * (in_scale * w_scale). This is the only path from int8 accumulators
// to the fp32 representation the rest of the graph consumes.
Tensor dequantize_accumulator(const Tensor& acc, float in_scale, float w_scale);

// Element-wise raw variants shared by the tensor-level ops and the executors.
namespace raw {
int8_t quantize_one(float x, float scale);
void quantize(const float* src, int8_t* dst, int64_t n, float scale);
void dequantize(const int8_t* src, float* dst, int64_t n, float scale);
void dequantize_accumulator(const int32_t* src, float* dst, int64_t n, float in_scale, float w_scale);
} // namespace raw

} // namespace qconv
