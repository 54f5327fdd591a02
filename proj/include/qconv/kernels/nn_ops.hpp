#pragma once

#include <span>

#include "qconv/tensor.hpp"

namespace qconv {

// Non-conv graph node kernels. All fp32 ops use a fixed accumulation order so
// results are identical across executors.

Tensor relu(const Tensor& x);
Tensor add(const Tensor& a, const Tensor& b);

// (N,C,H,W) or (N,H,W,C) fp32 -> (N,C) row-major
Tensor global_avg_pool(const Tensor& x);

// x: (N,C), weight: (units,C). fp32 -> fp32; the int8 flavor takes codes and
// produces int32 accumulators through the dispatched dot_i8 micro-kernel.
Tensor dense_f32(const Tensor& x, const Tensor& weight);
Tensor dense_i8(const Tensor& x, const Tensor& weight);

size_t dense_i8_scratch_bytes(int64_t in_features, int64_t units);

namespace raw {
void relu(const float* src, float* dst, int64_t n);
void add(const float* a, const float* b, float* dst, int64_t n);
void global_avg_pool_nchw(const float* src, float* dst, int64_t n, int64_t c, int64_t hw);
void global_avg_pool_nhwc(const float* src, float* dst, int64_t n, int64_t hw, int64_t c);
void dense_f32(const float* x, const float* w, float* out, int64_t n, int64_t c, int64_t units);
void dense_i8(const int8_t* x, const int8_t* w, int32_t* out, int64_t n, int64_t c, int64_t units,
              std::span<std::byte> scratch);
} // namespace raw

} // namespace qconv
