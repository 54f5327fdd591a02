// Internal raw convolution kernels. All take resolved geometry, typed raw
// pointers and a bump-allocated scratch area; no heap allocation inside.
#pragma once

#include <cassert>
#include <cstring>

#include "qconv/kernels/conv.hpp"

namespace qconv::conv_impl {

constexpr size_t kScratchAlign = 64;

inline int64_t ceil_div(int64_t a, int64_t b) { return (a + b - 1) / b; }
inline size_t align_up(size_t n, size_t a) { return (n + a - 1) / a * a; }

class Scratch {
public:
    explicit Scratch(std::span<std::byte> s) : base_(s.data()), left_(s.size()) {}

    template <typename T>
    T* alloc(int64_t count) {
        size_t bytes = size_t(count) * sizeof(T);
        auto p = reinterpret_cast<uintptr_t>(base_);
        size_t pad = align_up(p, kScratchAlign) - p;
        if (pad + bytes > left_)
            fail(ErrorKind::InvalidArgument, "conv scratch buffer too small");
        T* out = reinterpret_cast<T*>(base_ + pad);
        base_ += pad + bytes;
        left_ -= pad + bytes;
        return out;
    }

private:
    std::byte* base_;
    size_t left_;
};

struct Geom {
    ConvSpec spec;
    ConvDims dims;
};

template <typename TIn, typename TAcc>
void direct_conv(const Geom& g, const TIn* in, const TIn* w, TAcc* out);

template <typename TIn, typename TAcc>
void nchw_spatial_pack(const Geom& g, const TIn* in, const TIn* w, TAcc* out, Scratch& scr);

void nchw_simd_i8(const Geom& g, const int8_t* in, const int8_t* w, int32_t* out, Scratch& scr);
void nhwc_spatial_pack_f32(const Geom& g, const float* in, const float* w, float* out, Scratch& scr);
void nhwc_quantized_interleaved_i8(const Geom& g, const int8_t* in, const int8_t* w, int32_t* out,
                                   Scratch& scr);

size_t nchw_spatial_pack_scratch(const Geom& g, size_t in_elem_bytes, size_t acc_elem_bytes);
size_t nchw_simd_i8_scratch(const Geom& g);
size_t nhwc_spatial_pack_f32_scratch(const Geom& g);
size_t nhwc_quantized_interleaved_i8_scratch(const Geom& g);

} // namespace qconv::conv_impl
