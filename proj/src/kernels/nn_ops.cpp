#include "qconv/kernels/nn_ops.hpp"

#include <vector>

#include "qconv/kernels/microkernels.hpp"
#include "conv_impl.hpp"

namespace qconv {

namespace raw {

void relu(const float* src, float* dst, int64_t n) {
    for (int64_t i = 0; i < n; ++i) dst[i] = src[i] > 0.0f ? src[i] : 0.0f;
}

void add(const float* a, const float* b, float* dst, int64_t n) {
    for (int64_t i = 0; i < n; ++i) dst[i] = a[i] + b[i];
}

void global_avg_pool_nchw(const float* src, float* dst, int64_t n, int64_t c, int64_t hw) {
    const float inv = 1.0f / float(hw);
    for (int64_t in = 0; in < n; ++in)
        for (int64_t ic = 0; ic < c; ++ic) {
            const float* p = src + (in * c + ic) * hw;
            float acc = 0.0f;
            for (int64_t i = 0; i < hw; ++i) acc += p[i];
            dst[in * c + ic] = acc * inv;
        }
}

void global_avg_pool_nhwc(const float* src, float* dst, int64_t n, int64_t hw, int64_t c) {
    const float inv = 1.0f / float(hw);
    for (int64_t in = 0; in < n; ++in) {
        float* d = dst + in * c;
        for (int64_t ic = 0; ic < c; ++ic) d[ic] = 0.0f;
        const float* p = src + in * hw * c;
        for (int64_t i = 0; i < hw; ++i)
            for (int64_t ic = 0; ic < c; ++ic) d[ic] += p[i * c + ic];
        for (int64_t ic = 0; ic < c; ++ic) d[ic] *= inv;
    }
}

void dense_f32(const float* x, const float* w, float* out, int64_t n, int64_t c, int64_t units) {
    for (int64_t in = 0; in < n; ++in)
        for (int64_t u = 0; u < units; ++u) {
            float acc = 0.0f;
            const float* xp = x + in * c;
            const float* wp = w + u * c;
            for (int64_t i = 0; i < c; ++i) acc += xp[i] * wp[i];
            out[in * units + u] = acc;
        }
}

void dense_i8(const int8_t* x, const int8_t* w, int32_t* out, int64_t n, int64_t c, int64_t units,
              std::span<std::byte> scratch) {
    const int64_t cp = int64_t(conv_impl::align_up(size_t(c), 4));
    conv_impl::Scratch scr(scratch);
    int8_t* pw = scr.alloc<int8_t>(units * cp);
    int8_t* px = scr.alloc<int8_t>(cp);
    std::memset(pw, 0, size_t(units * cp));
    for (int64_t u = 0; u < units; ++u) std::memcpy(pw + u * cp, w + u * c, size_t(c));
    for (int64_t in = 0; in < n; ++in) {
        std::memset(px, 0, size_t(cp));
        std::memcpy(px, x + in * c, size_t(c));
        for (int64_t u = 0; u < units; ++u)
            out[in * units + u] = dot_i8(px, pw + u * cp, size_t(cp));
    }
}

} // namespace raw

size_t dense_i8_scratch_bytes(int64_t in_features, int64_t units) {
    const size_t cp = conv_impl::align_up(size_t(in_features), 4);
    return conv_impl::kScratchAlign * 3 + cp * size_t(units) + cp;
}

namespace {

void check_f32(const Tensor& t, const char* who) {
    if (t.elem() != ElemType::FP32)
        fail(ErrorKind::TypeMismatch, std::string(who) + " expects fp32 input");
}

} // namespace

Tensor relu(const Tensor& x) {
    check_f32(x, "relu");
    Tensor out = Tensor::zeros(x.layout(), ElemType::FP32, x.shape());
    raw::relu(x.data<float>(), out.data<float>(), x.numel());
    return out;
}

Tensor add(const Tensor& a, const Tensor& b) {
    check_f32(a, "add");
    check_f32(b, "add");
    if (a.shape() != b.shape() || !(a.layout() == b.layout()))
        fail(ErrorKind::ShapeMismatch, "add expects identical shapes and layouts");
    Tensor out = Tensor::zeros(a.layout(), ElemType::FP32, a.shape());
    raw::add(a.data<float>(), b.data<float>(), out.data<float>(), a.numel());
    return out;
}

Tensor global_avg_pool(const Tensor& x) {
    check_f32(x, "global_avg_pool");
    if (x.rank() != 4) fail(ErrorKind::ShapeMismatch, "global_avg_pool expects rank 4");
    const LayoutTag tag = x.layout().tag;
    if (tag != LayoutTag::NCHW && tag != LayoutTag::NHWC)
        fail(ErrorKind::LayoutMismatch, "global_avg_pool expects NCHW or NHWC");
    const int64_t n = x.dim(0);
    const int64_t c = tag == LayoutTag::NCHW ? x.dim(1) : x.dim(3);
    const int64_t hw = tag == LayoutTag::NCHW ? x.dim(2) * x.dim(3) : x.dim(1) * x.dim(2);
    Tensor out = Tensor::zeros(Layout::nchw(), ElemType::FP32, {n, c});
    if (tag == LayoutTag::NCHW)
        raw::global_avg_pool_nchw(x.data<float>(), out.data<float>(), n, c, hw);
    else
        raw::global_avg_pool_nhwc(x.data<float>(), out.data<float>(), n, hw, c);
    return out;
}

namespace {

void check_dense_shapes(const Tensor& x, const Tensor& w) {
    if (x.rank() != 2 || w.rank() != 2)
        fail(ErrorKind::ShapeMismatch, "dense expects rank-2 input and weight");
    if (x.dim(1) != w.dim(1)) fail(ErrorKind::ShapeMismatch, "dense feature extents mismatch");
}

} // namespace

Tensor dense_f32(const Tensor& x, const Tensor& w) {
    check_f32(x, "dense_f32");
    check_f32(w, "dense_f32");
    check_dense_shapes(x, w);
    Tensor out = Tensor::zeros(Layout::nchw(), ElemType::FP32, {x.dim(0), w.dim(0)});
    raw::dense_f32(x.data<float>(), w.data<float>(), out.data<float>(), x.dim(0), x.dim(1), w.dim(0));
    return out;
}

Tensor dense_i8(const Tensor& x, const Tensor& w) {
    if (x.elem() != ElemType::I8 || w.elem() != ElemType::I8)
        fail(ErrorKind::TypeMismatch, "dense_i8 expects int8 codes");
    check_dense_shapes(x, w);
    Tensor out = Tensor::zeros(Layout::nchw(), ElemType::I32, {x.dim(0), w.dim(0)});
    std::vector<std::byte> scratch(dense_i8_scratch_bytes(x.dim(1), w.dim(0)));
    raw::dense_i8(x.data<int8_t>(), w.data<int8_t>(), out.data<int32_t>(), x.dim(0), x.dim(1),
                  w.dim(0), scratch);
    return out;
}

} // namespace qconv
