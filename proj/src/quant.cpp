#include "qconv/quant.hpp"

#include <cmath>

namespace qconv {

namespace raw {

int8_t quantize_one(float x, float scale) {
    // rintf rounds half-to-even under the default rounding mode
    float r = std::rintf(x / scale);
    if (r > 127.0f) r = 127.0f;
    if (r < -127.0f) r = -127.0f;
    return int8_t(r);
}

void quantize(const float* src, int8_t* dst, int64_t n, float scale) {
    for (int64_t i = 0; i < n; ++i) dst[i] = quantize_one(src[i], scale);
}

void dequantize(const int8_t* src, float* dst, int64_t n, float scale) {
    for (int64_t i = 0; i < n; ++i) dst[i] = float(src[i]) * scale;
}

void dequantize_accumulator(const int32_t* src, float* dst, int64_t n, float in_scale, float w_scale) {
    const float s = in_scale * w_scale;
    for (int64_t i = 0; i < n; ++i) dst[i] = float(src[i]) * s;
}

} // namespace raw

QuantParams calibrate_maxabs(const Tensor& t) {
    if (!t.defined() || t.numel() == 0)
        fail(ErrorKind::InvalidArgument, "calibrate_maxabs: empty tensor");
    if (t.elem() != ElemType::FP32)
        fail(ErrorKind::TypeMismatch, "calibrate_maxabs expects fp32 input");
    const float* p = t.data<float>();
    float maxabs = 0.0f;
    for (int64_t i = 0; i < t.numel(); ++i) maxabs = std::max(maxabs, std::fabs(p[i]));
    if (maxabs == 0.0f) return {1.0f};
    return {maxabs / 127.0f};
}

Tensor quantize(const Tensor& t, QuantParams qp) {
    if (t.elem() != ElemType::FP32)
        fail(ErrorKind::TypeMismatch, "quantize expects fp32 input");
    if (!(qp.scale > 0.0f))
        fail(ErrorKind::InvalidArgument, "quantize: scale must be positive");
    Tensor out = Tensor::zeros(t.layout(), ElemType::I8, t.shape());
    raw::quantize(t.data<float>(), out.data<int8_t>(), t.numel(), qp.scale);
    return out;
}

Tensor dequantize(const Tensor& t, QuantParams qp) {
    if (t.elem() != ElemType::I8)
        fail(ErrorKind::TypeMismatch, "dequantize expects int8 input");
    if (!(qp.scale > 0.0f))
        fail(ErrorKind::InvalidArgument, "dequantize: scale must be positive");
    Tensor out = Tensor::zeros(t.layout(), ElemType::FP32, t.shape());
    raw::dequantize(t.data<int8_t>(), out.data<float>(), t.numel(), qp.scale);
    return out;
}

Tensor dequantize_accumulator(const Tensor& acc, float in_scale, float w_scale) {
    if (acc.elem() != ElemType::I32)
        fail(ErrorKind::TypeMismatch, "dequantize_accumulator expects int32 input");
    if (!(in_scale > 0.0f) || !(w_scale > 0.0f))
        fail(ErrorKind::InvalidArgument, "dequantize_accumulator: scales must be positive");
    Tensor out = Tensor::zeros(acc.layout(), ElemType::FP32, acc.shape());
    raw::dequantize_accumulator(acc.data<int32_t>(), out.data<float>(), acc.numel(), in_scale, w_scale);
    return out;
}

} // namespace qconv
