#include "qconv/kernels/conv.hpp"

#include <vector>

#include "conv_impl.hpp"

namespace qconv {

const char* schedule_name(ScheduleKind k) {
    switch (k) {
        case ScheduleKind::NCHW_SPATIAL_PACK_FP32: return "nchw_spatial_pack_fp32";
        case ScheduleKind::NCHW_SPATIAL_PACK_I8: return "nchw_spatial_pack_i8";
        case ScheduleKind::NCHW_SIMD_I8: return "nchw_simd_i8";
        case ScheduleKind::NHWC_SPATIAL_PACK_FP32: return "nhwc_spatial_pack_fp32";
        case ScheduleKind::NHWC_QUANTIZED_INTERLEAVED_I8: return "nhwc_quantized_interleaved_i8";
        case ScheduleKind::DIRECT_FP32_REFERENCE: return "direct_fp32_reference";
    }
    return "?";
}

ScheduleKind parse_schedule(const std::string& name) {
    for (ScheduleKind k :
         {ScheduleKind::NCHW_SPATIAL_PACK_FP32, ScheduleKind::NCHW_SPATIAL_PACK_I8,
          ScheduleKind::NCHW_SIMD_I8, ScheduleKind::NHWC_SPATIAL_PACK_FP32,
          ScheduleKind::NHWC_QUANTIZED_INTERLEAVED_I8, ScheduleKind::DIRECT_FP32_REFERENCE})
        if (name == schedule_name(k)) return k;
    fail(ErrorKind::InvalidArgument, "unknown schedule: " + name);
}

bool schedule_is_int8(ScheduleKind k) {
    return k == ScheduleKind::NCHW_SPATIAL_PACK_I8 || k == ScheduleKind::NCHW_SIMD_I8 ||
           k == ScheduleKind::NHWC_QUANTIZED_INTERLEAVED_I8;
}

bool schedule_is_nhwc(ScheduleKind k) {
    return k == ScheduleKind::NHWC_SPATIAL_PACK_FP32 ||
           k == ScheduleKind::NHWC_QUANTIZED_INTERLEAVED_I8;
}

ConvDims resolve_conv_dims(const ConvSpec& s, int64_t n, int64_t h, int64_t w) {
    if (n <= 0 || h <= 0 || w <= 0 || s.kh <= 0 || s.kw <= 0 || s.in_channels <= 0 ||
        s.out_channels <= 0 || s.stride <= 0 || s.pad < 0)
        fail(ErrorKind::InvalidSpec, "conv spec extents must be positive (pad non-negative)");
    const int64_t eh = h + 2 * s.pad - s.kh;
    const int64_t ew = w + 2 * s.pad - s.kw;
    if (eh < 0 || ew < 0 || eh % s.stride != 0 || ew % s.stride != 0)
        fail(ErrorKind::InvalidSpec, "conv output extent is not a positive integer");
    return {n, h, w, eh / s.stride + 1, ew / s.stride + 1};
}

size_t conv2d_scratch_bytes(ScheduleKind k, const ConvSpec& spec, int64_t n, int64_t h, int64_t w) {
    conv_impl::Geom g{spec, resolve_conv_dims(spec, n, h, w)};
    switch (k) {
        case ScheduleKind::DIRECT_FP32_REFERENCE: return 0;
        case ScheduleKind::NCHW_SPATIAL_PACK_FP32:
            return conv_impl::nchw_spatial_pack_scratch(g, sizeof(float), sizeof(float));
        case ScheduleKind::NCHW_SPATIAL_PACK_I8:
            return conv_impl::nchw_spatial_pack_scratch(g, sizeof(int8_t), sizeof(int32_t));
        case ScheduleKind::NCHW_SIMD_I8: return conv_impl::nchw_simd_i8_scratch(g);
        case ScheduleKind::NHWC_SPATIAL_PACK_FP32: return conv_impl::nhwc_spatial_pack_f32_scratch(g);
        case ScheduleKind::NHWC_QUANTIZED_INTERLEAVED_I8:
            return conv_impl::nhwc_quantized_interleaved_i8_scratch(g);
    }
    return 0;
}

void conv2d_execute(ScheduleKind k, const ConvSpec& spec, int64_t n, int64_t h, int64_t w,
                    const void* input, const void* weight, void* output,
                    std::span<std::byte> scratch) {
    conv_impl::Geom g{spec, resolve_conv_dims(spec, n, h, w)};
    conv_impl::Scratch scr(scratch);
    switch (k) {
        case ScheduleKind::DIRECT_FP32_REFERENCE:
            conv_impl::direct_conv<float, float>(g, static_cast<const float*>(input),
                                                 static_cast<const float*>(weight),
                                                 static_cast<float*>(output));
            return;
        case ScheduleKind::NCHW_SPATIAL_PACK_FP32:
            conv_impl::nchw_spatial_pack<float, float>(g, static_cast<const float*>(input),
                                                       static_cast<const float*>(weight),
                                                       static_cast<float*>(output), scr);
            return;
        case ScheduleKind::NCHW_SPATIAL_PACK_I8:
            conv_impl::nchw_spatial_pack<int8_t, int32_t>(g, static_cast<const int8_t*>(input),
                                                          static_cast<const int8_t*>(weight),
                                                          static_cast<int32_t*>(output), scr);
            return;
        case ScheduleKind::NCHW_SIMD_I8:
            conv_impl::nchw_simd_i8(g, static_cast<const int8_t*>(input),
                                    static_cast<const int8_t*>(weight), static_cast<int32_t*>(output),
                                    scr);
            return;
        case ScheduleKind::NHWC_SPATIAL_PACK_FP32:
            conv_impl::nhwc_spatial_pack_f32(g, static_cast<const float*>(input),
                                             static_cast<const float*>(weight),
                                             static_cast<float*>(output), scr);
            return;
        case ScheduleKind::NHWC_QUANTIZED_INTERLEAVED_I8:
            conv_impl::nhwc_quantized_interleaved_i8(g, static_cast<const int8_t*>(input),
                                                     static_cast<const int8_t*>(weight),
                                                     static_cast<int32_t*>(output), scr);
            return;
    }
    fail(ErrorKind::InvalidArgument, "unknown schedule kind");
}

// ---------------------------------------------------------------------------
// Tensor-level wrappers
// ---------------------------------------------------------------------------

namespace {

ConvDims validate_conv(const Tensor& input, const Tensor& weight, const ConvSpec& spec,
                       LayoutTag expected_input, ElemType expected_elem) {
    if (input.layout().tag != expected_input)
        fail(ErrorKind::LayoutMismatch, std::string("conv2d expects ") +
                                            (expected_input == LayoutTag::NCHW ? "NCHW" : "NHWC") +
                                            " input, got " + layout_name(input.layout()));
    if (weight.layout().tag != LayoutTag::OIHW)
        fail(ErrorKind::LayoutMismatch, "conv2d expects OIHW weights, got " + layout_name(weight.layout()));
    if (input.rank() != 4 || weight.rank() != 4)
        fail(ErrorKind::ShapeMismatch, "conv2d expects rank-4 input and weight");
    if (input.elem() != expected_elem || weight.elem() != expected_elem)
        fail(ErrorKind::TypeMismatch, std::string("conv2d schedule expects ") +
                                          elem_name(expected_elem) + " input and weight");
    const bool nhwc = expected_input == LayoutTag::NHWC;
    const int64_t c = nhwc ? input.dim(3) : input.dim(1);
    const int64_t h = nhwc ? input.dim(1) : input.dim(2);
    const int64_t w = nhwc ? input.dim(2) : input.dim(3);
    if (c != spec.in_channels)
        fail(ErrorKind::ShapeMismatch, "input channel count does not match spec");
    if (weight.dim(0) != spec.out_channels || weight.dim(1) != spec.in_channels ||
        weight.dim(2) != spec.kh || weight.dim(3) != spec.kw)
        fail(ErrorKind::ShapeMismatch, "weight shape does not match spec");
    return resolve_conv_dims(spec, input.dim(0), h, w);
}

Tensor run_schedule(ScheduleKind k, const Tensor& input, const Tensor& weight, const ConvSpec& spec) {
    const bool nhwc = schedule_is_nhwc(k);
    const bool int8 = schedule_is_int8(k);
    const ConvDims d = validate_conv(input, weight, spec, nhwc ? LayoutTag::NHWC : LayoutTag::NCHW,
                                     int8 ? ElemType::I8 : ElemType::FP32);
    const ElemType out_elem = int8 ? ElemType::I32 : ElemType::FP32;
    std::vector<int64_t> out_shape =
        nhwc ? std::vector<int64_t>{d.n, d.oh, d.ow, spec.out_channels}
             : std::vector<int64_t>{d.n, spec.out_channels, d.oh, d.ow};
    Tensor out = Tensor::zeros(input.layout(), out_elem, std::move(out_shape));
    std::vector<std::byte> scratch(conv2d_scratch_bytes(k, spec, d.n, d.h, d.w));
    conv2d_execute(k, spec, d.n, d.h, d.w, input.raw(), weight.raw(), out.raw(), scratch);
    return out;
}

} // namespace

Tensor conv2d_direct_f32(const Tensor& input, const Tensor& weight, const ConvSpec& spec) {
    return run_schedule(ScheduleKind::DIRECT_FP32_REFERENCE, input, weight, spec);
}

Tensor conv2d_direct_i8(const Tensor& input, const Tensor& weight, const ConvSpec& spec) {
    const ConvDims d = validate_conv(input, weight, spec, LayoutTag::NCHW, ElemType::I8);
    Tensor out =
        Tensor::zeros(Layout::nchw(), ElemType::I32, {d.n, spec.out_channels, d.oh, d.ow});
    conv_impl::Geom g{spec, d};
    conv_impl::direct_conv<int8_t, int32_t>(g, input.data<int8_t>(), weight.data<int8_t>(),
                                            out.data<int32_t>());
    return out;
}

Tensor conv2d_nchw_spatial_pack(const Tensor& input, const Tensor& weight, const ConvSpec& spec,
                                ElemType elem) {
    if (elem == ElemType::FP32)
        return run_schedule(ScheduleKind::NCHW_SPATIAL_PACK_FP32, input, weight, spec);
    if (elem == ElemType::I8)
        return run_schedule(ScheduleKind::NCHW_SPATIAL_PACK_I8, input, weight, spec);
    fail(ErrorKind::InvalidArgument, "conv2d_nchw_spatial_pack: elem must be FP32 or I8");
}

Tensor conv2d_nchw_simd_i8(const Tensor& input, const Tensor& weight, const ConvSpec& spec) {
    return run_schedule(ScheduleKind::NCHW_SIMD_I8, input, weight, spec);
}

Tensor conv2d_nhwc_spatial_pack_f32(const Tensor& input, const Tensor& weight, const ConvSpec& spec) {
    return run_schedule(ScheduleKind::NHWC_SPATIAL_PACK_FP32, input, weight, spec);
}

Tensor conv2d_nhwc_quantized_interleaved_i8(const Tensor& input, const Tensor& weight,
                                            const ConvSpec& spec) {
    return run_schedule(ScheduleKind::NHWC_QUANTIZED_INTERLEAVED_I8, input, weight, spec);
}

Tensor conv2d(ScheduleKind k, const Tensor& input, const Tensor& weight, const ConvSpec& spec) {
    return run_schedule(k, input, weight, spec);
}

} // namespace qconv
