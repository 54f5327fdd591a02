#pragma once

#include <span>
#include <string>

#include "qconv/tensor.hpp"

namespace qconv {

// Convolution geometry. Stride and padding apply to both spatial axes; the
// output extent (H + 2*pad - KH)/stride + 1 must be a positive integer.
struct ConvSpec {
    int64_t stride = 1;
    int64_t pad = 0;
    int64_t kh = 1;
    int64_t kw = 1;
    int64_t in_channels = 1;
    int64_t out_channels = 1;

    bool operator==(const ConvSpec&) const = default;
};

// The five fixed schedule variants plus the brute-force fp32 reference. Each
// non-reference tag is one measured configuration: a (layout, strategy,
// precision) triple.
enum class ScheduleKind : uint8_t {
    NCHW_SPATIAL_PACK_FP32,
    NCHW_SPATIAL_PACK_I8,
    NCHW_SIMD_I8,
    NHWC_SPATIAL_PACK_FP32,
    NHWC_QUANTIZED_INTERLEAVED_I8,
    DIRECT_FP32_REFERENCE,
};

const char* schedule_name(ScheduleKind k);
ScheduleKind parse_schedule(const std::string& name);
bool schedule_is_int8(ScheduleKind k);
bool schedule_is_nhwc(ScheduleKind k);

struct ConvDims {
    int64_t n, h, w;  // input spatial extents
    int64_t oh, ow;   // output spatial extents
};

// Validates geometry; InvalidSpec if the output extent does not divide exactly
// or is non-positive.
ConvDims resolve_conv_dims(const ConvSpec& spec, int64_t n, int64_t h, int64_t w);

// ---------------------------------------------------------------------------
// Allocation-free entry points (used by the graph executors)
// ---------------------------------------------------------------------------

size_t conv2d_scratch_bytes(ScheduleKind k, const ConvSpec& spec, int64_t n, int64_t h, int64_t w);

// Input/weight/output element types and layouts are implied by the schedule:
// NCHW schedules take NCHW input and produce NCHW output, NHWC likewise;
// weights are always OIHW. fp32 schedules map fp32->fp32, int8 schedules map
// int8 codes -> int32 accumulators. scratch must provide at least
// conv2d_scratch_bytes.
void conv2d_execute(ScheduleKind k, const ConvSpec& spec, int64_t n, int64_t h, int64_t w,
                    const void* input, const void* weight, void* output,
                    std::span<std::byte> scratch);

// ---------------------------------------------------------------------------
// Tensor-level kernels
// ---------------------------------------------------------------------------

// Textbook six-loop convolution with fixed (c, kh, kw) accumulation order;
// the deterministic reference every other fp32 schedule is held against.
Tensor conv2d_direct_f32(const Tensor& input, const Tensor& weight, const ConvSpec& spec);

// Same loop nest over int8 codes with exact int32 accumulation; the integer
// reference for the int8 schedule consensus checks.
Tensor conv2d_direct_i8(const Tensor& input, const Tensor& weight, const ConvSpec& spec);

// NCHW spatial packing: input and weight channels packed into block-16 NCHWc
// form, blocked compute iterating output-channel blocks x H groups of 4,
// result unpacked back to NCHW. elem selects the fp32 or int8 flavor.
Tensor conv2d_nchw_spatial_pack(const Tensor& input, const Tensor& weight, const ConvSpec& spec,
                                ElemType elem);

// Int8 schedule whose inner reduction runs strictly through dot4_i8 over
// channel chunks of 4 (the vmlal contract).
Tensor conv2d_nchw_simd_i8(const Tensor& input, const Tensor& weight, const ConvSpec& spec);

// NHWC spatial packing: WC-contiguous inner loops over zero-padded row panels,
// H processed in groups of 4, no channel blocking.
Tensor conv2d_nhwc_spatial_pack_f32(const Tensor& input, const Tensor& weight, const ConvSpec& spec);

// NHWC int8 schedule lowered to im2col panels: 4 output pixels from the fused
// N*OH*OW axis x K against 4 output channels x K, accumulated via mmla_4x4_i8.
Tensor conv2d_nhwc_quantized_interleaved_i8(const Tensor& input, const Tensor& weight,
                                            const ConvSpec& spec);

// Dispatch by schedule kind.
Tensor conv2d(ScheduleKind k, const Tensor& input, const Tensor& weight, const ConvSpec& spec);

} // namespace qconv
