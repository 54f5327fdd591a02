#include "qconv/kernels/microkernels.hpp"
#include "qconv/tensor.hpp"

#include "conv_impl.hpp"

namespace qconv::conv_impl {

// ---------------------------------------------------------------------------
// NHWC spatial pack, fp32
// ---------------------------------------------------------------------------

size_t nhwc_spatial_pack_f32_scratch(const Geom& g) {
    const auto& s = g.spec;
    const auto& d = g.dims;
    const int64_t padded_w = d.w + 2 * s.pad;
    const int64_t group_rows = 3 * s.stride + s.kh;
    size_t total = kScratchAlign;
    total += size_t(s.out_channels * s.kh * s.kw * s.in_channels) * sizeof(float) + kScratchAlign;
    total += size_t(group_rows * padded_w * s.in_channels) * sizeof(float) + kScratchAlign;
    return total;
}

// WC-packed row panels: for each group of 4 output rows the needed input rows
// are copied once into a zero-padded panel, so the inner loops walk contiguous
// (w, c) runs with no border branches. The H axis is parallelized by 4 with no
// channel blocking.
void nhwc_spatial_pack_f32(const Geom& g, const float* in, const float* w, float* out, Scratch& scr) {
    const auto& s = g.spec;
    const auto& d = g.dims;
    const int64_t C = s.in_channels, O = s.out_channels;
    const int64_t PW = d.w + 2 * s.pad;       // padded row width
    const int64_t GR = 3 * s.stride + s.kh;   // rows a full group of 4 can touch

    float* pw = scr.alloc<float>(O * s.kh * s.kw * C);
    float* panel = scr.alloc<float>(GR * PW * C);

    // OIHW -> (o, kh, kw, c) so each (o, kh) row is one contiguous KW*C run
    for (int64_t o = 0; o < O; ++o)
        for (int64_t c = 0; c < C; ++c)
            for (int64_t kh = 0; kh < s.kh; ++kh)
                for (int64_t kw = 0; kw < s.kw; ++kw)
                    pw[((o * s.kh + kh) * s.kw + kw) * C + c] = w[((o * C + c) * s.kh + kh) * s.kw + kw];

    const int64_t row_len = s.kw * C;
    for (int64_t n = 0; n < d.n; ++n)
        for (int64_t oy_base = 0; oy_base < d.oh; oy_base += 4) {
            const int64_t group = std::min<int64_t>(4, d.oh - oy_base);
            const int64_t iy0 = oy_base * s.stride - s.pad;
            const int64_t rows = (group - 1) * s.stride + s.kh;
            for (int64_t r = 0; r < rows; ++r) {
                float* dst = panel + r * PW * C;
                std::memset(dst, 0, size_t(PW * C) * sizeof(float));
                const int64_t iy = iy0 + r;
                if (iy >= 0 && iy < d.h)
                    std::memcpy(dst + s.pad * C, in + (n * d.h + iy) * d.w * C,
                                size_t(d.w * C) * sizeof(float));
            }
            for (int64_t oy = oy_base; oy < oy_base + group; ++oy) {
                const int64_t l = oy - oy_base;
                for (int64_t ox = 0; ox < d.ow; ++ox)
                    for (int64_t o = 0; o < O; ++o) {
                        float acc = 0.0f;
                        for (int64_t kh = 0; kh < s.kh; ++kh) {
                            const float* ip = panel + (l * s.stride + kh) * PW * C + ox * s.stride * C;
                            const float* wp = pw + (o * s.kh + kh) * s.kw * C;
                            for (int64_t t = 0; t < row_len; ++t) acc += ip[t] * wp[t];
                        }
                        out[((n * d.oh + oy) * d.ow + ox) * O + o] = acc;
                    }
            }
        }
}

// ---------------------------------------------------------------------------
// NHWC quantized interleaved, int8
// ---------------------------------------------------------------------------

size_t nhwc_quantized_interleaved_i8_scratch(const Geom& g) {
    const auto& s = g.spec;
    const int64_t k = s.in_channels * s.kh * s.kw;
    const int64_t kp = align_up(size_t(k), 4);
    const int64_t obp = ceil_div(s.out_channels, 4);
    size_t total = kScratchAlign;
    total += size_t(obp * 4 * kp) + kScratchAlign; // weight panels
    total += size_t(4 * kp) + kScratchAlign;       // im2col panel for one pixel group
    return total;
}

// im2col lowering: A = 4 output pixels from the fused N*OH*OW axis x K,
// B = 4 output channels x K from the weights, accumulated with mmla_4x4_i8.
// Panels are materialized per 4-row group so the workspace stays bounded;
// tail groups and padded K are zero codes and never change a logical output.
void nhwc_quantized_interleaved_i8(const Geom& g, const int8_t* in, const int8_t* w, int32_t* out,
                                   Scratch& scr) {
    const auto& s = g.spec;
    const auto& d = g.dims;
    const int64_t C = s.in_channels, O = s.out_channels;
    const int64_t K = C * s.kh * s.kw;
    const int64_t KP = int64_t(align_up(size_t(K), 4));
    const int64_t OBP = ceil_div(O, 4);

    int8_t* bpanels = scr.alloc<int8_t>(OBP * 4 * KP);
    int8_t* apanel = scr.alloc<int8_t>(4 * KP);

    std::memset(bpanels, 0, size_t(OBP * 4 * KP));
    for (int64_t o = 0; o < O; ++o) {
        int8_t* row = bpanels + (o / 4) * 4 * KP + (o % 4) * KP;
        for (int64_t kh = 0; kh < s.kh; ++kh)
            for (int64_t kw = 0; kw < s.kw; ++kw)
                for (int64_t c = 0; c < C; ++c)
                    row[(kh * s.kw + kw) * C + c] = w[((o * C + c) * s.kh + kh) * s.kw + kw];
    }

    const int64_t npix = d.n * d.oh * d.ow;
    int32_t tile[16];
    for (int64_t base = 0; base < npix; base += 4) {
        const int64_t rows = std::min<int64_t>(4, npix - base);
        std::memset(apanel, 0, size_t(4 * KP));
        for (int64_t r = 0; r < rows; ++r) {
            const int64_t pix = base + r;
            const int64_t n = pix / (d.oh * d.ow);
            const int64_t rem = pix % (d.oh * d.ow);
            const int64_t oy = rem / d.ow, ox = rem % d.ow;
            int8_t* arow = apanel + r * KP;
            for (int64_t kh = 0; kh < s.kh; ++kh) {
                const int64_t iy = oy * s.stride + kh - s.pad;
                if (iy < 0 || iy >= d.h) continue;
                for (int64_t kw = 0; kw < s.kw; ++kw) {
                    const int64_t ix = ox * s.stride + kw - s.pad;
                    if (ix < 0 || ix >= d.w) continue;
                    std::memcpy(arow + (kh * s.kw + kw) * C, in + ((n * d.h + iy) * d.w + ix) * C,
                                size_t(C));
                }
            }
        }
        for (int64_t ob = 0; ob < OBP; ++ob) {
            qconv::mmla_4x4_i8(apanel, bpanels + ob * 4 * KP, size_t(KP), tile);
            for (int64_t r = 0; r < rows; ++r)
                for (int64_t j = 0; j < 4; ++j) {
                    const int64_t o = ob * 4 + j;
                    if (o < O) out[(base + r) * O + o] = tile[r * 4 + j];
                }
        }
    }
}

} // namespace qconv::conv_impl
