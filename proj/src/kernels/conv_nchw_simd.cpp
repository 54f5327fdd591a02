#include "qconv/kernels/microkernels.hpp"
#include "qconv/tensor.hpp"

#include "conv_impl.hpp"

namespace qconv::conv_impl {

size_t nchw_simd_i8_scratch(const Geom& g) {
    const auto& s = g.spec;
    const auto& d = g.dims;
    const int64_t cq = ceil_div(s.in_channels, 4);
    size_t total = kScratchAlign;
    total += size_t(d.n * cq * d.h * d.w * 4) + kScratchAlign;
    total += size_t(s.out_channels * cq * s.kh * s.kw * 4) + kScratchAlign;
    return total;
}

// Channels packed to blocks of 4 so every reduction step is one widening
// 4-lane MAC; the entire inner reduction runs through dot4_i8.
void nchw_simd_i8(const Geom& g, const int8_t* in, const int8_t* w, int32_t* out, Scratch& scr) {
    const auto& s = g.spec;
    const auto& d = g.dims;
    const int64_t C = s.in_channels, O = s.out_channels;
    const int64_t CQ = ceil_div(C, 4);

    int8_t* pin = scr.alloc<int8_t>(d.n * CQ * d.h * d.w * 4);
    int8_t* pw = scr.alloc<int8_t>(O * CQ * s.kh * s.kw * 4);

    qconv::detail::pack_nchw_to_nchwc(in, pin, d.n, C, d.h, d.w, 4);
    std::memset(pw, 0, size_t(O * CQ * s.kh * s.kw * 4));
    for (int64_t o = 0; o < O; ++o)
        for (int64_t c = 0; c < C; ++c)
            for (int64_t kh = 0; kh < s.kh; ++kh)
                for (int64_t kw = 0; kw < s.kw; ++kw)
                    pw[(((o * CQ + c / 4) * s.kh + kh) * s.kw + kw) * 4 + c % 4] =
                        w[((o * C + c) * s.kh + kh) * s.kw + kw];

    for (int64_t n = 0; n < d.n; ++n)
        for (int64_t o = 0; o < O; ++o)
            for (int64_t oy_base = 0; oy_base < d.oh; oy_base += 4) {
                const int64_t oy_end = std::min(oy_base + 4, d.oh);
                for (int64_t oy = oy_base; oy < oy_end; ++oy)
                    for (int64_t ox = 0; ox < d.ow; ++ox) {
                        int32_t acc = 0;
                        for (int64_t cq = 0; cq < CQ; ++cq)
                            for (int64_t kh = 0; kh < s.kh; ++kh) {
                                const int64_t iy = oy * s.stride + kh - s.pad;
                                if (iy < 0 || iy >= d.h) continue;
                                for (int64_t kw = 0; kw < s.kw; ++kw) {
                                    const int64_t ix = ox * s.stride + kw - s.pad;
                                    if (ix < 0 || ix >= d.w) continue;
                                    acc += dot4_i8(pin + (((n * CQ + cq) * d.h + iy) * d.w + ix) * 4,
                                                   pw + (((o * CQ + cq) * s.kh + kh) * s.kw + kw) * 4);
                                }
                            }
                        out[((n * O + o) * d.oh + oy) * d.ow + ox] = acc;
                    }
            }
}

} // namespace qconv::conv_impl
