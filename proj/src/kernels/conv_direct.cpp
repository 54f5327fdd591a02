#include "conv_impl.hpp"

namespace qconv::conv_impl {

// Fixed (c, kh, kw) accumulation order so the fp32 reference is deterministic.
template <typename TIn, typename TAcc>
void direct_conv(const Geom& g, const TIn* in, const TIn* w, TAcc* out) {
    const auto& s = g.spec;
    const auto& d = g.dims;
    const int64_t C = s.in_channels, O = s.out_channels;
    for (int64_t n = 0; n < d.n; ++n)
        for (int64_t o = 0; o < O; ++o)
            for (int64_t oy = 0; oy < d.oh; ++oy)
                for (int64_t ox = 0; ox < d.ow; ++ox) {
                    TAcc acc = TAcc(0);
                    for (int64_t c = 0; c < C; ++c)
                        for (int64_t kh = 0; kh < s.kh; ++kh) {
                            const int64_t iy = oy * s.stride + kh - s.pad;
                            if (iy < 0 || iy >= d.h) continue;
                            for (int64_t kw = 0; kw < s.kw; ++kw) {
                                const int64_t ix = ox * s.stride + kw - s.pad;
                                if (ix < 0 || ix >= d.w) continue;
                                acc += TAcc(in[((n * C + c) * d.h + iy) * d.w + ix]) *
                                       TAcc(w[((o * C + c) * s.kh + kh) * s.kw + kw]);
                            }
                        }
                    out[((n * O + o) * d.oh + oy) * d.ow + ox] = acc;
                }
}

template void direct_conv<float, float>(const Geom&, const float*, const float*, float*);
template void direct_conv<int8_t, int32_t>(const Geom&, const int8_t*, const int8_t*, int32_t*);

} // namespace qconv::conv_impl
