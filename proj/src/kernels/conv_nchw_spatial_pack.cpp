#include "qconv/tensor.hpp"

#include "conv_impl.hpp"

namespace qconv::conv_impl {

namespace {

constexpr int64_t BLK = 16; // NCHW16c

// OIHW -> [ob][cb][kh][kw][ci][oi], both channel axes zero-padded to BLK.
template <typename T>
void pack_weights_blocked(const T* w, T* pw, int64_t o, int64_t c, int64_t kh, int64_t kw) {
    const int64_t cb = ceil_div(c, BLK), ob = ceil_div(o, BLK);
    std::memset(pw, 0, size_t(ob * cb * kh * kw * BLK * BLK) * sizeof(T));
    for (int64_t io = 0; io < o; ++io)
        for (int64_t ic = 0; ic < c; ++ic)
            for (int64_t ikh = 0; ikh < kh; ++ikh)
                for (int64_t ikw = 0; ikw < kw; ++ikw)
                    pw[(((((io / BLK) * cb + ic / BLK) * kh + ikh) * kw + ikw) * BLK + ic % BLK) * BLK +
                       io % BLK] = w[((io * c + ic) * kh + ikh) * kw + ikw];
}

} // namespace

size_t nchw_spatial_pack_scratch(const Geom& g, size_t in_elem_bytes, size_t acc_elem_bytes) {
    const auto& s = g.spec;
    const auto& d = g.dims;
    const int64_t cb = ceil_div(s.in_channels, BLK), ob = ceil_div(s.out_channels, BLK);
    size_t total = kScratchAlign; // initial base alignment
    total += size_t(d.n * cb * d.h * d.w * BLK) * in_elem_bytes + kScratchAlign;
    total += size_t(ob * cb * s.kh * s.kw * BLK * BLK) * in_elem_bytes + kScratchAlign;
    total += size_t(d.n * ob * d.oh * d.ow * BLK) * acc_elem_bytes + kScratchAlign;
    return total;
}

template <typename TIn, typename TAcc>
void nchw_spatial_pack(const Geom& g, const TIn* in, const TIn* w, TAcc* out, Scratch& scr) {
    const auto& s = g.spec;
    const auto& d = g.dims;
    const int64_t C = s.in_channels, O = s.out_channels;
    const int64_t CB = ceil_div(C, BLK), OB = ceil_div(O, BLK);

    TIn* pin = scr.alloc<TIn>(d.n * CB * d.h * d.w * BLK);
    TIn* pw = scr.alloc<TIn>(OB * CB * s.kh * s.kw * BLK * BLK);
    TAcc* pout = scr.alloc<TAcc>(d.n * OB * d.oh * d.ow * BLK);

    qconv::detail::pack_nchw_to_nchwc(in, pin, d.n, C, d.h, d.w, BLK);
    pack_weights_blocked(w, pw, O, C, s.kh, s.kw);

    // Output-channel blocks x H groups of 4. Each output row owns a private
    // accumulator block, so the row groups are data-parallel and the result is
    // independent of whether they actually run concurrently.
    for (int64_t n = 0; n < d.n; ++n)
        for (int64_t ob = 0; ob < OB; ++ob)
            for (int64_t oy_base = 0; oy_base < d.oh; oy_base += 4) {
                const int64_t oy_end = std::min(oy_base + 4, d.oh);
                for (int64_t oy = oy_base; oy < oy_end; ++oy)
                    for (int64_t ox = 0; ox < d.ow; ++ox) {
                        TAcc acc[BLK] = {};
                        for (int64_t cb = 0; cb < CB; ++cb)
                            for (int64_t kh = 0; kh < s.kh; ++kh) {
                                const int64_t iy = oy * s.stride + kh - s.pad;
                                if (iy < 0 || iy >= d.h) continue;
                                for (int64_t kw = 0; kw < s.kw; ++kw) {
                                    const int64_t ix = ox * s.stride + kw - s.pad;
                                    if (ix < 0 || ix >= d.w) continue;
                                    const TIn* ip = pin + (((n * CB + cb) * d.h + iy) * d.w + ix) * BLK;
                                    const TIn* wp =
                                        pw + ((((ob * CB + cb) * s.kh + kh) * s.kw + kw)) * BLK * BLK;
                                    for (int64_t ci = 0; ci < BLK; ++ci) {
                                        const TAcc v = TAcc(ip[ci]);
                                        const TIn* wr = wp + ci * BLK;
                                        for (int64_t oi = 0; oi < BLK; ++oi)
                                            acc[oi] += v * TAcc(wr[oi]);
                                    }
                                }
                            }
                        TAcc* op = pout + (((n * OB + ob) * d.oh + oy) * d.ow + ox) * BLK;
                        for (int64_t oi = 0; oi < BLK; ++oi) op[oi] = acc[oi];
                    }
            }

    qconv::detail::unpack_nchwc_to_nchw(pout, out, d.n, O, d.oh, d.ow, BLK);
}

template void nchw_spatial_pack<float, float>(const Geom&, const float*, const float*, float*, Scratch&);
template void nchw_spatial_pack<int8_t, int32_t>(const Geom&, const int8_t*, const int8_t*, int32_t*,
                                                 Scratch&);

} // namespace qconv::conv_impl
