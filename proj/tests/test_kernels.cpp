#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstring>

#include "qconv/kernels/conv.hpp"
#include "qconv/kernels/microkernels.hpp"
#include "qconv/kernels/nn_ops.hpp"

#include "support/oracles.hpp"

using namespace qconv;

namespace {

Tensor fill(Layout layout, ElemType elem, std::vector<int64_t> shape, float v) {
    Tensor t = Tensor::zeros(layout, elem, std::move(shape));
    if (elem == ElemType::FP32) {
        float* p = t.data<float>();
        for (int64_t i = 0; i < t.numel(); ++i) p[i] = v;
    } else {
        int8_t* p = t.data<int8_t>();
        for (int64_t i = 0; i < t.numel(); ++i) p[i] = int8_t(v);
    }
    return t;
}

} // namespace

TEST_CASE("direct f32: all-ones 3x3 input by 2x2 kernel gives all 4.0") {
    Tensor in = fill(Layout::nchw(), ElemType::FP32, {1, 1, 3, 3}, 1.0f);
    Tensor w = fill(Layout::oihw(), ElemType::FP32, {1, 1, 2, 2}, 1.0f);
    Tensor out = conv2d_direct_f32(in, w, {1, 0, 2, 2, 1, 1});
    REQUIRE(out.shape() == std::vector<int64_t>{1, 1, 2, 2});
    for (int64_t i = 0; i < 4; ++i) CHECK(out.data<float>()[i] == 4.0f);
}

TEST_CASE("direct f32: 1x1 identity weight reproduces the input") {
    Tensor in = seeded_uniform(Layout::nchw(), {1, 1, 5, 5}, 2, -1.0f, 1.0f);
    Tensor w = fill(Layout::oihw(), ElemType::FP32, {1, 1, 1, 1}, 1.0f);
    Tensor out = conv2d_direct_f32(in, w, {1, 0, 1, 1, 1, 1});
    CHECK(oracle::bits_equal(out, in));
}

TEST_CASE("direct f32 matches an independently written brute-force oracle bit-exactly") {
    Tensor in = seeded_uniform(Layout::nchw(), {1, 3, 8, 8}, 9, -1.0f, 1.0f);
    Tensor w = seeded_uniform(Layout::oihw(), {4, 3, 3, 3}, 10, -1.0f, 1.0f);
    const ConvSpec spec{1, 1, 3, 3, 3, 4};
    CHECK(oracle::bits_equal(conv2d_direct_f32(in, w, spec), oracle::conv2d_f32(in, w, spec)));
}

TEST_CASE("conv geometry and argument validation") {
    Tensor in = seeded_uniform(Layout::nchw(), {1, 2, 4, 4}, 1, -1.0f, 1.0f);
    Tensor w = seeded_uniform(Layout::oihw(), {2, 2, 3, 3}, 2, -1.0f, 1.0f);
    // (4 + 0 - 3) % 2 != 0: not an exact division
    try {
        conv2d_direct_f32(in, w, {2, 0, 3, 3, 2, 2});
        FAIL("expected invalid spec");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::InvalidSpec);
    }
    // kernel larger than padded input
    CHECK_THROWS_AS(conv2d_direct_f32(in, w, {1, 0, 5, 5, 2, 2}), Error);
    // weight shape inconsistent with the spec
    try {
        conv2d_direct_f32(in, w, {1, 1, 3, 3, 2, 3});
        FAIL("expected shape error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::ShapeMismatch);
    }
    // layout and type mismatches
    try {
        conv2d_direct_f32(transpose_nchw_nhwc(in), w, {1, 1, 3, 3, 2, 2});
        FAIL("expected layout error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::LayoutMismatch);
    }
    Tensor codes = seeded_codes(Layout::nchw(), {1, 2, 4, 4}, 3);
    try {
        conv2d_direct_f32(codes, w, {1, 1, 3, 3, 2, 2});
        FAIL("expected type error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::TypeMismatch);
    }
    CHECK_THROWS_AS(conv2d_nchw_spatial_pack(in, w, {1, 1, 3, 3, 2, 2}, ElemType::I32), Error);
}

TEST_CASE("nchw spatial pack fp32: 1x1 identity kernel is exact") {
    Tensor in = seeded_uniform(Layout::nchw(), {1, 1, 6, 6}, 21, -1.0f, 1.0f);
    Tensor w = fill(Layout::oihw(), ElemType::FP32, {1, 1, 1, 1}, 1.0f);
    Tensor out = conv2d_nchw_spatial_pack(in, w, {1, 0, 1, 1, 1, 1}, ElemType::FP32);
    CHECK(oracle::bits_equal(out, in));
}

TEST_CASE("nchw spatial pack fp32 tracks the direct reference within 1e-5") {
    SplitMix64 rng(300);
    for (int i = 0; i < 25; ++i) {
        oracle::ConvCase c = oracle::random_conv_case(rng);
        Tensor in = seeded_uniform(Layout::nchw(), {c.n, c.spec.in_channels, c.h, c.w}, rng.next(),
                                   -1.0f, 1.0f);
        Tensor w = seeded_uniform(Layout::oihw(),
                                  {c.spec.out_channels, c.spec.in_channels, c.spec.kh, c.spec.kw},
                                  rng.next(), -1.0f, 1.0f);
        Tensor got = conv2d_nchw_spatial_pack(in, w, c.spec, ElemType::FP32);
        Tensor ref = conv2d_direct_f32(in, w, c.spec);
        CHECK(oracle::normalized_max_error(got, ref) <= 1e-5);
    }
}

TEST_CASE("nchw spatial pack int8 is bit-identical to the integer brute force") {
    SplitMix64 rng(301);
    for (int i = 0; i < 25; ++i) {
        oracle::ConvCase c = oracle::random_conv_case(rng);
        Tensor in = seeded_codes(Layout::nchw(), {c.n, c.spec.in_channels, c.h, c.w}, rng.next());
        Tensor w = seeded_codes(Layout::oihw(),
                                {c.spec.out_channels, c.spec.in_channels, c.spec.kh, c.spec.kw},
                                rng.next());
        Tensor got = conv2d_nchw_spatial_pack(in, w, c.spec, ElemType::I8);
        CHECK(got.elem() == ElemType::I32);
        CHECK(oracle::bits_equal(got, oracle::conv2d_i32(in, w, c.spec)));
    }
}

TEST_CASE("nchw simd int8: zero channel padding is absorbing") {
    // single input channel, padded internally to 4 with zero codes
    Tensor in = seeded_codes(Layout::nchw(), {1, 1, 5, 5}, 7);
    Tensor w = seeded_codes(Layout::oihw(), {3, 1, 3, 3}, 8);
    const ConvSpec spec{1, 1, 3, 3, 1, 3};
    CHECK(oracle::bits_equal(conv2d_nchw_simd_i8(in, w, spec), oracle::conv2d_i32(in, w, spec)));
}

TEST_CASE("nchw simd int8: all-ones codes count the MAC terms") {
    Tensor in = fill(Layout::nchw(), ElemType::I8, {1, 4, 3, 3}, 1.0f);
    Tensor w = fill(Layout::oihw(), ElemType::I8, {1, 4, 2, 2}, 1.0f);
    Tensor out = conv2d_nchw_simd_i8(in, w, {1, 0, 2, 2, 4, 1});
    for (int64_t i = 0; i < out.numel(); ++i) CHECK(out.data<int32_t>()[i] == 16);
}

TEST_CASE("nchw simd int8 is bit-identical to the integer brute force") {
    SplitMix64 rng(302);
    for (int i = 0; i < 25; ++i) {
        oracle::ConvCase c = oracle::random_conv_case(rng);
        Tensor in = seeded_codes(Layout::nchw(), {c.n, c.spec.in_channels, c.h, c.w}, rng.next());
        Tensor w = seeded_codes(Layout::oihw(),
                                {c.spec.out_channels, c.spec.in_channels, c.spec.kh, c.spec.kw},
                                rng.next());
        CHECK(oracle::bits_equal(conv2d_nchw_simd_i8(in, w, c.spec),
                                 oracle::conv2d_i32(in, w, c.spec)));
    }
}

TEST_CASE("nhwc spatial pack fp32: identity, odd-H tail group, random fidelity") {
    Tensor in = seeded_uniform(Layout::nhwc(), {1, 6, 6, 1}, 33, -1.0f, 1.0f);
    Tensor w = fill(Layout::oihw(), ElemType::FP32, {1, 1, 1, 1}, 1.0f);
    CHECK(oracle::bits_equal(conv2d_nhwc_spatial_pack_f32(in, w, {1, 0, 1, 1, 1, 1}), in));

    SplitMix64 rng(303);
    // H = 5: not a multiple of the 4-row group
    {
        Tensor x = seeded_uniform(Layout::nchw(), {1, 3, 5, 7}, rng.next(), -1.0f, 1.0f);
        Tensor wt = seeded_uniform(Layout::oihw(), {4, 3, 3, 3}, rng.next(), -1.0f, 1.0f);
        const ConvSpec spec{1, 1, 3, 3, 3, 4};
        Tensor got = conv2d_nhwc_spatial_pack_f32(transpose_nchw_nhwc(x), wt, spec);
        Tensor ref = conv2d_direct_f32(x, wt, spec);
        CHECK(oracle::normalized_max_error(transpose_nchw_nhwc(got), ref) <= 1e-5);
    }
    for (int i = 0; i < 25; ++i) {
        oracle::ConvCase c = oracle::random_conv_case(rng);
        Tensor x = seeded_uniform(Layout::nchw(), {c.n, c.spec.in_channels, c.h, c.w}, rng.next(),
                                  -1.0f, 1.0f);
        Tensor wt = seeded_uniform(Layout::oihw(),
                                   {c.spec.out_channels, c.spec.in_channels, c.spec.kh, c.spec.kw},
                                   rng.next(), -1.0f, 1.0f);
        Tensor got = conv2d_nhwc_spatial_pack_f32(transpose_nchw_nhwc(x), wt, c.spec);
        Tensor ref = conv2d_direct_f32(x, wt, c.spec);
        CHECK(oracle::normalized_max_error(transpose_nchw_nhwc(got), ref) <= 1e-5);
    }
}

TEST_CASE("nhwc quantized interleaved: 1x1 permutation weights permute channels") {
    // weight o=c permutation: out channel o reads input channel (o+1) % 4
    Tensor in = seeded_codes(Layout::nhwc(), {1, 3, 3, 4}, 44);
    Tensor w = Tensor::zeros(Layout::oihw(), ElemType::I8, {4, 4, 1, 1});
    for (int64_t o = 0; o < 4; ++o) w.data<int8_t>()[o * 4 + (o + 1) % 4] = 1;
    Tensor out = conv2d_nhwc_quantized_interleaved_i8(in, w, {1, 0, 1, 1, 4, 4});
    const int8_t* pi = in.data<int8_t>();
    const int32_t* po = out.data<int32_t>();
    for (int64_t pix = 0; pix < 9; ++pix)
        for (int64_t o = 0; o < 4; ++o) CHECK(po[pix * 4 + o] == int32_t(pi[pix * 4 + (o + 1) % 4]));
}

TEST_CASE("nhwc quantized interleaved: pixel-count tail panels do not leak") {
    // 3x3 output: 9 pixels, not a multiple of 4
    Tensor in = seeded_codes(Layout::nchw(), {1, 5, 3, 3}, 45);
    Tensor w = seeded_codes(Layout::oihw(), {6, 5, 1, 1}, 46);
    const ConvSpec spec{1, 0, 1, 1, 5, 6};
    Tensor got = conv2d_nhwc_quantized_interleaved_i8(transpose_nchw_nhwc(in), w, spec);
    CHECK(oracle::bits_equal(transpose_nchw_nhwc(got), oracle::conv2d_i32(in, w, spec)));
}

TEST_CASE("nhwc quantized interleaved is bit-identical to the integer brute force") {
    SplitMix64 rng(304);
    for (int i = 0; i < 25; ++i) {
        oracle::ConvCase c = oracle::random_conv_case(rng);
        Tensor in = seeded_codes(Layout::nchw(), {c.n, c.spec.in_channels, c.h, c.w}, rng.next());
        Tensor w = seeded_codes(Layout::oihw(),
                                {c.spec.out_channels, c.spec.in_channels, c.spec.kh, c.spec.kw},
                                rng.next());
        Tensor got = conv2d_nhwc_quantized_interleaved_i8(transpose_nchw_nhwc(in), w, c.spec);
        CHECK(oracle::bits_equal(transpose_nchw_nhwc(got), oracle::conv2d_i32(in, w, c.spec)));
    }
}

TEST_CASE("int8 consensus: all three schedules agree bit-exactly") {
    SplitMix64 rng(305);
    for (int i = 0; i < 30; ++i) {
        oracle::ConvCase c = oracle::random_conv_case(rng);
        Tensor in = seeded_codes(Layout::nchw(), {c.n, c.spec.in_channels, c.h, c.w}, rng.next());
        Tensor w = seeded_codes(Layout::oihw(),
                                {c.spec.out_channels, c.spec.in_channels, c.spec.kh, c.spec.kw},
                                rng.next());
        Tensor ref = conv2d_direct_i8(in, w, c.spec);
        CHECK(oracle::bits_equal(conv2d_nchw_spatial_pack(in, w, c.spec, ElemType::I8), ref));
        CHECK(oracle::bits_equal(conv2d_nchw_simd_i8(in, w, c.spec), ref));
        Tensor qi = conv2d_nhwc_quantized_interleaved_i8(transpose_nchw_nhwc(in), w, c.spec);
        CHECK(oracle::bits_equal(transpose_nchw_nhwc(qi), ref));
    }
}

TEST_CASE("int8 conv is linear in the weights") {
    SplitMix64 rng(306);
    for (int i = 0; i < 20; ++i) {
        oracle::ConvCase c = oracle::random_conv_case(rng);
        Tensor in = seeded_codes(Layout::nchw(), {c.n, c.spec.in_channels, c.h, c.w}, rng.next());
        const std::vector<int64_t> wshape{c.spec.out_channels, c.spec.in_channels, c.spec.kh,
                                          c.spec.kw};
        // codes in [-63, 63] so w1 + w2 stays in range
        Tensor w1 = Tensor::zeros(Layout::oihw(), ElemType::I8, wshape);
        Tensor w2 = Tensor::zeros(Layout::oihw(), ElemType::I8, wshape);
        Tensor wsum = Tensor::zeros(Layout::oihw(), ElemType::I8, wshape);
        for (int64_t k = 0; k < w1.numel(); ++k) {
            w1.data<int8_t>()[k] = int8_t(int64_t(rng.next() % 127) - 63);
            w2.data<int8_t>()[k] = int8_t(int64_t(rng.next() % 127) - 63);
            wsum.data<int8_t>()[k] = int8_t(w1.data<int8_t>()[k] + w2.data<int8_t>()[k]);
        }
        Tensor a = conv2d_nchw_spatial_pack(in, w1, c.spec, ElemType::I8);
        Tensor b = conv2d_nchw_spatial_pack(in, w2, c.spec, ElemType::I8);
        Tensor s = conv2d_nchw_spatial_pack(in, wsum, c.spec, ElemType::I8);
        for (int64_t k = 0; k < s.numel(); ++k)
            CHECK(s.data<int32_t>()[k] == a.data<int32_t>()[k] + b.data<int32_t>()[k]);
    }
}

TEST_CASE("zero-padding extra channels never changes logical outputs") {
    SplitMix64 rng(307);
    for (int i = 0; i < 10; ++i) {
        oracle::ConvCase c = oracle::random_conv_case(rng);
        Tensor in = seeded_codes(Layout::nchw(), {1, c.spec.in_channels, c.h, c.w}, rng.next());
        Tensor w = seeded_codes(Layout::oihw(),
                                {c.spec.out_channels, c.spec.in_channels, c.spec.kh, c.spec.kw},
                                rng.next());
        // widen input and weight by zero channels
        const int64_t extra = 1 + int64_t(rng.next() % 4);
        ConvSpec wide = c.spec;
        wide.in_channels += extra;
        Tensor in_wide = Tensor::zeros(Layout::nchw(), ElemType::I8,
                                       {1, wide.in_channels, c.h, c.w});
        Tensor w_wide = Tensor::zeros(Layout::oihw(), ElemType::I8,
                                      {wide.out_channels, wide.in_channels, wide.kh, wide.kw});
        for (int64_t ch = 0; ch < c.spec.in_channels; ++ch) {
            std::memcpy(in_wide.data<int8_t>() + ch * c.h * c.w,
                        in.data<int8_t>() + ch * c.h * c.w, size_t(c.h * c.w));
            for (int64_t o = 0; o < wide.out_channels; ++o)
                std::memcpy(w_wide.data<int8_t>() + (o * wide.in_channels + ch) * wide.kh * wide.kw,
                            w.data<int8_t>() + (o * c.spec.in_channels + ch) * wide.kh * wide.kw,
                            size_t(wide.kh * wide.kw));
        }
        CHECK(oracle::bits_equal(conv2d_nchw_simd_i8(in_wide, w_wide, wide),
                                 conv2d_nchw_simd_i8(in, w, c.spec)));
    }
}

TEST_CASE("schedules agree across micro-kernel backends") {
    SplitMix64 rng(308);
    oracle::ConvCase c = oracle::random_conv_case(rng);
    Tensor in = seeded_codes(Layout::nchw(), {c.n, c.spec.in_channels, c.h, c.w}, rng.next());
    Tensor w = seeded_codes(Layout::oihw(),
                            {c.spec.out_channels, c.spec.in_channels, c.spec.kh, c.spec.kw},
                            rng.next());
    Tensor nhwc_in = transpose_nchw_nhwc(in);
    std::vector<Tensor> outs;
    for (MicrokernelBackend b : available_microkernel_backends()) {
        set_microkernel_backend(b);
        outs.push_back(conv2d_nhwc_quantized_interleaved_i8(nhwc_in, w, c.spec));
    }
    set_microkernel_backend(MicrokernelBackend::Auto);
    for (size_t i = 1; i < outs.size(); ++i) CHECK(oracle::bits_equal(outs[i], outs[0]));
}

TEST_CASE("dense kernels: fp32 and int8 flavors") {
    SplitMix64 rng(309);
    Tensor x = seeded_uniform(Layout::nchw(), {3, 17}, rng.next(), -1.0f, 1.0f);
    Tensor w = seeded_uniform(Layout::nchw(), {5, 17}, rng.next(), -1.0f, 1.0f);
    Tensor out = dense_f32(x, w);
    REQUIRE(out.shape() == std::vector<int64_t>{3, 5});
    for (int64_t n = 0; n < 3; ++n)
        for (int64_t u = 0; u < 5; ++u) {
            float acc = 0.0f;
            for (int64_t c = 0; c < 17; ++c)
                acc += x.data<float>()[n * 17 + c] * w.data<float>()[u * 17 + c];
            CHECK(out.data<float>()[n * 5 + u] == acc);
        }

    Tensor xq = seeded_codes(Layout::nchw(), {3, 17}, rng.next());
    Tensor wq = seeded_codes(Layout::nchw(), {5, 17}, rng.next());
    Tensor acc = dense_i8(xq, wq);
    for (int64_t n = 0; n < 3; ++n)
        for (int64_t u = 0; u < 5; ++u) {
            int32_t want = 0;
            for (int64_t c = 0; c < 17; ++c)
                want += int32_t(xq.data<int8_t>()[n * 17 + c]) * int32_t(wq.data<int8_t>()[u * 17 + c]);
            CHECK(acc.data<int32_t>()[n * 5 + u] == want);
        }
}
