#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <array>

#include "qconv/tensor.hpp"

#include "support/oracles.hpp"

using namespace qconv;

namespace {

int64_t idx4(const Tensor& t, int64_t a, int64_t b, int64_t c, int64_t d) {
    const int64_t i[] = {a, b, c, d};
    return t.linear_index(i);
}

int64_t idx5(const Tensor& t, int64_t a, int64_t b, int64_t c, int64_t d, int64_t e) {
    const int64_t i[] = {a, b, c, d, e};
    return t.linear_index(i);
}

Tensor ramp_nchw(std::vector<int64_t> shape) {
    Tensor t = Tensor::zeros(Layout::nchw(), ElemType::FP32, std::move(shape));
    float* p = t.data<float>();
    for (int64_t i = 0; i < t.numel(); ++i) p[i] = float(i);
    return t;
}

} // namespace

TEST_CASE("pack_nchw_to_nchwc maps (n,c,h,w) to (n,c/b,h,w,c%b)") {
    Tensor t = ramp_nchw({1, 32, 4, 4});
    Tensor packed = pack_nchw_to_nchwc(t, 16);
    REQUIRE(packed.shape() == std::vector<int64_t>{1, 2, 4, 4, 16});
    CHECK(packed.layout().tag == LayoutTag::NCHWc);
    CHECK(packed.layout().block == 16);
    // element (0,17,1,2) lands at (0,1,1,2,1)
    CHECK(packed.data<float>()[idx5(packed, 0, 1, 1, 2, 1)] ==
          t.data<float>()[idx4(t, 0, 17, 1, 2)]);
}

TEST_CASE("single block packs channels in order") {
    Tensor t = Tensor::zeros(Layout::nchw(), ElemType::FP32, {1, 16, 2, 2});
    float* p = t.data<float>();
    for (int64_t c = 0; c < 16; ++c)
        for (int64_t i = 0; i < 4; ++i) p[c * 4 + i] = float(c);
    Tensor packed = pack_nchw_to_nchwc(t, 16);
    for (int64_t h = 0; h < 2; ++h)
        for (int64_t w = 0; w < 2; ++w)
            for (int64_t ci = 0; ci < 16; ++ci)
                CHECK(packed.data<float>()[idx5(packed, 0, 0, h, w, ci)] == float(ci));
}

TEST_CASE("pack pads missing channels with zeros and unpack recovers exactly") {
    Tensor t = seeded_uniform(Layout::nchw(), {1, 8, 2, 2}, 11, -3.0f, 3.0f);
    Tensor packed = pack_nchw_to_nchwc(t, 16);
    REQUIRE(packed.shape() == std::vector<int64_t>{1, 1, 2, 2, 16});
    for (int64_t h = 0; h < 2; ++h)
        for (int64_t w = 0; w < 2; ++w)
            for (int64_t ci = 8; ci < 16; ++ci)
                CHECK(packed.data<float>()[idx5(packed, 0, 0, h, w, ci)] == 0.0f);
    CHECK(oracle::bits_equal(unpack_nchwc_to_nchw(packed, 8), t));
}

TEST_CASE("pack/unpack round trip is bit-exact over random shapes and blocks") {
    SplitMix64 rng(2024);
    for (int i = 0; i < 100; ++i) {
        const int64_t n = 1 + int64_t(rng.next() % 3);
        const int64_t c = 1 + int64_t(rng.next() % 45); // often not a multiple of the block
        const int64_t h = 1 + int64_t(rng.next() % 7);
        const int64_t w = 1 + int64_t(rng.next() % 7);
        const int32_t block = std::array{4, 8, 16}[rng.next() % 3];
        Tensor f = seeded_uniform(Layout::nchw(), {n, c, h, w}, rng.next(), -2.0f, 2.0f);
        CHECK(oracle::bits_equal(unpack_nchwc_to_nchw(pack_nchw_to_nchwc(f, block), c), f));
        Tensor q = seeded_codes(Layout::nchw(), {n, c, h, w}, rng.next());
        CHECK(oracle::bits_equal(unpack_nchwc_to_nchw(pack_nchw_to_nchwc(q, block), c), q));
    }
}

TEST_CASE("padded lanes introduced by pack are exactly zero") {
    SplitMix64 rng(77);
    for (int i = 0; i < 20; ++i) {
        const int64_t c = 1 + int64_t(rng.next() % 45);
        const int32_t block = std::array{4, 8, 16}[rng.next() % 3];
        Tensor t = seeded_uniform(Layout::nchw(), {1, c, 3, 3}, rng.next(), -2.0f, 2.0f);
        Tensor packed = pack_nchw_to_nchwc(t, block);
        const float* p = packed.data<float>();
        const int64_t cb = packed.dim(1);
        for (int64_t b = 0; b < cb; ++b)
            for (int64_t hw = 0; hw < 9; ++hw)
                for (int64_t ci = 0; ci < block; ++ci)
                    if (b * block + ci >= c) CHECK(p[(b * 9 + hw) * block + ci] == 0.0f);
    }
}

TEST_CASE("(1,1,2,2,16) of zeros unpacks to (1,8,2,2) of zeros") {
    Tensor packed = Tensor::zeros(Layout::nchwc(16), ElemType::FP32, {1, 1, 2, 2, 16});
    Tensor t = unpack_nchwc_to_nchw(packed, 8);
    REQUIRE(t.shape() == std::vector<int64_t>{1, 8, 2, 2});
    for (int64_t i = 0; i < t.numel(); ++i) CHECK(t.data<float>()[i] == 0.0f);
}

TEST_CASE("pack/unpack argument validation") {
    Tensor nchw = ramp_nchw({1, 4, 2, 2});
    Tensor nhwc = transpose_nchw_nhwc(nchw);
    CHECK_THROWS_WITH_AS(pack_nchw_to_nchwc(nhwc, 16), doctest::Contains("NCHW"), Error);
    CHECK_THROWS_AS(pack_nchw_to_nchwc(nchw, 5), Error);
    try {
        pack_nchw_to_nchwc(nchw, 5);
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::InvalidArgument);
    }
    try {
        pack_nchw_to_nchwc(nhwc, 16);
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::LayoutMismatch);
    }
    Tensor packed = pack_nchw_to_nchwc(nchw, 4);
    CHECK_THROWS_AS(unpack_nchwc_to_nchw(packed, 5), Error); // capacity is 4
    try {
        unpack_nchwc_to_nchw(packed, 5);
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::InvalidArgument);
    }
}

TEST_CASE("transpose moves (0,1,2,0) to (0,2,0,1) and flips the layout tag") {
    Tensor t = ramp_nchw({1, 2, 3, 3});
    Tensor u = transpose_nchw_nhwc(t);
    REQUIRE(u.shape() == std::vector<int64_t>{1, 3, 3, 2});
    CHECK(u.layout().tag == LayoutTag::NHWC);
    CHECK(u.data<float>()[idx4(u, 0, 2, 0, 1)] == t.data<float>()[idx4(t, 0, 1, 2, 0)]);
}

TEST_CASE("double transpose is the identity") {
    SplitMix64 rng(5);
    for (int i = 0; i < 100; ++i) {
        const int64_t n = 1 + int64_t(rng.next() % 2), c = 1 + int64_t(rng.next() % 8);
        const int64_t h = 1 + int64_t(rng.next() % 6), w = 1 + int64_t(rng.next() % 6);
        Tensor t = seeded_uniform(Layout::nchw(), {n, c, h, w}, rng.next(), -1.0f, 1.0f);
        CHECK(oracle::bits_equal(transpose_nchw_nhwc(transpose_nchw_nhwc(t)), t));
    }
}

TEST_CASE("all-constant tensors have identical buffers under either layout order") {
    Tensor t = Tensor::zeros(Layout::nchw(), ElemType::FP32, {2, 3, 4, 5});
    float* p = t.data<float>();
    for (int64_t i = 0; i < t.numel(); ++i) p[i] = 2.5f;
    Tensor u = transpose_nchw_nhwc(t);
    CHECK(u.numel() == t.numel());
    CHECK(std::memcmp(u.raw(), t.raw(), t.byte_size()) == 0);
}

TEST_CASE("transpose rejects unsupported layouts") {
    Tensor t = pack_nchw_to_nchwc(ramp_nchw({1, 4, 2, 2}), 4);
    try {
        transpose_nchw_nhwc(t);
        FAIL("expected layout error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::LayoutMismatch);
    }
}

TEST_CASE("element count is invariant under layout transforms (modulo declared padding)") {
    Tensor t = ramp_nchw({2, 24, 5, 5});
    CHECK(transpose_nchw_nhwc(t).numel() == t.numel());
    Tensor packed = pack_nchw_to_nchwc(t, 16);
    CHECK(packed.numel() == 2 * 2 * 5 * 5 * 16); // padded product
    Tensor back = unpack_nchwc_to_nchw(packed, 24);
    CHECK(back.numel() == t.numel());
    CHECK(oracle::bits_equal(back, t));
}

TEST_CASE("typed access is checked") {
    Tensor t = ramp_nchw({1, 1, 2, 2});
    CHECK_THROWS_AS((void)t.data<int8_t>(), Error);
    CHECK_THROWS_AS(Tensor::zeros(Layout::nchw(), ElemType::FP32, {1, 0, 2, 2}), Error);
    CHECK(Layout::nchwc().block == 16); // default block
}
