#include "qconv/bench/verify.hpp"

#include <array>
#include <cmath>
#include <cstring>
#include <ostream>
#include <vector>

#include "qconv/graph/executor.hpp"
#include "qconv/graph/quantize_pass.hpp"
#include "qconv/kernels/conv.hpp"
#include "qconv/kernels/microkernels.hpp"
#include "qconv/model/mini_resnet.hpp"

namespace qconv {

namespace {

struct RandomConvCase {
    ConvSpec spec;
    int64_t h, w;
    Tensor input_nchw;  // int8 codes
    Tensor weight;      // int8 codes, OIHW
};

RandomConvCase random_conv_case(SplitMix64& rng) {
    RandomConvCase c;
    c.spec.in_channels = 3 + int64_t(rng.next() % 30);  // 3..32
    c.spec.out_channels = 1 + int64_t(rng.next() % 24); // 1..24
    c.spec.kh = 1 + int64_t(rng.next() % 3);
    c.spec.kw = 1 + int64_t(rng.next() % 3);
    c.spec.stride = 1 + int64_t(rng.next() % 2);
    c.spec.pad = int64_t(rng.next() % 2);
    // choose extents so the output divides exactly and stays positive
    for (;;) {
        c.h = c.spec.kh + int64_t(rng.next() % 28);
        if (c.h <= 32 && (c.h + 2 * c.spec.pad - c.spec.kh) % c.spec.stride == 0) break;
    }
    for (;;) {
        c.w = c.spec.kw + int64_t(rng.next() % 28);
        if (c.w <= 32 && (c.w + 2 * c.spec.pad - c.spec.kw) % c.spec.stride == 0) break;
    }
    const int64_t n = 1 + int64_t(rng.next() % 2);
    c.input_nchw = seeded_codes(Layout::nchw(), {n, c.spec.in_channels, c.h, c.w}, rng.next());
    c.weight = seeded_codes(Layout::oihw(),
                            {c.spec.out_channels, c.spec.in_channels, c.spec.kh, c.spec.kw},
                            rng.next());
    return c;
}

bool bits_equal(const Tensor& a, const Tensor& b) {
    return a.shape() == b.shape() && a.elem() == b.elem() &&
           std::memcmp(a.raw(), b.raw(), a.byte_size()) == 0;
}

// max |a-b| / max(1, max|b|)
double normalized_max_error(const Tensor& a, const Tensor& b) {
    const float* pa = a.data<float>();
    const float* pb = b.data<float>();
    double max_diff = 0.0, max_ref = 0.0;
    for (int64_t i = 0; i < a.numel(); ++i) {
        max_diff = std::max(max_diff, std::fabs(double(pa[i]) - double(pb[i])));
        max_ref = std::max(max_ref, std::fabs(double(pb[i])));
    }
    return max_diff / std::max(1.0, max_ref);
}

bool suite_microkernels(const VerifyOptions& opts, std::ostream& log) {
    SplitMix64 rng(opts.seed ^ 0xabcdefull);
    bool ok = true;
    for (MicrokernelBackend b : available_microkernel_backends()) {
        if (b == MicrokernelBackend::Scalar) continue;
        set_microkernel_backend(b);
        const MicrokernelTable& table = active_microkernels();
        for (int i = 0; i < 200 && ok; ++i) {
            const size_t k = 4 * (1 + rng.next() % 64);
            std::vector<int8_t> a(4 * k), v(4 * k);
            for (auto& x : a) x = int8_t(int64_t(rng.next() % 255) - 127);
            for (auto& x : v) x = int8_t(int64_t(rng.next() % 255) - 127);
            if (table.dot_i8(a.data(), v.data(), k) != scalar::dot_i8(a.data(), v.data(), k))
                ok = false;
            int32_t got[16], want[16];
            table.mmla_4x4_i8(a.data(), v.data(), k, got);
            scalar::mmla_4x4_i8(a.data(), v.data(), k, want);
            if (std::memcmp(got, want, sizeof got) != 0) ok = false;
        }
        log << (ok ? "[ok] " : "[FAIL] ") << "microkernel backend '" << table.name
            << "' matches scalar reference\n";
    }
    set_microkernel_backend(MicrokernelBackend::Auto);
    return ok;
}

bool suite_pack_roundtrip(const VerifyOptions& opts, std::ostream& log) {
    SplitMix64 rng(opts.seed ^ 0x5eedull);
    bool ok = true;
    for (int i = 0; i < 50 && ok; ++i) {
        const int64_t n = 1 + int64_t(rng.next() % 2);
        const int64_t c = 1 + int64_t(rng.next() % 40);
        const int64_t h = 1 + int64_t(rng.next() % 8);
        const int64_t w = 1 + int64_t(rng.next() % 8);
        const int32_t block = std::array{4, 8, 16}[rng.next() % 3];
        Tensor t = seeded_uniform(Layout::nchw(), {n, c, h, w}, rng.next(), -2.0f, 2.0f);
        Tensor packed = pack_nchw_to_nchwc(t, block);
        if (!bits_equal(unpack_nchwc_to_nchw(packed, c), t)) ok = false;
        Tensor codes = seeded_codes(Layout::nchw(), {n, c, h, w}, rng.next());
        if (!bits_equal(unpack_nchwc_to_nchw(pack_nchw_to_nchwc(codes, block), c), codes))
            ok = false;
    }
    log << (ok ? "[ok] " : "[FAIL] ") << "nchwc pack/unpack round trip is bit-exact\n";
    return ok;
}

bool suite_int8_consensus(const VerifyOptions& opts, std::ostream& log) {
    SplitMix64 rng(opts.seed);
    bool ok = true;
    for (int i = 0; i < opts.conv_cases && ok; ++i) {
        RandomConvCase c = random_conv_case(rng);
        const Tensor ref = conv2d_direct_i8(c.input_nchw, c.weight, c.spec);
        if (!bits_equal(conv2d_nchw_spatial_pack(c.input_nchw, c.weight, c.spec, ElemType::I8), ref))
            ok = false;
        if (!bits_equal(conv2d_nchw_simd_i8(c.input_nchw, c.weight, c.spec), ref)) ok = false;
        const Tensor nhwc_out = conv2d_nhwc_quantized_interleaved_i8(
            transpose_nchw_nhwc(c.input_nchw), c.weight, c.spec);
        if (!bits_equal(transpose_nchw_nhwc(nhwc_out), ref)) ok = false;
    }
    log << (ok ? "[ok] " : "[FAIL] ") << "int8 schedule consensus over " << opts.conv_cases
        << " random convolutions (bit-identical int32 outputs)\n";
    return ok;
}

bool suite_fp32_fidelity(const VerifyOptions& opts, std::ostream& log) {
    SplitMix64 rng(opts.seed ^ 0xf32ull);
    bool ok = true;
    double worst = 0.0;
    for (int i = 0; i < opts.conv_cases && ok; ++i) {
        RandomConvCase c = random_conv_case(rng);
        Tensor in = seeded_uniform(Layout::nchw(), c.input_nchw.shape(), rng.next(), -1.0f, 1.0f);
        Tensor w = seeded_uniform(Layout::oihw(), c.weight.shape(), rng.next(), -1.0f, 1.0f);
        const Tensor ref = conv2d_direct_f32(in, w, c.spec);
        worst = std::max(worst, normalized_max_error(
                                    conv2d_nchw_spatial_pack(in, w, c.spec, ElemType::FP32), ref));
        const Tensor nhwc_out = conv2d_nhwc_spatial_pack_f32(transpose_nchw_nhwc(in), w, c.spec);
        worst = std::max(worst, normalized_max_error(transpose_nchw_nhwc(nhwc_out), ref));
        if (worst > 1e-5) ok = false;
    }
    log << (ok ? "[ok] " : "[FAIL] ") << "fp32 spatial-pack schedules within 1e-5 of the direct "
        << "reference (worst " << worst << ")\n";
    return ok;
}

bool suite_executors(const VerifyOptions& opts, std::ostream& log) {
    MiniResNetConfig mc;
    mc.seed = opts.seed;
    GraphIR g = build_mini_resnet(mc, Layout::nchw());
    Tensor input = seeded_uniform(Layout::nchw(), g.inputs[0].shape, opts.seed ^ 1, -1.0f, 1.0f);
    const std::vector<Tensor> calib{input};
    PartitionedGraph pg = quantize_pass(g, calib);

    AllocCounter static_counter, vm_counter;
    StaticExecutor stat(pg, &static_counter);
    VmExecutor vm(pg, &vm_counter);

    bool ok = true;
    const uint64_t warmup_allocs = static_counter.allocations;
    for (int i = 0; i < 5 && ok; ++i) {
        const std::vector<Tensor>& a = stat.run(calib);
        const std::vector<Tensor> b = vm.run(calib);
        if (a.size() != b.size() || !bits_equal(a[0], b[0])) ok = false;
    }
    if (static_counter.allocations != warmup_allocs) ok = false; // steady state must be alloc-free
    if (vm_counter.allocations < uint64_t(5 * vm.non_empty_partitions())) ok = false;
    log << (ok ? "[ok] " : "[FAIL] ")
        << "static and vm executors agree bit-exactly on the int8 mini-resnet; "
        << "static steady-state allocations = 0\n";
    return ok;
}

} // namespace

int run_verification(const VerifyOptions& opts, std::ostream& log) {
    bool ok = true;
    ok &= suite_microkernels(opts, log);
    ok &= suite_pack_roundtrip(opts, log);
    ok &= suite_int8_consensus(opts, log);
    ok &= suite_fp32_fidelity(opts, log);
    ok &= suite_executors(opts, log);
    log << (ok ? "verification passed\n" : "verification FAILED\n");
    return ok ? 0 : 1;
}

} // namespace qconv
