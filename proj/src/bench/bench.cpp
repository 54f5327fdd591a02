#include "qconv/bench/bench.hpp"

#include <chrono>
#include <cmath>

#include "qconv/graph/executor.hpp"
#include "qconv/graph/quantize_pass.hpp"
#include "qconv/graph/serialize.hpp"

namespace qconv {

const char* precision_name(Precision p) { return p == Precision::FP32 ? "fp32" : "int8"; }
const char* executor_name(ExecutorKind e) { return e == ExecutorKind::Static ? "static" : "vm"; }

const char* schedule_family_name(ScheduleFamily f) {
    switch (f) {
        case ScheduleFamily::SpatialPack: return "spatial-pack";
        case ScheduleFamily::Simd: return "simd";
        case ScheduleFamily::QuantizedInterleaved: return "quantized-interleaved";
        case ScheduleFamily::Direct: return "direct";
    }
    return "?";
}

ScheduleKind resolve_schedule(ScheduleFamily f, Layout layout, Precision p) {
    const bool nhwc = layout.tag == LayoutTag::NHWC;
    if (!nhwc && layout.tag != LayoutTag::NCHW)
        fail(ErrorKind::InvalidArgument, "bench layout must be nchw or nhwc");
    switch (f) {
        case ScheduleFamily::SpatialPack:
            if (nhwc && p == Precision::INT8)
                fail(ErrorKind::InvalidArgument,
                     "nhwc int8 uses the quantized-interleaved schedule, not spatial-pack");
            if (nhwc) return ScheduleKind::NHWC_SPATIAL_PACK_FP32;
            return p == Precision::INT8 ? ScheduleKind::NCHW_SPATIAL_PACK_I8
                                        : ScheduleKind::NCHW_SPATIAL_PACK_FP32;
        case ScheduleFamily::Simd:
            if (nhwc || p != Precision::INT8)
                fail(ErrorKind::InvalidArgument, "simd is an nchw int8 schedule");
            return ScheduleKind::NCHW_SIMD_I8;
        case ScheduleFamily::QuantizedInterleaved:
            if (!nhwc || p != Precision::INT8)
                fail(ErrorKind::InvalidArgument, "quantized-interleaved is an nhwc int8 schedule");
            return ScheduleKind::NHWC_QUANTIZED_INTERLEAVED_I8;
        case ScheduleFamily::Direct:
            if (p != Precision::FP32 || nhwc)
                fail(ErrorKind::InvalidArgument, "direct is the nchw fp32 reference");
            return ScheduleKind::DIRECT_FP32_REFERENCE;
    }
    fail(ErrorKind::InvalidArgument, "unknown schedule family");
}

double improvement(double baseline_ms, double t_ms) {
    if (!(baseline_ms > 0.0) || !(t_ms > 0.0))
        fail(ErrorKind::InvalidArgument, "improvement expects positive times");
    return 100.0 * baseline_ms / t_ms;
}

double ideal_speedup(ScheduleKind k) {
    if (k == ScheduleKind::DIRECT_FP32_REFERENCE)
        fail(ErrorKind::NotApplicable, "the direct reference has no ideal speedup");
    const int h_parallel = 4;
    const int lanes = (k == ScheduleKind::NHWC_SPATIAL_PACK_FP32) ? 1 : 4;
    return double(h_parallel * lanes);
}

uint64_t weight_memory_bytes(const GraphIR& g, Precision p) {
    uint64_t bytes = 0;
    for (const Node& n : g.nodes) {
        if (!n.weight.defined()) continue;
        const uint64_t elems = uint64_t(n.weight.numel());
        bytes += p == Precision::FP32 ? elems * 4 : elems + 4; // +4: fp32 scale per tensor
    }
    return bytes;
}

uint64_t peak_fp32_intermediate_bytes(const GraphIR& g) {
    const std::vector<ValueInfo> values = g.infer_values();
    const int32_t first = g.first_node_value();
    const int32_t nnodes = int32_t(g.nodes.size());
    std::vector<int32_t> last(static_cast<size_t>(nnodes));
    for (int32_t k = 0; k < nnodes; ++k) last[size_t(k)] = k;
    for (int32_t k = 0; k < nnodes; ++k)
        for (int32_t in : g.nodes[size_t(k)].inputs)
            if (in >= first) last[size_t(in - first)] = std::max(last[size_t(in - first)], k);
    for (int32_t out : g.outputs)
        if (out >= first) last[size_t(out - first)] = nnodes;

    uint64_t peak = 0;
    for (int32_t step = 0; step < nnodes; ++step) {
        uint64_t live = 0;
        for (int32_t k = 0; k <= step; ++k) {
            if (values[size_t(first + k)].elem != ElemType::FP32) continue;
            if (last[size_t(k)] >= step) live += values[size_t(first + k)].byte_size();
        }
        peak = std::max(peak, live);
    }
    return peak;
}

std::string default_tag(const BenchConfig& cfg) {
    std::string tag = layout_name(cfg.layout);
    tag += '-';
    tag += schedule_family_name(cfg.schedule);
    tag += '-';
    tag += precision_name(cfg.precision);
    tag += '-';
    tag += executor_name(cfg.executor);
    tag += "-b" + std::to_string(cfg.batch);
    return tag;
}

namespace {

void validate_config(const BenchConfig& cfg) {
    if (cfg.total_epochs <= 0 || cfg.warmup_epochs < 0 || cfg.warmup_epochs >= cfg.total_epochs)
        fail(ErrorKind::InvalidArgument, "bench epochs: need 0 <= warmup < total");
    if (cfg.batch <= 0) fail(ErrorKind::InvalidArgument, "bench batch must be positive");
    resolve_schedule(cfg.schedule, cfg.layout, cfg.precision); // validates the triple
}

// Rewrites fp32 conv schedules for the direct reference configuration.
void apply_direct_schedules(GraphIR& g) {
    for (Node& n : g.nodes)
        if (n.op == OpKind::CONV2D) n.schedule = ScheduleKind::DIRECT_FP32_REFERENCE;
}

} // namespace

BenchResult run_benchmark(const BenchConfig& cfg) {
    validate_config(cfg);
    const ScheduleKind schedule = resolve_schedule(cfg.schedule, cfg.layout, cfg.precision);

    GraphIR g;
    if (!cfg.graph_file.empty()) {
        g = read_graph_file(cfg.graph_file);
    } else {
        MiniResNetConfig mc = cfg.model;
        mc.batch = cfg.batch;
        mc.seed = cfg.seed;
        g = build_mini_resnet(mc, cfg.layout);
    }
    if (cfg.schedule == ScheduleFamily::Direct) apply_direct_schedules(g);

    // Deterministic synthetic batches; generated outside the timed region.
    SplitMix64 input_seeds(cfg.seed ^ 0x9e3779b97f4a7c15ull);
    std::vector<std::vector<Tensor>> batch_sets;
    constexpr int kDistinctBatches = 4;
    for (int i = 0; i < kDistinctBatches; ++i) {
        std::vector<Tensor> set;
        for (const ValueInfo& in : g.inputs)
            set.push_back(seeded_uniform(in.layout, in.shape, input_seeds.next(), -1.0f, 1.0f));
        batch_sets.push_back(std::move(set));
    }

    PartitionedGraph pg;
    if (cfg.precision == Precision::INT8) {
        // calibration: first two distinct input sets
        std::vector<Tensor> calib;
        for (int i = 0; i < 2; ++i)
            for (const Tensor& t : batch_sets[size_t(i)]) calib.push_back(t);
        QuantizePassOptions opts;
        opts.int8_schedule = schedule;
        pg = quantize_pass(g, calib, opts);
    } else {
        pg = PartitionedGraph::trivial(g);
    }

    AllocCounter counter;
    std::optional<StaticExecutor> stat;
    std::optional<VmExecutor> vm;
    if (cfg.executor == ExecutorKind::Static)
        stat.emplace(pg, &counter);
    else
        vm.emplace(pg, &counter);

    auto run_once = [&](int epoch) {
        const std::vector<Tensor>& in = batch_sets[size_t(epoch % kDistinctBatches)];
        if (stat)
            stat->run(in);
        else
            vm->run(in);
    };

    using clock = std::chrono::steady_clock;
    std::vector<double> epoch_ms;
    epoch_ms.reserve(size_t(cfg.total_epochs - cfg.warmup_epochs));
    uint64_t allocs_at_steady_state = 0;
    for (int epoch = 0; epoch < cfg.total_epochs; ++epoch) {
        if (epoch == cfg.warmup_epochs) allocs_at_steady_state = counter.allocations;
        const auto t0 = clock::now();
        run_once(epoch);
        const auto t1 = clock::now();
        if (epoch >= cfg.warmup_epochs)
            epoch_ms.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
    }

    const int timed = int(epoch_ms.size());
    double mean = 0.0;
    for (double v : epoch_ms) mean += v;
    mean /= timed;
    double var = 0.0;
    for (double v : epoch_ms) var += (v - mean) * (v - mean);
    const double stddev = timed > 1 ? std::sqrt(var / (timed - 1)) : 0.0;

    BenchResult r;
    r.tag = cfg.tag.empty() ? default_tag(cfg) : cfg.tag;
    r.layout = layout_name(cfg.layout);
    r.schedule = schedule_family_name(cfg.schedule);
    r.precision = precision_name(cfg.precision);
    r.executor = executor_name(cfg.executor);
    r.batch = cfg.batch;
    r.timed_epochs = timed;
    r.mean_ms = mean;
    r.stddev_ms = stddev;
    r.allocs_per_inference = double(counter.allocations - allocs_at_steady_state) / double(timed);
    r.weight_bytes = weight_memory_bytes(g, cfg.precision);
    r.peak_intermediate_bytes = peak_fp32_intermediate_bytes(
        cfg.precision == Precision::INT8 ? pg.fused() : g);
    r.ideal_speedup_factor =
        schedule == ScheduleKind::DIRECT_FP32_REFERENCE ? 0.0 : ideal_speedup(schedule);
    return r;
}

} // namespace qconv
