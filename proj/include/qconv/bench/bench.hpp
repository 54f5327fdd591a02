#pragma once

#include <optional>
#include <string>

#include "qconv/graph/ir.hpp"
#include "qconv/model/mini_resnet.hpp"

namespace qconv {

enum class Precision : uint8_t { FP32, INT8 };
enum class ExecutorKind : uint8_t { Static, Vm };
enum class ReportFormat : uint8_t { Csv, Markdown };

const char* precision_name(Precision p);
const char* executor_name(ExecutorKind e);

// The user-facing schedule axis; combined with layout and precision it
// resolves to one concrete ScheduleKind.
enum class ScheduleFamily : uint8_t { SpatialPack, Simd, QuantizedInterleaved, Direct };

const char* schedule_family_name(ScheduleFamily f);
// InvalidArgument when the triple names no schedule (e.g. simd on NHWC,
// quantized-interleaved in fp32).
ScheduleKind resolve_schedule(ScheduleFamily f, Layout layout, Precision p);

struct BenchConfig {
    int total_epochs = 110;
    int warmup_epochs = 10;
    int64_t batch = 1;
    Layout layout = Layout::nchw();
    ScheduleFamily schedule = ScheduleFamily::SpatialPack;
    Precision precision = Precision::FP32;
    ExecutorKind executor = ExecutorKind::Static;
    uint64_t seed = 1;
    ReportFormat format = ReportFormat::Csv;
    std::string graph_file; // empty -> built-in mini-resnet
    MiniResNetConfig model;
    std::string tag; // row identity for report baselines; derived when empty
};

struct BenchResult {
    std::string tag;
    std::string layout;
    std::string schedule;
    std::string precision;
    std::string executor;
    int64_t batch = 1;
    int timed_epochs = 0;
    double mean_ms = 0.0;
    double stddev_ms = 0.0;
    double allocs_per_inference = 0.0; // steady state, from the executor counter
    uint64_t weight_bytes = 0;
    uint64_t peak_intermediate_bytes = 0;
    double ideal_speedup_factor = 0.0; // 0 = not applicable
};

std::string default_tag(const BenchConfig& cfg);

// Builds the model, applies the quantization pass for int8 configs, plans
// memory, then times total_epochs inferences on seeded synthetic batches and
// reports statistics over the epochs after warm-up. Epoch time is the wall
// time of one whole-batch inference (per-batch, not per-image).
BenchResult run_benchmark(const BenchConfig& cfg);

// 100 * baseline_ms / t_ms. Both arguments must be positive.
double improvement(double baseline_ms, double t_ms);

// Theoretical factor of a schedule: (H-parallel factor) x (lane/block factor).
// NotApplicable for the direct reference.
double ideal_speedup(ScheduleKind k);

// Modeled parameter storage: element count x element width, plus 4 bytes per
// parameter tensor for the fp32 scale in int8 mode.
uint64_t weight_memory_bytes(const GraphIR& g, Precision p);

// Modeled peak of simultaneously-live fp32 intermediates (node outputs) in
// bytes. Int8 codes and int32 accumulators are transient within a quantized
// layer; the tensors that occupy memory between layers are fp32 in every
// precision, so this metric is precision-invariant for a given network.
uint64_t peak_fp32_intermediate_bytes(const GraphIR& g);

} // namespace qconv
