#include "qconv/graph/executor.hpp"

#include <cstring>

#include "qconv/kernels/nn_ops.hpp"
#include "exec_common.hpp"

#if defined(_WIN32)
#include <new>
#else
#include <sys/mman.h>
#include <unistd.h>
#endif

namespace qconv {

// ---------------------------------------------------------------------------
// Arena: page-granular executor memory, RAII, instrumented
// ---------------------------------------------------------------------------

namespace {

class ArenaBuffer {
public:
    ArenaBuffer() = default;

    ArenaBuffer(size_t bytes, AllocCounter* counter) {
        if (bytes == 0) return;
#if defined(_WIN32)
        base_ = static_cast<std::byte*>(::operator new(bytes));
        bytes_ = bytes;
#else
        const size_t page = size_t(sysconf(_SC_PAGESIZE));
        bytes_ = (bytes + page - 1) / page * page;
        void* p = mmap(nullptr, bytes_, PROT_READ | PROT_WRITE, MAP_PRIVATE | MAP_ANONYMOUS, -1, 0);
        if (p == MAP_FAILED) fail(ErrorKind::InvalidArgument, "arena allocation failed");
        base_ = static_cast<std::byte*>(p);
#endif
        if (counter) {
            counter->allocations += 1;
            counter->bytes += bytes_;
        }
    }

    ~ArenaBuffer() { release(); }

    ArenaBuffer(ArenaBuffer&& o) noexcept : base_(o.base_), bytes_(o.bytes_) {
        o.base_ = nullptr;
        o.bytes_ = 0;
    }
    ArenaBuffer& operator=(ArenaBuffer&& o) noexcept {
        if (this != &o) {
            release();
            base_ = o.base_;
            bytes_ = o.bytes_;
            o.base_ = nullptr;
            o.bytes_ = 0;
        }
        return *this;
    }
    ArenaBuffer(const ArenaBuffer&) = delete;
    ArenaBuffer& operator=(const ArenaBuffer&) = delete;

    std::byte* data() const { return base_; }
    size_t size() const { return bytes_; }

private:
    void release() {
        if (!base_) return;
#if defined(_WIN32)
        ::operator delete(base_);
#else
        munmap(base_, bytes_);
#endif
        base_ = nullptr;
    }

    std::byte* base_ = nullptr;
    size_t bytes_ = 0;
};

int64_t info_numel(const ValueInfo& v) {
    int64_t n = 1;
    for (int64_t d : v.shape) n *= d;
    return n;
}

void check_run_inputs(std::span<const Tensor> inputs, const std::vector<ValueInfo>& expected) {
    if (inputs.size() != expected.size())
        fail(ErrorKind::ShapeMismatch, "executor input count mismatch");
    for (size_t i = 0; i < inputs.size(); ++i) {
        const Tensor& t = inputs[i];
        const ValueInfo& e = expected[i];
        if (t.shape() != e.shape || t.elem() != e.elem || !(t.layout() == e.layout))
            fail(ErrorKind::ShapeMismatch, "executor input " + std::to_string(i) +
                                               " does not match the graph's declared input");
    }
}

} // namespace

// ---------------------------------------------------------------------------
// Node execution (shared by both executors)
// ---------------------------------------------------------------------------

namespace exec {

size_t node_scratch_bytes(const Node& node, const std::vector<ValueInfo>& values) {
    switch (node.op) {
        case OpKind::CONV2D: {
            const ValueInfo& in = values.at(size_t(node.inputs.at(0)));
            const bool nhwc = schedule_is_nhwc(node.schedule);
            const int64_t h = nhwc ? in.shape[1] : in.shape[2];
            const int64_t w = nhwc ? in.shape[2] : in.shape[3];
            return conv2d_scratch_bytes(node.schedule, node.conv, in.shape[0], h, w);
        }
        case OpKind::DENSE: {
            if (node.weight.elem() != ElemType::I8) return 0;
            const ValueInfo& in = values.at(size_t(node.inputs.at(0)));
            return dense_i8_scratch_bytes(in.shape[1], node.units);
        }
        default: return 0;
    }
}

void execute_node(const Node& node, const std::vector<ValueInfo>& values,
                  const void* const* value_ptrs, void* out, std::span<std::byte> scratch) {
    const ValueInfo& in0 = values.at(size_t(node.inputs.at(0)));
    const void* src0 = value_ptrs[node.inputs[0]];
    switch (node.op) {
        case OpKind::CONV2D: {
            const bool nhwc = schedule_is_nhwc(node.schedule);
            const int64_t h = nhwc ? in0.shape[1] : in0.shape[2];
            const int64_t w = nhwc ? in0.shape[2] : in0.shape[3];
            conv2d_execute(node.schedule, node.conv, in0.shape[0], h, w, src0, node.weight.raw(),
                           out, scratch);
            return;
        }
        case OpKind::ADD: {
            const void* src1 = value_ptrs[node.inputs.at(1)];
            raw::add(static_cast<const float*>(src0), static_cast<const float*>(src1),
                     static_cast<float*>(out), info_numel(in0));
            return;
        }
        case OpKind::RELU:
            raw::relu(static_cast<const float*>(src0), static_cast<float*>(out), info_numel(in0));
            return;
        case OpKind::GLOBAL_AVG_POOL: {
            if (in0.layout.tag == LayoutTag::NHWC)
                raw::global_avg_pool_nhwc(static_cast<const float*>(src0), static_cast<float*>(out),
                                          in0.shape[0], in0.shape[1] * in0.shape[2], in0.shape[3]);
            else
                raw::global_avg_pool_nchw(static_cast<const float*>(src0), static_cast<float*>(out),
                                          in0.shape[0], in0.shape[1], in0.shape[2] * in0.shape[3]);
            return;
        }
        case OpKind::DENSE: {
            if (node.weight.elem() == ElemType::I8)
                raw::dense_i8(static_cast<const int8_t*>(src0), node.weight.data<int8_t>(),
                              static_cast<int32_t*>(out), in0.shape[0], in0.shape[1], node.units,
                              scratch);
            else
                raw::dense_f32(static_cast<const float*>(src0), node.weight.data<float>(),
                               static_cast<float*>(out), in0.shape[0], in0.shape[1], node.units);
            return;
        }
        case OpKind::QUANTIZE:
            raw::quantize(static_cast<const float*>(src0), static_cast<int8_t*>(out),
                          info_numel(in0), node.scale);
            return;
        case OpKind::DEQUANTIZE:
            raw::dequantize(static_cast<const int8_t*>(src0), static_cast<float*>(out),
                            info_numel(in0), node.scale);
            return;
        case OpKind::DEQUANT_ACC:
            raw::dequantize_accumulator(static_cast<const int32_t*>(src0), static_cast<float*>(out),
                                        info_numel(in0), node.in_scale, node.w_scale);
            return;
    }
    fail(ErrorKind::UnsupportedOp, "unknown op kind");
}

} // namespace exec

// ---------------------------------------------------------------------------
// StaticExecutor
// ---------------------------------------------------------------------------

struct StaticExecutor::Impl {
    GraphIR g;
    MemoryPlan plan;
    std::vector<ValueInfo> values;
    ArenaBuffer arena;
    std::vector<const void*> value_ptrs;
    std::span<std::byte> scratch;
    std::vector<Tensor> outputs;
    // (output slot, graph input index) pairs for outputs that alias inputs
    std::vector<std::pair<size_t, int32_t>> passthrough;

    Impl(GraphIR graph, MemoryPlan p, AllocCounter* counter)
        : g(std::move(graph)), plan(std::move(p)), values(g.infer_values()),
          arena(plan.total_bytes(), counter), value_ptrs(size_t(g.num_values()), nullptr) {
        if (plan.buffers.size() != g.nodes.size())
            fail(ErrorKind::InvalidArgument, "memory plan does not match the graph");
        for (const MemoryPlan::Buffer& b : plan.buffers) {
            if (b.offset + b.bytes > plan.arena_bytes)
                fail(ErrorKind::InvalidArgument, "memory plan buffer exceeds the arena");
            value_ptrs[size_t(b.value_id)] = arena.data() + b.offset;
        }
        scratch = {arena.data() + plan.arena_bytes, plan.scratch_bytes};
        outputs.resize(g.outputs.size());
        for (size_t i = 0; i < g.outputs.size(); ++i) {
            const int32_t v = g.outputs[i];
            if (v >= g.first_node_value()) {
                const ValueInfo& info = values[size_t(v)];
                outputs[i] = Tensor::wrap(const_cast<void*>(value_ptrs[size_t(v)]), info.layout,
                                          info.elem, info.shape);
            } else {
                passthrough.emplace_back(i, v);
            }
        }
    }

    const std::vector<Tensor>& run(std::span<const Tensor> inputs) {
        check_run_inputs(inputs, g.inputs);
        for (size_t i = 0; i < inputs.size(); ++i) value_ptrs[i] = inputs[i].raw();
        for (const Node& n : g.nodes)
            exec::execute_node(n, values, value_ptrs.data(),
                               const_cast<void*>(value_ptrs[size_t(n.id)]), scratch);
        for (const auto& [slot, input_idx] : passthrough) outputs[slot] = inputs[size_t(input_idx)];
        return outputs;
    }
};

StaticExecutor::StaticExecutor(GraphIR g, MemoryPlan plan, AllocCounter* counter)
    : impl_(std::make_unique<Impl>(std::move(g), std::move(plan), counter)) {}

StaticExecutor::StaticExecutor(GraphIR g, AllocCounter* counter) {
    MemoryPlan plan = plan_memory(g);
    impl_ = std::make_unique<Impl>(std::move(g), std::move(plan), counter);
}

StaticExecutor::StaticExecutor(const PartitionedGraph& pg, AllocCounter* counter) {
    GraphIR g = pg.fused();
    MemoryPlan plan = plan_memory(g);
    impl_ = std::make_unique<Impl>(std::move(g), std::move(plan), counter);
}

StaticExecutor::~StaticExecutor() = default;
StaticExecutor::StaticExecutor(StaticExecutor&&) noexcept = default;
StaticExecutor& StaticExecutor::operator=(StaticExecutor&&) noexcept = default;

const std::vector<Tensor>& StaticExecutor::run(std::span<const Tensor> inputs) {
    return impl_->run(inputs);
}

const GraphIR& StaticExecutor::graph() const { return impl_->g; }
const MemoryPlan& StaticExecutor::plan() const { return impl_->plan; }

// ---------------------------------------------------------------------------
// VmExecutor
// ---------------------------------------------------------------------------

struct VmExecutor::Impl {
    PartitionedGraph pg;
    AllocCounter* counter;

    struct Segment {
        const GraphIR* g;
        std::vector<ValueInfo> values;
        std::vector<size_t> node_offsets; // bump offsets, no buffer reuse
        size_t scratch_offset = 0;
        size_t arena_bytes = 0;
    };
    Segment segments[3];

    Impl(PartitionedGraph graph, AllocCounter* c) : pg(std::move(graph)), counter(c) {
        const GraphIR* gs[3] = {&pg.prefix, &pg.middle, &pg.suffix};
        for (int i = 0; i < 3; ++i) {
            Segment& s = segments[i];
            s.g = gs[i];
            s.values = s.g->infer_values();
            size_t off = 0;
            size_t scratch = 0;
            for (const Node& n : s.g->nodes) {
                s.node_offsets.push_back(off);
                off += (s.values[size_t(n.id)].byte_size() + 63) / 64 * 64;
                scratch = std::max(scratch, exec::node_scratch_bytes(n, s.values));
            }
            s.scratch_offset = off;
            s.arena_bytes = off + scratch;
        }
    }

    // One partition call: fresh arena for intermediates, fresh tensors for the
    // partition's outputs, arena released on return.
    std::vector<Tensor> call(const Segment& s, std::span<const Tensor> args) {
        check_run_inputs(args, s.g->inputs);
        std::vector<Tensor> results(s.g->outputs.size());
        if (s.g->nodes.empty()) {
            for (size_t i = 0; i < s.g->outputs.size(); ++i)
                results[i] = args[size_t(s.g->outputs[i])];
            return results;
        }
        ArenaBuffer arena(s.arena_bytes, counter);
        std::vector<const void*> value_ptrs(size_t(s.g->num_values()), nullptr);
        for (size_t i = 0; i < args.size(); ++i) value_ptrs[i] = args[i].raw();
        const std::span<std::byte> scratch{arena.data() + s.scratch_offset,
                                           s.arena_bytes - s.scratch_offset};
        for (size_t k = 0; k < s.g->nodes.size(); ++k) {
            const Node& n = s.g->nodes[k];
            void* out = arena.data() + s.node_offsets[k];
            value_ptrs[size_t(n.id)] = out;
            exec::execute_node(n, s.values, value_ptrs.data(), out, scratch);
        }
        const int32_t first = s.g->first_node_value();
        for (size_t i = 0; i < s.g->outputs.size(); ++i) {
            const int32_t v = s.g->outputs[i];
            if (v < first) {
                results[i] = args[size_t(v)];
                continue;
            }
            const ValueInfo& info = s.values[size_t(v)];
            Tensor fresh = Tensor::zeros(info.layout, info.elem, info.shape);
            std::memcpy(fresh.raw(), value_ptrs[size_t(v)], info.byte_size());
            if (counter) {
                counter->allocations += 1;
                counter->bytes += info.byte_size();
            }
            results[i] = std::move(fresh);
        }
        return results;
    }

    std::vector<Tensor> run(std::span<const Tensor> inputs) {
        std::vector<Tensor> cur = call(segments[0], inputs);
        cur = call(segments[1], cur);
        return call(segments[2], cur);
    }
};

VmExecutor::VmExecutor(PartitionedGraph pg, AllocCounter* counter)
    : impl_(std::make_unique<Impl>(std::move(pg), counter)) {}

VmExecutor::~VmExecutor() = default;
VmExecutor::VmExecutor(VmExecutor&&) noexcept = default;
VmExecutor& VmExecutor::operator=(VmExecutor&&) noexcept = default;

std::vector<Tensor> VmExecutor::run(std::span<const Tensor> inputs) { return impl_->run(inputs); }

int VmExecutor::non_empty_partitions() const { return impl_->pg.non_empty_partitions(); }

// ---------------------------------------------------------------------------
// One-shot entry points
// ---------------------------------------------------------------------------

std::vector<Tensor> run_static(const GraphIR& g, const MemoryPlan& plan,
                               std::span<const Tensor> inputs) {
    StaticExecutor ex(g, plan);
    std::vector<Tensor> out;
    for (const Tensor& t : ex.run(inputs)) out.push_back(t.clone());
    return out;
}

std::vector<Tensor> run_static(const PartitionedGraph& pg, std::span<const Tensor> inputs) {
    StaticExecutor ex(pg);
    std::vector<Tensor> out;
    for (const Tensor& t : ex.run(inputs)) out.push_back(t.clone());
    return out;
}

std::vector<Tensor> run_vm(const PartitionedGraph& pg, std::span<const Tensor> inputs) {
    VmExecutor ex(pg);
    return ex.run(inputs);
}

} // namespace qconv
