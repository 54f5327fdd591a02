#pragma once

#include <span>

#include "qconv/graph/ir.hpp"

namespace qconv {

// Executor-level dynamic allocation accounting. Every arena acquisition and
// every fresh output tensor an executor makes is recorded here, so allocation
// discipline is testable without process-level tooling.
struct AllocCounter {
    uint64_t allocations = 0;
    uint64_t bytes = 0;
};

struct MemoryPlan {
    struct Buffer {
        int32_t value_id;
        size_t offset;
        size_t bytes;
    };
    std::vector<Buffer> buffers; // one per node output, offsets into the arena
    size_t arena_bytes = 0;      // intermediates region
    size_t scratch_bytes = 0;    // worst-case kernel workspace, placed after it

    size_t total_bytes() const { return arena_bytes + scratch_bytes; }
};

// Greedy liveness-based first-fit offset assignment. Deterministic for a given
// graph; buffers whose lifetimes are disjoint share offsets, so the arena is
// never larger than the sum of all intermediates and usually much smaller.
MemoryPlan plan_memory(const GraphIR& g);

// Pre-planned execution: one arena acquired at construction (the warm-up
// allocation), zero dynamic allocations per run() after that. Output tensors
// are views into the arena, valid until the next run().
class StaticExecutor {
public:
    StaticExecutor(GraphIR g, MemoryPlan plan, AllocCounter* counter = nullptr);
    explicit StaticExecutor(GraphIR g, AllocCounter* counter = nullptr);
    // Segments are fused into one node sequence and planned as a whole.
    explicit StaticExecutor(const PartitionedGraph& pg, AllocCounter* counter = nullptr);
    ~StaticExecutor();
    StaticExecutor(StaticExecutor&&) noexcept;
    StaticExecutor& operator=(StaticExecutor&&) noexcept;

    const std::vector<Tensor>& run(std::span<const Tensor> inputs);

    const GraphIR& graph() const;
    const MemoryPlan& plan() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

// Partitioned execution in the dynamic style: prefix, middle and suffix are
// invoked as three separate calls, each allocating its intermediates and
// outputs freshly (recorded by the counter) and releasing them afterwards.
class VmExecutor {
public:
    explicit VmExecutor(PartitionedGraph pg, AllocCounter* counter = nullptr);
    ~VmExecutor();
    VmExecutor(VmExecutor&&) noexcept;
    VmExecutor& operator=(VmExecutor&&) noexcept;

    std::vector<Tensor> run(std::span<const Tensor> inputs);

    int non_empty_partitions() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

// One-shot conveniences (plan/warm-up included in the call).
std::vector<Tensor> run_static(const GraphIR& g, const MemoryPlan& plan,
                               std::span<const Tensor> inputs);
std::vector<Tensor> run_static(const PartitionedGraph& pg, std::span<const Tensor> inputs);
std::vector<Tensor> run_vm(const PartitionedGraph& pg, std::span<const Tensor> inputs);

} // namespace qconv
