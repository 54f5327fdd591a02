#include "qconv/graph/executor.hpp"

#include <algorithm>

#include "exec_common.hpp"

namespace qconv {

namespace {

constexpr size_t kBufferAlign = 64;

size_t align_up(size_t n) { return (n + kBufferAlign - 1) / kBufferAlign * kBufferAlign; }

} // namespace

MemoryPlan plan_memory(const GraphIR& g) {
    const std::vector<ValueInfo> values = g.infer_values();
    const int32_t first = g.first_node_value();
    const int32_t nnodes = int32_t(g.nodes.size());

    // Lifetime of node k's output in node indices: [k, last consumer],
    // inclusive; graph outputs stay live to the end of the schedule.
    std::vector<int32_t> last(static_cast<size_t>(nnodes));
    for (int32_t k = 0; k < nnodes; ++k) last[size_t(k)] = k;
    for (int32_t k = 0; k < nnodes; ++k)
        for (int32_t in : g.nodes[size_t(k)].inputs)
            if (in >= first) last[size_t(in - first)] = std::max(last[size_t(in - first)], k);
    for (int32_t out : g.outputs)
        if (out >= first) last[size_t(out - first)] = nnodes;

    struct Placed {
        size_t offset, size;
        int32_t def, last;
    };
    std::vector<Placed> placed;
    MemoryPlan plan;
    std::vector<Placed> live; // scratch list of lifetime-overlapping blocks

    for (int32_t k = 0; k < nnodes; ++k) {
        const size_t size = align_up(values[size_t(first + k)].byte_size());
        live.clear();
        for (const Placed& p : placed)
            if (!(p.last < k || last[size_t(k)] < p.def)) live.push_back(p);
        std::sort(live.begin(), live.end(),
                  [](const Placed& a, const Placed& b) { return a.offset < b.offset; });
        size_t offset = 0;
        for (const Placed& p : live) {
            if (offset + size <= p.offset) break;
            offset = std::max(offset, p.offset + p.size);
        }
        placed.push_back({offset, size, k, last[size_t(k)]});
        plan.buffers.push_back({first + k, offset, size});
        plan.arena_bytes = std::max(plan.arena_bytes, offset + size);
    }

    for (const Node& n : g.nodes)
        plan.scratch_bytes = std::max(plan.scratch_bytes, exec::node_scratch_bytes(n, values));
    plan.scratch_bytes = align_up(plan.scratch_bytes);
    return plan;
}

} // namespace qconv
