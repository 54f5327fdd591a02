#pragma once

#include <vector>

#include "qconv/kernels/conv.hpp"
#include "qconv/quant.hpp"
#include "qconv/tensor.hpp"

namespace qconv {

enum class OpKind : uint8_t {
    CONV2D,
    ADD,
    RELU,
    GLOBAL_AVG_POOL,
    DENSE,
    QUANTIZE,
    DEQUANTIZE,
    DEQUANT_ACC,
};

const char* op_name(OpKind op);

struct ValueInfo {
    std::vector<int64_t> shape;
    Layout layout;
    ElemType elem = ElemType::FP32;

    size_t byte_size() const;
    bool operator==(const ValueInfo&) const = default;
};

struct Node {
    int32_t id = -1;
    OpKind op = OpKind::RELU;
    std::vector<int32_t> inputs; // value ids

    // CONV2D
    ConvSpec conv;
    ScheduleKind schedule = ScheduleKind::DIRECT_FP32_REFERENCE;
    // DENSE
    int64_t units = 0;
    // CONV2D / DENSE parameter: fp32 weights or int8 codes
    Tensor weight;
    uint64_t weight_seed = 0; // recorded so text fixtures can rebuild weights
    // QUANTIZE / DEQUANTIZE
    float scale = 1.0f;
    // DEQUANT_ACC
    float in_scale = 1.0f;
    float w_scale = 1.0f;
};

// Static dataflow DAG. Value ids are dense: graph input k is value k, node k's
// output is value inputs.size() + k. Every node's inputs carry smaller ids, so
// the node list is topologically ordered by construction; infer_values()
// validates the structure and derives every value's static (shape, layout,
// elem type).
struct GraphIR {
    std::vector<ValueInfo> inputs;
    std::vector<Node> nodes;
    std::vector<int32_t> outputs; // value ids; may name graph inputs directly

    int32_t num_values() const { return int32_t(inputs.size() + nodes.size()); }
    int32_t first_node_value() const { return int32_t(inputs.size()); }

    int32_t add_input(ValueInfo info);
    int32_t add_node(Node node); // assigns the id, returns it

    std::vector<ValueInfo> infer_values() const;
};

// Output info of a single node given the infos of all preceding values.
ValueInfo infer_node_output(const Node& node, const std::vector<ValueInfo>& values);

// The three-segment form produced by the quantization pass: a prefix that
// moves inputs into the quantized space, the int8 core, and a suffix that
// dequantizes outputs. Segments are complete graphs wired positionally:
// prefix.outputs feed middle.inputs, middle.outputs feed suffix.inputs.
// Empty segments are identity graphs (no nodes, outputs == inputs).
struct PartitionedGraph {
    GraphIR prefix;
    GraphIR middle;
    GraphIR suffix;

    static PartitionedGraph trivial(GraphIR g);

    int non_empty_partitions() const;
    // Concatenates the segments back into one node sequence.
    GraphIR fused() const;
};

} // namespace qconv
