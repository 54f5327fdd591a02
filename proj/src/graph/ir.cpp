#include "qconv/graph/ir.hpp"

namespace qconv {

const char* op_name(OpKind op) {
    switch (op) {
        case OpKind::CONV2D: return "conv2d";
        case OpKind::ADD: return "add";
        case OpKind::RELU: return "relu";
        case OpKind::GLOBAL_AVG_POOL: return "global_avg_pool";
        case OpKind::DENSE: return "dense";
        case OpKind::QUANTIZE: return "quantize";
        case OpKind::DEQUANTIZE: return "dequantize";
        case OpKind::DEQUANT_ACC: return "dequant_acc";
    }
    return "?";
}

size_t ValueInfo::byte_size() const {
    int64_t n = 1;
    for (int64_t d : shape) n *= d;
    return size_t(n) * elem_bytes(elem);
}

int32_t GraphIR::add_input(ValueInfo info) {
    if (!nodes.empty())
        fail(ErrorKind::InvalidArgument, "graph inputs must be added before nodes");
    inputs.push_back(std::move(info));
    return int32_t(inputs.size()) - 1;
}

int32_t GraphIR::add_node(Node node) {
    node.id = num_values();
    for (int32_t in : node.inputs)
        if (in < 0 || in >= node.id)
            fail(ErrorKind::InvalidArgument, "node inputs must precede the node");
    nodes.push_back(std::move(node));
    return int32_t(inputs.size() + nodes.size()) - 1;
}

namespace {

const ValueInfo& input_info(const Node& n, const std::vector<ValueInfo>& values, size_t idx) {
    if (idx >= n.inputs.size())
        fail(ErrorKind::InvalidSpec, std::string(op_name(n.op)) + " node is missing inputs");
    return values.at(size_t(n.inputs[idx]));
}

void expect_inputs(const Node& n, size_t count) {
    if (n.inputs.size() != count)
        fail(ErrorKind::InvalidSpec, std::string(op_name(n.op)) + " expects " +
                                         std::to_string(count) + " input(s)");
}

} // namespace

ValueInfo infer_node_output(const Node& node, const std::vector<ValueInfo>& values) {
    switch (node.op) {
        case OpKind::CONV2D: {
            expect_inputs(node, 1);
            const ValueInfo& in = input_info(node, values, 0);
            if (in.shape.size() != 4)
                fail(ErrorKind::ShapeMismatch, "conv2d input must be rank 4");
            const bool nhwc = schedule_is_nhwc(node.schedule);
            const bool int8 = schedule_is_int8(node.schedule);
            const LayoutTag want = nhwc ? LayoutTag::NHWC : LayoutTag::NCHW;
            if (in.layout.tag != want)
                fail(ErrorKind::LayoutMismatch, "conv2d input layout does not match schedule");
            if (in.elem != (int8 ? ElemType::I8 : ElemType::FP32))
                fail(ErrorKind::TypeMismatch, "conv2d input elem does not match schedule");
            if (!node.weight.defined() || node.weight.rank() != 4 ||
                node.weight.layout().tag != LayoutTag::OIHW)
                fail(ErrorKind::InvalidSpec, "conv2d node needs OIHW weights");
            if (node.weight.elem() != (int8 ? ElemType::I8 : ElemType::FP32))
                fail(ErrorKind::TypeMismatch, "conv2d weight elem does not match schedule");
            if (node.weight.dim(0) != node.conv.out_channels ||
                node.weight.dim(1) != node.conv.in_channels || node.weight.dim(2) != node.conv.kh ||
                node.weight.dim(3) != node.conv.kw)
                fail(ErrorKind::ShapeMismatch, "conv2d weight shape does not match spec");
            const int64_t c = nhwc ? in.shape[3] : in.shape[1];
            const int64_t h = nhwc ? in.shape[1] : in.shape[2];
            const int64_t w = nhwc ? in.shape[2] : in.shape[3];
            if (c != node.conv.in_channels)
                fail(ErrorKind::ShapeMismatch, "conv2d input channels do not match spec");
            const ConvDims d = resolve_conv_dims(node.conv, in.shape[0], h, w);
            ValueInfo out;
            out.layout = in.layout;
            out.elem = int8 ? ElemType::I32 : ElemType::FP32;
            out.shape = nhwc ? std::vector<int64_t>{d.n, d.oh, d.ow, node.conv.out_channels}
                             : std::vector<int64_t>{d.n, node.conv.out_channels, d.oh, d.ow};
            return out;
        }
        case OpKind::ADD: {
            expect_inputs(node, 2);
            const ValueInfo& a = input_info(node, values, 0);
            const ValueInfo& b = input_info(node, values, 1);
            if (a.elem != ElemType::FP32 || b.elem != ElemType::FP32)
                fail(ErrorKind::TypeMismatch, "add expects fp32 inputs");
            if (!(a == b)) fail(ErrorKind::ShapeMismatch, "add inputs must match");
            return a;
        }
        case OpKind::RELU: {
            expect_inputs(node, 1);
            const ValueInfo& in = input_info(node, values, 0);
            if (in.elem != ElemType::FP32) fail(ErrorKind::TypeMismatch, "relu expects fp32 input");
            return in;
        }
        case OpKind::GLOBAL_AVG_POOL: {
            expect_inputs(node, 1);
            const ValueInfo& in = input_info(node, values, 0);
            if (in.elem != ElemType::FP32)
                fail(ErrorKind::TypeMismatch, "global_avg_pool expects fp32 input");
            if (in.shape.size() != 4)
                fail(ErrorKind::ShapeMismatch, "global_avg_pool input must be rank 4");
            const bool nhwc = in.layout.tag == LayoutTag::NHWC;
            if (!nhwc && in.layout.tag != LayoutTag::NCHW)
                fail(ErrorKind::LayoutMismatch, "global_avg_pool expects NCHW or NHWC");
            const int64_t c = nhwc ? in.shape[3] : in.shape[1];
            return ValueInfo{{in.shape[0], c}, Layout::nchw(), ElemType::FP32};
        }
        case OpKind::DENSE: {
            expect_inputs(node, 1);
            const ValueInfo& in = input_info(node, values, 0);
            if (in.shape.size() != 2) fail(ErrorKind::ShapeMismatch, "dense input must be rank 2");
            if (!node.weight.defined() || node.weight.rank() != 2)
                fail(ErrorKind::InvalidSpec, "dense node needs rank-2 weights");
            if (node.weight.dim(0) != node.units || node.weight.dim(1) != in.shape[1])
                fail(ErrorKind::ShapeMismatch, "dense weight shape does not match");
            const bool int8 = node.weight.elem() == ElemType::I8;
            if (in.elem != (int8 ? ElemType::I8 : ElemType::FP32))
                fail(ErrorKind::TypeMismatch, "dense input elem does not match weights");
            return ValueInfo{{in.shape[0], node.units}, Layout::nchw(),
                             int8 ? ElemType::I32 : ElemType::FP32};
        }
        case OpKind::QUANTIZE: {
            expect_inputs(node, 1);
            const ValueInfo& in = input_info(node, values, 0);
            if (in.elem != ElemType::FP32) fail(ErrorKind::TypeMismatch, "quantize expects fp32");
            if (!(node.scale > 0.0f)) fail(ErrorKind::InvalidSpec, "quantize scale must be positive");
            return ValueInfo{in.shape, in.layout, ElemType::I8};
        }
        case OpKind::DEQUANTIZE: {
            expect_inputs(node, 1);
            const ValueInfo& in = input_info(node, values, 0);
            if (in.elem != ElemType::I8) fail(ErrorKind::TypeMismatch, "dequantize expects int8");
            if (!(node.scale > 0.0f)) fail(ErrorKind::InvalidSpec, "dequantize scale must be positive");
            return ValueInfo{in.shape, in.layout, ElemType::FP32};
        }
        case OpKind::DEQUANT_ACC: {
            expect_inputs(node, 1);
            const ValueInfo& in = input_info(node, values, 0);
            if (in.elem != ElemType::I32) fail(ErrorKind::TypeMismatch, "dequant_acc expects int32");
            if (!(node.in_scale > 0.0f) || !(node.w_scale > 0.0f))
                fail(ErrorKind::InvalidSpec, "dequant_acc scales must be positive");
            return ValueInfo{in.shape, in.layout, ElemType::FP32};
        }
    }
    fail(ErrorKind::UnsupportedOp, "unknown op kind");
}

std::vector<ValueInfo> GraphIR::infer_values() const {
    std::vector<ValueInfo> values;
    values.reserve(inputs.size() + nodes.size());
    for (const ValueInfo& in : inputs) values.push_back(in);
    for (size_t k = 0; k < nodes.size(); ++k) {
        const Node& n = nodes[k];
        if (n.id != int32_t(inputs.size() + k))
            fail(ErrorKind::InvalidSpec, "node ids must be dense and in order");
        for (int32_t in : n.inputs)
            if (in < 0 || in >= n.id)
                fail(ErrorKind::InvalidSpec, "node inputs must precede the node (acyclic order)");
        values.push_back(infer_node_output(n, values));
    }
    for (int32_t out : outputs)
        if (out < 0 || out >= num_values())
            fail(ErrorKind::InvalidSpec, "graph output references unknown value");
    return values;
}

// ---------------------------------------------------------------------------
// PartitionedGraph
// ---------------------------------------------------------------------------

namespace {

GraphIR identity_graph(const std::vector<ValueInfo>& boundary) {
    GraphIR g;
    for (const ValueInfo& v : boundary) g.outputs.push_back(g.add_input(v));
    return g;
}

} // namespace

PartitionedGraph PartitionedGraph::trivial(GraphIR g) {
    const std::vector<ValueInfo> values = g.infer_values();
    std::vector<ValueInfo> out_infos;
    for (int32_t v : g.outputs) out_infos.push_back(values.at(size_t(v)));
    PartitionedGraph pg;
    pg.prefix = identity_graph(g.inputs);
    pg.suffix = identity_graph(out_infos);
    pg.middle = std::move(g);
    return pg;
}

int PartitionedGraph::non_empty_partitions() const {
    return int(!prefix.nodes.empty()) + int(!middle.nodes.empty()) + int(!suffix.nodes.empty());
}

GraphIR PartitionedGraph::fused() const {
    GraphIR out;
    out.inputs = prefix.inputs;

    auto append = [&out](const GraphIR& seg, const std::vector<int32_t>& boundary_map) {
        std::vector<int32_t> remap(size_t(seg.num_values()), -1);
        for (size_t i = 0; i < seg.inputs.size(); ++i) remap[i] = boundary_map[i];
        for (const Node& n : seg.nodes) {
            Node copy = n;
            for (int32_t& in : copy.inputs) in = remap.at(size_t(in));
            remap[size_t(n.id)] = out.add_node(std::move(copy));
        }
        std::vector<int32_t> seg_outputs;
        for (int32_t v : seg.outputs) seg_outputs.push_back(remap.at(size_t(v)));
        return seg_outputs;
    };

    std::vector<int32_t> ids(prefix.inputs.size());
    for (size_t i = 0; i < ids.size(); ++i) ids[i] = int32_t(i);
    ids = append(prefix, ids);
    if (ids.size() != middle.inputs.size())
        fail(ErrorKind::ShapeMismatch, "prefix outputs do not match middle inputs");
    ids = append(middle, ids);
    if (ids.size() != suffix.inputs.size())
        fail(ErrorKind::ShapeMismatch, "middle outputs do not match suffix inputs");
    out.outputs = append(suffix, ids);
    return out;
}

} // namespace qconv
