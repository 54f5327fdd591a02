#include "qconv/graph/quantize_pass.hpp"

#include <cmath>
#include <unordered_map>

#include "qconv/kernels/nn_ops.hpp"

namespace qconv {

std::vector<Tensor> eval_graph(const GraphIR& g, std::span<const Tensor> inputs,
                               std::vector<Tensor>* all_values) {
    const std::vector<ValueInfo> infos = g.infer_values();
    if (inputs.size() != g.inputs.size())
        fail(ErrorKind::ShapeMismatch, "eval_graph input count mismatch");
    std::vector<Tensor> values(size_t(g.num_values()));
    for (size_t i = 0; i < inputs.size(); ++i) values[i] = inputs[i];
    for (const Node& n : g.nodes) {
        const Tensor& a = values.at(size_t(n.inputs.at(0)));
        Tensor out;
        switch (n.op) {
            case OpKind::CONV2D: out = conv2d(n.schedule, a, n.weight, n.conv); break;
            case OpKind::ADD: out = add(a, values.at(size_t(n.inputs.at(1)))); break;
            case OpKind::RELU: out = relu(a); break;
            case OpKind::GLOBAL_AVG_POOL: out = global_avg_pool(a); break;
            case OpKind::DENSE:
                out = n.weight.elem() == ElemType::I8 ? dense_i8(a, n.weight)
                                                      : dense_f32(a, n.weight);
                break;
            case OpKind::QUANTIZE: out = quantize(a, {n.scale}); break;
            case OpKind::DEQUANTIZE: out = dequantize(a, {n.scale}); break;
            case OpKind::DEQUANT_ACC: out = dequantize_accumulator(a, n.in_scale, n.w_scale); break;
        }
        values[size_t(n.id)] = std::move(out);
    }
    std::vector<Tensor> outputs;
    for (int32_t v : g.outputs) outputs.push_back(values.at(size_t(v)));
    if (all_values) *all_values = std::move(values);
    return outputs;
}

namespace {

float scale_from_maxabs(float maxabs) { return maxabs == 0.0f ? 1.0f : maxabs / 127.0f; }

ScheduleKind int8_schedule_for(ScheduleKind fp32_schedule, const QuantizePassOptions& opts) {
    if (opts.int8_schedule) {
        if (!schedule_is_int8(*opts.int8_schedule))
            fail(ErrorKind::InvalidArgument, "int8 schedule override must be an int8 schedule");
        return *opts.int8_schedule;
    }
    return schedule_is_nhwc(fp32_schedule) ? ScheduleKind::NHWC_QUANTIZED_INTERLEAVED_I8
                                           : ScheduleKind::NCHW_SPATIAL_PACK_I8;
}

// Splits g's node list into (prefix quantizes of graph inputs, middle, suffix
// dequantizes feeding only graph outputs) and rebuilds each as a standalone
// graph wired positionally through its boundary values.
PartitionedGraph partition(const GraphIR& g) {
    const std::vector<ValueInfo> infos = g.infer_values();
    const int32_t first = g.first_node_value();

    enum class Where : uint8_t { Prefix, Middle, Suffix };
    std::vector<Where> where(g.nodes.size(), Where::Middle);

    for (size_t k = 0; k < g.nodes.size(); ++k) {
        const Node& n = g.nodes[k];
        if (n.op != OpKind::QUANTIZE) continue;
        bool all_graph_inputs = true;
        for (int32_t in : n.inputs) all_graph_inputs &= in < first;
        if (all_graph_inputs) where[k] = Where::Prefix;
    }
    // consumer map: a DEQUANTIZE belongs to the suffix iff nothing consumes it
    // (it can only feed graph outputs)
    std::vector<int> consumers(size_t(g.num_values()), 0);
    for (const Node& n : g.nodes)
        for (int32_t in : n.inputs) consumers[size_t(in)] += 1;
    for (size_t k = 0; k < g.nodes.size(); ++k) {
        const Node& n = g.nodes[k];
        if (n.op == OpKind::DEQUANTIZE && consumers[size_t(n.id)] == 0) where[k] = Where::Suffix;
    }

    // Boundary values crossing each cut, in id order.
    auto used_after = [&](Where limit) {
        std::vector<bool> used(size_t(g.num_values()), false);
        for (size_t k = 0; k < g.nodes.size(); ++k)
            if (where[k] > limit)
                for (int32_t in : g.nodes[k].inputs) used[size_t(in)] = true;
        for (int32_t out : g.outputs) used[size_t(out)] = true;
        return used;
    };
    auto produced_by = [&](Where limit) {
        std::vector<bool> prod(size_t(g.num_values()), false);
        for (int32_t i = 0; i < first; ++i) prod[size_t(i)] = true;
        for (size_t k = 0; k < g.nodes.size(); ++k)
            if (where[k] <= limit) prod[size_t(g.nodes[k].id)] = true;
        return prod;
    };

    auto boundary = [&](Where limit) {
        const auto used = used_after(limit);
        const auto prod = produced_by(limit);
        std::vector<int32_t> b;
        for (int32_t v = 0; v < g.num_values(); ++v)
            if (used[size_t(v)] && prod[size_t(v)]) b.push_back(v);
        return b;
    };

    const std::vector<int32_t> b1 = boundary(Where::Prefix);
    const std::vector<int32_t> b2 = boundary(Where::Middle);

    auto extract = [&](Where who, const std::vector<int32_t>& in_values,
                       const std::vector<int32_t>& out_values) {
        GraphIR seg;
        std::vector<int32_t> remap(size_t(g.num_values()), -1);
        for (int32_t v : in_values) remap[size_t(v)] = seg.add_input(infos[size_t(v)]);
        for (size_t k = 0; k < g.nodes.size(); ++k) {
            if (where[k] != who) continue;
            Node copy = g.nodes[k];
            for (int32_t& in : copy.inputs) {
                if (remap[size_t(in)] < 0)
                    fail(ErrorKind::InvalidSpec, "partition segment misses an input value");
                in = remap[size_t(in)];
            }
            remap[size_t(g.nodes[k].id)] = seg.add_node(std::move(copy));
        }
        for (int32_t v : out_values) {
            if (remap[size_t(v)] < 0)
                fail(ErrorKind::InvalidSpec, "partition segment misses an output value");
            seg.outputs.push_back(remap[size_t(v)]);
        }
        return seg;
    };

    std::vector<int32_t> graph_input_ids(static_cast<size_t>(first));
    for (int32_t i = 0; i < first; ++i) graph_input_ids[size_t(i)] = i;

    PartitionedGraph pg;
    pg.prefix = extract(Where::Prefix, graph_input_ids, b1);
    pg.middle = extract(Where::Middle, b1, b2);
    pg.suffix = extract(Where::Suffix, b2, g.outputs);
    return pg;
}

} // namespace

PartitionedGraph quantize_pass(const GraphIR& g, std::span<const Tensor> calibration_inputs,
                               const QuantizePassOptions& opts) {
    if (calibration_inputs.empty())
        fail(ErrorKind::InvalidArgument, "quantize_pass needs at least one calibration input");
    if (g.inputs.empty()) fail(ErrorKind::InvalidSpec, "quantize_pass expects a graph with inputs");
    if (calibration_inputs.size() % g.inputs.size() != 0)
        fail(ErrorKind::ShapeMismatch, "calibration inputs must be whole input sets");

    for (const Node& n : g.nodes) {
        switch (n.op) {
            case OpKind::CONV2D:
                if (schedule_is_int8(n.schedule))
                    fail(ErrorKind::UnsupportedOp, "quantize_pass expects an fp32-only graph");
                break;
            case OpKind::DENSE:
                if (n.weight.elem() != ElemType::FP32)
                    fail(ErrorKind::UnsupportedOp, "quantize_pass expects fp32 dense weights");
                break;
            case OpKind::ADD:
            case OpKind::RELU:
            case OpKind::GLOBAL_AVG_POOL: break;
            case OpKind::QUANTIZE:
            case OpKind::DEQUANTIZE:
            case OpKind::DEQUANT_ACC:
                fail(ErrorKind::UnsupportedOp, "quantize_pass expects an fp32-only graph");
        }
    }

    // Calibration: max-abs of every value over one fp32 forward pass per
    // calibration input set.
    std::vector<float> maxabs(size_t(g.num_values()), 0.0f);
    const size_t set_size = g.inputs.size();
    for (size_t base = 0; base < calibration_inputs.size(); base += set_size) {
        std::vector<Tensor> all;
        eval_graph(g, calibration_inputs.subspan(base, set_size), &all);
        for (size_t v = 0; v < all.size(); ++v) {
            if (!all[v].defined() || all[v].elem() != ElemType::FP32) continue;
            const float* p = all[v].data<float>();
            for (int64_t i = 0; i < all[v].numel(); ++i)
                maxabs[v] = std::max(maxabs[v], std::fabs(p[i]));
        }
    }

    // Rewrite. fp32_of maps old value ids to the quantized graph; quant_of
    // memoizes inserted QUANTIZE nodes so two consumers share one.
    GraphIR q;
    q.inputs = g.inputs;
    std::vector<int32_t> fp32_of(size_t(g.num_values()), -1);
    std::unordered_map<int32_t, int32_t> quant_of;
    std::vector<float> in_scale_of(size_t(g.num_values()), 1.0f);
    const int32_t first = g.first_node_value();
    for (int32_t i = 0; i < first; ++i) fp32_of[size_t(i)] = i;

    auto quantized_input = [&](int32_t old_v) {
        auto it = quant_of.find(old_v);
        if (it != quant_of.end()) return it->second;
        Node qn;
        qn.op = OpKind::QUANTIZE;
        qn.inputs = {fp32_of[size_t(old_v)]};
        qn.scale = scale_from_maxabs(maxabs[size_t(old_v)]);
        in_scale_of[size_t(old_v)] = qn.scale;
        const int32_t id = q.add_node(std::move(qn));
        quant_of.emplace(old_v, id);
        return id;
    };

    for (const Node& n : g.nodes) {
        if (n.op == OpKind::CONV2D || n.op == OpKind::DENSE) {
            const int32_t old_in = n.inputs.at(0);
            const int32_t qin = quantized_input(old_in);
            const QuantParams wq = calibrate_maxabs(n.weight);

            Node core = n;
            core.inputs = {qin};
            core.weight = quantize(n.weight, wq);
            if (n.op == OpKind::CONV2D) core.schedule = int8_schedule_for(n.schedule, opts);
            const int32_t acc = q.add_node(std::move(core));

            Node deq;
            deq.op = OpKind::DEQUANT_ACC;
            deq.inputs = {acc};
            deq.in_scale = in_scale_of[size_t(old_in)];
            deq.w_scale = wq.scale;
            fp32_of[size_t(n.id)] = q.add_node(std::move(deq));
        } else {
            Node copy = n;
            for (int32_t& in : copy.inputs) in = fp32_of[size_t(in)];
            fp32_of[size_t(n.id)] = q.add_node(std::move(copy));
        }
    }
    for (int32_t out : g.outputs) q.outputs.push_back(fp32_of[size_t(out)]);

    return partition(q);
}

} // namespace qconv
