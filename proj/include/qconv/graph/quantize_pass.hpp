#pragma once

#include <optional>
#include <span>

#include "qconv/graph/ir.hpp"

namespace qconv {

struct QuantizePassOptions {
    // Override for the int8 conv schedule; by default NCHW convs become
    // NCHW_SPATIAL_PACK_I8 and NHWC convs become NHWC_QUANTIZED_INTERLEAVED_I8.
    std::optional<ScheduleKind> int8_schedule;
};

// Rewrites an fp32-only graph into its quantized form and partitions it:
//   prefix  - QUANTIZE ops that move graph inputs into the int8 code space
//   middle  - the int8 core (int8 convs/dense + DEQUANT_ACC + fp32 glue ops;
//             intermediates between layers stay fp32)
//   suffix  - trailing DEQUANTIZE ops feeding graph outputs (often empty,
//             since DEQUANT_ACC already returns fp32)
//
// Activation scales come from max-abs calibration over one fp32 forward pass
// per calibration input; weight scales from max-abs over each weight tensor.
// Composing prefix -> middle -> suffix is functionally identical to executing
// the quantized graph as one sequence.
PartitionedGraph quantize_pass(const GraphIR& g, std::span<const Tensor> calibration_inputs,
                               const QuantizePassOptions& opts = {});

// Reference evaluator used for calibration and as a plain node-by-node
// interpreter: evaluates the graph with one freshly allocated tensor per node.
std::vector<Tensor> eval_graph(const GraphIR& g, std::span<const Tensor> inputs,
                               std::vector<Tensor>* all_values = nullptr);

} // namespace qconv
