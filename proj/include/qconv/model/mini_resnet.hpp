#pragma once

#include "qconv/graph/ir.hpp"

namespace qconv {

// Desk-scale residual CNN that structurally mirrors the conv/residual pattern
// of ResNet-18: stem conv, stages of two-conv residual blocks with 1x1
// projection shortcuts at stage transitions, global average pooling and a
// dense classifier. No batch norm; convs are bias-free.
struct MiniResNetConfig {
    int64_t stem_channels = 16;
    std::vector<int> stage_multipliers = {1, 2};
    int blocks_per_stage = 2;
    int64_t input_size = 32; // square spatial extent
    int64_t input_channels = 3;
    int64_t num_classes = 10;
    int64_t batch = 1;
    uint64_t seed = 1;
};

// Convs are annotated with the layout-appropriate fp32 schedule; weights are
// deterministically initialized from the seed (uniform(-0.5, 0.5)), so equal
// seeds build bit-identical graphs.
GraphIR build_mini_resnet(const MiniResNetConfig& cfg, Layout layout);

// Number of CONV2D nodes the builder emits for a config:
// 2 * blocks_per_stage * stages (+1 stem) (+1 per projection shortcut).
int64_t mini_resnet_conv_count(const MiniResNetConfig& cfg);

} // namespace qconv
