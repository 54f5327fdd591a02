#pragma once

#include <string>

#include "qconv/graph/ir.hpp"

namespace qconv {

// Human-readable graph text format, one node per line (id, op, attrs, input
// ids), used for test fixtures and the CLI's --graph flag:
//
//   # comment
//   input 0 f32 nchw 1x3x32x32
//   1 conv2d in=0 o=16 k=3x3 stride=1 pad=1 schedule=nchw_spatial_pack_fp32 wseed=42
//   2 relu in=1
//   3 global_avg_pool in=2
//   4 dense in=3 units=10 wseed=43
//   output 4
//
// Only fp32 graphs serialize; parameters are carried as the seed they were
// deterministically initialized from, so a round trip reproduces the weights
// bit-for-bit.
std::string write_graph_text(const GraphIR& g);
GraphIR read_graph_text(const std::string& text);

GraphIR read_graph_file(const std::string& path);
void write_graph_file(const GraphIR& g, const std::string& path);

// seeded uniform(-0.5, 0.5) parameter initialization shared by the model
// builder and the loader
Tensor init_param(Layout layout, std::vector<int64_t> shape, uint64_t seed);

} // namespace qconv
