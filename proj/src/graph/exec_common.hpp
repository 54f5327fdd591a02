// Shared node execution path: both executors drive kernels through these
// helpers, which is what makes their outputs bit-identical by construction.
#pragma once

#include <span>

#include "qconv/graph/ir.hpp"

namespace qconv::exec {

size_t node_scratch_bytes(const Node& node, const std::vector<ValueInfo>& values);

// value_ptrs holds one raw pointer per value id (inputs and previously
// executed nodes must be populated). Writes the node's result to out.
void execute_node(const Node& node, const std::vector<ValueInfo>& values,
                  const void* const* value_ptrs, void* out, std::span<std::byte> scratch);

} // namespace qconv::exec
