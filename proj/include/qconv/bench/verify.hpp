#pragma once

#include <iosfwd>

#include "qconv/tensor.hpp"

namespace qconv {

struct VerifyOptions {
    int conv_cases = 100; // randomized convolution geometries per suite
    uint64_t seed = 7;
};

// Runs the oracle consensus suites: micro-kernel backend equivalence, layout
// pack/unpack round trips, int8 schedule consensus against the brute-force
// integer reference, fp32 schedule fidelity against the direct reference, and
// static-vs-vm executor equivalence. Logs one line per suite. Returns 0 on
// success, 1 on any mismatch.
int run_verification(const VerifyOptions& opts, std::ostream& log);

} // namespace qconv
