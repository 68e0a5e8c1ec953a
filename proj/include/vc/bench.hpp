#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "vc/interp.hpp"

namespace vc {

// The four built-in benchmark kernels, in report order.
const std::vector<std::string>& kernel_names();

// Desk-scale default problem size per kernel.
long default_scale(const std::string& kernel);

// Instantiates a built-in kernel. `aggressive` selects the tiled matmul
// variant and is ignored elsewhere. Stream kernels are built with
// deterministic placeholder data; per-run inputs override it.
Program make_kernel(const std::string& kernel, long n, bool aggressive = false);

// Seeded random bindings: every memory space without initial contents,
// every declared scalar input, and every input stream port (overriding
// its backing data). Identical seed + program -> identical inputs.
RunInputs make_inputs(const Program& p, uint32_t seed);

}  // namespace vc
