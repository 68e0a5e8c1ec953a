#pragma once

#include "vc/circuit.hpp"

namespace vc {

// Rewrites the control net so up to M iterations of every innermost loop
// may be in flight at once: cross-iteration marked arcs (rules 1-5), a
// loop-terminator per loop, and place capacities raised to M. The
// data-path is untouched. Rejects an already pipelined circuit.
VirtualCircuit pipeline_loop(const VirtualCircuit& vc, int M);

}  // namespace vc
