#pragma once

#include <stdexcept>

#include "vc/ir.hpp"

namespace vc {

struct TransformError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Branch elimination: rewrites every innermost loop body into a single
// basic block, replacing branches with per-instruction guard predicates
// and merge phis with mux chains. Functionally bit-exact.
Program predicate(const Program& p);

// Static unrolling of every innermost loop by `factor`. Requires a static
// trip bound; emits an epilogue loop when the trip count is not divisible.
// With reassociate=false chained accumulations keep their original order
// (bit-exact); with reassociate=true accumulator updates are regrouped
// into a balanced tree, one accumulator add per unrolled body.
Program unroll(const Program& p, int factor, bool reassociate);

}  // namespace vc
