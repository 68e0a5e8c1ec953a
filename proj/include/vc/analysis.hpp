#pragma once

#include <string>
#include <vector>

#include "vc/circuit.hpp"

namespace vc {

struct LivenessReport {
  bool conclusive = true;  // false when the state cap was hit
  bool deadlock_free = true;
  bool exit_reachable = false;
  int max_occupancy = 0;           // over all places and explored markings
  std::vector<int> place_max;      // per place
  std::string deadlock_marking;    // first deadlock found, if any
  long states_explored = 0;

  // true when every explored marking keeps every place within `bound`
  bool bounded_by(int bound) const { return max_occupancy <= bound; }
  std::string verdict() const;
};

// Token-game exploration of the control net, abstracting data: decision
// outcomes branch nondeterministically and acknowledges are always
// eventually granted. Independent transitions are collapsed to one
// canonical order (a transition whose input places it consumes alone is
// fired without branching, with a cycle proviso), so deadlock reports and
// reached markings are real; occupancy figures cover explored markings.
LivenessReport check_liveness_safeness(const VirtualCircuit& vc,
                                       long state_cap = 1000000);

}  // namespace vc
