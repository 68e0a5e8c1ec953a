#pragma once

#include <map>
#include <string>

#include "vc/circuit.hpp"

namespace vc {

// Toolchain-independent resource proxy. Operator counts and register bits
// describe the data-path; control bits cover the sequencing places only
// (pipeliner bookkeeping places are excluded so plain-vs-pipelined deltas
// reflect capacity growth, not arc plumbing).
struct ResourceReport {
  std::map<std::string, int> op_counts;
  long register_bits = 0;
  long control_bits = 0;
  int control_places = 0;  // places contributing to control_bits
  long handshake_wires = 0;
  long luts_proxy = 0;
  long ffs_proxy = 0;
};

ResourceReport estimate_resources(const VirtualCircuit& vc);
std::string format_resources(const ResourceReport& r);

}  // namespace vc
