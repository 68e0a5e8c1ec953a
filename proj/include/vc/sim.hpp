#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "vc/circuit.hpp"
#include "vc/interp.hpp"

namespace vc {

struct SimFault : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct OpLatency {
  int sample = 1;
  int compute = 1;
  int ii = 1;  // initiation interval for overlapped instances
};

struct MemLatency {
  int latency = 2;
  int ports = 1;  // per direction per cycle
};

// Operator classes: fadd (f32 add/sub), fmul, int (integer add/sub/mul),
// cmp, mux (data mux, phi multiplexor, decision), const, pipe.
struct LatencyConfig {
  std::map<std::string, OpLatency> ops;
  MemLatency mem_default;
  std::map<std::string, MemLatency> mem;  // per-space overrides

  static LatencyConfig defaults();
  const OpLatency& op(const std::string& cls) const;
  MemLatency space(const std::string& name) const;
};

// key=value lines, '#' comments: fadd.compute=4, int.sample=1,
// mem.latency=2, mem.a.ports=1, ...
LatencyConfig parse_latency_config(const std::string& text);
LatencyConfig load_latency_file(const std::string& path);

struct TraceEvent {
  long cycle = 0;
  int trans = -1;
  long k = 0;  // firing index of this transition
};

struct SimStats {
  std::vector<long> transition_fires;
  std::vector<int> peak_occupancy;
  std::map<std::string, long> node_fires;  // completed instances per node
  long peak_active = 0;                    // max in-flight loop iterations
};

struct SimResult {
  long total_cycles = 0;
  RunOutputs outputs;
  std::vector<TraceEvent> trace;
  bool trace_complete = true;  // false once the ring buffer dropped events
  SimStats stats;
};

SimResult simulate(const VirtualCircuit& vc, const LatencyConfig& lat,
                   const RunInputs& inputs, long cycle_limit = 100000000L,
                   size_t trace_capacity = 1000000, bool full_audit = false);

// One line per event: "cycle node phase k".
std::string format_trace(const VirtualCircuit& vc, const SimResult& r);

// Mechanical check of pipelining rules (1)-(5) over the fired-event trace;
// returns human-readable violations (empty means clean). Needs a complete
// trace (full_audit).
std::vector<std::string> audit_rules(const VirtualCircuit& vc,
                                     const SimResult& r);

}  // namespace vc
