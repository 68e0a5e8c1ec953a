#pragma once

#include <array>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "vc/ir.hpp"

namespace vc {

struct CircuitError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// data-path: operations connected by single-driver nets

enum class Protocol { SplitFourPhase, MuxProtocol, DecisionProtocol };

struct DataPathNode {
  int id = -1;
  std::string name;  // defined value, or a synthesized name for stores
  Protocol protocol = Protocol::SplitFourPhase;
  Opcode op = Opcode::Const;
  ScalarKind kind = ScalarKind::I32;
  uint32_t const_bits = 0;
  // split: instruction operands. Multiplexor: {init, next}. Decision: {cond}.
  std::vector<int> input_nets;
  int output_net = -1;
  int guard_net = -1;
  std::string space;  // memory space / stream port for Load/Store/Pipe*
};

struct Net {
  int id = -1;
  std::string name;
  int width = 32;
  int driver = -1;  // -1: program input or loop-external constant binding
  std::vector<int> readers;
  bool registered = true;
};

struct DataPath {
  std::vector<DataPathNode> nodes;
  std::vector<Net> nets;
  std::unordered_map<std::string, int> net_of;   // value name -> net id
  std::unordered_map<std::string, int> node_of;  // node name -> node id
};

// ---------------------------------------------------------------------------
// control-path: Petri net bound to handshake symbols

enum class TransBind { EmitsRequest, AwaitsAck, Silent };

enum class Phase {
  None,
  Sr,
  Sa,
  Cr,
  Ca,
  MuxReqInit,
  MuxReqBack,
  MuxAck,
  DecReq,
  DecTaken,
  DecNotTaken,
};

const char* to_string(Phase ph);

struct Place {
  int id = -1;
  std::string name;
  int capacity = 1;
  int initial = 0;
  // Marked-arc places and terminator-internal places are pipelining
  // bookkeeping, not part of the sequencing place set the cost model counts.
  bool marked_arc = false;
  bool term_internal = false;
};

struct Transition {
  int id = -1;
  std::string name;
  TransBind bind = TransBind::Silent;
  int node = -1;  // datapath node for bound transitions
  Phase phase = Phase::None;
  // Input/output place ids; a place listed twice is an arc of weight 2.
  std::vector<int> in;
  std::vector<int> out;
};

// Loop-terminator element, realized with a credit place: entering or
// re-issuing an iteration consumes one credit, completing one returns it,
// and the exit transition demands all M credits back (drain) plus the
// latched not-taken token.
struct LoopTerminator {
  int region = -1;
  int depth = 1;
  int enter_trans = -1;
  int take_trans = -1;
  int exit_trans = -1;
  int body_join_trans = -1;
  int credit_place = -1;
  std::vector<int> flush_places;  // one leftover token each, consumed at exit
};

struct ControlPetriNet {
  std::vector<Place> places;
  std::vector<Transition> transitions;
  int entry_place = -1;
  int exit_place = -1;
  std::vector<int> marked_arc_places;
};

// ---------------------------------------------------------------------------
// assembled circuit

// Cross-iteration ordering constraint added by the pipeliner; audited
// against simulation traces: fire(to, k+1) >= fire(from, k).
struct RuleArc {
  int rule = 0;  // 1..5
  int from_trans = -1;
  int to_trans = -1;
  int place = -1;
};

struct RegionInfo {
  int id = -1;
  int parent = -1;
  bool innermost = false;
  bool pipelined = false;

  std::vector<int> pre_nodes;   // preheader ops, fire once per activation
  std::vector<int> body_nodes;  // per-iteration split ops (innermost only)
  std::vector<int> phi_nodes;
  int decision_node = -1;

  int entry_place = -1;
  int exit_place = -1;
  int iter_place = -1;
  int body_done_place = -1;
  int taken_place = -1;
  int not_taken_place = -1;
  std::vector<int> back_enable_places;  // one per phi, fed on the back edge

  int enter_trans = -1;
  int iter_fork_trans = -1;
  int body_join_trans = -1;
  int back_trans = -1;
  int exit_trans = -1;

  struct PhiCtl {
    int node = -1;
    int req_init_trans = -1;
    int req_back_trans = -1;
    int ack_trans = -1;
    int next_producer = -1;          // node driving the back-edge value
    std::vector<int> reader_nodes;   // per-iteration readers in this region
  };
  std::vector<PhiCtl> phis;
  int dec_req_trans = -1;
  int dec_taken_trans = -1;
  int dec_not_taken_trans = -1;

  // intra-iteration dependency edges among per-iteration nodes
  std::vector<std::pair<int, int>> raw_edges;   // producer -> consumer
  std::vector<std::pair<int, int>> war_edges;   // reader -> writer (hinted)
  std::vector<std::pair<int, int>> mem_order;   // P before Q, store involved
  // P before Q pairs whose in-body arc was dropped because the addresses
  // provably differ by a constant; cross-iteration ordering still applies
  std::vector<std::pair<int, int>> mem_relaxed;

  std::vector<int> region_places;  // every place created for this region
};

// Register-aliasing hint: `reader` samples a register that `writer`
// overwrites later in the same iteration. SSA hides such reuse, so tests
// supply it explicitly to exercise WAR sequencing.
struct WarHint {
  std::string reader;
  std::string writer;
};

struct VirtualCircuit {
  Program prog;
  DataPath dp;
  ControlPetriNet cn;
  std::vector<RegionInfo> regions;
  std::vector<LoopTerminator> terminators;
  std::vector<RuleArc> rule_arcs;
  // per node: bound transitions; split {sr,sa,cr,ca},
  // mux {req_init,req_back,ack,-1}, decision {req,taken,not_taken,-1}
  std::vector<std::array<int, 4>> node_trans;
  bool pipelined = false;
  int depth = 1;
};

DataPath build_datapath(const Program& p);
VirtualCircuit build_circuit(const Program& p,
                             const std::vector<WarHint>& hints = {});

// Deterministic text serialization for golden-file tests.
std::string dump_circuit(const VirtualCircuit& vc);
// GraphViz export of the control net.
std::string export_dot(const VirtualCircuit& vc);

}  // namespace vc
