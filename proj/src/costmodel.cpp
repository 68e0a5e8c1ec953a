#include "vc/costmodel.hpp"

#include <cmath>
#include <sstream>

namespace vc {

namespace {

std::string count_key(const DataPathNode& n) {
  if (n.protocol == Protocol::MuxProtocol) return "MULTIPLEXOR";
  if (n.protocol == Protocol::DecisionProtocol) return "DECISION";
  switch (n.op) {
    case Opcode::Const:
      return "CONST";
    case Opcode::Add:
      return n.kind == ScalarKind::F32 ? "FADD" : "IADD";
    case Opcode::Sub:
      return n.kind == ScalarKind::F32 ? "FSUB" : "ISUB";
    case Opcode::Mul:
      return n.kind == ScalarKind::F32 ? "FMUL" : "IMUL";
    case Opcode::CmpEq:
    case Opcode::CmpLt:
      return "CMP";
    case Opcode::Mux:
      return "MUX";
    case Opcode::Load:
      return "LOAD";
    case Opcode::Store:
      return "STORE";
    case Opcode::PipeRead:
      return "PIPE_RD";
    case Opcode::PipeWrite:
      return "PIPE_WR";
    case Opcode::Phi:
      break;
  }
  return "OTHER";
}

// Rough per-operator LUT weights; only relative ordering matters.
int lut_weight(const std::string& key) {
  if (key == "FMUL") return 120;
  if (key == "FADD" || key == "FSUB") return 80;
  if (key == "IMUL") return 60;
  if (key == "IADD" || key == "ISUB") return 16;
  if (key == "CMP") return 12;
  if (key == "MUX" || key == "MULTIPLEXOR") return 16;
  if (key == "LOAD" || key == "STORE") return 10;
  if (key == "PIPE_RD" || key == "PIPE_WR") return 8;
  if (key == "DECISION") return 4;
  return 0;  // CONST folds into routing
}

int place_bits(int capacity) {
  int bits = 0;
  for (int span = capacity + 1; (1 << bits) < span;) bits++;
  return bits == 0 ? 1 : bits;
}

}  // namespace

ResourceReport estimate_resources(const VirtualCircuit& vc) {
  ResourceReport r;
  for (const auto& n : vc.dp.nodes) {
    r.op_counts[count_key(n)]++;
    r.handshake_wires += n.protocol == Protocol::SplitFourPhase ? 4 : 3;
  }
  for (const auto& net : vc.dp.nets)
    if (net.registered) r.register_bits += net.width;
  for (const auto& pl : vc.cn.places) {
    if (pl.marked_arc || pl.term_internal) continue;
    r.control_places++;
    r.control_bits += place_bits(pl.capacity);
  }
  for (const auto& [key, cnt] : r.op_counts)
    r.luts_proxy += static_cast<long>(cnt) * lut_weight(key);
  r.luts_proxy += r.control_bits + r.handshake_wires / 2;
  r.ffs_proxy = r.register_bits + r.control_bits;
  return r;
}

std::string format_resources(const ResourceReport& r) {
  std::ostringstream os;
  os << "operators:";
  for (const auto& [key, cnt] : r.op_counts) os << ' ' << key << '=' << cnt;
  os << "\nregister_bits: " << r.register_bits
     << "\ncontrol_bits: " << r.control_bits << " (" << r.control_places
     << " places)"
     << "\nhandshake_wires: " << r.handshake_wires
     << "\nluts_proxy: " << r.luts_proxy << "\nffs_proxy: " << r.ffs_proxy
     << '\n';
  return os.str();
}

}  // namespace vc
