#include "vc/ir.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace vc {

const char* to_string(ScalarKind k) {
  switch (k) {
    case ScalarKind::F32: return "f32";
    case ScalarKind::I32: return "i32";
    case ScalarKind::U8: return "u8";
  }
  return "?";
}

int bit_width(ScalarKind k) {
  switch (k) {
    case ScalarKind::F32: return 32;
    case ScalarKind::I32: return 32;
    case ScalarKind::U8: return 8;
  }
  return 0;
}

Value Value::from_f32(float f) {
  Value v{ScalarKind::F32, 0};
  std::memcpy(&v.bits, &f, 4);
  return v;
}

Value Value::from_i32(int32_t i) {
  return Value{ScalarKind::I32, static_cast<uint32_t>(i)};
}

Value Value::from_u8(uint8_t b) { return Value{ScalarKind::U8, b}; }

float Value::as_f32() const {
  float f;
  std::memcpy(&f, &bits, 4);
  return f;
}

const char* to_string(Opcode op) {
  switch (op) {
    case Opcode::Const: return "const";
    case Opcode::Add: return "add";
    case Opcode::Sub: return "sub";
    case Opcode::Mul: return "mul";
    case Opcode::CmpEq: return "cmpeq";
    case Opcode::CmpLt: return "cmplt";
    case Opcode::Mux: return "mux";
    case Opcode::Load: return "load";
    case Opcode::Store: return "store";
    case Opcode::PipeRead: return "piperead";
    case Opcode::PipeWrite: return "pipewrite";
    case Opcode::Phi: return "phi";
  }
  return "?";
}

bool defines_value(Opcode op) {
  return op != Opcode::Store && op != Opcode::PipeWrite;
}

bool has_side_effect(Opcode op) {
  return op == Opcode::Store || op == Opcode::PipeWrite ||
         op == Opcode::PipeRead;
}

LoopRegion::LoopRegion(const LoopRegion& o)
    : preheader(o.preheader),
      phis(o.phis),
      blocks(o.blocks),
      latch_cond(o.latch_cond),
      trip_bound(o.trip_bound),
      exits(o.exits),
      line(o.line) {
  seq.reserve(o.seq.size());
  for (const auto& item : o.seq) {
    BodyItem copy;
    if (item.inst) copy.inst = std::make_unique<Instruction>(*item.inst);
    if (item.loop) copy.loop = std::make_unique<LoopRegion>(*item.loop);
    seq.push_back(std::move(copy));
  }
}

LoopRegion& LoopRegion::operator=(const LoopRegion& o) {
  if (this != &o) {
    LoopRegion tmp(o);
    *this = std::move(tmp);
  }
  return *this;
}

const MemorySpace* Program::find_space(const std::string& n) const {
  for (const auto& s : spaces)
    if (s.name == n) return &s;
  return nullptr;
}

const StreamPort* Program::find_port(const std::string& n) const {
  for (const auto& p : ports)
    if (p.name == n) return &p;
  return nullptr;
}

std::string to_json_line(const Diagnostic& d) {
  const char* sev = d.severity == Severity::Error     ? "error"
                    : d.severity == Severity::Warning ? "warning"
                                                      : "advisory";
  std::ostringstream os;
  os << "{\"severity\":\"" << sev << "\",\"message\":\"";
  for (char c : d.message) {
    if (c == '"' || c == '\\') os << '\\';
    os << c;
  }
  os << "\",\"line\":" << d.line << ",\"col\":" << d.col << "}";
  return os.str();
}

uint32_t parse_literal_bits(ScalarKind k, const std::string& text, bool& ok) {
  ok = true;
  if (k == ScalarKind::F32) {
    if (text.rfind("0x", 0) == 0) {
      uint32_t bits = 0;
      auto [p, ec] = std::from_chars(text.data() + 2, text.data() + text.size(),
                                     bits, 16);
      ok = ec == std::errc{} && p == text.data() + text.size();
      return bits;
    }
    try {
      size_t pos = 0;
      float f = std::stof(text, &pos);
      ok = pos == text.size();
      uint32_t bits;
      std::memcpy(&bits, &f, 4);
      return bits;
    } catch (...) {
      ok = false;
      return 0;
    }
  }
  long long v = 0;
  auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  ok = ec == std::errc{} && p == text.data() + text.size();
  if (k == ScalarKind::U8) {
    if (v < 0 || v > 255) ok = false;
    return static_cast<uint32_t>(v & 0xff);
  }
  if (v < INT32_MIN || v > INT32_MAX) ok = false;
  return static_cast<uint32_t>(static_cast<int32_t>(v));
}

std::string format_literal(ScalarKind k, uint32_t bits) {
  char buf[64];
  if (k == ScalarKind::F32) {
    float f;
    std::memcpy(&f, &bits, 4);
    // %.9g round-trips binary32 exactly through parse_literal_bits,
    // except for non-finite values which fall back to raw bits.
    if (!std::isfinite(f)) {
      std::snprintf(buf, sizeof buf, "0x%08x", bits);
    } else {
      std::snprintf(buf, sizeof buf, "%.9g", static_cast<double>(f));
    }
    return buf;
  }
  if (k == ScalarKind::U8) {
    std::snprintf(buf, sizeof buf, "%u", bits & 0xffu);
    return buf;
  }
  std::snprintf(buf, sizeof buf, "%d", static_cast<int32_t>(bits));
  return buf;
}

namespace {

void print_inst(std::ostream& os, const Instruction& in, int indent) {
  for (int i = 0; i < indent; i++) os << ' ';
  switch (in.op) {
    case Opcode::Const:
      os << in.id << " = const " << to_string(in.kind) << ' '
         << format_literal(in.kind, in.const_bits);
      break;
    case Opcode::Add:
    case Opcode::Sub:
    case Opcode::Mul:
    case Opcode::CmpEq:
    case Opcode::CmpLt:
      os << in.id << " = " << to_string(in.op) << ' ' << to_string(in.kind)
         << ' ' << in.operands[0] << ' ' << in.operands[1];
      break;
    case Opcode::Mux:
      os << in.id << " = mux " << in.operands[0] << ' ' << in.operands[1]
         << ' ' << in.operands[2];
      break;
    case Opcode::Load:
      os << in.id << " = load " << in.target << ' ' << in.operands[0];
      break;
    case Opcode::Store:
      os << "store " << in.target << ' ' << in.operands[0] << ' '
         << in.operands[1];
      break;
    case Opcode::PipeRead:
      os << in.id << " = piperead " << in.target;
      break;
    case Opcode::PipeWrite:
      os << "pipewrite " << in.target << ' ' << in.operands[0];
      break;
    case Opcode::Phi:
      os << in.id << " = phi " << to_string(in.kind);
      for (const auto& [blk, val] : in.incomings) os << " [" << blk << ' ' << val << ']';
      break;
  }
  if (!in.guard.empty()) os << " when " << in.guard;
  os << '\n';
}

void print_loop(std::ostream& os, const LoopRegion& l, int indent) {
  std::string pad(indent, ' ');
  os << pad << "loop";
  if (l.trip_bound) os << " trip " << *l.trip_bound;
  os << '\n';
  if (!l.preheader.empty()) {
    os << pad << " pre\n";
    for (const auto& in : l.preheader) print_inst(os, in, indent + 2);
  }
  for (const auto& ph : l.phis) {
    os << pad << " phi " << ph.id << ' ' << to_string(ph.kind) << ' '
       << ph.init << ' ' << ph.next << '\n';
  }
  if (l.is_innermost()) {
    os << pad << " body\n";
    for (const auto& b : l.blocks) {
      os << pad << "  block " << b.label << '\n';
      for (const auto& in : b.insts) print_inst(os, in, indent + 3);
      os << pad << "   ";
      switch (b.term) {
        case TermKind::Br:
          os << "br " << b.br_cond << ' ' << b.succ_true << ' '
             << b.succ_false;
          break;
        case TermKind::Jmp: os << "jmp " << b.succ_false; break;
        case TermKind::End: os << "end"; break;
      }
      os << '\n';
    }
  } else {
    os << pad << " nest\n";
    for (const auto& item : l.seq) {
      if (item.inst) print_inst(os, *item.inst, indent + 2);
      if (item.loop) print_loop(os, *item.loop, indent + 2);
    }
  }
  os << pad << " latch " << l.latch_cond << '\n';
  for (const auto& [name, val] : l.exits)
    os << pad << " out " << name << ' ' << val << '\n';
  os << pad << "endloop\n";
}

}  // namespace

std::string print_program(const Program& p) {
  std::ostringstream os;
  os << "program " << p.name << '\n';
  for (const auto& s : p.spaces) {
    os << "space " << s.name << ' ' << to_string(s.kind) << ' ' << s.length;
    if (!s.initial_bits.empty()) {
      os << " init";
      for (uint32_t b : s.initial_bits) os << ' ' << format_literal(s.kind, b);
    }
    os << '\n';
  }
  for (const auto& port : p.ports) {
    os << "pipe " << (port.dir == PortDir::In ? "in " : "out ") << port.name
       << ' ' << to_string(port.kind);
    if (!port.backing_bits.empty()) {
      os << " data";
      for (uint32_t b : port.backing_bits)
        os << ' ' << format_literal(port.kind, b);
    }
    os << '\n';
  }
  for (const auto& in : p.inputs)
    os << "input " << in.name << ' ' << to_string(in.kind) << '\n';
  print_loop(os, p.body, 0);
  return os.str();
}

// ---------------------------------------------------------------------------
// validate

namespace {

struct Validator {
  const Program& prog;
  std::vector<Diagnostic> diags;
  std::unordered_map<std::string, int> defs;  // value name -> def line

  void error(const std::string& msg, int line) {
    diags.push_back({Severity::Error, msg, line, 0});
  }
  void advisory(const std::string& msg, int line) {
    diags.push_back({Severity::Advisory, msg, line, 0});
  }

  void define(const std::string& id, int line) {
    if (id.empty()) return;
    auto [it, fresh] = defs.emplace(id, line);
    if (!fresh)
      error("SSA violation: value '" + id + "' defined more than once", line);
  }

  void collect_inst(const Instruction& in) { define(in.id, in.line); }

  void collect_loop(const LoopRegion& l) {
    for (const auto& in : l.preheader) collect_inst(in);
    for (const auto& ph : l.phis) define(ph.id, ph.line);
    for (const auto& b : l.blocks)
      for (const auto& in : b.insts) collect_inst(in);
    for (const auto& item : l.seq) {
      if (item.inst) collect_inst(*item.inst);
      if (item.loop) collect_loop(*item.loop);
    }
  }

  void use(const std::string& ref, int line) {
    if (ref.empty()) return;
    if (!defs.count(ref))
      error("unresolved value reference '" + ref + "'", line);
  }

  void check_inst(const Instruction& in) {
    switch (in.op) {
      case Opcode::Const:
        break;
      case Opcode::Add:
      case Opcode::Sub:
      case Opcode::Mul:
      case Opcode::CmpEq:
      case Opcode::CmpLt:
        if (in.operands.size() != 2)
          error("binary op needs two operands", in.line);
        break;
      case Opcode::Mux:
        if (in.operands.size() != 3) error("mux needs three operands", in.line);
        break;
      case Opcode::Load:
        if (!prog.find_space(in.target))
          error("unresolved memory space '" + in.target + "'", in.line);
        break;
      case Opcode::Store:
        if (!prog.find_space(in.target))
          error("unresolved memory space '" + in.target + "'", in.line);
        break;
      case Opcode::PipeRead: {
        const StreamPort* sp = prog.find_port(in.target);
        if (!sp)
          error("unresolved stream port '" + in.target + "'", in.line);
        else if (sp->dir != PortDir::In)
          error("piperead from out-port '" + in.target + "'", in.line);
        break;
      }
      case Opcode::PipeWrite: {
        const StreamPort* sp = prog.find_port(in.target);
        if (!sp)
          error("unresolved stream port '" + in.target + "'", in.line);
        else if (sp->dir != PortDir::Out)
          error("pipewrite to in-port '" + in.target + "'", in.line);
        break;
      }
      case Opcode::Phi:
        if (in.incomings.size() < 2)
          error("block phi needs at least two incomings", in.line);
        break;
    }
    for (const auto& opnd : in.operands) use(opnd, in.line);
    for (const auto& [blk, val] : in.incomings) use(val, in.line);
    use(in.guard, in.line);
  }

  void check_loop(const LoopRegion& l) {
    for (const auto& in : l.preheader) {
      if (has_side_effect(in.op) || in.op == Opcode::Phi)
        error("preheader instruction must be pure", in.line);
      check_inst(in);
    }
    for (const auto& ph : l.phis) {
      use(ph.init, ph.line);
      use(ph.next, ph.line);
    }
    if (l.is_innermost()) {
      if (l.blocks.empty()) {
        error("loop has empty body", l.line);
      } else {
        std::set<std::string> labels;
        for (const auto& b : l.blocks) {
          if (!labels.insert(b.label).second)
            error("duplicate block label '" + b.label + "'", b.line);
        }
        for (const auto& b : l.blocks) {
          for (const auto& in : b.insts) check_inst(in);
          if (b.term == TermKind::Br) {
            use(b.br_cond, b.line);
            if (!labels.count(b.succ_true) || !labels.count(b.succ_false))
              error("branch target not found in block '" + b.label + "'",
                    b.line);
          } else if (b.term == TermKind::Jmp) {
            if (!labels.count(b.succ_false))
              error("jump target not found in block '" + b.label + "'",
                    b.line);
          }
        }
        if (l.blocks.size() > 1)
          advisory("predication required before circuit build", l.line);
      }
    } else {
      for (const auto& item : l.seq) {
        if (item.inst) {
          if (item.inst->op == Opcode::Phi)
            error("block phi outside basic block", item.inst->line);
          check_inst(*item.inst);
        }
        if (item.loop) check_loop(*item.loop);
      }
    }
    use(l.latch_cond, l.line);
    for (const auto& [name, val] : l.exits) use(val, l.line);
  }
};

}  // namespace

std::vector<Diagnostic> validate(const Program& p) {
  Validator v{p, {}, {}};
  std::set<std::string> names;
  for (const auto& s : p.spaces) {
    if (!names.insert(s.name).second)
      v.error("duplicate identifier '" + s.name + "'", s.line);
    if (s.length < 1) v.error("space '" + s.name + "' has length < 1", s.line);
    if (!s.initial_bits.empty() &&
        static_cast<long>(s.initial_bits.size()) != s.length)
      v.error("space '" + s.name + "' initial contents length mismatch",
              s.line);
  }
  for (const auto& port : p.ports)
    if (!names.insert(port.name).second)
      v.error("duplicate identifier '" + port.name + "'", port.line);
  for (const auto& in : p.inputs) {
    if (!names.insert(in.name).second)
      v.error("duplicate identifier '" + in.name + "'", in.line);
    v.define(in.name, in.line);
  }
  v.collect_loop(p.body);
  v.check_loop(p.body);
  return v.diags;
}

}  // namespace vc
