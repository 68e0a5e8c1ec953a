#include "vc/interp.hpp"

#include <unordered_map>

namespace vc {

Value eval_binop(Opcode op, ScalarKind kind, Value a, Value b) {
  switch (kind) {
    case ScalarKind::F32: {
      float x = a.as_f32(), y = b.as_f32();
      switch (op) {
        case Opcode::Add: return Value::from_f32(x + y);
        case Opcode::Sub: return Value::from_f32(x - y);
        case Opcode::Mul: return Value::from_f32(x * y);
        case Opcode::CmpEq: return Value::from_i32(x == y ? 1 : 0);
        case Opcode::CmpLt: return Value::from_i32(x < y ? 1 : 0);
        default: break;
      }
      break;
    }
    case ScalarKind::I32: {
      uint32_t x = a.bits, y = b.bits;
      switch (op) {
        case Opcode::Add: return Value::from_i32(static_cast<int32_t>(x + y));
        case Opcode::Sub: return Value::from_i32(static_cast<int32_t>(x - y));
        case Opcode::Mul: return Value::from_i32(static_cast<int32_t>(x * y));
        case Opcode::CmpEq: return Value::from_i32(x == y ? 1 : 0);
        case Opcode::CmpLt:
          return Value::from_i32(
              static_cast<int32_t>(x) < static_cast<int32_t>(y) ? 1 : 0);
        default: break;
      }
      break;
    }
    case ScalarKind::U8: {
      uint32_t x = a.bits & 0xffu, y = b.bits & 0xffu;
      switch (op) {
        case Opcode::Add: return Value::from_u8(static_cast<uint8_t>(x + y));
        case Opcode::Sub: return Value::from_u8(static_cast<uint8_t>(x - y));
        case Opcode::Mul: return Value::from_u8(static_cast<uint8_t>(x * y));
        case Opcode::CmpEq: return Value::from_i32(x == y ? 1 : 0);
        case Opcode::CmpLt: return Value::from_i32(x < y ? 1 : 0);
        default: break;
      }
      break;
    }
  }
  throw RunError("unsupported binary op");
}

namespace {

struct Interp {
  const Program& prog;
  long budget;

  std::unordered_map<std::string, Value> env;
  std::map<std::string, std::vector<uint32_t>> memory;
  std::map<std::string, ScalarKind> space_kind;
  std::map<std::string, std::vector<uint32_t>> in_data;
  std::map<std::string, size_t> in_cursor;
  std::map<std::string, std::vector<uint32_t>> out_data;
  std::map<std::string, ScalarKind> port_kind;

  Value get(const std::string& name) {
    auto it = env.find(name);
    if (it == env.end()) throw RunError("read of undefined value " + name);
    return it->second;
  }

  void exec_inst(const Instruction& in) {
    bool active = in.guard.empty() || get(in.guard).truthy();
    Value result = Value::zero(in.kind);
    switch (in.op) {
      case Opcode::Const:
        result = Value{in.kind, in.const_bits};
        break;
      case Opcode::Add:
      case Opcode::Sub:
      case Opcode::Mul:
      case Opcode::CmpEq:
      case Opcode::CmpLt:
        if (active)
          result = eval_binop(in.op, in.kind, get(in.operands[0]),
                              get(in.operands[1]));
        else
          result = in.op == Opcode::CmpEq || in.op == Opcode::CmpLt
                       ? Value::from_i32(0)
                       : Value::zero(in.kind);
        break;
      case Opcode::Mux:
        if (active)
          result = get(in.operands[0]).truthy() ? get(in.operands[1])
                                                : get(in.operands[2]);
        break;
      case Opcode::Load: {
        auto& mem = memory.at(in.target);
        if (active) {
          int32_t addr = get(in.operands[0]).as_i32();
          if (addr < 0 || static_cast<size_t>(addr) >= mem.size())
            throw RunError("out-of-bounds load from '" + in.target +
                           "' at index " + std::to_string(addr) + " (" +
                           in.id + ")");
          result = Value{space_kind.at(in.target), mem[addr]};
        } else {
          result = Value::zero(space_kind.at(in.target));
        }
        break;
      }
      case Opcode::Store: {
        if (!active) return;
        auto& mem = memory.at(in.target);
        int32_t addr = get(in.operands[0]).as_i32();
        if (addr < 0 || static_cast<size_t>(addr) >= mem.size())
          throw RunError("out-of-bounds store to '" + in.target +
                         "' at index " + std::to_string(addr));
        mem[addr] = get(in.operands[1]).bits;
        return;
      }
      case Opcode::PipeRead: {
        if (active) {
          auto& data = in_data.at(in.target);
          size_t& cur = in_cursor.at(in.target);
          if (cur >= data.size())
            throw RunError("stream underrun on port '" + in.target + "'");
          result = Value{port_kind.at(in.target), data[cur++]};
        } else {
          result = Value::zero(port_kind.at(in.target));
        }
        break;
      }
      case Opcode::PipeWrite:
        if (active) out_data.at(in.target).push_back(get(in.operands[0]).bits);
        return;
      case Opcode::Phi:
        throw RunError("block phi executed outside CFG walk");
    }
    env[in.id] = result;
  }

  void exec_blocks(const LoopRegion& l) {
    const BasicBlock* blk = &l.blocks[0];
    std::string prev_label;
    std::unordered_map<std::string, const BasicBlock*> by_label;
    for (const auto& b : l.blocks) by_label[b.label] = &b;
    size_t steps = 0;
    while (true) {
      if (++steps > l.blocks.size())
        throw RunError("irreducible or cyclic control flow in loop body");
      for (const auto& in : blk->insts) {
        if (in.op == Opcode::Phi) {
          bool matched = false;
          for (const auto& [from, val] : in.incomings) {
            if (from == prev_label) {
              env[in.id] = get(val);
              matched = true;
              break;
            }
          }
          if (!matched)
            throw RunError("phi '" + in.id + "' has no incoming for block '" +
                           prev_label + "'");
        } else {
          exec_inst(in);
        }
      }
      prev_label = blk->label;
      if (blk->term == TermKind::End) return;
      std::string next = blk->term == TermKind::Jmp
                             ? blk->succ_false
                             : (get(blk->br_cond).truthy() ? blk->succ_true
                                                           : blk->succ_false);
      auto it = by_label.find(next);
      if (it == by_label.end()) throw RunError("missing block " + next);
      blk = it->second;
    }
  }

  void exec_loop(const LoopRegion& l) {
    for (const auto& in : l.preheader) exec_inst(in);
    bool first = true;
    while (true) {
      if (--budget < 0) throw RunError("iteration cap exceeded");
      // snapshot then assign so phis may feed each other (swap patterns)
      std::vector<Value> next_vals;
      next_vals.reserve(l.phis.size());
      for (const auto& ph : l.phis)
        next_vals.push_back(get(first ? ph.init : ph.next));
      for (size_t i = 0; i < l.phis.size(); i++)
        env[l.phis[i].id] = next_vals[i];
      first = false;
      if (l.is_innermost()) {
        exec_blocks(l);
      } else {
        for (const auto& item : l.seq) {
          if (item.inst) exec_inst(*item.inst);
          if (item.loop) exec_loop(*item.loop);
        }
      }
      if (!get(l.latch_cond).truthy()) break;
    }
  }
};

}  // namespace

RunOutputs run_functional(const Program& p, const RunInputs& inputs,
                          long iteration_cap) {
  Interp it{p, iteration_cap, {}, {}, {}, {}, {}, {}, {}};
  for (const auto& s : p.spaces) {
    std::vector<uint32_t> mem(s.length, 0);
    auto ov = inputs.space_contents.find(s.name);
    if (ov != inputs.space_contents.end()) {
      if (ov->second.size() != static_cast<size_t>(s.length))
        throw RunError("space contents size mismatch for " + s.name);
      mem = ov->second;
    } else if (!s.initial_bits.empty()) {
      mem = s.initial_bits;
    }
    it.memory[s.name] = std::move(mem);
    it.space_kind[s.name] = s.kind;
  }
  for (const auto& port : p.ports) {
    it.port_kind[port.name] = port.kind;
    if (port.dir == PortDir::In) {
      auto ov = inputs.stream_data.find(port.name);
      it.in_data[port.name] =
          ov != inputs.stream_data.end() ? ov->second : port.backing_bits;
      it.in_cursor[port.name] = 0;
    } else {
      it.out_data[port.name] = {};
    }
  }
  for (const auto& sin : p.inputs) {
    auto b = inputs.scalars.find(sin.name);
    if (b == inputs.scalars.end())
      throw RunError("missing scalar input " + sin.name);
    it.env[sin.name] = b->second;
  }

  it.exec_loop(p.body);

  RunOutputs out;
  for (const auto& [name, val] : p.body.exits) out.values[name] = it.get(val);
  out.memory = std::move(it.memory);
  out.streams = std::move(it.out_data);
  return out;
}

}  // namespace vc
