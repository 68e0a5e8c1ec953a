#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace vc {

enum class ScalarKind { F32, I32, U8 };

const char* to_string(ScalarKind k);
int bit_width(ScalarKind k);

// Runtime value: bit pattern plus kind. f32 is IEEE-754 binary32,
// i32 is two's-complement, u8 occupies the low byte.
struct Value {
  ScalarKind kind = ScalarKind::I32;
  uint32_t bits = 0;

  static Value from_f32(float f);
  static Value from_i32(int32_t i);
  static Value from_u8(uint8_t b);
  static Value zero(ScalarKind k) { return Value{k, 0}; }

  float as_f32() const;
  int32_t as_i32() const { return static_cast<int32_t>(bits); }
  uint8_t as_u8() const { return static_cast<uint8_t>(bits & 0xffu); }
  bool truthy() const { return bits != 0; }
  bool operator==(const Value& o) const = default;
};

enum class Opcode {
  Const,
  Add,
  Sub,
  Mul,
  CmpEq,
  CmpLt,
  Mux,
  Load,
  Store,
  PipeRead,
  PipeWrite,
  Phi,  // block-merge phi; eliminated by predication
};

const char* to_string(Opcode op);
bool defines_value(Opcode op);
bool has_side_effect(Opcode op);

struct Instruction {
  std::string id;  // defined value name; empty for Store/PipeWrite
  Opcode op = Opcode::Const;
  ScalarKind kind = ScalarKind::I32;
  std::vector<std::string> operands;
  std::string target;  // memory space or stream port name
  std::string guard;   // optional predicate value
  uint32_t const_bits = 0;
  // Phi only: (incoming block label, value) pairs.
  std::vector<std::pair<std::string, std::string>> incomings;
  int line = 0;
};

enum class TermKind { Br, Jmp, End };

struct BasicBlock {
  std::string label;
  std::vector<Instruction> insts;
  TermKind term = TermKind::End;
  std::string br_cond;
  std::string succ_true;
  std::string succ_false;  // also Jmp target
  int line = 0;
};

struct PhiNode {
  std::string id;
  ScalarKind kind = ScalarKind::I32;
  std::string init;
  std::string next;
  int line = 0;
};

struct LoopRegion;

// One element of a non-innermost loop body: either a plain instruction
// or a nested loop.
struct BodyItem {
  std::unique_ptr<Instruction> inst;
  std::unique_ptr<LoopRegion> loop;
};

// Bottom-tested loop: the body executes, then the latch condition decides
// whether to start another iteration. The body runs at least once.
struct LoopRegion {
  std::vector<Instruction> preheader;  // outermost loop only
  std::vector<PhiNode> phis;
  std::vector<BasicBlock> blocks;  // innermost form
  std::vector<BodyItem> seq;       // nested form (instructions + loops)
  std::string latch_cond;
  std::optional<long> trip_bound;
  // output name -> value name, read when the loop exits
  std::vector<std::pair<std::string, std::string>> exits;
  int line = 0;

  bool is_innermost() const { return seq.empty(); }
  bool single_block() const { return is_innermost() && blocks.size() == 1; }

  LoopRegion() = default;
  LoopRegion(const LoopRegion& o);
  LoopRegion& operator=(const LoopRegion& o);
  LoopRegion(LoopRegion&&) = default;
  LoopRegion& operator=(LoopRegion&&) = default;
};

struct MemorySpace {
  std::string name;
  ScalarKind kind = ScalarKind::F32;
  long length = 0;
  std::vector<uint32_t> initial_bits;  // empty or length entries
  int line = 0;
};

enum class PortDir { In, Out };

struct StreamPort {
  std::string name;
  PortDir dir = PortDir::In;
  ScalarKind kind = ScalarKind::F32;
  std::vector<uint32_t> backing_bits;  // default data for `in` ports
  int line = 0;
};

struct ScalarInput {
  std::string name;
  ScalarKind kind = ScalarKind::F32;
  int line = 0;
};

struct Program {
  std::string name;
  std::vector<MemorySpace> spaces;
  std::vector<StreamPort> ports;
  std::vector<ScalarInput> inputs;
  LoopRegion body;

  const MemorySpace* find_space(const std::string& n) const;
  const StreamPort* find_port(const std::string& n) const;
};

enum class Severity { Error, Warning, Advisory };

struct Diagnostic {
  Severity severity = Severity::Error;
  std::string message;
  int line = 0;
  int col = 0;
};

std::string to_json_line(const Diagnostic& d);

// Structural and SSA checks; empty result means the program is well formed.
std::vector<Diagnostic> validate(const Program& p);

// Deterministic text form; parse(print(p)) reproduces the structure.
std::string print_program(const Program& p);

uint32_t parse_literal_bits(ScalarKind k, const std::string& text, bool& ok);
std::string format_literal(ScalarKind k, uint32_t bits);

}  // namespace vc
