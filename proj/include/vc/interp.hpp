#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "vc/ir.hpp"

namespace vc {

struct RunError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Bindings for one execution: scalar inputs, optional overrides for
// memory-space initial contents and input-stream data.
struct RunInputs {
  std::map<std::string, Value> scalars;
  std::map<std::string, std::vector<uint32_t>> space_contents;
  std::map<std::string, std::vector<uint32_t>> stream_data;
};

struct RunOutputs {
  std::map<std::string, Value> values;
  std::map<std::string, std::vector<uint32_t>> memory;
  std::map<std::string, std::vector<uint32_t>> streams;

  bool operator==(const RunOutputs& o) const = default;
};

// Scalar operator semantics shared by the interpreter and the simulator;
// both sides must agree bit for bit.
Value eval_binop(Opcode op, ScalarKind kind, Value a, Value b);

// Direct sequential interpretation in program order.
RunOutputs run_functional(const Program& p, const RunInputs& inputs,
                          long iteration_cap = 100000000L);

}  // namespace vc
