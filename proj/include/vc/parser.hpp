#pragma once

#include <string>
#include <vector>

#include "vc/ir.hpp"

namespace vc {

struct ParseResult {
  Program program;
  std::vector<Diagnostic> diags;
  bool ok() const {
    for (const auto& d : diags)
      if (d.severity == Severity::Error) return false;
    return true;
  }
};

// Parses the kernel-IR text format (see docs/ir_format.md).
// On success the returned program has already passed validate().
ParseResult parse_program(const std::string& text);

}  // namespace vc
