#pragma once

#include <cstdint>
#include <deque>
#include <stdexcept>
#include <string>
#include <vector>

#include "vc/ir.hpp"

namespace vc {

struct MemFault : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct MemRequest {
  bool is_store = false;
  long address = 0;
  uint32_t data = 0;       // store payload
  std::string tag;         // issuing node plus iteration, for faults
  long timestamp = -1;     // initiation (acceptance) cycle
  long completion = -1;    // timestamp + latency
};

struct MemCompletion {
  bool is_store = false;
  long address = 0;
  uint32_t data = 0;  // loaded value for loads
  std::string tag;
  long timestamp = -1;
  long cycle = -1;
};

// One first-come-first-served memory subsystem: accepted requests complete
// exactly `latency` cycles after their timestamp, in timestamp order.
// Port budget is per direction per cycle.
class Subsystem {
 public:
  Subsystem() = default;
  Subsystem(std::string name, ScalarKind kind, std::vector<uint32_t> contents,
            int latency, int ports);

  // Resets per-cycle port budgets; call once at the start of each cycle.
  void begin_cycle();

  // Accepts the request if a port is free this cycle (stamping it with
  // `cycle`), otherwise reports a stall so control retries later.
  bool initiate(MemRequest req, long cycle);

  // Completes every accepted request whose latency has elapsed, oldest
  // first; stores apply before younger loads read.
  std::vector<MemCompletion> advance(long cycle);

  bool idle() const { return queue_.empty(); }
  long next_completion() const {
    return queue_.empty() ? -1 : queue_.front().completion;
  }
  const std::vector<uint32_t>& contents() const { return contents_; }
  const std::string& name() const { return name_; }
  ScalarKind kind() const { return kind_; }
  int latency() const { return latency_; }

 private:
  std::string name_;
  ScalarKind kind_ = ScalarKind::F32;
  std::vector<uint32_t> contents_;
  int latency_ = 2;
  int ports_ = 1;
  int loads_left_ = 0;
  int stores_left_ = 0;
  std::deque<MemRequest> queue_;
};

}  // namespace vc
