#include "vc/memsys.hpp"

namespace vc {

Subsystem::Subsystem(std::string name, ScalarKind kind,
                     std::vector<uint32_t> contents, int latency, int ports)
    : name_(std::move(name)),
      kind_(kind),
      contents_(std::move(contents)),
      latency_(latency),
      ports_(ports) {
  begin_cycle();
}

void Subsystem::begin_cycle() {
  loads_left_ = ports_;
  stores_left_ = ports_;
}

bool Subsystem::initiate(MemRequest req, long cycle) {
  int& budget = req.is_store ? stores_left_ : loads_left_;
  if (budget <= 0) return false;
  if (req.address < 0 ||
      static_cast<size_t>(req.address) >= contents_.size())
    throw MemFault("out-of-bounds " +
                   std::string(req.is_store ? "store to '" : "load from '") +
                   name_ + "' at index " + std::to_string(req.address) +
                   " (" + req.tag + ")");
  budget--;
  req.timestamp = cycle;
  req.completion = cycle + latency_;
  queue_.push_back(std::move(req));
  return true;
}

std::vector<MemCompletion> Subsystem::advance(long cycle) {
  std::vector<MemCompletion> done;
  while (!queue_.empty() && queue_.front().completion <= cycle) {
    MemRequest r = std::move(queue_.front());
    queue_.pop_front();
    MemCompletion c;
    c.is_store = r.is_store;
    c.address = r.address;
    c.tag = std::move(r.tag);
    c.timestamp = r.timestamp;
    c.cycle = cycle;
    if (r.is_store) {
      contents_[r.address] = r.data;
      c.data = r.data;
    } else {
      c.data = contents_[r.address];
    }
    done.push_back(std::move(c));
  }
  return done;
}

}  // namespace vc
