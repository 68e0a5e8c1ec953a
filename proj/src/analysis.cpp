#include "vc/analysis.hpp"

#include <algorithm>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace vc {

std::string LivenessReport::verdict() const {
  std::ostringstream os;
  if (!conclusive) {
    os << "inconclusive (state cap hit after " << states_explored
       << " states)";
    return os.str();
  }
  os << max_occupancy << "-bounded, ";
  os << (deadlock_free ? "live" : "deadlock found");
  if (!exit_reachable) os << ", exit unreachable";
  return os.str();
}

namespace {

using Marking = std::vector<uint8_t>;

struct Hash {
  size_t operator()(const Marking& m) const {
    size_t h = 1469598103934665603ull;
    for (uint8_t b : m) {
      h ^= b;
      h *= 1099511628211ull;
    }
    return h;
  }
};

struct Explorer {
  const VirtualCircuit& vc;
  long cap;
  LivenessReport rep;

  // per transition: input/output as (place, weight)
  std::vector<std::vector<std::pair<int, int>>> ins, outs;
  std::vector<bool> singleton_ok;

  explicit Explorer(const VirtualCircuit& v, long c) : vc(v), cap(c) {
    size_t nt = vc.cn.transitions.size();
    ins.resize(nt);
    outs.resize(nt);
    std::vector<int> consumers(vc.cn.places.size(), 0);
    for (const auto& t : vc.cn.transitions) {
      std::unordered_map<int, int> im, om;
      for (int p : t.in) im[p]++;
      for (int p : t.out) om[p]++;
      for (auto& [p, w] : im) ins[t.id].push_back({p, w});
      for (auto& [p, w] : om) outs[t.id].push_back({p, w});
      std::sort(ins[t.id].begin(), ins[t.id].end());
      std::sort(outs[t.id].begin(), outs[t.id].end());
      for (auto& [p, w] : im) consumers[p]++;
    }
    singleton_ok.resize(nt);
    for (const auto& t : vc.cn.transitions) {
      bool ok = !t.in.empty();
      for (auto& [p, w] : ins[t.id])
        if (consumers[p] != 1) ok = false;
      singleton_ok[t.id] = ok;
    }
  }

  bool enabled(int t, const Marking& m) const {
    for (auto& [p, w] : ins[t])
      if (m[p] < w) return false;
    return true;
  }

  bool fire(int t, Marking& m) const {
    for (auto& [p, w] : ins[t]) m[p] -= static_cast<uint8_t>(w);
    for (auto& [p, w] : outs[t]) {
      int v = m[p] + w;
      if (v > 200) return false;  // runaway growth: report unbounded
      m[p] = static_cast<uint8_t>(v);
    }
    return true;
  }

  void note_occupancy(const Marking& m) {
    for (size_t p = 0; p < m.size(); p++) {
      if (m[p] > rep.place_max[p]) rep.place_max[p] = m[p];
      if (m[p] > rep.max_occupancy) rep.max_occupancy = m[p];
    }
  }

  std::string describe(const Marking& m) const {
    std::ostringstream os;
    bool first = true;
    for (size_t p = 0; p < m.size(); p++) {
      if (!m[p]) continue;
      if (!first) os << ", ";
      first = false;
      os << vc.cn.places[p].name << ":" << int(m[p]);
    }
    return os.str();
  }

  void run() {
    Marking init(vc.cn.places.size(), 0);
    for (const auto& p : vc.cn.places)
      init[p.id] = static_cast<uint8_t>(p.initial);
    rep.place_max.assign(vc.cn.places.size(), 0);

    std::unordered_set<Marking, Hash> visited;
    std::unordered_set<Marking, Hash> on_stack;
    struct Frame {
      Marking m;
      std::vector<int> succ;  // transitions left to try
      size_t next = 0;
      bool reduced = false;   // true when succ is a singleton choice
    };
    std::vector<Frame> stack;

    auto successors = [&](const Marking& m, bool allow_reduce) {
      std::pair<std::vector<int>, bool> r;
      std::vector<int> all;
      for (const auto& t : vc.cn.transitions)
        if (enabled(t.id, m)) all.push_back(t.id);
      if (allow_reduce)
        for (int t : all)
          if (singleton_ok[t]) return std::pair{std::vector<int>{t}, true};
      return std::pair{all, false};
    };

    visited.insert(init);
    on_stack.insert(init);
    note_occupancy(init);
    rep.states_explored = 1;
    auto [s0, red0] = successors(init, true);
    stack.push_back({init, std::move(s0), 0, red0});

    while (!stack.empty()) {
      Frame& f = stack.back();
      if (f.next >= f.succ.size()) {
        if (f.succ.empty() && f.m[vc.cn.exit_place] == 0 &&
            rep.deadlock_free) {
          rep.deadlock_free = false;
          rep.deadlock_marking = describe(f.m);
        }
        on_stack.erase(f.m);
        stack.pop_back();
        continue;
      }
      int t = f.succ[f.next++];
      Marking nm = f.m;
      if (!fire(t, nm)) {
        rep.max_occupancy = 255;
        rep.conclusive = true;
        return;
      }
      if (nm[vc.cn.exit_place] > 0) rep.exit_reachable = true;
      bool cycle_hit = on_stack.count(nm) > 0;
      if (f.reduced && cycle_hit) {
        // cycle proviso: the postponed alternatives must be explored
        auto [all, red] = successors(f.m, false);
        f.succ = std::move(all);
        f.reduced = false;
        // keep f.next as is; already-fired transition may repeat, harmless
      }
      if (visited.count(nm)) {
        note_occupancy(nm);
        continue;
      }
      if (static_cast<long>(visited.size()) >= cap) {
        rep.conclusive = false;
        return;
      }
      visited.insert(nm);
      note_occupancy(nm);
      rep.states_explored++;
      if (nm[vc.cn.exit_place] > 0) continue;  // terminal success
      auto [sn, redn] = successors(nm, true);
      on_stack.insert(nm);
      stack.push_back({std::move(nm), std::move(sn), 0, redn});
    }
  }
};

}  // namespace

LivenessReport check_liveness_safeness(const VirtualCircuit& vc,
                                       long state_cap) {
  Explorer e(vc, state_cap);
  e.run();
  return e.rep;
}

}  // namespace vc
