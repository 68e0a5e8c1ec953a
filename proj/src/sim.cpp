#include "vc/sim.hpp"

#include <algorithm>
#include <climits>
#include <deque>
#include <fstream>
#include <sstream>

#include "vc/memsys.hpp"

namespace vc {

LatencyConfig LatencyConfig::defaults() {
  LatencyConfig c;
  c.ops["fadd"] = {1, 4, 1};
  c.ops["fmul"] = {1, 4, 1};
  c.ops["int"] = {1, 1, 1};
  c.ops["cmp"] = {1, 1, 1};
  c.ops["mux"] = {1, 1, 1};
  c.ops["decision"] = {1, 1, 1};
  c.ops["const"] = {1, 0, 1};
  c.ops["pipe"] = {1, 1, 1};
  c.ops["mem"] = {1, 0, 1};  // sample only; completion comes from the subsystem
  c.mem_default = {2, 1};
  return c;
}

const OpLatency& LatencyConfig::op(const std::string& cls) const {
  auto it = ops.find(cls);
  if (it == ops.end())
    throw SimFault("no latency entry for operator class '" + cls + "'");
  return it->second;
}

MemLatency LatencyConfig::space(const std::string& name) const {
  auto it = mem.find(name);
  return it == mem.end() ? mem_default : it->second;
}

LatencyConfig parse_latency_config(const std::string& text) {
  LatencyConfig c = LatencyConfig::defaults();
  std::istringstream is(text);
  std::string line;
  int lno = 0;
  while (std::getline(is, line)) {
    lno++;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    auto last = line.find_last_not_of(" \t\r");
    line = line.substr(first, last - first + 1);
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw SimFault("latency config line " + std::to_string(lno) +
                     ": expected key=value");
    std::string key = line.substr(0, eq);
    int value = 0;
    try {
      value = std::stoi(line.substr(eq + 1));
    } catch (...) {
      throw SimFault("latency config line " + std::to_string(lno) +
                     ": bad integer");
    }
    std::vector<std::string> parts;
    std::istringstream ks(key);
    std::string part;
    while (std::getline(ks, part, '.')) parts.push_back(part);
    auto bad = [&] {
      return SimFault("latency config line " + std::to_string(lno) +
                      ": unknown key '" + key + "'");
    };
    if (parts.size() == 2 && parts[0] == "mem") {
      if (parts[1] == "latency")
        c.mem_default.latency = value;
      else if (parts[1] == "ports")
        c.mem_default.ports = value;
      else
        throw bad();
    } else if (parts.size() == 3 && parts[0] == "mem") {
      MemLatency m = c.space(parts[1]);
      if (parts[2] == "latency")
        m.latency = value;
      else if (parts[2] == "ports")
        m.ports = value;
      else
        throw bad();
      c.mem[parts[1]] = m;
    } else if (parts.size() == 2 && c.ops.count(parts[0])) {
      OpLatency& o = c.ops[parts[0]];
      if (parts[1] == "sample")
        o.sample = value;
      else if (parts[1] == "compute")
        o.compute = value;
      else if (parts[1] == "ii")
        o.ii = value;
      else
        throw bad();
    } else {
      throw bad();
    }
  }
  for (const auto& [cls, o] : c.ops) {
    if (o.sample < 1 && cls != "const")
      throw SimFault("sample_cycles must be >= 1 for '" + cls + "'");
    if (o.ii < 1) throw SimFault("initiation_interval must be >= 1");
  }
  return c;
}

LatencyConfig load_latency_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw SimFault("cannot read latency file '" + path + "'");
  std::ostringstream os;
  os << f.rdbuf();
  return parse_latency_config(os.str());
}

namespace {

std::string op_class(const DataPathNode& nd) {
  if (nd.protocol == Protocol::MuxProtocol) return "mux";
  if (nd.protocol == Protocol::DecisionProtocol) return "decision";
  switch (nd.op) {
    case Opcode::Const: return "const";
    case Opcode::Add:
    case Opcode::Sub:
      return nd.kind == ScalarKind::F32 ? "fadd" : "int";
    case Opcode::Mul:
      return nd.kind == ScalarKind::F32 ? "fmul" : "int";
    case Opcode::CmpEq:
    case Opcode::CmpLt:
      return "cmp";
    case Opcode::Mux:
      return "mux";
    case Opcode::Load:
    case Opcode::Store:
      return "mem";
    case Opcode::PipeRead:
    case Opcode::PipeWrite:
      return "pipe";
    default:
      return "int";
  }
}

bool is_mem(const DataPathNode& nd) {
  return nd.op == Opcode::Load || nd.op == Opcode::Store;
}

struct Instance {
  long k = 0;
  long sr_time = -1;
  bool sampled = false;
  bool active = true;
  std::vector<Value> ops;
  long sa_ready = -1;
  bool accepted = false;
  bool port_stall = false;
  bool sa_done = false;
  bool cr_done = false;
  long cr_time = -1;
  bool mem_completed = false;
  long mem_finish = -1;
  uint32_t mem_data = 0;
  long finish = -1;  // ca becomes ready at this cycle; -1 while unknown
  Value result;
};

struct NodeState {
  std::deque<Instance> q;
  long created = 0;
  long completed = 0;
  long compute_last = LONG_MIN / 2;
  bool mux_pending = false;
  int mux_select = 0;
  long mux_ready = -1;
  bool dec_pending = false;
  bool dec_taken = false;
  long dec_ready = -1;
};

struct Sim {
  const VirtualCircuit& vc;
  const LatencyConfig& lat;
  long cycle = 0;

  std::vector<long> tokens;
  std::vector<int> peak;
  std::vector<Value> net_val;
  std::vector<NodeState> ns;
  std::vector<long> fire_count;
  std::map<std::string, Subsystem> subs;
  std::map<std::string, std::deque<std::pair<int, long>>> owner;
  std::map<std::string, std::vector<uint32_t>> in_data;
  std::map<std::string, size_t> in_cursor;
  std::map<std::string, std::vector<uint32_t>> out_data;
  std::map<std::string, ScalarKind> port_kind;

  std::vector<TraceEvent> trace;
  size_t trace_cap;
  bool full_audit;
  bool trace_complete = true;
  size_t trace_head = 0;
  long peak_active = 0;
  bool fired_this_cycle = false;

  Sim(const VirtualCircuit& v, const LatencyConfig& l, const RunInputs& in,
      size_t cap, bool audit)
      : vc(v), lat(l), trace_cap(cap), full_audit(audit) {
    tokens.resize(vc.cn.places.size());
    peak.resize(vc.cn.places.size());
    for (const auto& p : vc.cn.places) {
      tokens[p.id] = p.initial;
      peak[p.id] = p.initial;
    }
    net_val.resize(vc.dp.nets.size());
    ns.resize(vc.dp.nodes.size());
    fire_count.assign(vc.cn.transitions.size(), 0);

    for (const auto& s : vc.prog.spaces) {
      std::vector<uint32_t> mem(s.length, 0);
      auto ov = in.space_contents.find(s.name);
      if (ov != in.space_contents.end()) {
        if (ov->second.size() != static_cast<size_t>(s.length))
          throw SimFault("space contents size mismatch for " + s.name);
        mem = ov->second;
      } else if (!s.initial_bits.empty()) {
        mem = s.initial_bits;
      }
      MemLatency ml = lat.space(s.name);
      subs.emplace(s.name, Subsystem(s.name, s.kind, std::move(mem),
                                     ml.latency, ml.ports));
      owner[s.name] = {};
    }
    for (const auto& port : vc.prog.ports) {
      port_kind[port.name] = port.kind;
      if (port.dir == PortDir::In) {
        auto ov = in.stream_data.find(port.name);
        in_data[port.name] =
            ov != in.stream_data.end() ? ov->second : port.backing_bits;
        in_cursor[port.name] = 0;
      } else {
        out_data[port.name] = {};
      }
    }
    for (const auto& sin : vc.prog.inputs) {
      auto b = in.scalars.find(sin.name);
      if (b == in.scalars.end())
        throw SimFault("missing scalar input " + sin.name);
      net_val[vc.dp.net_of.at(sin.name)] = b->second;
    }
  }

  void record(int t) {
    TraceEvent ev{cycle, t, fire_count[t]};
    fire_count[t]++;
    if (full_audit || trace.size() < trace_cap) {
      trace.push_back(ev);
    } else {
      trace[trace_head] = ev;
      trace_head = (trace_head + 1) % trace_cap;
      trace_complete = false;
    }
  }

  static std::string tag_of(const DataPathNode& nd, long k) {
    return nd.name + "#" + std::to_string(k);
  }

  // ---- per-cycle bookkeeping -------------------------------------------

  void begin_cycle() {
    for (auto& [name, s] : subs) {
      s.begin_cycle();
      for (auto& c : s.advance(cycle)) {
        auto& own = owner[name];
        if (own.empty()) throw SimFault("orphan memory completion");
        auto [node, k] = own.front();
        own.pop_front();
        for (auto& inst : ns[node].q) {
          if (inst.k != k) continue;
          inst.mem_completed = true;
          inst.mem_data = c.data;
          inst.mem_finish = cycle;
          if (inst.cr_done) inst.finish = std::max(cycle, inst.cr_time);
          break;
        }
      }
    }
    // sampling completion
    for (size_t n = 0; n < ns.size(); n++) {
      const auto& nd = vc.dp.nodes[n];
      if (nd.protocol != Protocol::SplitFourPhase) continue;
      int sample = lat.op(op_class(nd)).sample;
      for (auto& inst : ns[n].q) {
        inst.port_stall = false;
        if (inst.sampled || cycle < inst.sr_time + sample) continue;
        inst.sampled = true;
        inst.ops.clear();
        for (int net : nd.input_nets) inst.ops.push_back(net_val[net]);
        inst.active = nd.guard_net < 0 || net_val[nd.guard_net].truthy();
        if (!is_mem(nd) || !inst.active) inst.sa_ready = inst.sr_time + sample;
      }
    }
  }

  // ---- readiness --------------------------------------------------------

  Instance* first_pending_sa(int node) {
    for (auto& i : ns[node].q)
      if (!i.sa_done) return &i;
    return nullptr;
  }
  Instance* first_pending_cr(int node) {
    for (auto& i : ns[node].q)
      if (!i.cr_done) return &i;
    return nullptr;
  }

  bool ack_ready(const Transition& t) {
    const auto& nd = vc.dp.nodes[t.node];
    NodeState& st = ns[t.node];
    switch (t.phase) {
      case Phase::Sa: {
        Instance* i = first_pending_sa(t.node);
        if (!i || !i->sampled) return false;
        if (is_mem(nd) && i->active && !i->accepted) {
          MemRequest req;
          req.is_store = nd.op == Opcode::Store;
          req.address = i->ops[0].as_i32();
          if (req.is_store) req.data = i->ops[1].bits;
          req.tag = tag_of(nd, i->k);
          try {
            if (!subs.at(nd.space).initiate(std::move(req), cycle)) {
              i->port_stall = true;
              return false;
            }
          } catch (const MemFault& e) {
            throw SimFault(e.what());
          }
          i->accepted = true;
          i->sa_ready = cycle;
          owner[nd.space].push_back({t.node, i->k});
        }
        return i->sa_ready >= 0 && cycle >= i->sa_ready;
      }
      case Phase::Ca: {
        for (auto& i : st.q)
          return i.cr_done && i.finish >= 0 && cycle >= i.finish;
        return false;
      }
      case Phase::MuxAck:
        return st.mux_pending && cycle >= st.mux_ready;
      case Phase::DecTaken:
        return st.dec_pending && cycle >= st.dec_ready && st.dec_taken;
      case Phase::DecNotTaken:
        return st.dec_pending && cycle >= st.dec_ready && !st.dec_taken;
      default:
        return true;
    }
  }

  // ---- firing effects ---------------------------------------------------

  void emit_effect(const Transition& t) {
    const auto& nd = vc.dp.nodes[t.node];
    NodeState& st = ns[t.node];
    switch (t.phase) {
      case Phase::Sr: {
        Instance i;
        i.k = st.created++;
        i.sr_time = cycle;
        st.q.push_back(std::move(i));
        break;
      }
      case Phase::Cr: {
        Instance* i = first_pending_cr(t.node);
        if (!i) throw SimFault("complete request with no instance: " + nd.name);
        i->cr_done = true;
        i->cr_time = cycle;
        if (!i->active) {
          i->finish = cycle + 1;
        } else if (is_mem(nd)) {
          if (i->mem_completed) i->finish = std::max(i->mem_finish, cycle);
        } else {
          const auto& o = lat.op(op_class(nd));
          long start = std::max(cycle, st.compute_last + o.ii);
          st.compute_last = start;
          i->finish = start + o.compute;
        }
        break;
      }
      case Phase::MuxReqInit:
      case Phase::MuxReqBack:
        if (st.mux_pending)
          throw SimFault("multiplexor double request at '" + nd.name +
                         "' cycle " + std::to_string(cycle));
        st.mux_pending = true;
        st.mux_select = t.phase == Phase::MuxReqInit ? 0 : 1;
        st.mux_ready = cycle + lat.op("mux").compute;
        break;
      case Phase::DecReq:
        if (st.dec_pending)
          throw SimFault("decision double request at '" + nd.name + "'");
        st.dec_pending = true;
        st.dec_taken = net_val[nd.input_nets[0]].truthy();
        st.dec_ready = cycle + lat.op("decision").compute;
        break;
      default:
        break;
    }
  }

  void ack_effect(const Transition& t) {
    const auto& nd = vc.dp.nodes[t.node];
    NodeState& st = ns[t.node];
    switch (t.phase) {
      case Phase::Sa: {
        Instance* i = first_pending_sa(t.node);
        i->sa_done = true;
        if (i->active) {
          if (nd.op == Opcode::PipeRead) {
            auto& data = in_data.at(nd.space);
            size_t& cur = in_cursor.at(nd.space);
            if (cur >= data.size())
              throw SimFault("stream underrun on port '" + nd.space + "' (" +
                             tag_of(nd, i->k) + ")");
            i->result = Value{port_kind.at(nd.space), data[cur++]};
          } else if (nd.op == Opcode::PipeWrite) {
            out_data.at(nd.space).push_back(i->ops[0].bits);
          }
        } else if (nd.op == Opcode::PipeRead) {
          i->result = Value::zero(port_kind.at(nd.space));
        }
        break;
      }
      case Phase::Ca: {
        Instance inst = std::move(ns[t.node].q.front());
        ns[t.node].q.pop_front();
        st.completed++;
        Value r;
        switch (nd.op) {
          case Opcode::Const:
            r = Value{nd.kind, nd.const_bits};
            break;
          case Opcode::Add:
          case Opcode::Sub:
          case Opcode::Mul:
            r = inst.active ? eval_binop(nd.op, nd.kind, inst.ops[0], inst.ops[1])
                            : Value::zero(nd.kind);
            break;
          case Opcode::CmpEq:
          case Opcode::CmpLt:
            r = inst.active ? eval_binop(nd.op, nd.kind, inst.ops[0], inst.ops[1])
                            : Value::from_i32(0);
            break;
          case Opcode::Mux:
            if (inst.active)
              r = inst.ops[0].truthy() ? inst.ops[1] : inst.ops[2];
            break;
          case Opcode::Load:
            r = inst.active ? Value{subs.at(nd.space).kind(), inst.mem_data}
                            : Value::zero(subs.at(nd.space).kind());
            break;
          case Opcode::PipeRead:
            r = inst.result;
            break;
          default:
            break;  // Store / PipeWrite produce nothing
        }
        if (nd.output_net >= 0) net_val[nd.output_net] = r;
        break;
      }
      case Phase::MuxAck: {
        Value v = net_val[nd.input_nets[st.mux_select]];
        net_val[nd.output_net] = v;
        st.mux_pending = false;
        st.completed++;
        break;
      }
      case Phase::DecTaken:
      case Phase::DecNotTaken:
        st.dec_pending = false;
        st.completed++;
        break;
      default:
        break;
    }
  }

  // ---- token game -------------------------------------------------------

  bool can_fire(const Transition& t) {
    // multiset token check
    for (size_t i = 0; i < t.in.size(); i++) {
      long need = 0;
      for (size_t j = 0; j <= i; j++)
        if (t.in[j] == t.in[i]) need++;
      if (tokens[t.in[i]] < need) return false;
    }
    if (t.bind == TransBind::AwaitsAck && !ack_ready(t)) return false;
    // capacity headroom after consuming inputs
    for (size_t i = 0; i < t.out.size(); i++) {
      int p = t.out[i];
      long after = tokens[p];
      for (int q : t.in)
        if (q == p) after--;
      for (size_t j = 0; j <= i; j++)
        if (t.out[j] == p) after++;
      if (after > vc.cn.places[p].capacity) return false;
    }
    return true;
  }

  void fire(const Transition& t) {
    for (int p : t.in) tokens[p]--;
    if (t.bind == TransBind::EmitsRequest) emit_effect(t);
    if (t.bind == TransBind::AwaitsAck) ack_effect(t);
    for (int p : t.out) {
      tokens[p]++;
      if (tokens[p] > vc.cn.places[p].capacity)
        throw SimFault("capacity violation at place '" + vc.cn.places[p].name +
                       "' cycle " + std::to_string(cycle));
      if (tokens[p] > peak[p]) peak[p] = static_cast<int>(tokens[p]);
    }
    record(t.id);
    fired_this_cycle = true;
  }

  void settle() {
    bool changed = true;
    while (changed) {
      changed = false;
      for (const auto& t : vc.cn.transitions) {
        while (can_fire(t)) {
          fire(t);
          changed = true;
        }
      }
    }
  }

  long next_event() const {
    long ev = LONG_MAX;
    auto upd = [&](long c) {
      if (c > cycle && c < ev) ev = c;
    };
    for (size_t n = 0; n < ns.size(); n++) {
      const auto& nd = vc.dp.nodes[n];
      const auto& st = ns[n];
      if (nd.protocol == Protocol::SplitFourPhase) {
        int sample = lat.op(op_class(nd)).sample;
        for (const auto& i : st.q) {
          if (!i.sampled) upd(i.sr_time + sample);
          if (i.port_stall) upd(cycle + 1);
          if (i.finish >= 0) upd(i.finish);
        }
      }
      if (st.mux_pending) upd(st.mux_ready);
      if (st.dec_pending) upd(st.dec_ready);
    }
    for (const auto& [name, s] : subs)
      if (!s.idle()) upd(s.next_completion());
    return ev;
  }

  std::string marking_text() const {
    std::ostringstream os;
    bool first = true;
    for (const auto& p : vc.cn.places) {
      if (!tokens[p.id]) continue;
      if (!first) os << ", ";
      first = false;
      os << p.name << ":" << tokens[p.id];
    }
    return os.str();
  }

  SimResult run(long limit) {
    while (true) {
      begin_cycle();
      fired_this_cycle = false;
      settle();
      for (const auto& term : vc.terminators) {
        long active = term.depth - tokens[term.credit_place];
        if (active > peak_active) peak_active = active;
      }
      if (tokens[vc.cn.exit_place] > 0) break;
      long ev = next_event();
      if (!fired_this_cycle && ev == LONG_MAX)
        throw SimFault("deadlock at cycle " + std::to_string(cycle) +
                       "; marking {" + marking_text() + "}");
      if (cycle >= limit)
        throw SimFault("cycle limit exceeded (" + std::to_string(limit) + ")");
      cycle++;
    }

    SimResult r;
    r.total_cycles = cycle;
    r.trace_complete = trace_complete;
    if (!trace_complete)
      std::rotate(trace.begin(), trace.begin() + trace_head, trace.end());
    r.trace = std::move(trace);
    r.stats.transition_fires = fire_count;
    r.stats.peak_occupancy = peak;
    r.stats.peak_active = peak_active;
    for (const auto& nd : vc.dp.nodes)
      r.stats.node_fires[nd.name] = ns[nd.id].completed;
    for (const auto& [name, val] : vc.prog.body.exits)
      r.outputs.values[name] = net_val[vc.dp.net_of.at(val)];
    for (const auto& [name, s] : subs) r.outputs.memory[name] = s.contents();
    r.outputs.streams = out_data;
    return r;
  }
};

}  // namespace

SimResult simulate(const VirtualCircuit& vc, const LatencyConfig& lat,
                   const RunInputs& inputs, long cycle_limit,
                   size_t trace_capacity, bool full_audit) {
  Sim s(vc, lat, inputs, trace_capacity, full_audit);
  return s.run(cycle_limit);
}

std::string format_trace(const VirtualCircuit& vc, const SimResult& r) {
  std::ostringstream os;
  for (const auto& ev : r.trace) {
    const auto& t = vc.cn.transitions[ev.trans];
    if (t.node >= 0)
      os << ev.cycle << " " << vc.dp.nodes[t.node].name << " "
         << to_string(t.phase) << " " << ev.k << "\n";
    else
      os << ev.cycle << " " << t.name << " - " << ev.k << "\n";
  }
  return os.str();
}

std::vector<std::string> audit_rules(const VirtualCircuit& vc,
                                     const SimResult& r) {
  std::vector<std::string> bad;
  if (!r.trace_complete) {
    bad.push_back("trace incomplete; rerun with full audit");
    return bad;
  }
  std::vector<std::vector<long>> times(vc.cn.transitions.size());
  for (const auto& ev : r.trace) times[ev.trans].push_back(ev.cycle);

  // handshake order per split node instance
  for (const auto& nd : vc.dp.nodes) {
    if (nd.protocol != Protocol::SplitFourPhase) continue;
    const auto& tr = vc.node_trans[nd.id];
    for (size_t k = 0; k < times[tr[3]].size(); k++) {
      long sr = times[tr[0]][k], sa = times[tr[1]][k], cr = times[tr[2]][k],
           ca = times[tr[3]][k];
      if (!(sr <= sa && sa <= cr && cr <= ca))
        bad.push_back("handshake order violated at " + nd.name + "#" +
                      std::to_string(k));
    }
  }

  for (const auto& arc : vc.rule_arcs) {
    const auto& L = times[arc.from_trans];
    const auto& R = times[arc.to_trans];
    for (size_t i = 0; i + 1 < R.size() && i < L.size(); i++) {
      if (R[i + 1] < L[i])
        bad.push_back("rule " + std::to_string(arc.rule) + " violated: " +
                      vc.cn.transitions[arc.to_trans].name + "#" +
                      std::to_string(i + 1) + " fired at " +
                      std::to_string(R[i + 1]) + " before " +
                      vc.cn.transitions[arc.from_trans].name + "#" +
                      std::to_string(i) + " at " + std::to_string(L[i]));
    }
  }
  return bad;
}

}  // namespace vc
