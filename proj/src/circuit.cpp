#include "vc/circuit.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

namespace vc {

const char* to_string(Phase ph) {
  switch (ph) {
    case Phase::None: return "-";
    case Phase::Sr: return "sr";
    case Phase::Sa: return "sa";
    case Phase::Cr: return "cr";
    case Phase::Ca: return "ca";
    case Phase::MuxReqInit: return "rq0";
    case Phase::MuxReqBack: return "rqb";
    case Phase::MuxAck: return "ack";
    case Phase::DecReq: return "rq";
    case Phase::DecTaken: return "taken";
    case Phase::DecNotTaken: return "not_taken";
  }
  return "?";
}

namespace {

const char* to_string(Protocol p) {
  switch (p) {
    case Protocol::SplitFourPhase: return "split";
    case Protocol::MuxProtocol: return "mux";
    case Protocol::DecisionProtocol: return "decision";
  }
  return "?";
}

const char* to_string(TransBind b) {
  switch (b) {
    case TransBind::EmitsRequest: return "req";
    case TransBind::AwaitsAck: return "ack";
    case TransBind::Silent: return "silent";
  }
  return "?";
}

ScalarKind result_kind(const Program& p, const Instruction& in) {
  switch (in.op) {
    case Opcode::CmpEq:
    case Opcode::CmpLt:
      return ScalarKind::I32;
    case Opcode::Load:
      return p.find_space(in.target)->kind;
    case Opcode::PipeRead:
      return p.find_port(in.target)->kind;
    default:
      return in.kind;
  }
}

// One stage of a non-innermost region body: either a run of straight-line
// instructions (node ids) or one nested region.
struct Stage {
  std::vector<int> ops;
  int child_region = -1;
};

struct Builder {
  const Program& prog;
  const std::vector<WarHint>& hints;
  VirtualCircuit vc;
  std::vector<std::vector<Stage>> stage_plan;
  int anon = 0;

  Builder(const Program& p, const std::vector<WarHint>& h)
      : prog(p), hints(h) {
    vc.prog = p;
  }

  // -------------------------------------------------------------- datapath

  int ensure_net(const std::string& name, ScalarKind k) {
    auto it = vc.dp.net_of.find(name);
    if (it != vc.dp.net_of.end()) return it->second;
    Net n;
    n.id = static_cast<int>(vc.dp.nets.size());
    n.name = name;
    n.width = bit_width(k);
    vc.dp.net_of[name] = n.id;
    vc.dp.nets.push_back(std::move(n));
    return static_cast<int>(vc.dp.nets.size()) - 1;
  }

  int net(const std::string& name) const {
    auto it = vc.dp.net_of.find(name);
    if (it == vc.dp.net_of.end())
      throw CircuitError("unresolved value '" + name + "' in circuit build");
    return it->second;
  }

  void declare_inst(const Instruction& in) {
    if (in.id.empty()) return;
    ensure_net(in.id, result_kind(prog, in));
  }

  void declare(const LoopRegion& l) {
    for (const auto& in : l.preheader) declare_inst(in);
    for (const auto& ph : l.phis) ensure_net(ph.id, ph.kind);
    for (const auto& b : l.blocks)
      for (const auto& in : b.insts) declare_inst(in);
    for (const auto& item : l.seq) {
      if (item.inst) declare_inst(*item.inst);
      if (item.loop) declare(*item.loop);
    }
  }

  int add_split_node(const Instruction& in) {
    DataPathNode nd;
    nd.id = static_cast<int>(vc.dp.nodes.size());
    nd.op = in.op;
    nd.kind = in.kind;
    nd.const_bits = in.const_bits;
    nd.space = in.target;
    nd.name = !in.id.empty()
                  ? in.id
                  : std::string(to_string(in.op)) + "#" + std::to_string(anon++);
    for (const auto& r : in.operands) {
      int n = net(r);
      nd.input_nets.push_back(n);
      vc.dp.nets[n].readers.push_back(nd.id);
    }
    if (!in.guard.empty()) {
      nd.guard_net = net(in.guard);
      vc.dp.nets[nd.guard_net].readers.push_back(nd.id);
    }
    if (!in.id.empty()) {
      nd.output_net = net(in.id);
      vc.dp.nets[nd.output_net].driver = nd.id;
    }
    vc.dp.node_of[nd.name] = nd.id;
    vc.dp.nodes.push_back(std::move(nd));
    return static_cast<int>(vc.dp.nodes.size()) - 1;
  }

  int add_mux_node(const PhiNode& ph) {
    DataPathNode nd;
    nd.id = static_cast<int>(vc.dp.nodes.size());
    nd.protocol = Protocol::MuxProtocol;
    nd.op = Opcode::Mux;
    nd.kind = ph.kind;
    nd.name = ph.id;
    for (const auto& r : {ph.init, ph.next}) {
      int n = net(r);
      nd.input_nets.push_back(n);
      vc.dp.nets[n].readers.push_back(nd.id);
    }
    nd.output_net = net(ph.id);
    vc.dp.nets[nd.output_net].driver = nd.id;
    vc.dp.node_of[nd.name] = nd.id;
    vc.dp.nodes.push_back(std::move(nd));
    return static_cast<int>(vc.dp.nodes.size()) - 1;
  }

  int add_decision_node(const std::string& cond, int rid) {
    DataPathNode nd;
    nd.id = static_cast<int>(vc.dp.nodes.size());
    nd.protocol = Protocol::DecisionProtocol;
    nd.kind = ScalarKind::I32;
    nd.name = "dec" + std::to_string(rid);
    int n = net(cond);
    nd.input_nets.push_back(n);
    vc.dp.nets[n].readers.push_back(nd.id);
    vc.dp.node_of[nd.name] = nd.id;
    vc.dp.nodes.push_back(std::move(nd));
    return static_cast<int>(vc.dp.nodes.size()) - 1;
  }

  int walk_dp(const LoopRegion& l, int parent) {
    int rid = static_cast<int>(vc.regions.size());
    vc.regions.emplace_back();
    stage_plan.emplace_back();
    vc.regions[rid].id = rid;
    vc.regions[rid].parent = parent;
    vc.regions[rid].innermost = l.is_innermost();

    for (const auto& in : l.preheader)
      vc.regions[rid].pre_nodes.push_back(add_split_node(in));
    for (const auto& ph : l.phis)
      vc.regions[rid].phi_nodes.push_back(add_mux_node(ph));

    if (l.is_innermost()) {
      if (!l.single_block())
        throw CircuitError(
            "loop body has multiple basic blocks; apply predication first");
      for (const auto& in : l.blocks[0].insts)
        vc.regions[rid].body_nodes.push_back(add_split_node(in));
    } else {
      std::vector<Stage> stages;
      Stage cur;
      for (const auto& item : l.seq) {
        if (item.inst) {
          int nd = add_split_node(*item.inst);
          cur.ops.push_back(nd);
          vc.regions[rid].body_nodes.push_back(nd);
        } else {
          if (!cur.ops.empty()) {
            stages.push_back(std::move(cur));
            cur = Stage{};
          }
          Stage ls;
          ls.child_region = walk_dp(*item.loop, rid);
          stages.push_back(std::move(ls));
        }
      }
      if (!cur.ops.empty()) stages.push_back(std::move(cur));
      stage_plan[rid] = std::move(stages);
    }
    vc.regions[rid].decision_node = add_decision_node(l.latch_cond, rid);
    return rid;
  }

  // ----------------------------------------------------------- control net

  int place(const std::string& name, int rid, int initial = 0) {
    Place p;
    p.id = static_cast<int>(vc.cn.places.size());
    p.name = name;
    p.initial = initial;
    vc.cn.places.push_back(std::move(p));
    if (rid >= 0)
      vc.regions[rid].region_places.push_back(
          static_cast<int>(vc.cn.places.size()) - 1);
    return static_cast<int>(vc.cn.places.size()) - 1;
  }

  int trans(const std::string& name, TransBind bind, int node, Phase ph) {
    Transition t;
    t.id = static_cast<int>(vc.cn.transitions.size());
    t.name = name;
    t.bind = bind;
    t.node = node;
    t.phase = ph;
    vc.cn.transitions.push_back(std::move(t));
    return static_cast<int>(vc.cn.transitions.size()) - 1;
  }

  void link(int t, int from_place, int to_place) {
    if (from_place >= 0) vc.cn.transitions[t].in.push_back(from_place);
    if (to_place >= 0) vc.cn.transitions[t].out.push_back(to_place);
  }

  int sr_of(int node) const { return vc.node_trans[node][0]; }
  int sa_of(int node) const { return vc.node_trans[node][1]; }
  int cr_of(int node) const { return vc.node_trans[node][2]; }
  // transition whose firing means the node's output register holds the
  // new value: ca for split operators, ack for multiplexors
  int final_of(int node) const {
    return vc.dp.nodes[node].protocol == Protocol::MuxProtocol
               ? vc.node_trans[node][2]
               : vc.node_trans[node][3];
  }

  // split four-phase skeleton: en -> sr -> sa -> cr -> ca -> done
  std::pair<int, int> split_ctl(int node, int rid) {
    const std::string& nm = vc.dp.nodes[node].name;
    int en = place("en." + nm, rid);
    int p1 = place(nm + ".s", rid);
    int p2 = place(nm + ".w", rid);
    int p3 = place(nm + ".c", rid);
    int done = place("done." + nm, rid);
    int tsr = trans(nm + ".sr", TransBind::EmitsRequest, node, Phase::Sr);
    int tsa = trans(nm + ".sa", TransBind::AwaitsAck, node, Phase::Sa);
    int tcr = trans(nm + ".cr", TransBind::EmitsRequest, node, Phase::Cr);
    int tca = trans(nm + ".ca", TransBind::AwaitsAck, node, Phase::Ca);
    link(tsr, en, p1);
    link(tsa, p1, p2);
    link(tcr, p2, p3);
    link(tca, p3, done);
    vc.node_trans[node] = {tsr, tsa, tcr, tca};
    return {en, done};
  }

  // dataflow arcs among ops firing at the same rate; producers maps a node
  // id to itself for every eligible producer
  void dataflow(const std::vector<int>& ops, const std::set<int>& producers,
                int rid, bool record) {
    for (int b : ops) {
      std::set<int> seen;
      const auto& nd = vc.dp.nodes[b];
      std::vector<int> ins = nd.input_nets;
      if (nd.guard_net >= 0) ins.push_back(nd.guard_net);
      for (int n : ins) {
        int d = vc.dp.nets[n].driver;
        if (d < 0 || d == b || !producers.count(d) || seen.count(d)) continue;
        seen.insert(d);
        int p = place("d." + vc.dp.nodes[d].name + ">" + nd.name, rid);
        link(final_of(d), -1, p);
        link(sr_of(b), p, -1);
        if (record) vc.regions[rid].raw_edges.push_back({d, b});
      }
    }
  }

  static bool touches_storage(const DataPathNode& nd) {
    return nd.op == Opcode::Load || nd.op == Opcode::Store ||
           nd.op == Opcode::PipeRead || nd.op == Opcode::PipeWrite;
  }

  // Address as base net plus constant offset, by walking unguarded integer
  // add/sub chains. base -1 means a pure constant.
  std::pair<int, long> affine(int net) {
    int d = vc.dp.nets[net].driver;
    if (d < 0) return {net, 0};
    const auto& nd = vc.dp.nodes[d];
    if (nd.guard_net >= 0) return {net, 0};
    if (nd.op == Opcode::Const)
      return {-1, static_cast<int32_t>(nd.const_bits)};
    if ((nd.op == Opcode::Add || nd.op == Opcode::Sub) &&
        nd.kind == ScalarKind::I32 && nd.input_nets.size() == 2) {
      auto a = affine(nd.input_nets[0]);
      auto b = affine(nd.input_nets[1]);
      if (b.first < 0)
        return {a.first, nd.op == Opcode::Sub ? a.second - b.second
                                              : a.second + b.second};
      if (a.first < 0 && nd.op == Opcode::Add)
        return {b.first, a.second + b.second};
    }
    return {net, 0};
  }

  // true when the two accesses provably touch different locations
  bool disjoint(int p, int q) {
    auto a = affine(vc.dp.nodes[p].input_nets[0]);
    auto b = affine(vc.dp.nodes[q].input_nets[0]);
    return a.first == b.first && a.second != b.second;
  }

  // Same-subsystem program-order sequencing: Q.sr waits on P.sa for
  // ordered accesses with a store among them. Pairs whose addresses
  // provably differ by a constant within one iteration carry no in-body
  // arc; they are recorded so the pipeliner can still impose the
  // cross-iteration ordering the successive-pair rule would give. The
  // in-body relation is materialized as its transitive reduction; pipe
  // accesses chain unconditionally (stream order is total).
  void storage_order(const std::vector<int>& ops, int rid) {
    std::map<std::string, std::vector<int>> groups;
    for (int op : ops) {
      const auto& nd = vc.dp.nodes[op];
      if (touches_storage(nd)) groups[nd.space].push_back(op);
    }
    auto arc = [&](int p, int q) {
      int pl = place("m." + vc.dp.nodes[p].name + ">" + vc.dp.nodes[q].name,
                     rid);
      link(sa_of(p), -1, pl);
      link(sr_of(q), pl, -1);
    };
    for (auto& [space, accs] : groups) {
      bool pipe = vc.dp.nodes[accs[0]].op == Opcode::PipeRead ||
                  vc.dp.nodes[accs[0]].op == Opcode::PipeWrite;
      if (pipe) {
        for (size_t i = 1; i < accs.size(); i++) {
          arc(accs[i - 1], accs[i]);
          vc.regions[rid].mem_order.push_back({accs[i - 1], accs[i]});
        }
        continue;
      }
      size_t n = accs.size();
      auto is_store = [&](size_t i) {
        return vc.dp.nodes[accs[i]].op == Opcode::Store;
      };
      // possible-alias ordering relation and its transitive closure
      std::vector<std::vector<char>> kept(n, std::vector<char>(n, 0));
      for (size_t i = 0; i < n; i++)
        for (size_t j = i + 1; j < n; j++)
          kept[i][j] = (is_store(i) || is_store(j)) &&
                       !disjoint(accs[i], accs[j]);
      auto closure = kept;
      for (size_t k = 0; k < n; k++)
        for (size_t i = 0; i < k; i++)
          if (closure[i][k])
            for (size_t j = k + 1; j < n; j++)
              closure[i][j] |= closure[k][j];
      for (size_t i = 0; i < n; i++)
        for (size_t j = i + 1; j < n; j++) {
          if (!kept[i][j]) continue;
          bool implied = false;
          for (size_t k = i + 1; k < j && !implied; k++)
            implied = closure[i][k] && closure[k][j];
          if (!implied) arc(accs[i], accs[j]);
        }
      // successive pairs (for the cross-iteration rules): consecutive
      // stores chain, loads hang off the surrounding stores
      auto classify = [&](size_t i, size_t j) {
        auto& r = kept[i][j] ? vc.regions[rid].mem_order
                             : vc.regions[rid].mem_relaxed;
        r.push_back({accs[i], accs[j]});
      };
      long last_store = -1;
      std::vector<size_t> loads_since;
      for (size_t j = 0; j < n; j++) {
        if (is_store(j)) {
          if (loads_since.empty()) {
            if (last_store >= 0) classify(last_store, j);
          } else {
            for (size_t l : loads_since) classify(l, j);
          }
          last_store = static_cast<long>(j);
          loads_since.clear();
        } else {
          if (last_store >= 0) classify(last_store, j);
          loads_since.push_back(j);
        }
      }
    }
  }

  // once-per-activation stage for preheader or straight-line ops:
  // fork issues enables, join collects completions
  int stage(const std::vector<int>& ops, int go_place, const std::string& nm,
            int rid, bool record) {
    int fork = trans(nm + ".fork", TransBind::Silent, -1, Phase::None);
    int join = trans(nm + ".join", TransBind::Silent, -1, Phase::None);
    vc.cn.transitions[fork].in.push_back(go_place);
    std::set<int> prods(ops.begin(), ops.end());
    for (int op : ops) {
      auto [en, done] = split_ctl(op, rid);
      vc.cn.transitions[fork].out.push_back(en);
      vc.cn.transitions[join].in.push_back(done);
    }
    dataflow(ops, prods, rid, record);
    storage_order(ops, rid);
    int out = place(nm + ".done", rid);
    vc.cn.transitions[join].out.push_back(out);
    return out;
  }

  void build_region_ctl(int rid, int entry_pl, int exit_pl) {
    RegionInfo& r0 = vc.regions[rid];
    r0.entry_place = entry_pl;
    r0.exit_place = exit_pl;
    std::string L = "L" + std::to_string(rid);

    int loop_entry = entry_pl;
    if (!vc.regions[rid].pre_nodes.empty())
      loop_entry =
          stage(vc.regions[rid].pre_nodes, entry_pl, L + ".pre", rid, false);

    // phi mux skeletons
    for (size_t pi = 0; pi < vc.regions[rid].phi_nodes.size(); pi++) {
      int node = vc.regions[rid].phi_nodes[pi];
      const std::string& nm = vc.dp.nodes[node].name;
      int en0 = place("en0." + nm, rid);
      int enb = place("enb." + nm, rid);
      int pend = place(nm + ".pend", rid);
      int done = place("done." + nm, rid);
      int t0 = trans(nm + ".rq0", TransBind::EmitsRequest, node,
                     Phase::MuxReqInit);
      int tb = trans(nm + ".rqb", TransBind::EmitsRequest, node,
                     Phase::MuxReqBack);
      int ta = trans(nm + ".ack", TransBind::AwaitsAck, node, Phase::MuxAck);
      link(t0, en0, pend);
      link(tb, enb, pend);
      link(ta, pend, done);
      vc.node_trans[node] = {t0, tb, ta, -1};
      RegionInfo::PhiCtl pc;
      pc.node = node;
      pc.req_init_trans = t0;
      pc.req_back_trans = tb;
      pc.ack_trans = ta;
      vc.regions[rid].phis.push_back(pc);
      vc.regions[rid].back_enable_places.push_back(enb);
      // stash en0/done through local maps below
      phi_en0[node] = en0;
      phi_done[node] = done;
    }

    int dec = vc.regions[rid].decision_node;
    const std::string dn = vc.dp.nodes[dec].name;
    int dec_pend = place(dn + ".pend", rid);
    int taken_pl = place(L + ".taken", rid);
    int nt_pl = place(L + ".not_taken", rid);
    int t_rq = trans(dn + ".rq", TransBind::EmitsRequest, dec, Phase::DecReq);
    int t_tk = trans(dn + ".taken", TransBind::AwaitsAck, dec, Phase::DecTaken);
    int t_nt =
        trans(dn + ".not_taken", TransBind::AwaitsAck, dec, Phase::DecNotTaken);
    link(t_rq, -1, dec_pend);
    link(t_tk, dec_pend, taken_pl);
    link(t_nt, dec_pend, nt_pl);
    vc.node_trans[dec] = {t_rq, t_tk, t_nt, -1};
    RegionInfo& r1 = vc.regions[rid];
    r1.taken_place = taken_pl;
    r1.not_taken_place = nt_pl;
    r1.dec_req_trans = t_rq;
    r1.dec_taken_trans = t_tk;
    r1.dec_not_taken_trans = t_nt;

    int t_enter = trans(L + ".enter", TransBind::Silent, -1, Phase::None);
    int t_back = trans(L + ".back", TransBind::Silent, -1, Phase::None);
    int t_exit = trans(L + ".exit", TransBind::Silent, -1, Phase::None);
    vc.cn.transitions[t_enter].in.push_back(loop_entry);
    vc.cn.transitions[t_exit].out.push_back(exit_pl);
    r1.enter_trans = t_enter;
    r1.back_trans = t_back;
    r1.exit_trans = t_exit;

    auto feed_phis = [&](int t, bool initial) {
      for (size_t pi = 0; pi < vc.regions[rid].phis.size(); pi++) {
        int node = vc.regions[rid].phis[pi].node;
        int pl = initial ? phi_en0[node]
                         : vc.regions[rid].back_enable_places[pi];
        vc.cn.transitions[t].out.push_back(pl);
      }
    };

    if (vc.regions[rid].innermost) {
      int iter = place(L + ".iter", rid);
      int body_done = place(L + ".body_done", rid);
      int en_dec = place("en." + dn, rid);
      int t_fork = trans(L + ".iter.fork", TransBind::Silent, -1, Phase::None);
      int t_join = trans(L + ".iter.join", TransBind::Silent, -1, Phase::None);
      vc.regions[rid].iter_place = iter;
      vc.regions[rid].body_done_place = body_done;
      vc.regions[rid].iter_fork_trans = t_fork;
      vc.regions[rid].body_join_trans = t_join;

      feed_phis(t_enter, true);
      vc.cn.transitions[t_enter].out.push_back(iter);
      vc.cn.transitions[t_fork].in.push_back(iter);
      vc.cn.transitions[t_fork].out.push_back(en_dec);
      link(t_rq, en_dec, -1);

      const auto& body = vc.regions[rid].body_nodes;
      std::set<int> prods(body.begin(), body.end());
      for (int ph : vc.regions[rid].phi_nodes) prods.insert(ph);
      for (int op : body) {
        auto [en, done] = split_ctl(op, rid);
        vc.cn.transitions[t_fork].out.push_back(en);
        vc.cn.transitions[t_join].in.push_back(done);
      }
      for (int ph : vc.regions[rid].phi_nodes)
        vc.cn.transitions[t_join].in.push_back(phi_done[ph]);
      if (vc.cn.transitions[t_join].in.empty()) {
        int pass = place(L + ".pass", rid);
        vc.cn.transitions[t_fork].out.push_back(pass);
        vc.cn.transitions[t_join].in.push_back(pass);
      }
      vc.cn.transitions[t_join].out.push_back(body_done);
      dataflow(body, prods, rid, true);
      storage_order(body, rid);
      // latch condition feeding the decision
      int cn_driver = vc.dp.nets[vc.dp.nodes[dec].input_nets[0]].driver;
      if (cn_driver >= 0 && prods.count(cn_driver)) {
        int pl = place("d." + vc.dp.nodes[cn_driver].name + ">" + dn, rid);
        link(final_of(cn_driver), -1, pl);
        link(t_rq, pl, -1);
      }
      link(t_back, taken_pl, -1);
      link(t_back, body_done, -1);
      feed_phis(t_back, false);
      vc.cn.transitions[t_back].out.push_back(iter);
      link(t_exit, nt_pl, -1);
      link(t_exit, body_done, -1);
    } else {
      int go;
      if (!vc.regions[rid].phis.empty()) {
        go = place(L + ".phis.done", rid);
        int pj = trans(L + ".phis.join", TransBind::Silent, -1, Phase::None);
        for (int ph : vc.regions[rid].phi_nodes)
          vc.cn.transitions[pj].in.push_back(phi_done[ph]);
        vc.cn.transitions[pj].out.push_back(go);
        feed_phis(t_enter, true);
        feed_phis(t_back, false);
      } else {
        go = place(L + ".iter", rid);
        vc.regions[rid].iter_place = go;
        vc.cn.transitions[t_enter].out.push_back(go);
        vc.cn.transitions[t_back].out.push_back(go);
      }
      const auto& stages = stage_plan[rid];
      for (size_t si = 0; si < stages.size(); si++) {
        std::string snm = L + ".s" + std::to_string(si);
        if (stages[si].child_region >= 0) {
          int nxt = place(snm + ".done", rid);
          build_region_ctl(stages[si].child_region, go, nxt);
          go = nxt;
        } else {
          go = stage(stages[si].ops, go, snm, rid, true);
        }
      }
      vc.regions[rid].body_done_place = go;
      link(t_rq, go, -1);
      link(t_back, taken_pl, -1);
      link(t_exit, nt_pl, -1);
    }

    // per-iteration phi metadata used by the pipeliner
    for (auto& pc : vc.regions[rid].phis) {
      const auto& nd = vc.dp.nodes[pc.node];
      int d = vc.dp.nets[nd.input_nets[1]].driver;
      const auto& body = vc.regions[rid].body_nodes;
      auto in_region = [&](int x) {
        return std::count(body.begin(), body.end(), x) ||
               std::count(vc.regions[rid].phi_nodes.begin(),
                          vc.regions[rid].phi_nodes.end(), x);
      };
      if (d >= 0 && in_region(d)) pc.next_producer = d;
      int onet = nd.output_net;
      for (int b : body) {
        const auto& bn = vc.dp.nodes[b];
        bool reads = bn.guard_net == onet;
        for (int n : bn.input_nets) reads = reads || n == onet;
        if (reads) pc.reader_nodes.push_back(b);
      }
    }
  }

  void apply_hints() {
    for (const auto& h : hints) {
      auto ri = vc.dp.node_of.find(h.reader);
      auto wi = vc.dp.node_of.find(h.writer);
      if (ri == vc.dp.node_of.end() || wi == vc.dp.node_of.end())
        throw CircuitError("register-reuse hint names unknown operation");
      int rd = ri->second, wr = wi->second;
      int rid = -1;
      for (auto& reg : vc.regions) {
        bool has_r = std::count(reg.body_nodes.begin(), reg.body_nodes.end(), rd);
        bool has_w = std::count(reg.body_nodes.begin(), reg.body_nodes.end(), wr);
        if (has_r && has_w) rid = reg.id;
      }
      if (rid < 0)
        throw CircuitError(
            "register-reuse hint must name two body operations of one loop");
      int pl = place("war." + h.reader + ">" + h.writer, rid);
      link(sa_of(rd), -1, pl);
      link(cr_of(wr), pl, -1);
      vc.regions[rid].war_edges.push_back({rd, wr});
    }
  }

  std::unordered_map<int, int> phi_en0, phi_done;

  VirtualCircuit build() {
    for (const auto& in : prog.inputs) ensure_net(in.name, in.kind);
    declare(prog.body);
    walk_dp(prog.body, -1);
    vc.node_trans.assign(vc.dp.nodes.size(), {-1, -1, -1, -1});
    vc.cn.entry_place = place("entry", -1, 1);
    vc.cn.exit_place = place("exit", -1);
    build_region_ctl(0, vc.cn.entry_place, vc.cn.exit_place);
    apply_hints();
    return std::move(vc);
  }
};

}  // namespace

DataPath build_datapath(const Program& p) {
  Builder b(p, {});
  for (const auto& in : p.inputs) b.ensure_net(in.name, in.kind);
  b.declare(p.body);
  b.walk_dp(p.body, -1);
  return std::move(b.vc.dp);
}

VirtualCircuit build_circuit(const Program& p,
                             const std::vector<WarHint>& hints) {
  auto diags = validate(p);
  for (const auto& d : diags)
    if (d.severity == Severity::Error)
      throw CircuitError("invalid program: " + d.message);
  Builder b(p, hints);
  return b.build();
}

std::string dump_circuit(const VirtualCircuit& vc) {
  std::ostringstream os;
  os << "circuit " << (vc.prog.name.empty() ? "-" : vc.prog.name)
     << " pipelined=" << (vc.pipelined ? 1 : 0) << " depth=" << vc.depth
     << "\n";
  os << "nodes " << vc.dp.nodes.size() << "\n";
  for (const auto& n : vc.dp.nodes) {
    os << "  node " << n.id << " " << n.name << " " << to_string(n.protocol);
    if (n.protocol == Protocol::SplitFourPhase)
      os << " " << to_string(n.op);
    os << " out=" << n.output_net << " guard=" << n.guard_net << " in=[";
    for (size_t i = 0; i < n.input_nets.size(); i++)
      os << (i ? "," : "") << n.input_nets[i];
    os << "]";
    if (!n.space.empty()) os << " space=" << n.space;
    os << "\n";
  }
  os << "nets " << vc.dp.nets.size() << "\n";
  for (const auto& n : vc.dp.nets) {
    os << "  net " << n.id << " " << n.name << " w" << n.width
       << " driver=" << n.driver << " readers=[";
    for (size_t i = 0; i < n.readers.size(); i++)
      os << (i ? "," : "") << n.readers[i];
    os << "]\n";
  }
  os << "places " << vc.cn.places.size() << "\n";
  for (const auto& p : vc.cn.places) {
    os << "  place " << p.id << " " << p.name << " cap=" << p.capacity
       << " init=" << p.initial;
    if (p.marked_arc) os << " marked";
    if (p.term_internal) os << " term";
    os << "\n";
  }
  os << "transitions " << vc.cn.transitions.size() << "\n";
  for (const auto& t : vc.cn.transitions) {
    os << "  trans " << t.id << " " << t.name << " " << to_string(t.bind)
       << " node=" << t.node << " phase=" << to_string(t.phase) << " in=[";
    for (size_t i = 0; i < t.in.size(); i++) os << (i ? "," : "") << t.in[i];
    os << "] out=[";
    for (size_t i = 0; i < t.out.size(); i++) os << (i ? "," : "") << t.out[i];
    os << "]\n";
  }
  os << "entry " << vc.cn.entry_place << " exit " << vc.cn.exit_place << "\n";
  return os.str();
}

std::string export_dot(const VirtualCircuit& vc) {
  std::ostringstream os;
  os << "digraph control {\n  rankdir=TB;\n";
  for (const auto& p : vc.cn.places) {
    os << "  p" << p.id << " [shape=circle,label=\"" << p.name;
    if (p.initial) os << "\\n" << p.initial;
    os << "\"";
    if (p.marked_arc) os << ",style=dashed";
    os << "];\n";
  }
  for (const auto& t : vc.cn.transitions) {
    os << "  t" << t.id << " [shape=box,label=\"" << t.name << "\"];\n";
    for (int p : t.in) os << "  p" << p << " -> t" << t.id << ";\n";
    for (int p : t.out) os << "  t" << t.id << " -> p" << p << ";\n";
  }
  os << "}\n";
  return os.str();
}

}  // namespace vc
